#include "iondmet/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "iondmet/compiler.hpp"
#include "iondmet/qcc.hpp"

namespace iondmet {

namespace {

const std::vector<std::string> kBases = {"ZZ", "XZ", "XX", "YY"};

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

ReferenceData load_data(const RunConfig& cfg) {
    return load_reference_data(cfg.data_dir.empty() ? default_data_dir() : cfg.data_dir);
}

void write_out(const RunConfig& cfg, const std::string& name, const std::string& content) {
    if (cfg.out_dir.empty()) return;
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir + "/" + name, std::ios::binary);
    out << content;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return CounterRng(seed, stream).next_u64();
}

} // namespace

void RunConfig::validate() const {
    if (shots < 1) throw std::invalid_argument("shots must be at least 1");
    if (resamples < 1) throw std::invalid_argument("resamples must be at least 1");
    if (noise_p01 < 0 || noise_p01 >= 0.5 || noise_p10 < 0 || noise_p10 >= 0.5)
        throw std::invalid_argument("readout flip probabilities must be in [0, 0.5)");
}

std::map<std::string, double> exact_expectations(const StateVector& psi) {
    std::map<std::string, double> out;
    auto term = [&](const std::string& label, const std::string& letters) {
        PauliSum p(2);
        p.add(PauliString(letters), 1.0);
        out[label] = expectation(p, psi);
    };
    term("XX", "XX");
    term("YY", "YY");
    term("ZZ", "ZZ");
    term("XZ", "XZ");
    term("ZX", "ZX");
    term("X0", "XI");
    term("X1", "IX");
    term("Z0", "ZI");
    term("Z1", "IZ");
    return out;
}

std::map<std::string, NativeCircuit> compiled_basis_circuits(const ReferenceEntry& e) {
    std::map<std::string, NativeCircuit> out;
    for (const std::string& basis : kBases) {
        Circuit c = build_ansatz_circuit(optimal_ansatz(e));
        c.measure_prep = basis;
        out[basis] = optimize(transpile(c), basis);
    }
    return out;
}

std::map<std::string, Histogram> sample_basis_histograms(
    const std::map<std::string, NativeCircuit>& circuits, const RunConfig& cfg,
    std::uint64_t stream) {
    NoiseModel noise = NoiseModel::uniform(2, cfg.noise_p01, cfg.noise_p10);
    std::map<std::string, Histogram> out;
    std::uint64_t k = 0;
    for (const auto& [basis, nc] : circuits)
        out[basis] = sample(nc, cfg.shots, noise, derive_seed(cfg.seed, stream * 16 + k++), basis);
    return out;
}

std::vector<CurveRow> run_curve(const RunConfig& cfg, const ReferenceData& data) {
    cfg.validate();
    ConfusionModel confusion = ConfusionModel::uniform(2, cfg.noise_p01, cfg.noise_p10);
    std::vector<CurveRow> rows;
    for (std::size_t ri = 0; ri < cfg.r_values.size(); ++ri) {
        const ReferenceEntry& e = data.at(cfg.r_values[ri]);
        FragmentProblem fp = fragment_problem(e);
        CurveRow row;
        row.r = e.r;
        row.e_hf = e.e_hf;
        row.e_fci = e.e_fci;
        row.e_t = e.e_t;

        if (cfg.exact) {
            auto exps = exact_expectations(ansatz_state(optimal_ansatz(e)));
            row.e_exp = fragment_energy_from_expression(fp, exps);
            RdmPair pair = pauli_to_rdms(exps);
            row.e_pur = purified_energy(mcweeny_purify(pair.two_rdm).two_rdm, fp);
            row.sigma_exp = row.sigma_pur = 0;
        } else {
            auto circuits = compiled_basis_circuits(e);
            auto hists = sample_basis_histograms(circuits, cfg, ri);
            auto exps = expectations_from_histograms(hists, confusion);
            row.e_exp = fragment_energy_from_expression(fp, exps);
            RdmPair pair = pauli_to_rdms(exps);
            row.e_pur = purified_energy(mcweeny_purify(pair.two_rdm).two_rdm, fp);
            std::uint64_t bseed = derive_seed(cfg.seed, 1000 + ri);
            row.sigma_exp =
                bootstrap(hists, fp, confusion, cfg.resamples, false, bseed).sigma;
            row.sigma_pur = bootstrap(hists, fp, confusion, cfg.resamples, true, bseed).sigma;
        }
        row.exp_within = std::abs(row.e_exp - row.e_fci) <= kChemicalAccuracy;
        row.pur_within = std::abs(row.e_pur - row.e_fci) <= kChemicalAccuracy;
        rows.push_back(row);
    }
    return rows;
}

std::string curve_csv(const std::vector<CurveRow>& rows) {
    std::string out = "R,E_HF,E_FCI,E_T,E_exp,sigma_exp,E_purified,sigma_purified,"
                      "exp_within_chem_acc,purified_within_chem_acc\n";
    for (const CurveRow& r : rows) {
        char rbuf[16];
        std::snprintf(rbuf, sizeof(rbuf), "%.1f", r.r);
        out += std::string(rbuf) + "," + fmt6(r.e_hf) + "," + fmt6(r.e_fci) + "," +
               fmt6(r.e_t) + "," + fmt6(r.e_exp) + "," + fmt6(r.sigma_exp) + "," +
               fmt6(r.e_pur) + "," + fmt6(r.sigma_pur) + "," + (r.exp_within ? "1" : "0") +
               "," + (r.pur_within ? "1" : "0") + "\n";
    }
    return out;
}

int cmd_vqe(const RunConfig& cfg, std::ostream& os) {
    ReferenceData data = load_data(cfg);
    int failures = 0;
    for (double r : cfg.r_values) {
        const ReferenceEntry& e = data.at(r);
        double e_ref = expectation(e.hamiltonian, ansatz_state(optimal_ansatz(e)));

        // Fresh optimization: mean field, gradient screening, full minimization.
        MeanFieldResult mf = optimize_mean_field(e.hamiltonian, 8, cfg.seed);
        ScreeningReport rep = screen_generators(e.hamiltonian, mf.params);
        AnsatzSpec spec;
        spec.mf = mf.params;
        spec.generators = {rep.candidates.front().first};
        spec.tau = {0.0};
        double best = std::numeric_limits<double>::infinity();
        for (int attempt = 0; attempt < 4 && best > e.e_qcc + 1e-6; ++attempt) {
            AnsatzSpec s0 = spec;
            if (attempt > 0) {
                CounterRng rng(cfg.seed, 100 + attempt);
                for (double& t : s0.mf.theta) t = rng.uniform(0, 3.14159265);
                for (double& p : s0.mf.phi) p = rng.uniform(0, 6.28318530);
                s0.tau[0] = rng.uniform(-0.5, 0.5);
            }
            best = std::min(best, vqe_minimize(e.hamiltonian, s0).energy);
        }
        bool ok = std::abs(e_ref - e.e_qcc) < 1e-6 && std::abs(best - e.e_qcc) < 1e-6;
        if (!ok) ++failures;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "R=%.1f  E_ref=%.8f  E_vqe=%.8f  E_table=%.8f  %s",
                      r, e_ref, best, e.e_qcc, ok ? "ok" : "MISMATCH");
        os << buf << '\n';
    }
    return failures == 0 ? 0 : 1;
}

int cmd_curve(const RunConfig& cfg, std::ostream& os) {
    ReferenceData data = load_data(cfg);
    std::string csv = curve_csv(run_curve(cfg, data));
    os << csv;
    write_out(cfg, "curve.csv", csv);
    return 0;
}

int cmd_entropy(const RunConfig& cfg, std::ostream& os) {
    ReferenceData data = load_data(cfg);
    MoCoefficients mo{data.mo_coeff};
    for (double r : cfg.r_values) {
        const ReferenceEntry& e = data.at(r);
        StateVector psi = ansatz_state(optimal_ansatz(e));
        double s_mo = entropy_mo(psi);
        double s_fb = entropy_fragment_bath(psi, mo);
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "R=%.1f  S_mo=%.5f (ref %.5f)  S_fragment_bath=%.5f (ref %.5f)", r, s_mo,
                      e.entropy_mo, s_fb, e.entropy_fb);
        os << buf << '\n';
    }
    return 0;
}

int cmd_compile(const RunConfig& cfg, const std::string& basis, std::ostream& os) {
    ReferenceData data = load_data(cfg);
    std::vector<std::string> bases =
        basis.empty() ? kBases : std::vector<std::string>{basis};
    bool all_pass = true;
    for (double r : cfg.r_values) {
        const ReferenceEntry& e = data.at(r);
        for (const std::string& b : bases) {
            Circuit pre = build_ansatz_circuit(optimal_ansatz(e));
            pre.measure_prep = b;
            CompileResult res = compile_circuit(pre, b, /*quantize=*/false);
            EquivalenceReport eq =
                equivalence_check({{transpile(pre), res.circuit}}, {b}, 1e-3);
            all_pass = all_pass && eq.pass;
            os << "R=" << r << " basis=" << b << "\n"
               << res.report.to_text() << eq.to_text() << to_text(res.circuit);
            std::string tag = "r" + std::to_string(r).substr(0, 3) + "_" + b;
            write_out(cfg, "pre_" + tag + ".txt", to_text(transpile(pre)));
            write_out(cfg, "post_" + tag + ".txt", to_text(res.circuit));
        }
    }
    return all_pass ? 0 : 1;
}

int cmd_dmet_toy(const RunConfig& cfg, std::ostream& os) {
    IntegralSet ints =
        load_toy_integrals(cfg.data_dir.empty() ? default_data_dir() : cfg.data_dir);
    MeanFieldReference mf = toy_mean_field(ints);
    DmetConfig dcfg;
    dcfg.n_total = 2;
    ToyDmetResult res = run_toy_dmet(ints, mf, {{0}, {1}, {2}, {3}}, dcfg);
    os << "iterations " << res.loop.iterations << (res.loop.secant_used ? " (secant)" : "")
       << "\n";
    for (std::size_t i = 0; i < res.loop.trace.size(); ++i)
        os << "  iter " << i + 1 << "  dN " << fmt6(res.loop.trace[i]) << "\n";
    os << "dmu " << fmt6(res.loop.dmu) << "\nresidual " << res.loop.residual << "\n";
    for (std::size_t i = 0; i < res.loop.fragment_energies.size(); ++i)
        os << "fragment " << i << " energy " << fmt6(res.loop.fragment_energies[i]) << "\n";
    os << "total " << fmt6(res.total_energy) << "\n";
    return res.loop.converged ? 0 : 1;
}

int cmd_purify_sweep(const RunConfig& cfg, std::ostream& os) {
    ReferenceData data = load_data(cfg);
    for (double r : cfg.r_values) {
        const ReferenceEntry& e = data.at(r);
        FragmentProblem fp = fragment_problem(e);
        auto exact = exact_expectations(ansatz_state(optimal_ansatz(e)));

        std::string yy_csv = "yy,E_unpurified,E_purified\n";
        for (const YySweepPoint& pt : sweep_yy(fp, exact))
            yy_csv += fmt6(pt.yy) + "," + fmt6(pt.e_unpurified) + "," + fmt6(pt.e_purified) +
                      "\n";
        SweepResult grid = sweep_purification_landscape(fp, exact);
        std::string grid_csv = "x,y,abs_error_mHa\n";
        for (std::size_t i = 0; i < grid.xs.size(); ++i)
            for (std::size_t j = 0; j < grid.ys.size(); ++j)
                grid_csv += fmt6(grid.xs[i]) + "," + fmt6(grid.ys[j]) + "," +
                            fmt6(grid.abs_error_mha(i, j)) + "\n";

        char rbuf[16];
        std::snprintf(rbuf, sizeof(rbuf), "%.1f", r);
        write_out(cfg, std::string("yy_sweep_r") + rbuf + ".csv", yy_csv);
        write_out(cfg, std::string("purify_grid_r") + rbuf + ".csv", grid_csv);
        os << "R=" << rbuf << " yy sweep points " << 101 << ", grid " << grid.xs.size() << "x"
           << grid.ys.size() << "\n";
        if (cfg.out_dir.empty()) os << yy_csv;
    }
    return 0;
}

} // namespace iondmet
