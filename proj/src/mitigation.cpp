#include "iondmet/mitigation.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace iondmet {

namespace {

int qubits_of(const Histogram& h) {
    if (h.counts.empty() || h.shots == 0) throw std::invalid_argument("empty histogram");
    return int(h.counts.begin()->first.size());
}

Eigen::VectorXd frequencies(const Histogram& h) {
    int n = qubits_of(h);
    Eigen::VectorXd f = Eigen::VectorXd::Zero(1 << n);
    for (const auto& [bits, c] : h.counts) {
        int idx = 0;
        for (char b : bits) idx = (idx << 1) | (b == '1');
        f(idx) += double(c) / double(h.shots);
    }
    return f;
}

double bit_expectation(const Eigen::VectorXd& p, int n, int q) {
    double e = 0;
    for (int idx = 0; idx < p.size(); ++idx)
        e += p(idx) * (((idx >> (n - 1 - q)) & 1) ? -1.0 : 1.0);
    return e;
}

double parity_expectation(const Eigen::VectorXd& p) {
    double e = 0;
    for (int idx = 0; idx < p.size(); ++idx)
        e += p(idx) * (std::popcount(unsigned(idx)) % 2 ? -1.0 : 1.0);
    return e;
}

} // namespace

ConfusionModel ConfusionModel::uniform(int n, double p01v, double p10v) {
    ConfusionModel m;
    m.p01.assign(n, p01v);
    m.p10.assign(n, p10v);
    m.validate();
    return m;
}

bool ConfusionModel::trivial() const {
    for (double p : p01)
        if (p != 0) return false;
    for (double p : p10)
        if (p != 0) return false;
    return true;
}

void ConfusionModel::validate() const {
    if (p01.size() != p10.size()) throw std::invalid_argument("confusion model size mismatch");
    for (double p : p01)
        if (p < 0 || p >= 0.5) throw std::invalid_argument("p01 out of [0, 0.5)");
    for (double p : p10)
        if (p < 0 || p >= 0.5) throw std::invalid_argument("p10 out of [0, 0.5)");
}

SpamResult spam_correct(const Eigen::VectorXd& freqs, const ConfusionModel& m) {
    m.validate();
    const int n = int(m.p01.size());
    if (freqs.size() != (1 << n)) throw std::invalid_argument("frequency vector size mismatch");
    Eigen::VectorXd p = freqs;
    for (int q = 0; q < n; ++q) {
        double det = 1.0 - m.p01[q] - m.p10[q];
        int bit = 1 << (n - 1 - q);
        for (int idx = 0; idx < p.size(); ++idx) {
            if (idx & bit) continue;
            double a = p(idx), b = p(idx | bit);
            p(idx) = ((1 - m.p10[q]) * a - m.p10[q] * b) / det;
            p(idx | bit) = (-m.p01[q] * a + (1 - m.p01[q]) * b) / det;
        }
    }
    SpamResult res;
    for (int idx = 0; idx < p.size(); ++idx) {
        if (p(idx) < 0) {
            if (p(idx) < -1e-12) res.clipped = true;
            p(idx) = 0;
        }
    }
    double s = p.sum();
    if (s > 0) p /= s;
    res.probs = p;
    return res;
}

SpamResult spam_correct(const Histogram& h, const ConfusionModel& m) {
    return spam_correct(frequencies(h), m);
}

std::map<std::string, double> expectations_from_probs(
    const std::map<std::string, Eigen::VectorXd>& probs) {
    auto get = [&](const char* basis) -> const Eigen::VectorXd& {
        auto it = probs.find(basis);
        if (it == probs.end())
            throw std::invalid_argument(std::string("missing basis histogram: ") + basis);
        return it->second;
    };
    const Eigen::VectorXd& zz = get("ZZ");
    const Eigen::VectorXd& xz = get("XZ");
    const Eigen::VectorXd& xx = get("XX");
    const Eigen::VectorXd& yy = get("YY");
    std::map<std::string, double> e;
    e["Z0"] = bit_expectation(zz, 2, 0);
    e["Z1"] = 0.5 * (bit_expectation(zz, 2, 1) + bit_expectation(xz, 2, 1));
    e["X0"] = 0.5 * (bit_expectation(xx, 2, 0) + bit_expectation(xz, 2, 0));
    e["X1"] = bit_expectation(xx, 2, 1);
    e["ZZ"] = parity_expectation(zz);
    e["XZ"] = parity_expectation(xz);
    e["ZX"] = e["XZ"]; // symmetry of the embedding problem, per the main text
    e["XX"] = parity_expectation(xx);
    e["YY"] = parity_expectation(yy);
    return e;
}

std::map<std::string, double> expectations_from_histograms(
    const std::map<std::string, Histogram>& hists, const ConfusionModel& m) {
    std::map<std::string, Eigen::VectorXd> probs;
    for (const auto& [basis, h] : hists) probs[basis] = spam_correct(h, m).probs;
    return expectations_from_probs(probs);
}

PurifyResult mcweeny_purify(const Eigen::Matrix<cplx, 16, 16>& two_rdm, double epsilon,
                            int max_iter) {
    using Mat16 = Eigen::Matrix<cplx, 16, 16>;
    if ((two_rdm - two_rdm.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
        throw std::invalid_argument("pair matrix is not Hermitian");
    double tr = two_rdm.trace().real();
    if (std::abs(tr - 2.0) > 0.2)
        throw std::invalid_argument("purification applies to the two-electron sector only");
    // Half-normalize: for an exact two-electron pure state M/2 is a projector.
    Mat16 q = (two_rdm + Mat16(two_rdm.adjoint())) / 4.0;
    PurifyResult res;
    auto residual = [&] { return std::abs((q * q - q).trace()); };
    res.residual = residual();
    while (res.residual >= epsilon) {
        if (res.iterations >= max_iter)
            throw std::runtime_error("purification did not converge; residual " +
                                     std::to_string(res.residual));
        Mat16 q2 = q * q;
        q = 3.0 * q2 - 2.0 * Mat16(q2 * q);
        ++res.iterations;
        res.residual = residual();
    }
    res.two_rdm = 2.0 * q;
    return res;
}

double purified_energy(const Eigen::Matrix<cplx, 16, 16>& two_rdm_pure,
                       const FragmentProblem& fp) {
    RdmPair pair;
    pair.two_rdm = two_rdm_pure;
    pair.one_rdm = trace_down(two_rdm_pure);
    return fragment_energy_from_expression(fp, rdms_to_pauli(pair));
}

BootstrapResult bootstrap(const std::map<std::string, Histogram>& hists,
                          const FragmentProblem& fp, const ConfusionModel& m, int resamples,
                          bool purify, std::uint64_t seed) {
    if (resamples < 1) throw std::invalid_argument("resamples must be positive");
    struct Basis {
        std::string label;
        Eigen::VectorXd freqs;
        std::uint64_t shots;
    };
    std::vector<Basis> bases;
    for (const auto& [label, h] : hists) bases.push_back({label, frequencies(h), h.shots});

    BootstrapResult res;
    res.resamples = resamples;
    for (int t = 0; t < resamples; ++t) {
        std::map<std::string, Eigen::VectorXd> probs;
        for (std::size_t bi = 0; bi < bases.size(); ++bi) {
            const Basis& b = bases[bi];
            CounterRng rng(seed, std::uint64_t(t) * 16 + bi);
            Eigen::VectorXd redraw = Eigen::VectorXd::Zero(b.freqs.size());
            for (std::uint64_t s = 0; s < b.shots; ++s) {
                double u = rng.uniform();
                double acc = 0;
                int idx = int(b.freqs.size()) - 1;
                for (int k = 0; k < b.freqs.size(); ++k) {
                    acc += b.freqs(k);
                    if (u < acc) {
                        idx = k;
                        break;
                    }
                }
                redraw(idx) += 1.0 / double(b.shots);
            }
            probs[b.label] = spam_correct(redraw, m).probs;
        }
        auto exps = expectations_from_probs(probs);
        double energy;
        if (purify) {
            RdmPair pair = pauli_to_rdms(exps);
            PurifyResult pr = mcweeny_purify(pair.two_rdm);
            energy = purified_energy(pr.two_rdm, fp);
        } else {
            energy = fragment_energy_from_expression(fp, exps);
        }
        res.energies.push_back(energy);
    }
    double mean = 0;
    for (double e : res.energies) mean += e;
    mean /= resamples;
    double var = 0;
    for (double e : res.energies) var += (e - mean) * (e - mean);
    res.mean = mean;
    res.sigma = resamples > 1 ? std::sqrt(var / (resamples - 1)) : 0.0;
    return res;
}

SweepResult sweep_purification_landscape(const FragmentProblem& fp,
                                         const std::map<std::string, double>& exact, int grid,
                                         double half_range) {
    double e_ideal = fragment_energy_from_expression(fp, exact);
    double cx = exact.at("XZ") + exact.at("ZX");
    double cy = exact.at("X0") + exact.at("X1");
    SweepResult res;
    for (int i = 0; i < grid; ++i)
        res.xs.push_back(cx - half_range + 2 * half_range * i / (grid - 1));
    for (int j = 0; j < grid; ++j)
        res.ys.push_back(cy - half_range + 2 * half_range * j / (grid - 1));
    res.abs_error_mha.resize(grid, grid);
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            auto exps = exact;
            exps["XZ"] = exps["ZX"] = res.xs[i] / 2;
            exps["X0"] = exps["X1"] = res.ys[j] / 2;
            double v;
            try {
                RdmPair pair = pauli_to_rdms(exps);
                // Sweep with a tight criterion so the landscape reflects the
                // fully purified state, not the early-exit threshold.
                PurifyResult pr = mcweeny_purify(pair.two_rdm, 1e-10);
                v = std::abs(purified_energy(pr.two_rdm, fp) - e_ideal) * 1000.0;
            } catch (const std::exception&) {
                v = std::numeric_limits<double>::quiet_NaN();
            }
            res.abs_error_mha(i, j) = v;
        }
    return res;
}

std::vector<YySweepPoint> sweep_yy(const FragmentProblem& fp,
                                   const std::map<std::string, double>& exact, double lo,
                                   double hi, int points) {
    std::vector<YySweepPoint> out;
    for (int k = 0; k < points; ++k) {
        YySweepPoint pt;
        pt.yy = lo + (hi - lo) * k / (points - 1);
        auto exps = exact;
        exps["YY"] = pt.yy;
        pt.e_unpurified = fragment_energy_from_expression(fp, exps);
        try {
            RdmPair pair = pauli_to_rdms(exps);
            PurifyResult pr = mcweeny_purify(pair.two_rdm, 1e-10);
            pt.e_purified = purified_energy(pr.two_rdm, fp);
        } catch (const std::exception&) {
            pt.e_purified = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(pt);
    }
    return out;
}

} // namespace iondmet
