#include "iondmet/dmet.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace iondmet {

void IntegralSet::validate() const {
    if (int(h.rows()) != L || int(h.cols()) != L || int(g.size()) != L * L * L * L)
        throw std::invalid_argument("integral dimensions inconsistent");
    if ((h - h.transpose()).norm() > 1e-10)
        throw std::invalid_argument("one-electron integrals not symmetric");
    for (int p = 0; p < L; ++p)
        for (int q = 0; q < L; ++q)
            for (int r = 0; r < L; ++r)
                for (int s = 0; s < L; ++s) {
                    double v = gval(p, q, r, s);
                    if (std::abs(v - gval(q, p, r, s)) > 1e-10 ||
                        std::abs(v - gval(r, s, p, q)) > 1e-10 ||
                        std::abs(v - gval(p, q, s, r)) > 1e-10)
                        throw std::invalid_argument("two-electron integrals lack 8-fold symmetry");
                }
}

std::string IntegralSet::to_text() const {
    std::ostringstream os;
    os.precision(15);
    os << "L " << L << "\nenuc " << e_nuc << "\n";
    for (int p = 0; p < L; ++p)
        for (int q = 0; q <= p; ++q)
            if (h(p, q) != 0.0) os << "h " << p << ' ' << q << ' ' << h(p, q) << '\n';
    for (int p = 0; p < L; ++p)
        for (int q = 0; q < L; ++q)
            for (int r = 0; r < L; ++r)
                for (int s = 0; s < L; ++s) {
                    // Emit one canonical representative per 8-fold symmetry orbit.
                    double v = gval(p, q, r, s);
                    if (v == 0.0) continue;
                    int a = p * L + q, b = q * L + p, c = r * L + s, d = s * L + r;
                    int pq = std::min(a, b), rs = std::min(c, d);
                    if (a != std::min({a, b}) || c != std::min({c, d}) || pq > rs ||
                        (pq == rs && a > c))
                        continue;
                    os << "g " << p << ' ' << q << ' ' << r << ' ' << s << ' ' << v << '\n';
                }
    return os.str();
}

IntegralSet IntegralSet::from_text(const std::string& text) {
    IntegralSet out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "L") {
            ls >> out.L;
            out.h = Eigen::MatrixXd::Zero(out.L, out.L);
            out.g.assign(std::size_t(out.L) * out.L * out.L * out.L, 0.0);
        } else if (tag == "enuc") {
            ls >> out.e_nuc;
        } else if (tag == "h") {
            int p, q;
            double v;
            ls >> p >> q >> v;
            out.h(p, q) = out.h(q, p) = v;
        } else if (tag == "g") {
            int p, q, r, s;
            double v;
            ls >> p >> q >> r >> s >> v;
            for (auto [a, b] : {std::pair{p, q}, {q, p}})
                for (auto [c, d] : {std::pair{r, s}, {s, r}}) {
                    out.gref(a, b, c, d) = v;
                    out.gref(c, d, a, b) = v;
                }
        } else {
            throw std::invalid_argument("unknown integral record: " + tag);
        }
    }
    out.validate();
    return out;
}

Eigen::MatrixXd MeanFieldReference::density() const {
    Eigen::MatrixXd occ = mo_coeff.leftCols(n_occ);
    return occ * occ.transpose();
}

Eigen::MatrixXd env_density_matrix(const MeanFieldReference& mf, const std::vector<int>& env) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(mf.mo_coeff.rows(), mf.mo_coeff.rows());
    for (int r : env) d += mf.mo_coeff.col(r) * mf.mo_coeff.col(r).transpose();
    return d;
}

BathSpace build_bath(const Eigen::MatrixXd& mf_1rdm, const std::vector<int>& fragment_indices,
                     double threshold) {
    const int L = int(mf_1rdm.rows());
    Eigen::MatrixXd sym = mf_1rdm - mf_1rdm.transpose();
    if (sym.norm() > 1e-10) throw std::invalid_argument("mean-field 1-RDM not symmetric");
    Eigen::MatrixXd idem = mf_1rdm * mf_1rdm - mf_1rdm;
    bool idempotent = idem.norm() < 1e-8;
    // Correlated references are out of scope but allowed with a warning path:
    // callers can inspect n_bath > n_fragment to detect them.

    std::vector<int> env;
    for (int i = 0; i < L; ++i)
        if (std::find(fragment_indices.begin(), fragment_indices.end(), i) ==
            fragment_indices.end())
            env.push_back(i);

    const int nf = int(fragment_indices.size());
    const int ne = int(env.size());
    BathSpace out;
    out.n_fragment = nf;
    out.rotation = Eigen::MatrixXd::Zero(L, L);
    for (int i = 0; i < nf; ++i) out.rotation(fragment_indices[i], i) = 1.0;
    if (ne == 0) return out;

    Eigen::MatrixXd block(ne, nf);
    for (int i = 0; i < ne; ++i)
        for (int j = 0; j < nf; ++j) block(i, j) = mf_1rdm(env[i], fragment_indices[j]);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(block, Eigen::ComputeFullU);
    const auto& sv = svd.singularValues();

    // Keep singular vectors above threshold; a degenerate cluster crossing the
    // threshold is kept in full for stability under perturbation.
    int nb = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv(i) > threshold || (i > 0 && nb == i && std::abs(sv(i) - sv(i - 1)) < 1e-10 &&
                                  sv(i - 1) > threshold))
            ++nb;
    }
    out.n_bath = nb;

    // Embed every env-space column; classify the unentangled ones by occupancy.
    std::vector<Eigen::VectorXd> core, virt;
    for (int i = 0; i < ne; ++i) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(L);
        for (int k = 0; k < ne; ++k) v(env[k]) = svd.matrixU()(k, i);
        if (i < nb) {
            out.rotation.col(nf + i) = v;
        } else {
            double occ = v.dot(mf_1rdm * v);
            (occ > 0.5 ? core : virt).push_back(v);
        }
    }
    out.n_core = int(core.size());
    int col = nf + nb;
    for (const auto& v : core) out.rotation.col(col++) = v;
    for (const auto& v : virt) out.rotation.col(col++) = v;
    if (idempotent && out.n_bath > nf)
        throw std::logic_error("bath dimension exceeds the Schmidt bound");
    return out;
}

IntegralSet build_embedding_hamiltonian(const IntegralSet& ints, const Eigen::MatrixXd& d_env,
                                        const Eigen::MatrixXd& w, int n_fragment, double dmu) {
    ints.validate();
    const int L = ints.L;
    const int M = int(w.cols());
    if (int(w.rows()) != L || n_fragment > M)
        throw std::invalid_argument("embedding space dimensions inconsistent");

    // Coulomb-minus-exchange contraction with the environment density.
    Eigen::MatrixXd jk = Eigen::MatrixXd::Zero(L, L);
    for (int p = 0; p < L; ++p)
        for (int q = 0; q < L; ++q) {
            double v = 0;
            for (int r = 0; r < L; ++r)
                for (int s = 0; s < L; ++s)
                    v += (ints.gval(p, q, r, s) - ints.gval(p, s, r, q)) * d_env(r, s);
            jk(p, q) = v;
        }

    IntegralSet emb;
    emb.L = M;
    emb.h = w.transpose() * (ints.h + jk) * w;
    for (int i = 0; i < n_fragment; ++i) emb.h(i, i) -= dmu;
    emb.g.assign(std::size_t(M) * M * M * M, 0.0);
    // Two-electron interaction restricted to the fragment orbitals, which the
    // rotation keeps as the leading unit columns.
    for (int p = 0; p < n_fragment; ++p)
        for (int q = 0; q < n_fragment; ++q)
            for (int r = 0; r < n_fragment; ++r)
                for (int s = 0; s < n_fragment; ++s) {
                    double v = 0;
                    for (int a = 0; a < L; ++a)
                        for (int b = 0; b < L; ++b)
                            for (int c = 0; c < L; ++c)
                                for (int d = 0; d < L; ++d)
                                    v += ints.gval(a, b, c, d) * w(a, p) * w(b, q) * w(c, r) *
                                         w(d, s);
                    emb.gref(p, q, r, s) = v;
                }
    emb.e_nuc = 0;
    return emb;
}

// ---------------------------------------------------------------------------
// Exact Fock-space diagonalization (general orbitals, no spin structure)

namespace {

// Apply a_p to basis index; returns (sign, new index) or sign 0.
inline int apply_ann(int idx, int p, int L, int& out) {
    int bit = 1 << (L - 1 - p);
    if (!(idx & bit)) return 0;
    int sign = std::popcount(unsigned(idx >> (L - p))) % 2 ? -1 : 1;
    out = idx & ~bit;
    return sign;
}

inline int apply_cre(int idx, int p, int L, int& out) {
    int bit = 1 << (L - 1 - p);
    if (idx & bit) return 0;
    int sign = std::popcount(unsigned(idx >> (L - p))) % 2 ? -1 : 1;
    out = idx | bit;
    return sign;
}

} // namespace

ExactSolution solve_exact(const IntegralSet& ints, int n_elec) {
    const int L = ints.L;
    if (L > 10) throw std::invalid_argument("exact solver limited to small orbital counts");
    const int dim = 1 << L;
    std::vector<int> basis;
    for (int i = 0; i < dim; ++i)
        if (std::popcount(unsigned(i)) == n_elec) basis.push_back(i);
    std::vector<int> pos(dim, -1);
    for (std::size_t k = 0; k < basis.size(); ++k) pos[basis[k]] = int(k);
    const int nd = int(basis.size());
    if (nd == 0) throw std::invalid_argument("empty electron sector");

    Eigen::MatrixXd ham = Eigen::MatrixXd::Zero(nd, nd);
    for (int k = 0; k < nd; ++k) {
        int idx = basis[k];
        for (int p = 0; p < L; ++p)
            for (int q = 0; q < L; ++q) {
                if (ints.h(p, q) == 0.0) continue;
                int i1, i2;
                int s1 = apply_ann(idx, q, L, i1);
                if (!s1) continue;
                int s2 = apply_cre(i1, p, L, i2);
                if (!s2) continue;
                ham(pos[i2], k) += ints.h(p, q) * s1 * s2;
            }
        // (1/2) sum (pq|rs) a+_p a+_r a_s a_q
        for (int p = 0; p < L; ++p)
            for (int q = 0; q < L; ++q)
                for (int r = 0; r < L; ++r)
                    for (int s = 0; s < L; ++s) {
                        double v = ints.gval(p, q, r, s);
                        if (v == 0.0) continue;
                        int i1, i2, i3, i4;
                        int s1 = apply_ann(idx, q, L, i1);
                        if (!s1) continue;
                        int s2 = apply_ann(i1, s, L, i2);
                        if (!s2) continue;
                        int s3 = apply_cre(i2, r, L, i3);
                        if (!s3) continue;
                        int s4 = apply_cre(i3, p, L, i4);
                        if (!s4) continue;
                        ham(pos[i4], k) += 0.5 * v * s1 * s2 * s3 * s4;
                    }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ham);
    Eigen::VectorXd gs = es.eigenvectors().col(0);

    ExactSolution sol;
    sol.energy = es.eigenvalues()(0) + ints.e_nuc;
    sol.one_rdm = Eigen::MatrixXd::Zero(L, L);
    sol.two_rdm.assign(std::size_t(L) * L * L * L, 0.0);
    // D(q,p) = <a+_p a_q>
    for (int p = 0; p < L; ++p)
        for (int q = 0; q < L; ++q) {
            double acc = 0;
            for (int k = 0; k < nd; ++k) {
                int i1, i2;
                int s1 = apply_ann(basis[k], q, L, i1);
                if (!s1) continue;
                int s2 = apply_cre(i1, p, L, i2);
                if (!s2) continue;
                acc += gs(pos[i2]) * gs(k) * s1 * s2;
            }
            sol.one_rdm(q, p) = acc;
        }
    // P(p,q,r,s) = <a+_p a+_r a_s a_q>
    for (int p = 0; p < L; ++p)
        for (int q = 0; q < L; ++q)
            for (int r = 0; r < L; ++r)
                for (int s = 0; s < L; ++s) {
                    double acc = 0;
                    for (int k = 0; k < nd; ++k) {
                        int i1, i2, i3, i4;
                        int s1 = apply_ann(basis[k], q, L, i1);
                        if (!s1) continue;
                        int s2 = apply_ann(i1, s, L, i2);
                        if (!s2) continue;
                        int s3 = apply_cre(i2, r, L, i3);
                        if (!s3) continue;
                        int s4 = apply_cre(i3, p, L, i4);
                        if (!s4) continue;
                        acc += gs(pos[i4]) * gs(k) * s1 * s2 * s3 * s4;
                    }
                    sol.two_rdm[((std::size_t(p) * L + q) * L + r) * L + s] = acc;
                }
    return sol;
}

double fragment_energy_from_solution(const IntegralSet& ints, const Eigen::MatrixXd& d_env,
                                     const Eigen::MatrixXd& w, const ExactSolution& sol,
                                     int n_fragment) {
    const int L = ints.L;
    const int M = int(w.cols());
    if (int(sol.one_rdm.rows()) != M) throw std::invalid_argument("RDM/basis size mismatch");

    // One-body integrals plus half the environment mean field, in the
    // embedding basis.
    Eigen::MatrixXd jk = Eigen::MatrixXd::Zero(L, L);
    for (int p = 0; p < L; ++p)
        for (int q = 0; q < L; ++q) {
            double v = 0;
            for (int r = 0; r < L; ++r)
                for (int s = 0; s < L; ++s)
                    v += (ints.gval(p, q, r, s) - ints.gval(p, s, r, q)) * d_env(r, s);
            jk(p, q) = v;
        }
    Eigen::MatrixXd heff = w.transpose() * (ints.h + 0.5 * jk) * w;

    double e = 0;
    for (int p = 0; p < n_fragment; ++p)
        for (int q = 0; q < M; ++q) e += heff(p, q) * sol.one_rdm(q, p);

    // Two-body contraction with the full integrals over the embedding space.
    for (int p = 0; p < n_fragment; ++p)
        for (int q = 0; q < M; ++q)
            for (int r = 0; r < M; ++r)
                for (int s = 0; s < M; ++s) {
                    double v = 0;
                    for (int a = 0; a < L; ++a)
                        for (int b = 0; b < L; ++b)
                            for (int c = 0; c < L; ++c)
                                for (int d = 0; d < L; ++d)
                                    v += ints.gval(a, b, c, d) * w(a, p) * w(b, q) * w(c, r) *
                                         w(d, s);
                    e += 0.5 * v * sol.pval(p, q, r, s, M);
                }
    return e;
}

double fragment_energy_from_rdms(const IntegralSet& ints, const Eigen::MatrixXd& d_env,
                                 const RdmPair& rdms, const std::vector<int>& fragment_indices) {
    if (ints.L != 4) throw std::invalid_argument("spin-orbital contraction expects four orbitals");
    ExactSolution sol;
    sol.one_rdm = rdms.one_rdm.real();
    sol.two_rdm.assign(4 * 4 * 4 * 4, 0.0);
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
            for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 4; ++s)
                    sol.two_rdm[((std::size_t(p) * 4 + q) * 4 + r) * 4 + s] =
                        rdms.two_rdm(4 * p + r, 4 * q + s).real();
    // Pick out the fragment rows by permuting them to the front of the basis.
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
    std::vector<int> order = fragment_indices;
    for (int i = 0; i < 4; ++i)
        if (std::find(fragment_indices.begin(), fragment_indices.end(), i) ==
            fragment_indices.end())
            order.push_back(i);
    for (int i = 0; i < 4; ++i) w(order[i], i) = 1.0;
    // Permute the RDMs to the same ordering.
    Eigen::MatrixXd d = sol.one_rdm;
    std::vector<double> p2 = sol.two_rdm;
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q) sol.one_rdm(q, p) = d(order[q], order[p]);
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
            for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 4; ++s)
                    sol.two_rdm[((std::size_t(p) * 4 + q) * 4 + r) * 4 + s] =
                        p2[((std::size_t(order[p]) * 4 + order[q]) * 4 + order[r]) * 4 +
                           order[s]];
    return fragment_energy_from_solution(ints, d_env, w, sol, int(fragment_indices.size()));
}

double evaluate_on_expectations(const PauliSum& op, const std::map<std::string, double>& exps) {
    auto label_of = [](const PauliString& p) -> std::string {
        const std::string& s = p.letters;
        if (s.size() != 2) throw std::invalid_argument("expected a two-qubit operator");
        if (s == "XI") return "X0";
        if (s == "IX") return "X1";
        if (s == "ZI") return "Z0";
        if (s == "IZ") return "Z1";
        return s; // XX, YY, ZZ, XZ, ZX
    };
    double e = op.constant();
    for (const auto& [p, c] : op.terms()) {
        auto it = exps.find(label_of(p));
        if (it == exps.end())
            throw std::invalid_argument("missing expectation for term " + p.letters);
        e += c * it->second;
    }
    return e;
}

double fragment_energy_from_expression(const FragmentProblem& fp,
                                       const std::map<std::string, double>& expectations) {
    return evaluate_on_expectations(fp.energy_expression, expectations);
}

ChemicalPotentialResult chemical_potential_loop(
    const std::function<std::vector<FragmentSolveOut>(double dmu)>& solver,
    const DmetConfig& cfg) {
    if (cfg.step_a <= 0) throw std::invalid_argument("update step must be positive");
    ChemicalPotentialResult res;
    double dmu = 0;
    double prev_dmu = 0, prev_dn = 0;
    bool have_prev = false;

    for (int it = 0; it < cfg.max_iter; ++it) {
        auto frags = solver(dmu);
        double n_frag = 0;
        res.fragment_energies.clear();
        for (const auto& f : frags) {
            n_frag += f.n_fragment;
            res.fragment_energies.push_back(f.energy);
        }
        double dn = n_frag - cfg.n_total;
        res.trace.push_back(dn);
        res.iterations = it + 1;
        res.residual = dn;
        res.dmu = dmu;
        if (std::abs(dn) < cfg.tol) {
            res.converged = true;
            return res;
        }
        double next;
        bool oscillating = have_prev && dn * prev_dn < 0 && std::abs(dn) >= std::abs(prev_dn);
        if (have_prev && (oscillating || res.secant_used) && std::abs(dn - prev_dn) > 1e-14) {
            // Secant step on the electron-count mismatch.
            next = dmu - dn * (dmu - prev_dmu) / (dn - prev_dn);
            res.secant_used = true;
        } else {
            // N^Fragment increases with dmu, so walk against the mismatch.
            next = dmu - cfg.step_a * dn;
        }
        prev_dmu = dmu;
        prev_dn = dn;
        have_prev = true;
        dmu = next;
    }
    throw std::runtime_error("chemical-potential loop did not converge; residual " +
                             std::to_string(res.residual));
}

double dmet_total_energy(const std::vector<double>& fragment_energies, double e_nuc) {
    double e = e_nuc;
    for (double f : fragment_energies) e += f;
    return e;
}

ToyDmetResult run_toy_dmet(const IntegralSet& ints, const MeanFieldReference& mf,
                           const std::vector<std::vector<int>>& fragments, DmetConfig cfg) {
    ints.validate();
    Eigen::MatrixXd dm = mf.density();
    cfg.n_fragments = int(fragments.size());

    struct FragSetup {
        std::vector<int> indices;
        BathSpace bath;
        Eigen::MatrixXd w;
        Eigen::MatrixXd d_env;
        int n_elec = 0;
    };
    std::vector<FragSetup> setups;
    for (const auto& frag : fragments) {
        FragSetup fs;
        fs.indices = frag;
        fs.bath = build_bath(dm, frag);
        fs.w = fs.bath.rotation.leftCols(fs.bath.n_fragment + fs.bath.n_bath);
        // Environment density: the mean-field density outside the embedding space.
        Eigen::MatrixXd proj = fs.w * fs.w.transpose();
        fs.d_env = dm - proj * dm * proj;
        fs.n_elec = int(std::lround(mf.n_occ - fs.d_env.trace()));
        setups.push_back(std::move(fs));
    }

    auto solver = [&](double dmu) {
        std::vector<FragmentSolveOut> out;
        for (const auto& fs : setups) {
            IntegralSet emb =
                build_embedding_hamiltonian(ints, fs.d_env, fs.w, fs.bath.n_fragment, dmu);
            ExactSolution sol = solve_exact(emb, fs.n_elec);
            FragmentSolveOut fo;
            for (int i = 0; i < fs.bath.n_fragment; ++i) fo.n_fragment += sol.one_rdm(i, i);
            fo.energy =
                fragment_energy_from_solution(ints, fs.d_env, fs.w, sol, fs.bath.n_fragment);
            out.push_back(fo);
        }
        return out;
    };

    ToyDmetResult res;
    res.loop = chemical_potential_loop(solver, cfg);
    res.total_energy = dmet_total_energy(res.loop.fragment_energies, ints.e_nuc);
    return res;
}

} // namespace iondmet
