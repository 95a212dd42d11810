#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>

#include "iondmet/dmet.hpp"
#include "iondmet/fermion.hpp"
#include "iondmet/pipeline.hpp"
#include "iondmet/refdata.hpp"

using namespace iondmet;

namespace {

const IntegralSet& toy() {
    static IntegralSet ints = load_toy_integrals();
    return ints;
}

// Dense Fock-space Hamiltonian for a 4-orbital IntegralSet via the explicit
// ladder matrices: an oracle fully independent of solve_exact's determinant
// machinery.
Eigen::MatrixXcd dense_fock_hamiltonian(const IntegralSet& ints) {
    REQUIRE(ints.L == 4);
    using Mat16 = Eigen::Matrix<cplx, 16, 16>;
    Mat16 hmat = Mat16::Zero();
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
            if (std::abs(ints.h(p, q)) > 0)
                hmat += ints.h(p, q) * ladder_annihilate(p).adjoint() * ladder_annihilate(q);
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
            for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 4; ++s) {
                    double g = ints.gval(p, q, r, s);
                    if (std::abs(g) > 0)
                        hmat += 0.5 * g * ladder_annihilate(p).adjoint() *
                                ladder_annihilate(r).adjoint() * ladder_annihilate(s) *
                                ladder_annihilate(q);
                }
    return hmat;
}

double dense_sector_ground(const IntegralSet& ints, int n_elec) {
    Eigen::MatrixXcd hmat = dense_fock_hamiltonian(ints);
    std::vector<int> idx;
    for (int i = 0; i < 16; ++i)
        if (__builtin_popcount(i) == n_elec) idx.push_back(i);
    Eigen::MatrixXcd block(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = 0; b < idx.size(); ++b) block(a, b) = hmat(idx[a], idx[b]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(block);
    return es.eigenvalues()(0);
}

} // namespace

TEST_CASE("integral text round trip preserves values and symmetry") {
    IntegralSet back = IntegralSet::from_text(toy().to_text());
    CHECK(back.L == toy().L);
    CHECK(back.e_nuc == doctest::Approx(toy().e_nuc).epsilon(1e-12));
    CHECK((back.h - toy().h).cwiseAbs().maxCoeff() < 1e-12);
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
            for (int r = 0; r < 4; ++r)
                for (int s = 0; s < 4; ++s)
                    CHECK(back.gval(p, q, r, s) == doctest::Approx(toy().gval(p, q, r, s)).epsilon(1e-12));
    CHECK_NOTHROW(back.validate());

    IntegralSet broken = toy();
    broken.gref(0, 1, 2, 3) += 0.1; // breaks the 8-fold symmetry
    CHECK_THROWS(broken.validate());
}

TEST_CASE("mean-field density is an idempotent projector times occupation") {
    MeanFieldReference mf = toy_mean_field(toy());
    Eigen::MatrixXd d = mf.density();
    CHECK(d.trace() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK((d * d - d).cwiseAbs().maxCoeff() < 1e-10); // single-determinant idempotency
}

TEST_CASE("bath construction yields an orthogonal embedding rotation") {
    MeanFieldReference mf = toy_mean_field(toy());
    Eigen::MatrixXd dm = mf.density();
    for (int site = 0; site < 4; ++site) {
        BathSpace bath = build_bath(dm, {site});
        CHECK(bath.n_fragment == 1);
        CHECK(bath.n_bath == 1);
        const Eigen::MatrixXd& w = bath.rotation;
        CHECK((w.transpose() * w - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
        // Fragment column is the site itself; bath column lives on the environment.
        CHECK(std::abs(std::abs(w(site, 0)) - 1.0) < 1e-10);
        CHECK(std::abs(w(site, 1)) < 1e-10);
    }
}

TEST_CASE("whole-lattice fragment reduces the embedding to the bare problem") {
    MeanFieldReference mf = toy_mean_field(toy());
    std::vector<int> all{0, 1, 2, 3};
    Eigen::MatrixXd d_env = env_density_matrix(mf, {});
    CHECK(d_env.cwiseAbs().maxCoeff() < 1e-12);
    BathSpace bath = build_bath(mf.density(), all);
    CHECK(bath.n_fragment == 4);
    CHECK(bath.n_bath == 0);
    IntegralSet emb = build_embedding_hamiltonian(toy(), d_env, bath.rotation, 4, 0.0);
    ExactSolution sol = solve_exact(emb, 2);
    CHECK(sol.energy == doctest::Approx(dense_sector_ground(toy(), 2)).epsilon(1e-10));

    // The fragment energy over the full space is the whole electronic energy.
    double efrag = fragment_energy_from_solution(toy(), d_env, bath.rotation, sol, 4);
    CHECK(efrag == doctest::Approx(sol.energy).epsilon(1e-10));
    CHECK(dmet_total_energy({efrag}, toy().e_nuc) ==
          doctest::Approx(sol.energy + toy().e_nuc).epsilon(1e-10));
}

TEST_CASE("solve_exact matches the dense ladder oracle across sectors") {
    for (int n_elec : {1, 2, 3}) {
        ExactSolution sol = solve_exact(toy(), n_elec);
        // solve_exact reports electronic energy plus the stored nuclear offset.
        CHECK(sol.energy ==
              doctest::Approx(dense_sector_ground(toy(), n_elec) + toy().e_nuc).epsilon(1e-10));
        // RDM sanity: trace D = N.
        Eigen::Map<const Eigen::MatrixXd>(sol.one_rdm.data(), 4, 4);
        CHECK(sol.one_rdm.trace() == doctest::Approx(double(n_elec)).epsilon(1e-10));
    }
}

TEST_CASE("embedding Hamiltonian carries -dmu on the fragment diagonals") {
    MeanFieldReference mf = toy_mean_field(toy());
    BathSpace bath = build_bath(mf.density(), {1});
    Eigen::MatrixXd d_env = env_density_matrix(mf, {0, 2, 3});
    IntegralSet a = build_embedding_hamiltonian(toy(), d_env, bath.rotation.leftCols(2), 1, 0.0);
    IntegralSet b = build_embedding_hamiltonian(toy(), d_env, bath.rotation.leftCols(2), 1, 0.25);
    Eigen::MatrixXd diff = a.h - b.h;
    CHECK(diff(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(diff(0, 1)) < 1e-12);
    CHECK(std::abs(diff(1, 1)) < 1e-12);
    for (std::size_t k = 0; k < a.g.size(); ++k) CHECK(a.g[k] == b.g[k]);
}

TEST_CASE("chemical-potential loop agrees with a bisection root") {
    MeanFieldReference mf = toy_mean_field(toy());
    std::vector<std::vector<int>> fragments{{0}, {1}, {2}, {3}};

    // The same fragment solver the toy driver uses, exposed as N(dmu).
    auto count_at = [&](double dmu) {
        DmetConfig cfg;
        cfg.n_total = 2;
        cfg.n_fragments = 4;
        double n = 0;
        for (const auto& frag : fragments) {
            BathSpace bath = build_bath(mf.density(), frag);
            Eigen::MatrixXd w = bath.rotation.leftCols(bath.n_fragment + bath.n_bath);
            Eigen::MatrixXd proj = w * w.transpose();
            Eigen::MatrixXd d_env = mf.density() - proj * mf.density() * proj;
            IntegralSet emb = build_embedding_hamiltonian(toy(), d_env, w, bath.n_fragment, dmu);
            int n_emb = int(std::lround(mf.n_occ - d_env.trace()));
            ExactSolution sol = solve_exact(emb, n_emb);
            for (int p = 0; p < bath.n_fragment; ++p) n += sol.one_rdm(p, p);
        }
        return n;
    };

    // Independent bisection on N(dmu) - 2.
    double lo = -1.0, hi = 1.0;
    REQUIRE((count_at(lo) - 2) * (count_at(hi) - 2) < 0);
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if ((count_at(mid) - 2) * (count_at(lo) - 2) <= 0)
            hi = mid;
        else
            lo = mid;
    }
    double root = 0.5 * (lo + hi);
    CHECK(std::abs(count_at(root) - 2) < 1e-8);

    DmetConfig cfg;
    cfg.n_total = 2;
    cfg.n_fragments = 4;
    cfg.tol = 1e-9;
    cfg.max_iter = 200;
    ToyDmetResult res = run_toy_dmet(toy(), mf, fragments, cfg);
    CHECK(res.loop.converged);
    CHECK(std::abs(count_at(res.loop.dmu) - 2) < 1e-8);
    CHECK(res.loop.dmu == doctest::Approx(root).epsilon(1e-5));
}

TEST_CASE("toy driver is deterministic and balances the electron count") {
    DmetConfig cfg;
    cfg.n_total = 2;
    cfg.n_fragments = 4;
    MeanFieldReference mf = toy_mean_field(toy());
    ToyDmetResult a = run_toy_dmet(toy(), mf, {{0}, {1}, {2}, {3}}, cfg);
    ToyDmetResult b = run_toy_dmet(toy(), mf, {{0}, {1}, {2}, {3}}, cfg);
    CHECK(a.loop.converged);
    CHECK(a.total_energy == b.total_energy);
    CHECK(a.loop.iterations == b.loop.iterations);
    CHECK(std::abs(a.loop.residual) < cfg.tol);
    CHECK(a.loop.fragment_energies.size() == 4);
    // Residual trace shrinks to convergence.
    CHECK(std::abs(a.loop.trace.back()) < std::abs(a.loop.trace.front()));
}

TEST_CASE("secant acceleration engages on an oscillating relaxation") {
    // Slope > 2/a makes the plain relaxation dmu <- dmu - a*dn oscillate and
    // diverge; the loop must detect it and switch to secant updates.
    auto solver = [](double dmu) {
        return std::vector<FragmentSolveOut>{{2.0 + 5.0 * (dmu - 0.3), -1.0}};
    };
    DmetConfig cfg;
    cfg.n_total = 2;
    cfg.tol = 1e-10;
    ChemicalPotentialResult res = chemical_potential_loop(solver, cfg);
    CHECK(res.converged);
    CHECK(res.secant_used);
    CHECK(res.dmu == doctest::Approx(0.3).epsilon(1e-8));
}

TEST_CASE("a root out of reach raises instead of reporting success") {
    auto solver = [](double) { return std::vector<FragmentSolveOut>{{3.0, 0.0}}; };
    DmetConfig cfg;
    cfg.n_total = 2;
    cfg.max_iter = 10;
    CHECK_THROWS_WITH_AS(chemical_potential_loop(solver, cfg),
                         doctest::Contains("did not converge"), std::runtime_error);
}

TEST_CASE("qubit-form operators evaluate correctly on named expectations") {
    PauliSum op(2);
    op.set_constant(1.0);
    op.add(PauliString("XI"), 2.0);
    op.add(PauliString("IZ"), -1.0);
    op.add(PauliString("XZ"), 0.5);
    std::map<std::string, double> exps{{"X0", 0.25}, {"X1", 0}, {"Z0", 0}, {"Z1", -0.5},
                                       {"XX", 0},    {"YY", 0}, {"ZZ", 0}, {"XZ", 0.1},
                                       {"ZX", 0.1}};
    CHECK(evaluate_on_expectations(op, exps) ==
          doctest::Approx(1.0 + 2.0 * 0.25 - 1.0 * -0.5 + 0.5 * 0.1).epsilon(1e-12));
}

TEST_CASE("per-atom energy expressions reproduce the deterministic column") {
    ReferenceData data = load_reference_data();
    for (const auto& ent : data.entries) {
        FragmentProblem fp = fragment_problem(ent);
        auto exps = exact_expectations(ansatz_state(optimal_ansatz(ent)));
        double e = fragment_energy_from_expression(fp, exps);
        CHECK(std::abs(e - ent.e_t) < 1e-5);
    }
}

TEST_CASE("number operator counts fragment electrons through the sector map") {
    ReferenceData data = load_reference_data();
    const auto& ent = data.at(1.1);
    FragmentProblem fp = fragment_problem(ent);
    StateVector sv = ansatz_state(optimal_ansatz(ent));
    double n_op = evaluate_on_expectations(fp.number_operator, exact_expectations(sv));
    RdmPair rdms = build_rdms(decode_state(sv));
    double n_rdm = electron_count(rdms.one_rdm, {0, 1}); // spin-orbitals of orbital 1
    CHECK(n_op == doctest::Approx(n_rdm).epsilon(1e-10));
}
