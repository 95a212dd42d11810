#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "iondmet/rng.hpp"
#include "iondmet/statevector.hpp"

using namespace iondmet;

namespace {

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
    Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Embed a 1-qubit gate on qubit q of an n-qubit register (qubit 0 most
// significant, matching the statevector convention).
Eigen::MatrixXcd embed_1q(const Eigen::Matrix2cd& u, int q, int n) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(1, 1);
    for (int k = 0; k < n; ++k)
        m = kron(m, k == q ? Eigen::MatrixXcd(u) : Eigen::MatrixXcd(Eigen::Matrix2cd::Identity()));
    return m;
}

Eigen::MatrixXcd embed_2q(const Eigen::Matrix4cd& u, int qa, int qb, int n) {
    int dim = 1 << n;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (int col = 0; col < dim; ++col) {
        int a = (col >> (n - 1 - qa)) & 1, b = (col >> (n - 1 - qb)) & 1;
        for (int ra = 0; ra < 2; ++ra)
            for (int rb = 0; rb < 2; ++rb) {
                int row = col;
                row = (row & ~(1 << (n - 1 - qa))) | (ra << (n - 1 - qa));
                row = (row & ~(1 << (n - 1 - qb))) | (rb << (n - 1 - qb));
                m(row, col) += u(2 * ra + rb, 2 * a + b);
            }
    }
    return m;
}

Eigen::Matrix2cd gate_matrix(const Gate& g) {
    switch (g.kind) {
        case GateKind::RX: return mat_rx(g.angle);
        case GateKind::RY: return mat_ry(g.angle);
        case GateKind::RZ: return mat_rz(g.angle);
        case GateKind::H: return mat_h();
        case GateKind::S: return mat_s();
        case GateKind::SDG: return mat_sdg();
        default: REQUIRE(false);
    }
    return {};
}

Eigen::MatrixXcd circuit_unitary(const Circuit& c) {
    int dim = 1 << c.n;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    for (const Gate& g : c.gates) {
        if (g.kind == GateKind::CNOT)
            u = embed_2q(mat_cnot(), g.q0, g.q1, c.n) * u;
        else
            u = embed_1q(gate_matrix(g), g.q0, c.n) * u;
    }
    return u;
}

Eigen::MatrixXcd native_circuit_unitary(const NativeCircuit& c) {
    int dim = 1 << c.n;
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(dim, dim);
    for (const NativeGate& g : c.gates) {
        if (g.kind == NativeKind::MS)
            u = embed_2q(mat_ms(g.phi, g.phip, g.theta), g.q0, g.q1, c.n) * u;
        else if (g.kind == NativeKind::R)
            u = embed_1q(mat_r(g.phi, g.theta), g.q0, c.n) * u;
        else
            u = embed_1q(mat_rz(g.theta), g.q0, c.n) * u;
    }
    return u;
}

Circuit random_circuit(int n, int depth, CounterRng& rng) {
    Circuit c;
    c.n = n;
    for (int d = 0; d < depth; ++d) {
        int pick = int(rng.next_u64() % 7);
        int q = int(rng.next_u64() % n);
        switch (pick) {
            case 0: c.add(GateKind::RX, q, rng.uniform(-3.2, 3.2)); break;
            case 1: c.add(GateKind::RY, q, rng.uniform(-3.2, 3.2)); break;
            case 2: c.add(GateKind::RZ, q, rng.uniform(-3.2, 3.2)); break;
            case 3: c.add(GateKind::H, q); break;
            case 4: c.add(GateKind::S, q); break;
            case 5: c.add(GateKind::SDG, q); break;
            default: {
                int t = int(rng.next_u64() % n);
                if (t == q) t = (t + 1) % n;
                c.add_cnot(q, t);
            }
        }
    }
    return c;
}

} // namespace

TEST_CASE("closed-form gate matrices satisfy their definitions") {
    const cplx i{0, 1};
    // R_phi(theta) = exp(-i (cos phi X + sin phi Y) theta / 2)
    double phi = 0.83, theta = 1.27;
    Eigen::Matrix2cd sx, sy, sz;
    sx << 0, 1, 1, 0;
    sy << 0, -i, i, 0;
    sz << 1, 0, 0, -1;
    Eigen::Matrix2cd axis = std::cos(phi) * sx + std::sin(phi) * sy;
    Eigen::Matrix2cd expected =
        std::cos(theta / 2) * Eigen::Matrix2cd::Identity() - i * std::sin(theta / 2) * axis;
    CHECK((mat_r(phi, theta) - expected).cwiseAbs().maxCoeff() < 1e-14);

    CHECK((mat_r(0.0, theta) - mat_rx(theta)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((mat_r(M_PI / 2, theta) - mat_ry(theta)).cwiseAbs().maxCoeff() < 1e-14);

    // MS(phi, phi', theta) = exp(-i sigma_phi (x) sigma_phi' theta / 2)
    double phip = -0.41;
    Eigen::Matrix2cd sp = std::cos(phi) * sx + std::sin(phi) * sy;
    Eigen::Matrix2cd spp = std::cos(phip) * sx + std::sin(phip) * sy;
    Eigen::MatrixXcd pair = kron(sp, spp);
    Eigen::MatrixXcd expected_ms = std::cos(theta / 2) * Eigen::MatrixXcd::Identity(4, 4) -
                                   i * std::sin(theta / 2) * pair;
    CHECK((mat_ms(phi, phip, theta) - expected_ms).cwiseAbs().maxCoeff() < 1e-14);

    CHECK((mat_h() * mat_h() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((mat_s() * mat_sdg() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((mat_s() * mat_s() - Eigen::Matrix2cd(sz)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("200 random circuits match the dense-matrix product oracle") {
    CounterRng rng(101);
    for (int t = 0; t < 200; ++t) {
        int n = 2 + int(rng.next_u64() % 3); // 2..4 qubits
        Circuit c = random_circuit(n, 12, rng);
        StateVector out = run(c, StateVector::zero_state(n));
        Eigen::VectorXcd ref = circuit_unitary(c).col(0);
        CHECK((out.amplitudes - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("native circuits match the dense oracle too") {
    CounterRng rng(202);
    for (int t = 0; t < 50; ++t) {
        NativeCircuit c;
        c.n = 2;
        for (int d = 0; d < 8; ++d) {
            if (rng.next_u64() % 3 == 0)
                c.gates.push_back(NativeGate::ms(0, 1, rng.uniform(-3, 3), rng.uniform(-3, 3),
                                                 rng.uniform(-3, 3)));
            else
                c.gates.push_back(
                    NativeGate::r(int(rng.next_u64() % 2), rng.uniform(-3, 3), rng.uniform(-3, 3)));
        }
        StateVector out = run(c, StateVector::zero_state(2));
        Eigen::VectorXcd ref = native_circuit_unitary(c).col(0);
        CHECK((out.amplitudes - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("measurement prep letters act as basis changes") {
    Circuit c;
    c.n = 2;
    c.add(GateKind::H, 0); // |+>|0>
    c.measure_prep = "XZ";
    auto dist = exact_distribution(c, StateVector::zero_state(2));
    CHECK(dist.at("00") == doctest::Approx(1.0)); // X-basis reading of |+> is deterministic

    Circuit cy;
    cy.n = 2;
    cy.add(GateKind::H, 1);
    cy.add(GateKind::S, 1); // |0>|+i>
    cy.measure_prep = "ZY";
    auto disty = exact_distribution(cy, StateVector::zero_state(2));
    CHECK(disty.at("00") == doctest::Approx(1.0));
}

TEST_CASE("classical fixups rewrite the sampled bitstrings") {
    NativeCircuit c;
    c.n = 2;
    c.gates.push_back(NativeGate::r(0, 0.0, M_PI)); // |10>
    c.fixups.push_back({ClassicalOp::Xor, 0, 1});   // bit1 ^= bit0
    auto dist = exact_distribution(c, StateVector::zero_state(2));
    CHECK(dist.at("11") == doctest::Approx(1.0));

    c.fixups.push_back({ClassicalOp::Not, 0, 0});
    dist = exact_distribution(c, StateVector::zero_state(2));
    CHECK(dist.at("01") == doctest::Approx(1.0));
}

TEST_CASE("sampling is deterministic in the seed and matches frequencies") {
    Circuit c;
    c.n = 2;
    c.add(GateKind::RY, 0, 1.0);
    Histogram h1 = sample(c, 4000, NoiseModel{}, 42);
    Histogram h2 = sample(c, 4000, NoiseModel{}, 42);
    CHECK(h1.counts == h2.counts);
    CHECK(h1.shots == 4000);

    double p1 = std::pow(std::sin(0.5), 2); // P(qubit0 = 1) after RY(1.0)
    double freq = double(h1.counts.count("10") ? h1.counts.at("10") : 0) / 4000.0;
    CHECK(freq == doctest::Approx(p1).epsilon(0.08));

    Histogram h3 = sample(c, 4000, NoiseModel{}, 43);
    CHECK(h1.counts != h3.counts);
}

TEST_CASE("readout noise shifts frequencies as the confusion model predicts") {
    Circuit c; // |00>
    c.n = 2;
    NoiseModel nm = NoiseModel::uniform(2, 0.1, 0.0);
    Histogram h = sample(c, 200000, nm, 5);
    double f00 = double(h.counts.at("00")) / 200000.0;
    CHECK(f00 == doctest::Approx(0.81).epsilon(0.02)); // (1-p01)^2
}

TEST_CASE("circuit text survives a round trip") {
    CounterRng rng(7);
    Circuit c = random_circuit(3, 10, rng);
    c.measure_prep = "XZY";
    Circuit back = circuit_from_text(to_text(c), 3);
    REQUIRE(back.gates.size() == c.gates.size());
    CHECK((circuit_unitary(back) - circuit_unitary(c)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(back.measure_prep == c.measure_prep);

    NativeCircuit nc;
    nc.n = 2;
    nc.gates.push_back(NativeGate::r(1, 0.25, -1.5));
    nc.gates.push_back(NativeGate::ms(0, 1, 0.1, -0.2, 0.3));
    nc.fixups.push_back({ClassicalOp::Xor, 0, 1});
    NativeCircuit nback = native_from_text(to_text(nc), 2);
    REQUIRE(nback.gates.size() == 2);
    REQUIRE(nback.fixups.size() == 1);
    CHECK((native_circuit_unitary(nback) - native_circuit_unitary(nc)).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("total variation is a metric-like distance on distributions") {
    std::map<std::string, double> a{{"00", 0.5}, {"11", 0.5}};
    std::map<std::string, double> b{{"00", 1.0}};
    CHECK(total_variation(a, a) == doctest::Approx(0.0));
    CHECK(total_variation(a, b) == doctest::Approx(0.5));
    CHECK(total_variation(b, a) == doctest::Approx(0.5));
}
