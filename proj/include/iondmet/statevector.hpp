#pragma once
#include <Eigen/Dense>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "iondmet/rng.hpp"

namespace iondmet {

using cplx = std::complex<double>;

constexpr int kMaxQubits = 16;

// Amplitudes are indexed with qubit 0 as the most significant bit, so the
// basis label of index i is the bitstring b0 b1 ... b_{n-1}.
struct StateVector {
    int n = 0;
    Eigen::VectorXcd amplitudes;

    static StateVector zero_state(int n_qubits);
    double norm() const { return amplitudes.norm(); }
    void check_normalized(double tol = 1e-10) const;
};

// ---------------------------------------------------------------------------
// Standard-gate circuits

enum class GateKind { RX, RY, RZ, H, S, SDG, CNOT };

struct Gate {
    GateKind kind;
    int q0 = 0;
    int q1 = -1;      // CNOT target
    double angle = 0; // rotations only
};

struct Circuit {
    int n = 2;
    std::vector<Gate> gates;
    // Per-qubit measurement-basis change applied after the gates:
    // 'Z' (none), 'X' (Hadamard), 'Y' (S^dag then Hadamard).
    std::string measure_prep; // empty means all-'Z'

    void add(GateKind k, int q, double angle = 0) { gates.push_back({k, q, -1, angle}); }
    void add_cnot(int c, int t) { gates.push_back({GateKind::CNOT, c, t, 0}); }
};

// ---------------------------------------------------------------------------
// Trapped-ion native circuits

enum class NativeKind {
    R,  // R_phi(theta) = exp(-i sigma_phi theta/2), sigma_phi = cos(phi)X + sin(phi)Y
    MS, // MS(phi, phip, theta) = exp(-i sigma_phi (x) sigma_phip theta/2)
    RZ, // virtual Z rotation, internal to the optimizer; never in shipped output
};

struct NativeGate {
    NativeKind kind;
    int q0 = 0;
    int q1 = -1; // MS only
    double phi = 0, phip = 0, theta = 0;

    static NativeGate r(int q, double phi, double theta) {
        return {NativeKind::R, q, -1, phi, 0, theta};
    }
    static NativeGate ms(int a, int b, double phi, double phip, double theta) {
        return {NativeKind::MS, a, b, phi, phip, theta};
    }
    static NativeGate rz(int q, double t) { return {NativeKind::RZ, q, -1, 0, 0, t}; }
};

// Classical corrections applied, in order, to each sampled bitstring.
struct ClassicalOp {
    enum Kind { Xor, Not } kind;
    int src = 0; // Xor: source bit; Not: flipped bit
    int tgt = 0; // Xor only
};

struct NativeCircuit {
    int n = 2;
    std::vector<NativeGate> gates;
    std::vector<ClassicalOp> fixups;
};

// ---------------------------------------------------------------------------
// Dense single-gate matrices (closed forms; used by run and by the oracles)

Eigen::Matrix2cd mat_r(double phi, double theta);
Eigen::Matrix2cd mat_rx(double theta);
Eigen::Matrix2cd mat_ry(double theta);
Eigen::Matrix2cd mat_rz(double theta);
Eigen::Matrix2cd mat_h();
Eigen::Matrix2cd mat_s();
Eigen::Matrix2cd mat_sdg();
Eigen::Matrix4cd mat_ms(double phi, double phip, double theta);
Eigen::Matrix4cd mat_cnot();

void apply_1q(StateVector& sv, const Eigen::Matrix2cd& u, int q);
void apply_2q(StateVector& sv, const Eigen::Matrix4cd& u, int qa, int qb);

// ---------------------------------------------------------------------------
// Execution

struct NoiseModel {
    // Per-qubit readout confusion probabilities; empty means noise-free.
    std::vector<double> p01; // P(read 1 | prepared 0)
    std::vector<double> p10; // P(read 0 | prepared 1)
    // Distribution-level depolarizing knob per two-qubit gate (defaults off).
    double depol2q = 0.0;

    bool trivial() const;
    static NoiseModel uniform(int n, double p01v, double p10v);
};

struct Histogram {
    std::map<std::string, std::uint64_t> counts;
    std::uint64_t shots = 0;
    std::string basis_label;
};

StateVector run(const Circuit& c, const StateVector& initial);
StateVector run(const NativeCircuit& c, const StateVector& initial);

// |amp|^2 after run, then classical fixups applied as bitstring rewrites.
std::map<std::string, double> exact_distribution(const Circuit& c, const StateVector& initial);
std::map<std::string, double> exact_distribution(const NativeCircuit& c, const StateVector& initial);

Histogram sample(const std::map<std::string, double>& dist, int n, std::uint64_t shots,
                 const NoiseModel& noise, std::uint64_t seed, const std::string& basis_label = "");

Histogram sample(const Circuit& c, std::uint64_t shots, const NoiseModel& noise,
                 std::uint64_t seed, const std::string& basis_label = "");
Histogram sample(const NativeCircuit& c, std::uint64_t shots, const NoiseModel& noise,
                 std::uint64_t seed, const std::string& basis_label = "");

// Circuit text I/O (one gate per line: `RX q0 1.571`, `CNOT q0 q1`,
// `MS q0 q1 0.0 0.0 1.571`, `FIXUP q0 -> q1`, `NOT q0`).
std::string to_text(const Circuit& c);
std::string to_text(const NativeCircuit& c);
Circuit circuit_from_text(const std::string& text, int n);
NativeCircuit native_from_text(const std::string& text, int n);

double total_variation(const std::map<std::string, double>& a,
                       const std::map<std::string, double>& b);

} // namespace iondmet
