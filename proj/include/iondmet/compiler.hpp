#pragma once
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iondmet/statevector.hpp"

namespace iondmet {

struct CompileReport {
    std::map<std::string, int> input_counts;  // by standard gate name
    int output_1q = 0;
    int output_2q = 0;
    std::map<std::string, int> rules_fired;
    bool rounding_applied = false;

    std::string to_text() const;
};

// Standard-gate circuit -> native R/MS gates; the output unitary equals the
// input up to a global phase.
NativeCircuit transpile(const Circuit& c);

// Rewrite pass: single-qubit fusion, pulse commutation and merging, and
// trailing two-qubit-gate elimination with classical fixups.  The exact
// measurement distribution is preserved; the basis label gates the XOR
// elimination (parity fixups are only valid for the bases measured jointly
// from one circuit, i.e. without a Y letter).
NativeCircuit optimize(const NativeCircuit& nc, const std::string& basis,
                       std::map<std::string, int>* rules_fired = nullptr);

// Round every pulse angle half-to-even to three decimal digits.
NativeCircuit quantize_params(const NativeCircuit& nc);

struct CompileResult {
    NativeCircuit circuit;
    CompileReport report;
};
CompileResult compile_circuit(const Circuit& c, const std::string& basis, bool quantize = true);

struct EquivalenceReport {
    std::vector<std::string> bases;
    std::vector<double> distances; // total variation per basis
    double tol = 0;
    bool pass = false;

    std::string to_text() const;
};

EquivalenceReport equivalence_check(
    const std::vector<std::pair<NativeCircuit, NativeCircuit>>& pairs,
    const std::vector<std::string>& bases, double tol);
EquivalenceReport equivalence_check(const std::vector<Eigen::VectorXd>& a,
                                    const std::vector<Eigen::VectorXd>& b,
                                    const std::vector<std::string>& bases, double tol);

// Dense unitary of a two-qubit native gate list (ignores classical fixups).
Eigen::Matrix4cd native_unitary(const std::vector<NativeGate>& gates);

// ZXZ Euler angles of a 2x2 unitary: U ~ Rz(a) R_0(b) Rz(c) up to phase.
struct EulerZxz {
    double a, b, c;
};
EulerZxz zxz_euler(const Eigen::Matrix2cd& u);

} // namespace iondmet
