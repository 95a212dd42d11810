#pragma once
#include <cstdint>
#include <vector>

#include "iondmet/lbfgs.hpp"
#include "iondmet/pauli.hpp"
#include "iondmet/statevector.hpp"

namespace iondmet {

// Bloch angles of the product mean-field state: per qubit
// cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>.
struct MeanFieldParams {
    std::vector<double> theta;
    std::vector<double> phi;

    int n_qubits() const { return int(theta.size()); }
};

struct AnsatzSpec {
    MeanFieldParams mf;
    std::vector<PauliString> generators;
    std::vector<double> tau;

    std::string to_text() const;
    static AnsatzSpec from_text(const std::string& text);
};

struct ScreeningReport {
    // (generator, |dE/dtau| at tau=0), sorted descending with lexicographic
    // tie-break so the selection is reproducible.
    std::vector<std::pair<PauliString, double>> candidates;
    // flip index (set of qubits acted on by X or Y) per candidate group
    std::vector<std::pair<std::vector<int>, std::vector<PauliString>>> flip_index_groups;
};

struct MeanFieldResult {
    MeanFieldParams params;
    double energy = 0;
    bool converged = true;
};

struct VqeResult {
    AnsatzSpec spec;
    double energy = 0;
    bool converged = true;
};

StateVector mean_field_state(const MeanFieldParams& mf);

MeanFieldResult optimize_mean_field(const PauliSum& h, int starts = 8, std::uint64_t seed = 1);

ScreeningReport screen_generators(const PauliSum& h, const MeanFieldParams& mf);

// Mean-field rotations followed by one exponentiation gadget per generator
// (basis changes, CNOT ladder, RZ(tau), unrolled).
Circuit build_ansatz_circuit(const AnsatzSpec& spec);

StateVector ansatz_state(const AnsatzSpec& spec);

VqeResult vqe_minimize(const PauliSum& h, const AnsatzSpec& spec0, double ftol = 1e-8,
                       double gtol = 1e-6, int max_iter = 500);

} // namespace iondmet
