#pragma once
#include <map>
#include <string>
#include <vector>

#include "iondmet/dmet.hpp"
#include "iondmet/pauli.hpp"
#include "iondmet/qcc.hpp"
#include "iondmet/statevector.hpp"

namespace iondmet {

// Published reference values for one bond length, loaded from the data files.
struct ReferenceEntry {
    double r = 0;

    PauliSum hamiltonian;        // embedding Hamiltonian in qubit form
    PauliSum energy_expression;  // per-atom energy expression

    // Optimal ansatz parameters and the energies they reach.
    double theta0 = 0, theta1 = 0, phi0 = 0, phi1 = 0, tau = 0;
    double e_qcc = 0;     // ground energy of the embedding Hamiltonian
    double gradient = 0;  // |dE/dtau| of the leading generator at the mean field

    // Per-atom energies: deterministic references plus the hardware columns.
    double e_hf = 0, e_fci = 0, e_t = 0;
    double e_exp = 0, sig_exp = 0, e_pur = 0, sig_pur = 0;

    // Entanglement entropies in bits.
    double entropy_mo = 0, entropy_fb = 0;

    // Published circuit parameters (three-decimal angles).
    std::vector<double> preopt;                          // 7 angles
    std::map<std::string, std::vector<double>> postopt;  // ZZ: 2, XZ: 3, XX: 3 angles
    double yy_theta = 0;                                 // entangling angle of the YY circuit
};

struct ReferenceData {
    std::vector<ReferenceEntry> entries;
    Eigen::Matrix2d mo_coeff; // fragment/bath -> molecular-orbital rotation

    const ReferenceEntry& at(double r) const;
};

const std::string& default_data_dir();

// Loads and checksum-verifies every file listed in <dir>/index.txt.
ReferenceData load_reference_data(const std::string& dir = default_data_dir());

std::uint64_t fnv1a(const std::string& bytes);

// Qubit-form fragment problem (Hamiltonian, energy expression, electron-count
// operator on the fragment orbital) for one bond length.
FragmentProblem fragment_problem(const ReferenceEntry& e);

// Optimal two-qubit ansatz: theta = (pi, pi), entangler X0 Y1 with amplitude tau.
AnsatzSpec optimal_ansatz(const ReferenceEntry& e);

// Reference circuits rebuilt from the published angle tables.
Circuit reference_preopt_circuit(const ReferenceEntry& e, const std::string& basis);
NativeCircuit reference_postopt_circuit(const ReferenceEntry& e, const std::string& basis);

// Synthetic four-site lattice fixture for the embedding loop.
IntegralSet load_toy_integrals(const std::string& dir = default_data_dir());
MeanFieldReference toy_mean_field(const IntegralSet& ints, int n_occ = 2);

} // namespace iondmet
