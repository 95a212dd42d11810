#pragma once
#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "iondmet/fermion.hpp"
#include "iondmet/pauli.hpp"

namespace iondmet {

// One- and two-electron integrals over an orthonormal orbital basis
// (two-electron part in chemists' notation (pq|rs)).
struct IntegralSet {
    int L = 0;
    Eigen::MatrixXd h;
    std::vector<double> g; // flat L^4, index ((p*L + q)*L + r)*L + s
    double e_nuc = 0;

    double gval(int p, int q, int r, int s) const { return g[((p * L + q) * L + r) * L + s]; }
    double& gref(int p, int q, int r, int s) { return g[((p * L + q) * L + r) * L + s]; }
    void validate() const; // h symmetric, g 8-fold permutational symmetry

    std::string to_text() const;
    static IntegralSet from_text(const std::string& text);
};

struct MeanFieldReference {
    Eigen::MatrixXd mo_coeff; // orthonormal columns
    int n_occ = 0;

    Eigen::MatrixXd density() const; // sum over occupied columns C C^T
};

// Final-iteration fragment problem in qubit form.
struct FragmentProblem {
    PauliSum hamiltonian;
    PauliSum energy_expression; // per-atom energy
    PauliSum number_operator;
    double r_label = 0; // bond length in Angstrom
};

struct DmetConfig {
    double n_total = 0;   // electrons in the full system
    double step_a = 1.0;  // positive update step
    double tol = 1e-5;    // |N^Fragment - N^Total| target
    int max_iter = 100;
    int n_fragments = 1;
};

Eigen::MatrixXd env_density_matrix(const MeanFieldReference& mf, const std::vector<int>& env);

struct BathSpace {
    Eigen::MatrixXd rotation; // L x L columns: fragment, bath, core, virtual
    int n_fragment = 0;
    int n_bath = 0;
    int n_core = 0; // unentangled occupied environment orbitals
};

BathSpace build_bath(const Eigen::MatrixXd& mf_1rdm, const std::vector<int>& fragment_indices,
                     double threshold = 1e-13);

// Embedding Hamiltonian over the fragment+bath orbitals: one-body part with
// the Coulomb-minus-exchange environment contraction and -dmu on the fragment
// diagonals; two-body part restricted to the embedding space.
IntegralSet build_embedding_hamiltonian(const IntegralSet& ints, const Eigen::MatrixXd& d_env,
                                        const Eigen::MatrixXd& w, int n_fragment, double dmu);

// Exact Fock-space diagonalization of an IntegralSet in a fixed electron
// sector; returns ground energy plus RDMs D(q,p) = <a+_p a_q> and the flat
// tensor P(p,q,r,s) = <a+_p a+_r a_s a_q>.
struct ExactSolution {
    double energy = 0;
    Eigen::MatrixXd one_rdm;
    std::vector<double> two_rdm;

    double pval(int p, int q, int r, int s, int L) const {
        return two_rdm[((p * L + q) * L + r) * L + s];
    }
};
ExactSolution solve_exact(const IntegralSet& ints, int n_elec);

// Fragment energy contraction over the four spin-orbitals (1a,1b,2a,2b).
double fragment_energy_from_rdms(const IntegralSet& ints, const Eigen::MatrixXd& d_env,
                                 const RdmPair& rdms, const std::vector<int>& fragment_indices);

// Same contraction for a solution expressed in an embedding basis w (L x M,
// fragment orbitals first); used by the generic-lattice driver.
double fragment_energy_from_solution(const IntegralSet& ints, const Eigen::MatrixXd& d_env,
                                     const Eigen::MatrixXd& w, const ExactSolution& sol,
                                     int n_fragment);

double fragment_energy_from_expression(const FragmentProblem& fp,
                                       const std::map<std::string, double>& expectations);

// Evaluate a qubit-form operator (Hamiltonian / energy expression / number
// operator) on the nine measured expectations.
double evaluate_on_expectations(const PauliSum& op, const std::map<std::string, double>& exps);

struct FragmentSolveOut {
    double n_fragment = 0; // electrons on the fragment
    double energy = 0;
};

struct ChemicalPotentialResult {
    double dmu = 0;
    int iterations = 0;
    bool converged = false;
    bool secant_used = false;
    double residual = 0; // final N^Fragment - N^Total
    std::vector<double> trace; // residual per iteration
    std::vector<double> fragment_energies;
};

// Iterates dmu until the summed fragment electron count matches n_total.
// The solver maps dmu to the per-fragment solutions.
ChemicalPotentialResult chemical_potential_loop(
    const std::function<std::vector<FragmentSolveOut>(double dmu)>& solver,
    const DmetConfig& cfg);

double dmet_total_energy(const std::vector<double>& fragment_energies, double e_nuc);

// Convenience driver for the synthetic fixtures: solves every fragment with
// the exact-diagonalization solver inside the chemical-potential loop.
struct ToyDmetResult {
    ChemicalPotentialResult loop;
    double total_energy = 0;
};
ToyDmetResult run_toy_dmet(const IntegralSet& ints, const MeanFieldReference& mf,
                           const std::vector<std::vector<int>>& fragments, DmetConfig cfg);

} // namespace iondmet
