#pragma once
#include <Eigen/Dense>
#include <map>
#include <string>

#include "iondmet/statevector.hpp"

namespace iondmet {

// Fock space of the four spin-orbitals (1a, 1b, 2a, 2b) in that order.
// Basis index of an occupation pattern (n1a, n1b, n2a, n2b) is
// n1a*8 + n1b*4 + n2a*2 + n2b; ladder operators carry Jordan-Wigner signs
// (-1)^(sum of occupations of earlier orbitals).
struct FockState {
    Eigen::Matrix<cplx, 16, 1> amplitudes;
};

// one_rdm(q, p) = <a+_p a_q>  (4x4 Hermitian)
// two_rdm is the pair-space matrix M(4p + r, 4q + s) = <a+_p a+_r a_s a_q>
// (16x16 Hermitian; for an exact 2-electron state M/2 is a rank-1 projector).
struct RdmPair {
    Eigen::Matrix4cd one_rdm;
    Eigen::Matrix<cplx, 16, 16> two_rdm;

    std::string to_text() const;
};

struct MoCoefficients {
    Eigen::Matrix2d c; // orthogonal fragment/bath -> molecular-orbital rotation
};

// 16x16 annihilation matrix for spin-orbital p (0..3).
Eigen::Matrix<cplx, 16, 16> ladder_annihilate(int p);

// Sector map: |q0 q1> -> two-electron occupation configuration.
//   |00> -> (1a,1b), |01> -> (1a,2b), |10> -> (1b,2a), |11> -> (2a,2b)
// (qubit 0 selects the orbital of the alpha electron, qubit 1 the beta one).
FockState decode_state(const StateVector& psi);

RdmPair build_rdms(const FockState& f);

// The nine measured expectations keyed "XX","YY","ZZ","XZ","ZX","X0","X1","Z0","Z1".
RdmPair pauli_to_rdms(const std::map<std::string, double>& expectations);
std::map<std::string, double> rdms_to_pauli(const RdmPair& rdms);

// D(q,p) = sum_r M(4p+r, 4q+r) / (N-1), N = 2.
Eigen::Matrix4cd trace_down(const Eigen::Matrix<cplx, 16, 16>& two_rdm);

double electron_count(const Eigen::Matrix4cd& one_rdm, const std::vector<int>& fragment_orbitals);

// Entanglement entropies in bits (log base 2).
double entropy_mo(const StateVector& psi);
double entropy_fragment_bath(const StateVector& psi, const MoCoefficients& c);

} // namespace iondmet
