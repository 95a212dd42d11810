#pragma once
#include <Eigen/Dense>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "iondmet/statevector.hpp"

namespace iondmet {

// A fixed-length word over {I, X, Y, Z}, one letter per qubit.
struct PauliString {
    std::string letters;

    PauliString() = default;
    explicit PauliString(std::string s);

    int n_qubits() const { return int(letters.size()); }
    bool is_identity() const;
    static PauliString identity(int n) { return PauliString(std::string(n, 'I')); }

    auto operator<=>(const PauliString&) const = default;
};

// phase in {+1, -1, +i, -i} and the letterwise product
std::pair<cplx, PauliString> pauli_mul(const PauliString& a, const PauliString& b);

// Real-weighted sum of Pauli strings plus a constant offset.
class PauliSum {
public:
    PauliSum() = default;
    explicit PauliSum(int n_qubits) : n_(n_qubits) {}

    int n_qubits() const { return n_; }
    double constant() const { return constant_; }
    void set_constant(double c) { constant_ = c; }
    void add(const PauliString& p, double coeff);
    const std::map<PauliString, double>& terms() const { return terms_; }

    PauliSum& operator+=(const PauliSum& other);
    PauliSum scaled(double f) const;

    // Dense 2^n x 2^n matrix (oracle / exact diagonalization helper).
    Eigen::MatrixXcd to_matrix() const;

    std::string to_text() const;
    static PauliSum from_text(const std::string& text);

private:
    int n_ = 0;
    double constant_ = 0;
    std::map<PauliString, double> terms_;
};

// P|psi> (phase included)
StateVector apply_pauli(const PauliString& p, const StateVector& psi);
StateVector apply_sum(const PauliSum& op, const StateVector& psi); // no constant

// <psi|op|psi> + constant; throws if the imaginary part exceeds 1e-10.
double expectation(const PauliSum& op, const StateVector& psi);

// (i/2) <psi|[P, H]|psi>, term by term; commuting terms contribute zero.
double commutator_expectation(const PauliSum& h, const PauliString& p, const StateVector& psi);

} // namespace iondmet
