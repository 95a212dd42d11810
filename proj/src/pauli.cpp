#include "iondmet/pauli.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace iondmet {

namespace {
constexpr cplx kI{0.0, 1.0};

bool valid_letter(char c) { return c == 'I' || c == 'X' || c == 'Y' || c == 'Z'; }

// Single-letter product: returns (phase, letter).
std::pair<cplx, char> letter_mul(char a, char b) {
    if (a == 'I') return {1.0, b};
    if (b == 'I') return {1.0, a};
    if (a == b) return {1.0, 'I'};
    // XY=iZ, YZ=iX, ZX=iY and the reversed orders pick up a minus sign.
    auto cyc = [](char x, char y) -> char {
        return (x == 'X' && y == 'Y') ? 'Z'
             : (x == 'Y' && y == 'Z') ? 'X'
             : (x == 'Z' && y == 'X') ? 'Y'
                                      : 0;
    };
    if (char r = cyc(a, b)) return {kI, r};
    char r = cyc(b, a);
    return {-kI, r};
}
} // namespace

PauliString::PauliString(std::string s) : letters(std::move(s)) {
    if (int(letters.size()) > kMaxQubits)
        throw std::invalid_argument("Pauli string longer than the supported qubit cap");
    for (char c : letters)
        if (!valid_letter(c)) throw std::invalid_argument("invalid Pauli letter");
}

bool PauliString::is_identity() const {
    for (char c : letters)
        if (c != 'I') return false;
    return true;
}

std::pair<cplx, PauliString> pauli_mul(const PauliString& a, const PauliString& b) {
    if (a.letters.size() != b.letters.size())
        throw std::invalid_argument("Pauli string length mismatch");
    cplx phase = 1.0;
    std::string out(a.letters.size(), 'I');
    for (std::size_t i = 0; i < a.letters.size(); ++i) {
        auto [ph, l] = letter_mul(a.letters[i], b.letters[i]);
        phase *= ph;
        out[i] = l;
    }
    return {phase, PauliString(std::move(out))};
}

void PauliSum::add(const PauliString& p, double coeff) {
    if (n_ == 0) n_ = p.n_qubits();
    if (p.n_qubits() != n_) throw std::invalid_argument("Pauli string length mismatch");
    if (p.is_identity()) {
        constant_ += coeff;
        return;
    }
    double& c = terms_[p];
    c += coeff;
    if (c == 0.0) terms_.erase(p);
}

PauliSum& PauliSum::operator+=(const PauliSum& other) {
    constant_ += other.constant_;
    for (const auto& [p, c] : other.terms_) add(p, c);
    return *this;
}

PauliSum PauliSum::scaled(double f) const {
    PauliSum out(n_);
    out.constant_ = constant_ * f;
    for (const auto& [p, c] : terms_) out.add(p, c * f);
    return out;
}

Eigen::MatrixXcd PauliSum::to_matrix() const {
    const std::size_t dim = std::size_t(1) << n_;
    Eigen::MatrixXcd m = constant_ * Eigen::MatrixXcd::Identity(dim, dim);
    Eigen::Matrix2cd X, Y, Z, I2;
    X << 0, 1, 1, 0;
    Y << 0, -kI, kI, 0;
    Z << 1, 0, 0, -1;
    I2.setIdentity();
    for (const auto& [p, c] : terms_) {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Ones(1, 1);
        for (char l : p.letters) {
            const Eigen::Matrix2cd& u = l == 'X' ? X : l == 'Y' ? Y : l == 'Z' ? Z : I2;
            // Accumulate left-to-right so the first letter (qubit 0) is the
            // most significant factor, matching the statevector indexing.
            Eigen::MatrixXcd next(acc.rows() * 2, acc.cols() * 2);
            for (int i = 0; i < acc.rows(); ++i)
                for (int j = 0; j < acc.cols(); ++j)
                    next.block(i * 2, j * 2, 2, 2) = acc(i, j) * u;
            acc.swap(next);
        }
        m += c * acc;
    }
    return m;
}

std::string PauliSum::to_text() const {
    std::ostringstream os;
    os.precision(12);
    os << constant_ << ' ' << std::string(n_, 'I') << '\n';
    for (const auto& [p, c] : terms_) os << c << ' ' << p.letters << '\n';
    return os.str();
}

PauliSum PauliSum::from_text(const std::string& text) {
    PauliSum out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first) || first[0] == '#') continue;
        double coeff = std::stod(first);
        std::string letters;
        if (!(ls >> letters)) throw std::invalid_argument("missing Pauli letters");
        out.add(PauliString(letters), coeff);
    }
    return out;
}

StateVector apply_pauli(const PauliString& p, const StateVector& psi) {
    if (p.n_qubits() != psi.n) throw std::invalid_argument("qubit count mismatch");
    StateVector out = psi;
    for (int q = 0; q < p.n_qubits(); ++q) {
        char l = p.letters[q];
        if (l == 'I') continue;
        const std::size_t bit = std::size_t(1) << (psi.n - 1 - q);
        Eigen::VectorXcd next(out.amplitudes.size());
        for (std::size_t i = 0; i < std::size_t(out.amplitudes.size()); ++i) {
            bool one = i & bit;
            switch (l) {
            case 'X': next(i ^ bit) = out.amplitudes(i); break;
            case 'Y': next(i ^ bit) = (one ? -kI : kI) * out.amplitudes(i); break;
            case 'Z': next(i) = (one ? -1.0 : 1.0) * out.amplitudes(i); break;
            }
        }
        out.amplitudes.swap(next);
    }
    return out;
}

StateVector apply_sum(const PauliSum& op, const StateVector& psi) {
    StateVector out = psi;
    out.amplitudes.setZero();
    for (const auto& [p, c] : op.terms())
        out.amplitudes += c * apply_pauli(p, psi).amplitudes;
    return out;
}

double expectation(const PauliSum& op, const StateVector& psi) {
    if (op.n_qubits() != psi.n) throw std::invalid_argument("qubit count mismatch");
    psi.check_normalized();
    cplx val = op.constant();
    for (const auto& [p, c] : op.terms())
        val += c * psi.amplitudes.dot(apply_pauli(p, psi).amplitudes);
    if (std::abs(val.imag()) > 1e-10)
        throw std::runtime_error("non-Hermitian expectation value; corrupted coefficients?");
    return val.real();
}

double commutator_expectation(const PauliSum& h, const PauliString& p, const StateVector& psi) {
    cplx val = 0;
    for (const auto& [q, c] : h.terms()) {
        auto [ph_pq, pq] = pauli_mul(p, q);
        auto [ph_qp, qp] = pauli_mul(q, p);
        if (ph_pq == ph_qp) continue; // commuting term
        cplx ev = psi.amplitudes.dot(apply_pauli(pq, psi).amplitudes);
        val += (kI / 2.0) * c * (ph_pq - ph_qp) * ev;
    }
    if (std::abs(val.imag()) > 1e-10)
        throw std::runtime_error("commutator expectation is not real");
    return val.real();
}

} // namespace iondmet
