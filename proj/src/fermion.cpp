#include "iondmet/fermion.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace iondmet {

namespace {
constexpr cplx kI{0.0, 1.0};

using Mat16 = Eigen::Matrix<cplx, 16, 16>;
using Vec16 = Eigen::Matrix<cplx, 16, 1>;

// Fock index of the two-electron configuration selected by qubit basis k.
//   |00> -> (1a,1b) = 12, |01> -> (1a,2b) = 9, |10> -> (1b,2a) = 6, |11> -> (2a,2b) = 3
constexpr int kSectorIndex[4] = {12, 9, 6, 3};

const Mat16& annihilator(int p) {
    static const std::array<Mat16, 4> ops = [] {
        std::array<Mat16, 4> out;
        for (int p = 0; p < 4; ++p) {
            Mat16 m = Mat16::Zero();
            for (int idx = 0; idx < 16; ++idx) {
                int bits[4] = {(idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1};
                if (!bits[p]) continue;
                int sign = 1;
                for (int q = 0; q < p; ++q)
                    if (bits[q]) sign = -sign;
                m(idx & ~(1 << (3 - p)), idx) = sign;
            }
            out[p] = m;
        }
        return out;
    }();
    return ops[p];
}

// Qubit basis states as pair vectors u_k with (u_k)[4p+r] = <0| a_r a_p |sector_k>.
const std::array<Vec16, 4>& pair_basis() {
    static const std::array<Vec16, 4> basis = [] {
        std::array<Vec16, 4> out;
        for (int k = 0; k < 4; ++k) {
            Vec16 fock = Vec16::Zero();
            fock(kSectorIndex[k]) = 1.0;
            Vec16 u;
            for (int p = 0; p < 4; ++p)
                for (int r = 0; r < 4; ++r)
                    u(4 * p + r) = (annihilator(r) * (annihilator(p) * fock))(0);
            out[k] = u;
        }
        return out;
    }();
    return basis;
}

// RDMs of an arbitrary 16x16 Fock-space density matrix.
RdmPair rdms_from_density(const Mat16& rho) {
    RdmPair out;
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
            out.one_rdm(q, p) =
                (rho * annihilator(p).adjoint() * annihilator(q)).trace();
    for (int p = 0; p < 4; ++p)
        for (int r = 0; r < 4; ++r)
            for (int q = 0; q < 4; ++q)
                for (int s = 0; s < 4; ++s)
                    out.two_rdm(4 * p + r, 4 * q + s) =
                        (rho * annihilator(p).adjoint() * annihilator(r).adjoint() *
                         annihilator(s) * annihilator(q))
                            .trace();
    return out;
}

Eigen::Matrix4cd pauli_matrix_2q(const std::string& label) {
    Eigen::Matrix2cd X, Y, Z, I2;
    X << 0, 1, 1, 0;
    Y << 0, -kI, kI, 0;
    Z << 1, 0, 0, -1;
    I2.setIdentity();
    auto pick = [&](char c) -> const Eigen::Matrix2cd& {
        return c == 'X' ? X : c == 'Y' ? Y : c == 'Z' ? Z : I2;
    };
    char l0 = 'I', l1 = 'I';
    if (label == "X0") l0 = 'X';
    else if (label == "X1") l1 = 'X';
    else if (label == "Z0") l0 = 'Z';
    else if (label == "Z1") l1 = 'Z';
    else if (label.size() == 2) { l0 = label[0]; l1 = label[1]; }
    else throw std::invalid_argument("unknown expectation label: " + label);
    const Eigen::Matrix2cd& a = pick(l0);
    const Eigen::Matrix2cd& b = pick(l1);
    Eigen::Matrix4cd m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return m;
}

const std::array<std::string, 9>& expectation_labels() {
    static const std::array<std::string, 9> labels = {"XX", "YY", "ZZ", "XZ", "ZX",
                                                      "X0", "X1", "Z0", "Z1"};
    return labels;
}

} // namespace

Eigen::Matrix<cplx, 16, 16> ladder_annihilate(int p) {
    if (p < 0 || p > 3) throw std::out_of_range("spin-orbital index out of range");
    return annihilator(p);
}

FockState decode_state(const StateVector& psi) {
    if (psi.n != 2) throw std::invalid_argument("sector map is defined for two qubits");
    psi.check_normalized();
    FockState f;
    f.amplitudes.setZero();
    for (int k = 0; k < 4; ++k) f.amplitudes(kSectorIndex[k]) = psi.amplitudes(k);
    return f;
}

RdmPair build_rdms(const FockState& f) {
    Mat16 rho = f.amplitudes * f.amplitudes.adjoint();
    return rdms_from_density(rho);
}

RdmPair pauli_to_rdms(const std::map<std::string, double>& expectations) {
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Identity();
    for (const std::string& label : expectation_labels()) {
        auto it = expectations.find(label);
        if (it == expectations.end())
            throw std::invalid_argument("missing expectation value: " + label);
        rho += it->second * pauli_matrix_2q(label);
    }
    rho /= 4.0; // unmeasured coherences are fixed to zero by symmetry
    // Embed the qubit density matrix into Fock space through the sector map.
    Eigen::Matrix<cplx, 16, 4> embed = Eigen::Matrix<cplx, 16, 4>::Zero();
    for (int k = 0; k < 4; ++k) embed(kSectorIndex[k], k) = 1.0;
    Mat16 rho_fock = embed * rho * embed.adjoint();
    return rdms_from_density(rho_fock);
}

std::map<std::string, double> rdms_to_pauli(const RdmPair& rdms) {
    // Recover the qubit density matrix from the pair-space two-RDM:
    // rho(k, l) = u_k^dag M^T u_l / 4 with the pair vectors of the sector map.
    const auto& u = pair_basis();
    Mat16 mt = rdms.two_rdm.transpose();
    Eigen::Matrix4cd rho;
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
            rho(k, l) = (u[k].adjoint() * mt * u[l])(0) / 4.0;
    std::map<std::string, double> out;
    for (const std::string& label : expectation_labels())
        out[label] = (rho * pauli_matrix_2q(label)).trace().real();
    return out;
}

Eigen::Matrix4cd trace_down(const Eigen::Matrix<cplx, 16, 16>& two_rdm) {
    Eigen::Matrix4cd d = Eigen::Matrix4cd::Zero();
    for (int p = 0; p < 4; ++p)
        for (int q = 0; q < 4; ++q)
            for (int r = 0; r < 4; ++r) d(q, p) += two_rdm(4 * p + r, 4 * q + r);
    return d; // divided by (N - 1) = 1
}

double electron_count(const Eigen::Matrix4cd& one_rdm, const std::vector<int>& fragment_orbitals) {
    double n = 0;
    for (int p : fragment_orbitals) n += one_rdm(p, p).real();
    return n;
}

namespace {
double entropy_of(const Eigen::VectorXd& probs) {
    double s = 0;
    for (double p : probs)
        if (p > 1e-14) s -= p * std::log2(p);
    return s;
}
} // namespace

double entropy_mo(const StateVector& psi) {
    // Trace over orbital 2: the sector configurations are distinguished by
    // their orbital-2 occupations, so the reduced matrix is the diagonal
    // vector of orbital-1 number-operator expectations.
    FockState f = decode_state(psi);
    Eigen::Vector4d probs = Eigen::Vector4d::Zero();
    for (int idx = 0; idx < 16; ++idx)
        probs(idx >> 2) += std::norm(f.amplitudes(idx));
    return entropy_of(probs);
}

double entropy_fragment_bath(const StateVector& psi, const MoCoefficients& c) {
    if ((c.c.transpose() * c.c - Eigen::Matrix2d::Identity()).norm() > 1e-6)
        throw std::invalid_argument("MO coefficient matrix is not orthogonal");
    FockState f = decode_state(psi);
    // Single-particle rotation by C induced on Fock space:
    // U = exp(kappa * sum_sigma (a+_1s a_2s - a+_2s a_1s)).
    double kappa = std::atan2(c.c(1, 0), c.c(0, 0));
    Mat16 g = Mat16::Zero();
    for (int spin = 0; spin < 2; ++spin) {
        const Mat16& a1 = annihilator(spin);     // 1a, 1b
        const Mat16& a2 = annihilator(2 + spin); // 2a, 2b
        g += kappa * (a1.adjoint() * a2 - a2.adjoint() * a1);
    }
    // g is anti-Hermitian; exponentiate through the Hermitian matrix i*g.
    Eigen::SelfAdjointEigenSolver<Mat16> es(Mat16(kI * g));
    Eigen::Matrix<cplx, 16, 1> phases;
    for (int i = 0; i < 16; ++i) phases(i) = std::exp(-kI * es.eigenvalues()(i));
    Mat16 u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    Vec16 w = u * f.amplitudes;
    // Trace out the bath modes (2a, 2b): they are last in the ordering, so the
    // Jordan-Wigner strings do not reach across the cut.
    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int e = 0; e < 4; ++e) rho(a, b) += w(4 * a + e) * std::conj(w(4 * b + e));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> er(rho);
    return entropy_of(er.eigenvalues());
}

std::string RdmPair::to_text() const {
    std::ostringstream os;
    os.precision(12);
    os << "# one-particle RDM (rows q, cols p)\n";
    for (int q = 0; q < 4; ++q) {
        for (int p = 0; p < 4; ++p) os << one_rdm(q, p).real() << (p == 3 ? '\n' : ' ');
    }
    os << "# two-particle RDM, pair-space matrix rows (p,r), cols (q,s)\n";
    for (int i = 0; i < 16; ++i) {
        for (int j = 0; j < 16; ++j) os << two_rdm(i, j).real() << (j == 15 ? '\n' : ' ');
    }
    return os.str();
}

} // namespace iondmet
