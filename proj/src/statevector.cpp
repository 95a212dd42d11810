#include "iondmet/statevector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace iondmet {

namespace {
constexpr cplx kI{0.0, 1.0};
constexpr double kPi = std::numbers::pi;
} // namespace

StateVector StateVector::zero_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits)
        throw std::invalid_argument("qubit count out of range");
    StateVector sv;
    sv.n = n_qubits;
    sv.amplitudes = Eigen::VectorXcd::Zero(std::size_t(1) << n_qubits);
    sv.amplitudes(0) = 1.0;
    return sv;
}

void StateVector::check_normalized(double tol) const {
    if (std::abs(norm() - 1.0) > tol)
        throw std::invalid_argument("state vector is not normalized");
}

Eigen::Matrix2cd mat_r(double phi, double theta) {
    // cos(theta/2) I - i sin(theta/2) (cos(phi) X + sin(phi) Y)
    double c = std::cos(theta / 2), s = std::sin(theta / 2);
    Eigen::Matrix2cd u;
    u << c, -kI * s * std::exp(-kI * phi), -kI * s * std::exp(kI * phi), c;
    return u;
}

Eigen::Matrix2cd mat_rx(double theta) { return mat_r(0.0, theta); }
Eigen::Matrix2cd mat_ry(double theta) { return mat_r(kPi / 2, theta); }

Eigen::Matrix2cd mat_rz(double theta) {
    Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
    u(0, 0) = std::exp(-kI * (theta / 2));
    u(1, 1) = std::exp(kI * (theta / 2));
    return u;
}

Eigen::Matrix2cd mat_h() {
    Eigen::Matrix2cd u;
    u << 1, 1, 1, -1;
    return u / std::sqrt(2.0);
}

Eigen::Matrix2cd mat_s() {
    Eigen::Matrix2cd u = Eigen::Matrix2cd::Zero();
    u(0, 0) = 1;
    u(1, 1) = kI;
    return u;
}

Eigen::Matrix2cd mat_sdg() { return mat_s().adjoint(); }

Eigen::Matrix4cd mat_ms(double phi, double phip, double theta) {
    // sigma_phi (x) sigma_phip squares to identity, so the exponential is
    // cos(theta/2) I - i sin(theta/2) sigma_phi (x) sigma_phip.
    Eigen::Matrix2cd sa, sb;
    sa << 0, std::exp(-kI * phi), std::exp(kI * phi), 0;
    sb << 0, std::exp(-kI * phip), std::exp(kI * phip), 0;
    Eigen::Matrix4cd kron;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            kron.block<2, 2>(2 * i, 2 * j) = sa(i, j) * sb;
    double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return c * Eigen::Matrix4cd::Identity() - kI * s * kron;
}

Eigen::Matrix4cd mat_cnot() {
    Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
    u(0, 0) = u(1, 1) = u(2, 3) = u(3, 2) = 1;
    return u;
}

void apply_1q(StateVector& sv, const Eigen::Matrix2cd& u, int q) {
    if (q < 0 || q >= sv.n) throw std::out_of_range("qubit index out of range");
    const std::size_t dim = sv.amplitudes.size();
    const std::size_t bit = std::size_t(1) << (sv.n - 1 - q);
    for (std::size_t i = 0; i < dim; ++i) {
        if (i & bit) continue;
        cplx a0 = sv.amplitudes(i), a1 = sv.amplitudes(i | bit);
        sv.amplitudes(i) = u(0, 0) * a0 + u(0, 1) * a1;
        sv.amplitudes(i | bit) = u(1, 0) * a0 + u(1, 1) * a1;
    }
}

void apply_2q(StateVector& sv, const Eigen::Matrix4cd& u, int qa, int qb) {
    if (qa < 0 || qa >= sv.n || qb < 0 || qb >= sv.n || qa == qb)
        throw std::out_of_range("qubit index out of range");
    const std::size_t dim = sv.amplitudes.size();
    const std::size_t ba = std::size_t(1) << (sv.n - 1 - qa);
    const std::size_t bb = std::size_t(1) << (sv.n - 1 - qb);
    for (std::size_t i = 0; i < dim; ++i) {
        if ((i & ba) || (i & bb)) continue;
        std::size_t idx[4] = {i, i | bb, i | ba, i | ba | bb};
        cplx a[4];
        for (int k = 0; k < 4; ++k) a[k] = sv.amplitudes(idx[k]);
        for (int r = 0; r < 4; ++r) {
            cplx acc = 0;
            for (int k = 0; k < 4; ++k) acc += u(r, k) * a[k];
            sv.amplitudes(idx[r]) = acc;
        }
    }
}

StateVector run(const Circuit& c, const StateVector& initial) {
    initial.check_normalized();
    StateVector sv = initial;
    for (const Gate& g : c.gates) {
        switch (g.kind) {
        case GateKind::RX: apply_1q(sv, mat_rx(g.angle), g.q0); break;
        case GateKind::RY: apply_1q(sv, mat_ry(g.angle), g.q0); break;
        case GateKind::RZ: apply_1q(sv, mat_rz(g.angle), g.q0); break;
        case GateKind::H: apply_1q(sv, mat_h(), g.q0); break;
        case GateKind::S: apply_1q(sv, mat_s(), g.q0); break;
        case GateKind::SDG: apply_1q(sv, mat_sdg(), g.q0); break;
        case GateKind::CNOT: apply_2q(sv, mat_cnot(), g.q0, g.q1); break;
        }
    }
    for (int q = 0; q < int(c.measure_prep.size()); ++q) {
        switch (c.measure_prep[q]) {
        case 'Z': break;
        case 'X': apply_1q(sv, mat_h(), q); break;
        case 'Y':
            apply_1q(sv, mat_sdg(), q);
            apply_1q(sv, mat_h(), q);
            break;
        default: throw std::invalid_argument("unknown measurement basis letter");
        }
    }
    return sv;
}

StateVector run(const NativeCircuit& c, const StateVector& initial) {
    initial.check_normalized();
    StateVector sv = initial;
    for (const NativeGate& g : c.gates) {
        switch (g.kind) {
        case NativeKind::R: apply_1q(sv, mat_r(g.phi, g.theta), g.q0); break;
        case NativeKind::RZ: apply_1q(sv, mat_rz(g.theta), g.q0); break;
        case NativeKind::MS: apply_2q(sv, mat_ms(g.phi, g.phip, g.theta), g.q0, g.q1); break;
        }
    }
    return sv;
}

namespace {

std::string index_to_bits(std::size_t idx, int n) {
    std::string s(n, '0');
    for (int q = 0; q < n; ++q)
        if (idx & (std::size_t(1) << (n - 1 - q))) s[q] = '1';
    return s;
}

std::map<std::string, double> probabilities(const StateVector& sv,
                                            const std::vector<ClassicalOp>& fixups) {
    std::map<std::string, double> out;
    const int n = sv.n;
    for (std::size_t i = 0; i < std::size_t(sv.amplitudes.size()); ++i) {
        double p = std::norm(sv.amplitudes(i));
        if (p == 0.0) continue;
        std::string bits = index_to_bits(i, n);
        for (const ClassicalOp& op : fixups) {
            if (op.kind == ClassicalOp::Xor) {
                if (bits[op.src] == '1') bits[op.tgt] = bits[op.tgt] == '1' ? '0' : '1';
            } else {
                bits[op.src] = bits[op.src] == '1' ? '0' : '1';
            }
        }
        out[bits] += p;
    }
    return out;
}

int count_2q(const NativeCircuit& c) {
    int k = 0;
    for (const auto& g : c.gates)
        if (g.kind == NativeKind::MS) ++k;
    return k;
}

void depolarize(std::map<std::string, double>& dist, int n, double p, int n2q) {
    if (p <= 0.0 || n2q == 0) return;
    double keep = std::pow(1.0 - p, n2q);
    double uni = (1.0 - keep) / double(std::size_t(1) << n);
    for (std::size_t i = 0; i < (std::size_t(1) << n); ++i) {
        std::string bits = index_to_bits(i, n);
        auto it = dist.find(bits);
        double base = it == dist.end() ? 0.0 : it->second;
        dist[bits] = keep * base + uni;
    }
}

} // namespace

std::map<std::string, double> exact_distribution(const Circuit& c, const StateVector& initial) {
    return probabilities(run(c, initial), {});
}

std::map<std::string, double> exact_distribution(const NativeCircuit& c,
                                                 const StateVector& initial) {
    return probabilities(run(c, initial), c.fixups);
}

bool NoiseModel::trivial() const {
    if (depol2q > 0.0) return false;
    for (double p : p01)
        if (p > 0.0) return false;
    for (double p : p10)
        if (p > 0.0) return false;
    return true;
}

NoiseModel NoiseModel::uniform(int n, double p01v, double p10v) {
    NoiseModel m;
    m.p01.assign(n, p01v);
    m.p10.assign(n, p10v);
    return m;
}

Histogram sample(const std::map<std::string, double>& dist, int n, std::uint64_t shots,
                 const NoiseModel& noise, std::uint64_t seed, const std::string& basis_label) {
    // Cumulative table for inverse-CDF draws.
    std::vector<std::pair<double, const std::string*>> cdf;
    double acc = 0;
    for (const auto& [bits, p] : dist) {
        acc += p;
        cdf.emplace_back(acc, &bits);
    }
    if (std::abs(acc - 1.0) > 1e-8) throw std::invalid_argument("distribution not normalized");

    CounterRng rng(seed);
    Histogram h;
    h.shots = shots;
    h.basis_label = basis_label;
    for (std::uint64_t s = 0; s < shots; ++s) {
        double u = rng.uniform() * acc;
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u,
                                   [](const auto& a, double v) { return a.first < v; });
        if (it == cdf.end()) --it;
        std::string bits = *it->second;
        for (int q = 0; q < n; ++q) {
            double pflip = 0.0;
            if (bits[q] == '0' && q < int(noise.p01.size())) pflip = noise.p01[q];
            if (bits[q] == '1' && q < int(noise.p10.size())) pflip = noise.p10[q];
            if (pflip > 0.0 && rng.uniform() < pflip) bits[q] = bits[q] == '1' ? '0' : '1';
        }
        ++h.counts[bits];
    }
    return h;
}

Histogram sample(const Circuit& c, std::uint64_t shots, const NoiseModel& noise,
                 std::uint64_t seed, const std::string& basis_label) {
    return sample(exact_distribution(c, StateVector::zero_state(c.n)), c.n, shots, noise, seed,
                  basis_label);
}

// The distribution-level depolarizing knob applies per two-qubit gate.
Histogram sample(const NativeCircuit& c, std::uint64_t shots, const NoiseModel& noise,
                 std::uint64_t seed, const std::string& basis_label) {
    auto dist = exact_distribution(c, StateVector::zero_state(c.n));
    depolarize(dist, c.n, noise.depol2q, count_2q(c));
    return sample(dist, c.n, shots, noise, seed, basis_label);
}

double total_variation(const std::map<std::string, double>& a,
                       const std::map<std::string, double>& b) {
    double tv = 0;
    for (const auto& [k, v] : a) {
        auto it = b.find(k);
        tv += std::abs(v - (it == b.end() ? 0.0 : it->second));
    }
    for (const auto& [k, v] : b)
        if (!a.count(k)) tv += std::abs(v);
    return tv / 2;
}

// ---------------------------------------------------------------------------
// Text format

std::string to_text(const Circuit& c) {
    std::ostringstream os;
    os.precision(12);
    for (const Gate& g : c.gates) {
        switch (g.kind) {
        case GateKind::RX: os << "RX q" << g.q0 << ' ' << g.angle << '\n'; break;
        case GateKind::RY: os << "RY q" << g.q0 << ' ' << g.angle << '\n'; break;
        case GateKind::RZ: os << "RZ q" << g.q0 << ' ' << g.angle << '\n'; break;
        case GateKind::H: os << "H q" << g.q0 << '\n'; break;
        case GateKind::S: os << "S q" << g.q0 << '\n'; break;
        case GateKind::SDG: os << "SDG q" << g.q0 << '\n'; break;
        case GateKind::CNOT: os << "CNOT q" << g.q0 << " q" << g.q1 << '\n'; break;
        }
    }
    if (!c.measure_prep.empty()) os << "MEASURE " << c.measure_prep << '\n';
    return os.str();
}

std::string to_text(const NativeCircuit& c) {
    std::ostringstream os;
    os.precision(12);
    for (const NativeGate& g : c.gates) {
        switch (g.kind) {
        case NativeKind::R: os << "R q" << g.q0 << ' ' << g.phi << ' ' << g.theta << '\n'; break;
        case NativeKind::RZ: os << "RZ q" << g.q0 << ' ' << g.theta << '\n'; break;
        case NativeKind::MS:
            os << "MS q" << g.q0 << " q" << g.q1 << ' ' << g.phi << ' ' << g.phip << ' '
               << g.theta << '\n';
            break;
        }
    }
    for (const ClassicalOp& op : c.fixups) {
        if (op.kind == ClassicalOp::Xor)
            os << "FIXUP q" << op.src << " -> q" << op.tgt << '\n';
        else
            os << "NOT q" << op.src << '\n';
    }
    return os.str();
}

namespace {
int parse_q(const std::string& tok) {
    if (tok.size() < 2 || tok[0] != 'q') throw std::invalid_argument("bad qubit token: " + tok);
    return std::stoi(tok.substr(1));
}
} // namespace

Circuit circuit_from_text(const std::string& text, int n) {
    Circuit c;
    c.n = n;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string op;
        if (!(ls >> op) || op[0] == '#') continue;
        std::string qa;
        ls >> qa;
        if (op == "MEASURE") {
            c.measure_prep = qa;
        } else if (op == "CNOT") {
            std::string qb;
            ls >> qb;
            c.add_cnot(parse_q(qa), parse_q(qb));
        } else if (op == "H" || op == "S" || op == "SDG") {
            GateKind k = op == "H" ? GateKind::H : op == "S" ? GateKind::S : GateKind::SDG;
            c.add(k, parse_q(qa));
        } else if (op == "RX" || op == "RY" || op == "RZ") {
            double a;
            ls >> a;
            GateKind k = op == "RX" ? GateKind::RX : op == "RY" ? GateKind::RY : GateKind::RZ;
            c.add(k, parse_q(qa), a);
        } else {
            throw std::invalid_argument("unknown gate: " + op);
        }
    }
    return c;
}

NativeCircuit native_from_text(const std::string& text, int n) {
    NativeCircuit c;
    c.n = n;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string op;
        if (!(ls >> op) || op[0] == '#') continue;
        if (op == "R") {
            std::string qa;
            double phi, th;
            ls >> qa >> phi >> th;
            c.gates.push_back(NativeGate::r(parse_q(qa), phi, th));
        } else if (op == "RZ") {
            std::string qa;
            double t;
            ls >> qa >> t;
            c.gates.push_back(NativeGate::rz(parse_q(qa), t));
        } else if (op == "MS") {
            std::string qa, qb;
            double phi, phip, th;
            ls >> qa >> qb >> phi >> phip >> th;
            c.gates.push_back(NativeGate::ms(parse_q(qa), parse_q(qb), phi, phip, th));
        } else if (op == "FIXUP") {
            std::string qa, arrow, qb;
            ls >> qa >> arrow >> qb;
            c.fixups.push_back({ClassicalOp::Xor, parse_q(qa), parse_q(qb)});
        } else if (op == "NOT") {
            std::string qa;
            ls >> qa;
            c.fixups.push_back({ClassicalOp::Not, parse_q(qa), 0});
        } else {
            throw std::invalid_argument("unknown native gate: " + op);
        }
    }
    return c;
}

} // namespace iondmet
