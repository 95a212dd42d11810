#include "iondmet/compiler.hpp"

#include <Eigen/SVD>
#include <cfenv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace iondmet {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};

double rem2pi(double x) { return std::remainder(x, 2 * kPi); }

bool axis_match(double a, double b) { return std::abs(std::remainder(a - b, kPi)) < 1e-9; }

using Gates = std::vector<NativeGate>;
using Cops = std::vector<ClassicalOp>;

Eigen::Matrix4cd kron1q(const Eigen::Matrix2cd& u, int q) {
    Eigen::Matrix2cd i2 = Eigen::Matrix2cd::Identity();
    const Eigen::Matrix2cd& a = q == 0 ? u : i2;
    const Eigen::Matrix2cd& b = q == 0 ? i2 : u;
    Eigen::Matrix4cd m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return m;
}

// Exact measurement distribution of a gate list from |00> with the classical
// corrections applied to the outcome bits.
Eigen::Vector4d dist4(const Gates& gates, const Cops& cops) {
    Eigen::Vector4cd psi = native_unitary(gates).col(0);
    Eigen::Vector4d out = Eigen::Vector4d::Zero();
    for (int idx = 0; idx < 4; ++idx) {
        int b[2] = {(idx >> 1) & 1, idx & 1};
        for (const ClassicalOp& op : cops) {
            if (op.kind == ClassicalOp::Xor) b[op.tgt] ^= b[op.src];
            else b[op.src] ^= 1;
        }
        out((b[0] << 1) | b[1]) += std::norm(psi(idx));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Single-qubit fusion (canonical form: at most one R per qubit per segment)

Gates canonicalize(const Gates& gates) {
    Gates out;
    Eigen::Matrix2cd buf[2] = {Eigen::Matrix2cd::Identity(), Eigen::Matrix2cd::Identity()};
    auto flush = [&](int q) {
        EulerZxz e = zxz_euler(buf[q]);
        buf[q].setIdentity();
        if (std::abs(rem2pi(e.b)) > 1e-10) out.push_back(NativeGate::r(q, rem2pi(-e.c), e.b));
        return e.a + e.c;
    };
    for (const NativeGate& g : gates) {
        switch (g.kind) {
        case NativeKind::R: buf[g.q0] = mat_r(g.phi, g.theta) * buf[g.q0]; break;
        case NativeKind::RZ: buf[g.q0] = mat_rz(g.theta) * buf[g.q0]; break;
        case NativeKind::MS: {
            if (g.q0 != 0 || g.q1 != 1)
                throw std::invalid_argument("optimizer expects entangling gates on qubits 0,1");
            double la = flush(0), lb = flush(1);
            out.push_back(
                NativeGate::ms(0, 1, rem2pi(g.phi - la), rem2pi(g.phip - lb), g.theta));
            buf[0] = mat_rz(la);
            buf[1] = mat_rz(lb);
            break;
        }
        }
    }
    flush(0); // trailing virtual Z rotations do not affect measurement
    flush(1);
    return out;
}

// ---------------------------------------------------------------------------
// Commutation passes

bool push_left(Gates& gates) {
    for (std::size_t i = 0; i < gates.size(); ++i) {
        if (gates[i].kind != NativeKind::MS) continue;
        for (std::size_t j = i + 1; j < gates.size(); ++j) {
            const NativeGate& h = gates[j];
            if (h.kind == NativeKind::MS) break;
            double ax = h.q0 == 0 ? gates[i].phi : gates[i].phip;
            bool later_ms = false;
            for (std::size_t k = j + 1; k < gates.size(); ++k)
                if (gates[k].kind == NativeKind::MS) later_ms = true;
            if (axis_match(h.phi, ax) && later_ms) {
                Gates ng(gates.begin(), gates.begin() + i);
                ng.push_back(h);
                ng.push_back(gates[i]);
                for (std::size_t k = i + 1; k < gates.size(); ++k)
                    if (k != j) ng.push_back(gates[k]);
                gates = std::move(ng);
                return true;
            }
        }
    }
    return false;
}

bool push_right(Gates& gates) {
    for (std::size_t j = 0; j < gates.size(); ++j) {
        const NativeGate g = gates[j];
        if (g.kind != NativeKind::R) continue;
        bool ms_before = false;
        for (std::size_t k = 0; k < j; ++k)
            if (gates[k].kind == NativeKind::MS) ms_before = true;
        if (!ms_before) continue;
        for (std::size_t i = j + 1; i < gates.size(); ++i) {
            const NativeGate& h = gates[i];
            if (h.kind == NativeKind::R && h.q0 == g.q0) break;
            if (h.kind == NativeKind::MS) {
                double ax = g.q0 == 0 ? h.phi : h.phip;
                if (axis_match(g.phi, ax)) {
                    Gates ng(gates.begin(), gates.begin() + j);
                    ng.insert(ng.end(), gates.begin() + j + 1, gates.begin() + i + 1);
                    ng.push_back(g);
                    ng.insert(ng.end(), gates.begin() + i + 1, gates.end());
                    gates = std::move(ng);
                    return true;
                }
                break;
            }
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Entangling-gate merging

std::optional<Gates> emb_merge(const NativeGate& m1, const NativeGate& m2) {
    double phip1 = m1.phip, th1 = m1.theta;
    double phip2 = m2.phip, th2 = m2.theta;
    // Align the qubit-0 axes mod pi using MS(phi+pi, phip, th) = MS(phi, phip, -th).
    double d = rem2pi(m2.phi - m1.phi);
    if (std::abs(d) < 1e-9) {
    } else if (std::abs(std::abs(d) - kPi) < 1e-9) {
        th2 = -th2;
    } else {
        return std::nullopt;
    }
    // The pair acts as a 2x2 rotation sequence embedded along the shared axis.
    Eigen::Matrix2cd u = mat_r(phip2 - phip1, th2) * mat_r(0.0, th1);
    EulerZxz e = zxz_euler(u);
    Gates out;
    out.push_back(NativeGate::ms(0, 1, m1.phi, rem2pi(phip1 - e.c), e.b));
    out.push_back(NativeGate::rz(1, e.a + e.c));
    return out;
}

std::optional<Gates> emb_merge1(const NativeGate& m1, const NativeGate& m2) {
    NativeGate s1 = NativeGate::ms(0, 1, m1.phip, m1.phi, m1.theta);
    NativeGate s2 = NativeGate::ms(0, 1, m2.phip, m2.phi, m2.theta);
    auto r = emb_merge(s1, s2);
    if (!r) return std::nullopt;
    const NativeGate& ms = (*r)[0];
    Gates out;
    out.push_back(NativeGate::ms(0, 1, ms.phip, ms.phi, ms.theta));
    out.push_back(NativeGate::rz(0, (*r)[1].theta));
    return out;
}

bool merge_pass(Gates& gates) {
    for (std::size_t i = 0; i + 1 < gates.size(); ++i) {
        if (gates[i].kind != NativeKind::MS || gates[i + 1].kind != NativeKind::MS) continue;
        for (auto mg : {emb_merge(gates[i], gates[i + 1]), emb_merge1(gates[i], gates[i + 1])}) {
            if (!mg) continue;
            Eigen::Matrix4cd u1 = native_unitary({gates[i], gates[i + 1]});
            Eigen::Matrix4cd u2 = native_unitary(*mg);
            Eigen::Matrix4cd d = u2.adjoint() * u1;
            cplx ph = d(0, 0);
            if (std::abs(std::abs(ph) - 1) < 1e-8 &&
                (d - ph * Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff() < 1e-8) {
                Gates ng(gates.begin(), gates.begin() + i);
                ng.insert(ng.end(), mg->begin(), mg->end());
                ng.insert(ng.end(), gates.begin() + i + 2, gates.end());
                gates = std::move(ng);
                return true;
            }
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Angle normalization of entangling gates

bool pi_extract(Gates& gates) {
    for (std::size_t i = 0; i < gates.size(); ++i) {
        const NativeGate& g = gates[i];
        if (g.kind != NativeKind::MS) continue;
        double th = rem2pi(g.theta);
        if (std::abs(th) > kPi / 2 + 1e-9) {
            double s = th > 0 ? 1.0 : -1.0;
            Gates ng(gates.begin(), gates.begin() + i);
            ng.push_back(NativeGate::ms(0, 1, g.phi, g.phip, th - s * kPi));
            ng.push_back(NativeGate::r(0, g.phi, s * kPi));
            ng.push_back(NativeGate::r(1, g.phip, s * kPi));
            ng.insert(ng.end(), gates.begin() + i + 1, gates.end());
            gates = std::move(ng);
            return true;
        }
        if (th < -1e-9) {
            gates[i] = NativeGate::ms(0, 1, rem2pi(g.phi + kPi), g.phip, -th);
            return true;
        }
    }
    return false;
}

// A trailing equatorial pi pulse inverts the Z outcome: replace by a NOT.
bool strip_trailing_pis(Gates& gates, Cops& cops) {
    bool any = false;
    bool changed = true;
    while (changed) {
        changed = false;
        int last_r[2] = {-1, -1};
        int last_ms = -1;
        for (std::size_t i = 0; i < gates.size(); ++i) {
            if (gates[i].kind == NativeKind::R) last_r[gates[i].q0] = int(i);
            else if (gates[i].kind == NativeKind::MS) last_ms = int(i);
        }
        for (int q = 0; q < 2 && !changed; ++q) {
            int i = last_r[q];
            if (i < 0 || i < last_ms) continue;
            if (std::abs(std::abs(rem2pi(gates[i].theta)) - kPi) < 1e-9) {
                gates.erase(gates.begin() + i);
                cops.push_back({ClassicalOp::Not, q, 0});
                changed = any = true;
            }
        }
    }
    return any;
}

// ---------------------------------------------------------------------------
// Trailing entangling-gate elimination

int last_ms_index(const Gates& gates) {
    int idx = -1;
    for (std::size_t i = 0; i < gates.size(); ++i)
        if (gates[i].kind == NativeKind::MS) idx = int(i);
    return idx;
}

bool rule1_eliminate(Gates& gates, const Cops& cops) {
    int i = last_ms_index(gates);
    if (i < 0) return false;
    Eigen::Vector4d ref = dist4(gates, cops);
    Gates cand(gates.begin(), gates.begin() + i);
    cand.insert(cand.end(), gates.begin() + i + 1, gates.end());
    if ((dist4(cand, cops) - ref).cwiseAbs().maxCoeff() < 1e-12) {
        gates = std::move(cand);
        return true;
    }
    return false;
}

Eigen::Vector3d bloch_vec(const Eigen::Vector2cd& w) {
    cplx c = std::conj(w(0)) * w(1);
    return {2 * c.real(), 2 * c.imag(), std::norm(w(0)) - std::norm(w(1))};
}

// Single pulse taking the pure state omega to outcome-1 probability p1.
std::optional<Gates> synth_rot(int q, const Eigen::Vector2cd& omega, double p1) {
    Eigen::Vector3d w = bloch_vec(omega);
    double weq = std::hypot(w(0), w(1));
    double zt = std::clamp(1 - 2 * p1, -1.0, 1.0);
    double delta = std::atan2(w(2), weq);
    double alpha = std::atan2(w(1), w(0));
    for (double psi : {alpha + kPi / 2, alpha - kPi / 2}) {
        for (double beta : {std::asin(zt) - delta, kPi - std::asin(zt) - delta}) {
            Eigen::Vector2cd u = mat_r(psi, beta) * omega;
            if (std::abs(std::norm(u(1)) - p1) < 1e-12) {
                if (std::abs(rem2pi(beta)) < 1e-12) return Gates{};
                return Gates{NativeGate::r(q, rem2pi(psi), rem2pi(beta))};
            }
        }
    }
    return std::nullopt;
}

bool xor_eliminate(Gates& gates, Cops& cops, const std::string& basis) {
    if (basis.find('Y') != std::string::npos) return false;
    int i = last_ms_index(gates);
    if (i < 0) return false;
    Eigen::Vector4d ref = dist4(gates, cops);

    // The state entering the last entangling gate must be a product state.
    Eigen::Vector4cd psi = native_unitary(Gates(gates.begin(), gates.begin() + i)).col(0);
    Eigen::Matrix2cd m;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) m(a, b) = psi(2 * a + b);
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues()(1) > 1e-10) return false;
    Eigen::Vector2cd om0 = svd.matrixU().col(0);
    Eigen::Vector2cd om1 = svd.matrixV().col(0).conjugate();

    double p0 = ref(2) + ref(3);   // P(b0 = 1)
    double p1 = ref(1) + ref(3);   // P(b1 = 1)
    double ppar = ref(1) + ref(2); // P(b0 xor b1 = 1)
    struct Cand {
        Gates rots;
        Cops fix;
    };
    std::vector<Cand> cands;
    auto add = [&](std::optional<Gates> r0, std::optional<Gates> r1, Cops fix) {
        if (!r0 || !r1) return;
        Gates g = *r0;
        g.insert(g.end(), r1->begin(), r1->end());
        cands.push_back({std::move(g), std::move(fix)});
    };
    if (std::abs(ref(3) - p0 * p1) < 1e-12)
        add(synth_rot(0, om0, p0), synth_rot(1, om1, p1), {});
    if (std::abs(ref(2) - p0 * ppar) < 1e-12)
        add(synth_rot(0, om0, p0), synth_rot(1, om1, ppar), {{ClassicalOp::Xor, 0, 1}});
    if (std::abs(ref(1) - p1 * ppar) < 1e-12)
        add(synth_rot(0, om0, ppar), synth_rot(1, om1, p1), {{ClassicalOp::Xor, 1, 0}});

    for (auto& c : cands) {
        Gates cand(gates.begin(), gates.begin() + i);
        cand.insert(cand.end(), c.rots.begin(), c.rots.end());
        if ((dist4(cand, c.fix) - ref).cwiseAbs().maxCoeff() < 1e-12) {
            gates = std::move(cand);
            cops = std::move(c.fix);
            return true;
        }
    }
    return false;
}

} // namespace

// ---------------------------------------------------------------------------
// Public API

EulerZxz zxz_euler(const Eigen::Matrix2cd& u_in) {
    Eigen::Matrix2cd u = u_in / std::sqrt(u_in.determinant());
    double cb = std::abs(u(0, 0)), sb = std::abs(u(0, 1));
    EulerZxz e;
    e.b = 2 * std::atan2(sb, cb);
    double apc = cb > 1e-12 ? -2 * std::arg(u(0, 0)) : 0.0;
    double amc = sb > 1e-12 ? -2 * std::arg(kI * u(0, 1)) : 0.0;
    e.a = (apc + amc) / 2;
    e.c = (apc - amc) / 2;
    return e;
}

Eigen::Matrix4cd native_unitary(const std::vector<NativeGate>& gates) {
    Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
    for (const NativeGate& g : gates) {
        switch (g.kind) {
        case NativeKind::R: u = kron1q(mat_r(g.phi, g.theta), g.q0) * u; break;
        case NativeKind::RZ: u = kron1q(mat_rz(g.theta), g.q0) * u; break;
        case NativeKind::MS: u = mat_ms(g.phi, g.phip, g.theta) * u; break;
        }
    }
    return u;
}

NativeCircuit transpile(const Circuit& c) {
    NativeCircuit out;
    out.n = c.n;
    auto emit_rz = [&](int q, double t) {
        out.gates.push_back(NativeGate::r(q, 0.0, kPi));
        out.gates.push_back(NativeGate::r(q, t / 2, kPi));
    };
    auto emit_h = [&](int q) {
        out.gates.push_back(NativeGate::r(q, kPi / 2, kPi / 2));
        out.gates.push_back(NativeGate::r(q, 0.0, kPi));
    };
    auto emit = [&](const Gate& g) {
        switch (g.kind) {
        case GateKind::RX: out.gates.push_back(NativeGate::r(g.q0, 0.0, g.angle)); break;
        case GateKind::RY: out.gates.push_back(NativeGate::r(g.q0, kPi / 2, g.angle)); break;
        case GateKind::RZ: emit_rz(g.q0, g.angle); break;
        case GateKind::H: emit_h(g.q0); break;
        case GateKind::S: emit_rz(g.q0, kPi / 2); break;
        case GateKind::SDG: emit_rz(g.q0, -kPi / 2); break;
        case GateKind::CNOT: {
            int ctl = g.q0, tgt = g.q1;
            // Controlled-phase form: single entangling pulse dressed on the
            // control, plus a quarter X pulse on the target.
            out.gates.push_back(NativeGate::r(ctl, kPi / 2, -kPi / 2));
            out.gates.push_back(
                NativeGate::ms(std::min(ctl, tgt), std::max(ctl, tgt), 0.0, 0.0, kPi / 2));
            out.gates.push_back(NativeGate::r(ctl, kPi / 2, kPi / 2));
            emit_rz(ctl, kPi / 2);
            out.gates.push_back(NativeGate::r(tgt, 0.0, kPi / 2));
            break;
        }
        default: throw std::invalid_argument("unsupported gate kind");
        }
    };
    for (const Gate& g : c.gates) emit(g);
    for (int q = 0; q < c.n && q < int(c.measure_prep.size()); ++q) {
        char b = c.measure_prep[q];
        if (b == 'X') {
            emit_h(q);
        } else if (b == 'Y') {
            emit_rz(q, -kPi / 2);
            emit_h(q);
        } else if (b != 'Z') {
            throw std::invalid_argument("unknown measurement basis letter");
        }
    }
    return out;
}

NativeCircuit optimize(const NativeCircuit& nc, const std::string& basis,
                       std::map<std::string, int>* rules_fired) {
    if (nc.n != 2) throw std::invalid_argument("optimizer supports two-qubit circuits");
    auto fire = [&](const char* name) {
        if (rules_fired) ++(*rules_fired)[name];
    };
    Gates gates = canonicalize(nc.gates);
    Cops cops = nc.fixups;
    for (int iter = 0; iter < 200; ++iter) {
        if (push_left(gates)) {
            fire("push_left");
            gates = canonicalize(gates);
            continue;
        }
        if (merge_pass(gates)) {
            fire("merge");
            gates = canonicalize(gates);
            continue;
        }
        if (push_right(gates)) {
            fire("push_right");
            gates = canonicalize(gates);
            continue;
        }
        if (pi_extract(gates)) {
            fire("pi_extract");
            gates = canonicalize(gates);
            continue;
        }
        if (strip_trailing_pis(gates, cops)) {
            fire("strip_pi");
            continue;
        }
        if (rule1_eliminate(gates, cops)) {
            fire("ms_eliminate");
            continue;
        }
        if (xor_eliminate(gates, cops, basis)) {
            fire("ms_eliminate_xor");
            continue;
        }
        break;
    }
    NativeCircuit out;
    out.n = nc.n;
    out.gates = canonicalize(gates);
    out.fixups = cops;
    return out;
}

NativeCircuit quantize_params(const NativeCircuit& nc) {
    NativeCircuit out = nc;
    auto q3 = [](double v) { return std::nearbyint(v * 1000.0) / 1000.0; };
    for (NativeGate& g : out.gates) {
        g.phi = q3(g.phi);
        g.phip = q3(g.phip);
        g.theta = q3(g.theta);
    }
    return out;
}

CompileResult compile_circuit(const Circuit& c, const std::string& basis, bool quantize) {
    CompileResult res;
    static const std::map<GateKind, std::string> names = {
        {GateKind::RX, "RX"}, {GateKind::RY, "RY"},   {GateKind::RZ, "RZ"},
        {GateKind::H, "H"},   {GateKind::S, "S"},     {GateKind::SDG, "SDG"},
        {GateKind::CNOT, "CNOT"}};
    for (const Gate& g : c.gates) ++res.report.input_counts[names.at(g.kind)];
    res.circuit = optimize(transpile(c), basis, &res.report.rules_fired);
    if (quantize) {
        res.circuit = quantize_params(res.circuit);
        res.report.rounding_applied = true;
    }
    for (const NativeGate& g : res.circuit.gates)
        (g.kind == NativeKind::MS ? res.report.output_2q : res.report.output_1q)++;
    return res;
}

EquivalenceReport equivalence_check(
    const std::vector<std::pair<NativeCircuit, NativeCircuit>>& pairs,
    const std::vector<std::string>& bases, double tol) {
    EquivalenceReport rep;
    rep.bases = bases;
    rep.tol = tol;
    rep.pass = true;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        StateVector init = StateVector::zero_state(pairs[k].first.n);
        double tv = total_variation(exact_distribution(pairs[k].first, init),
                                    exact_distribution(pairs[k].second, init));
        rep.distances.push_back(tv);
        if (tv >= tol) rep.pass = false;
    }
    return rep;
}

EquivalenceReport equivalence_check(const std::vector<Eigen::VectorXd>& a,
                                    const std::vector<Eigen::VectorXd>& b,
                                    const std::vector<std::string>& bases, double tol) {
    EquivalenceReport rep;
    rep.bases = bases;
    rep.tol = tol;
    rep.pass = true;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double tv = 0.5 * (a[k] - b[k]).cwiseAbs().sum();
        rep.distances.push_back(tv);
        if (tv >= tol) rep.pass = false;
    }
    return rep;
}

std::string CompileReport::to_text() const {
    std::ostringstream os;
    os << "input:";
    for (const auto& [k, v] : input_counts) os << ' ' << k << '=' << v;
    os << "\noutput: 1q=" << output_1q << " 2q=" << output_2q << "\nrules:";
    for (const auto& [k, v] : rules_fired) os << ' ' << k << '=' << v;
    os << "\nrounding: " << (rounding_applied ? "yes" : "no") << '\n';
    return os.str();
}

std::string EquivalenceReport::to_text() const {
    std::ostringstream os;
    os.precision(6);
    for (std::size_t k = 0; k < distances.size(); ++k)
        os << (k < bases.size() ? bases[k] : "case") << " tv " << distances[k] << '\n';
    os << "tol " << tol << " pass " << (pass ? "yes" : "no") << '\n';
    return os.str();
}

} // namespace iondmet
