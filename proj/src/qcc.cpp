#include "iondmet/qcc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace iondmet {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr cplx kI{0.0, 1.0};
} // namespace

// ---------------------------------------------------------------------------
// L-BFGS

namespace {

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double h) {
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd xp = x;
    for (int i = 0; i < x.size(); ++i) {
        double xi = x(i);
        xp(i) = xi + h;
        double fp = f(xp);
        xp(i) = xi - h;
        double fm = f(xp);
        xp(i) = xi;
        g(i) = (fp - fm) / (2 * h);
    }
    return g;
}

} // namespace

MinimizeResult lbfgs_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                              const Eigen::VectorXd& x0, const MinimizeOptions& opt) {
    MinimizeResult res;
    Eigen::VectorXd x = x0;
    double fx = f(x);
    Eigen::VectorXd g = fd_gradient(f, x, opt.fd_step);
    std::vector<Eigen::VectorXd> s_hist, y_hist;
    std::vector<double> rho_hist;

    for (int iter = 0; iter < opt.max_iter; ++iter) {
        res.iterations = iter + 1;
        if (g.lpNorm<Eigen::Infinity>() < opt.gtol) {
            res.converged = true;
            break;
        }
        // Two-loop recursion for the search direction.
        Eigen::VectorXd q = g;
        const int m = int(s_hist.size());
        std::vector<double> alpha(m);
        for (int i = m - 1; i >= 0; --i) {
            alpha[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha[i] * y_hist[i];
        }
        if (m > 0) {
            double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (int i = 0; i < m; ++i) {
            double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd d = -q;
        double slope = g.dot(d);
        if (slope >= 0) { // fall back to steepest descent
            d = -g;
            slope = -g.squaredNorm();
        }

        // Armijo backtracking.
        double step = 1.0;
        double fnew = fx;
        Eigen::VectorXd xnew = x;
        bool found = false;
        for (int ls = 0; ls < 40; ++ls) {
            xnew = x + step * d;
            fnew = f(xnew);
            if (fnew <= fx + 1e-4 * step * slope) {
                found = true;
                break;
            }
            step *= 0.5;
        }
        if (!found) {
            res.converged = true; // no further decrease representable
            break;
        }

        Eigen::VectorXd gnew = fd_gradient(f, xnew, opt.fd_step);
        Eigen::VectorXd s = xnew - x;
        Eigen::VectorXd y = gnew - g;
        double sy = s.dot(y);
        if (sy > 1e-12) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (int(s_hist.size()) > opt.memory) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
        }
        double rel = std::abs(fx - fnew) / std::max({std::abs(fx), std::abs(fnew), 1.0});
        x = xnew;
        fx = fnew;
        g = gnew;
        if (rel < opt.ftol) {
            res.converged = true;
            break;
        }
    }
    res.x = x;
    res.f = fx;
    return res;
}

// ---------------------------------------------------------------------------
// Mean field

StateVector mean_field_state(const MeanFieldParams& mf) {
    const int n = mf.n_qubits();
    if (int(mf.phi.size()) != n) throw std::invalid_argument("theta/phi size mismatch");
    StateVector sv = StateVector::zero_state(n);
    for (int q = 0; q < n; ++q) {
        Eigen::Matrix2cd u;
        double th = mf.theta[q], ph = mf.phi[q];
        u << std::cos(th / 2), -std::sin(th / 2) * std::exp(-kI * ph),
            std::exp(kI * ph) * std::sin(th / 2), std::cos(th / 2);
        apply_1q(sv, u, q);
    }
    return sv;
}

MeanFieldResult optimize_mean_field(const PauliSum& h, int starts, std::uint64_t seed) {
    const int n = h.n_qubits();
    auto energy = [&](const Eigen::VectorXd& x) {
        MeanFieldParams mf;
        mf.theta.assign(x.data(), x.data() + n);
        mf.phi.assign(x.data() + n, x.data() + 2 * n);
        return expectation(h, mean_field_state(mf));
    };
    CounterRng rng(seed);
    MinimizeResult best;
    best.f = std::numeric_limits<double>::infinity();
    for (int s = 0; s < starts; ++s) {
        Eigen::VectorXd x0(2 * n);
        for (int i = 0; i < n; ++i) x0(i) = rng.uniform(0, kPi);
        for (int i = 0; i < n; ++i) x0(n + i) = rng.uniform(0, 2 * kPi);
        MinimizeResult r = lbfgs_minimize(energy, x0);
        if (r.f < best.f) best = r;
    }
    MeanFieldResult out;
    out.params.theta.assign(best.x.data(), best.x.data() + n);
    out.params.phi.assign(best.x.data() + n, best.x.data() + 2 * n);
    out.energy = best.f;
    out.converged = best.converged;
    return out;
}

// ---------------------------------------------------------------------------
// Screening

ScreeningReport screen_generators(const PauliSum& h, const MeanFieldParams& mf) {
    const int n = mf.n_qubits();
    StateVector psi = mean_field_state(mf);
    // Candidates: all non-identity strings with an odd number of Y letters
    // (the purely imaginary strings; the others have zero gradient for real
    // Hamiltonian coefficients).
    std::vector<PauliString> cands;
    std::string letters = "IXYZ";
    const int total = int(std::pow(4, n));
    for (int code = 1; code < total; ++code) {
        int c = code, ny = 0;
        std::string s(n, 'I');
        for (int q = 0; q < n; ++q) {
            s[q] = letters[c % 4];
            if (s[q] == 'Y') ++ny;
            c /= 4;
        }
        if (ny % 2 == 1) cands.emplace_back(s);
    }

    ScreeningReport rep;
    for (const PauliString& p : cands) {
        double grad = commutator_expectation(h, p, psi);
        rep.candidates.emplace_back(p, std::abs(grad));
    }
    std::sort(rep.candidates.begin(), rep.candidates.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    // Group by flip index: the set of qubits where the letter flips occupation.
    std::map<std::vector<int>, std::vector<PauliString>> groups;
    for (const auto& [p, g] : rep.candidates) {
        if (g < 1e-12) continue;
        std::vector<int> flips;
        for (int q = 0; q < n; ++q)
            if (p.letters[q] == 'X' || p.letters[q] == 'Y') flips.push_back(q);
        groups[flips].push_back(p);
    }
    rep.flip_index_groups.assign(groups.begin(), groups.end());
    return rep;
}

// ---------------------------------------------------------------------------
// Ansatz circuit

Circuit build_ansatz_circuit(const AnsatzSpec& spec) {
    const int n = spec.mf.n_qubits();
    if (spec.generators.size() != spec.tau.size())
        throw std::invalid_argument("generator/amplitude count mismatch");
    Circuit c;
    c.n = n;
    for (int q = 0; q < n; ++q) {
        c.add(GateKind::RZ, q, spec.mf.phi[q]);
        c.add(GateKind::RY, q, spec.mf.theta[q]);
    }
    for (std::size_t k = 0; k < spec.generators.size(); ++k) {
        const PauliString& p = spec.generators[k];
        if (p.n_qubits() != n) throw std::invalid_argument("generator length mismatch");
        std::vector<int> support;
        for (int q = 0; q < n; ++q)
            if (p.letters[q] != 'I') support.push_back(q);
        if (support.empty()) continue; // exp(-i tau/2) is a global phase
        // Basis-in: X -> H, Y -> RX(pi/2) rotates the axis onto Z.
        for (int q : support) {
            if (p.letters[q] == 'X') c.add(GateKind::H, q);
            else if (p.letters[q] == 'Y') c.add(GateKind::RX, q, kPi / 2);
        }
        for (std::size_t i = 0; i + 1 < support.size(); ++i)
            c.add_cnot(support[i], support[i + 1]);
        c.add(GateKind::RZ, support.back(), spec.tau[k]);
        for (std::size_t i = support.size() - 1; i-- > 0;)
            c.add_cnot(support[i], support[i + 1]);
        for (int q : support) {
            if (p.letters[q] == 'X') c.add(GateKind::H, q);
            else if (p.letters[q] == 'Y') c.add(GateKind::RX, q, -kPi / 2);
        }
    }
    return c;
}

StateVector ansatz_state(const AnsatzSpec& spec) {
    return run(build_ansatz_circuit(spec), StateVector::zero_state(spec.mf.n_qubits()));
}

// ---------------------------------------------------------------------------
// VQE

VqeResult vqe_minimize(const PauliSum& h, const AnsatzSpec& spec0, double ftol, double gtol,
                       int max_iter) {
    const int n = spec0.mf.n_qubits();
    const int ng = int(spec0.generators.size());
    auto unpack = [&](const Eigen::VectorXd& x) {
        AnsatzSpec s = spec0;
        s.mf.theta.assign(x.data(), x.data() + n);
        s.mf.phi.assign(x.data() + n, x.data() + 2 * n);
        s.tau.assign(x.data() + 2 * n, x.data() + 2 * n + ng);
        return s;
    };
    auto energy = [&](const Eigen::VectorXd& x) { return expectation(h, ansatz_state(unpack(x))); };

    Eigen::VectorXd x0(2 * n + ng);
    for (int i = 0; i < n; ++i) x0(i) = spec0.mf.theta[i];
    for (int i = 0; i < n; ++i) x0(n + i) = spec0.mf.phi[i];
    for (int i = 0; i < ng; ++i) x0(2 * n + i) = spec0.tau[i];

    MinimizeOptions opt;
    opt.ftol = ftol;
    opt.gtol = gtol;
    opt.max_iter = max_iter;
    MinimizeResult r = lbfgs_minimize(energy, x0, opt);

    VqeResult out;
    out.spec = unpack(r.x);
    out.energy = r.f;
    out.converged = r.converged;
    return out;
}

// ---------------------------------------------------------------------------
// Serialization

std::string AnsatzSpec::to_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "theta";
    for (double t : mf.theta) os << ' ' << t;
    os << "\nphi";
    for (double p : mf.phi) os << ' ' << p;
    os << '\n';
    for (std::size_t k = 0; k < generators.size(); ++k)
        os << "gen " << generators[k].letters << ' ' << tau[k] << '\n';
    return os.str();
}

AnsatzSpec AnsatzSpec::from_text(const std::string& text) {
    AnsatzSpec spec;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#') continue;
        if (tag == "theta") {
            double v;
            while (ls >> v) spec.mf.theta.push_back(v);
        } else if (tag == "phi") {
            double v;
            while (ls >> v) spec.mf.phi.push_back(v);
        } else if (tag == "gen") {
            std::string letters;
            double t;
            ls >> letters >> t;
            spec.generators.emplace_back(letters);
            spec.tau.push_back(t);
        }
    }
    return spec;
}

} // namespace iondmet
