#include "iondmet/refdata.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace iondmet {

namespace {

constexpr double kPi = std::numbers::pi;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open data file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::vector<std::string>> rows_of(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::vector<std::string> row;
        std::string tok;
        while (ls >> tok) {
            if (tok[0] == '#') break;
            row.push_back(tok);
        }
        if (!row.empty()) rows.push_back(row);
    }
    return rows;
}

std::string r_tag(double r) {
    std::ostringstream os;
    os.precision(1);
    os << std::fixed << r;
    return os.str();
}

} // namespace

const std::string& default_data_dir() {
    static const std::string dir = ION_DMET_DATA_DIR;
    return dir;
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

const ReferenceEntry& ReferenceData::at(double r) const {
    for (const ReferenceEntry& e : entries)
        if (std::abs(e.r - r) < 1e-9) return e;
    throw std::invalid_argument("no reference data for the requested bond length");
}

ReferenceData load_reference_data(const std::string& dir) {
    // Verify every file named in the index before trusting its contents.
    for (const auto& row : rows_of(read_file(dir + "/index.txt"))) {
        if (row.size() != 2) throw std::runtime_error("malformed data index");
        std::uint64_t expect = std::stoull(row[0], nullptr, 16);
        std::uint64_t got = fnv1a(read_file(dir + "/" + row[1]));
        if (got != expect) throw std::runtime_error("checksum mismatch for data file " + row[1]);
    }

    ReferenceData data;
    {
        auto rows = rows_of(read_file(dir + "/mo_coeff.txt"));
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) data.mo_coeff(i, j) = std::stod(rows[i][j]);
    }
    for (const auto& row : rows_of(read_file(dir + "/params.txt"))) {
        ReferenceEntry e;
        e.r = std::stod(row[0]);
        e.theta0 = std::stod(row[1]);
        e.theta1 = std::stod(row[2]);
        e.phi0 = std::stod(row[3]);
        e.phi1 = std::stod(row[4]);
        e.tau = std::stod(row[5]);
        e.e_qcc = std::stod(row[6]);
        e.gradient = std::stod(row[7]);
        data.entries.push_back(e);
    }
    auto entry = [&](const std::string& rs) -> ReferenceEntry& {
        double r = std::stod(rs);
        for (ReferenceEntry& e : data.entries)
            if (std::abs(e.r - r) < 1e-9) return e;
        throw std::runtime_error("data files disagree on the bond-length set");
    };
    for (const auto& row : rows_of(read_file(dir + "/reference_energies.txt"))) {
        ReferenceEntry& e = entry(row[0]);
        e.e_hf = std::stod(row[1]);
        e.e_fci = std::stod(row[2]);
        e.e_t = std::stod(row[3]);
        e.e_exp = std::stod(row[4]);
        e.sig_exp = std::stod(row[5]);
        e.e_pur = std::stod(row[6]);
        e.sig_pur = std::stod(row[7]);
    }
    for (const auto& row : rows_of(read_file(dir + "/entropies.txt"))) {
        ReferenceEntry& e = entry(row[0]);
        e.entropy_mo = std::stod(row[1]);
        e.entropy_fb = std::stod(row[2]);
    }
    for (const auto& row : rows_of(read_file(dir + "/circuit_tables.txt"))) {
        ReferenceEntry& e = entry(row[1]);
        std::vector<double> vals;
        for (std::size_t k = 2; k < row.size(); ++k) vals.push_back(std::stod(row[k]));
        if (row[0] == "pre") e.preopt = vals;
        else if (row[0] == "post_zz") e.postopt["ZZ"] = vals;
        else if (row[0] == "post_xz") e.postopt["XZ"] = vals;
        else if (row[0] == "post_xx") e.postopt["XX"] = vals;
        else if (row[0] == "post_yy") e.yy_theta = vals.at(0);
        else throw std::runtime_error("unknown circuit-table record: " + row[0]);
    }
    for (ReferenceEntry& e : data.entries) {
        std::string tag = r_tag(e.r);
        e.hamiltonian = PauliSum::from_text(read_file(dir + "/hamiltonians/r" + tag + ".txt"));
        e.energy_expression = PauliSum::from_text(read_file(dir + "/energy/r" + tag + ".txt"));
    }
    return data;
}

FragmentProblem fragment_problem(const ReferenceEntry& e) {
    FragmentProblem fp;
    fp.hamiltonian = e.hamiltonian;
    fp.energy_expression = e.energy_expression;
    // Electron count on the fragment orbital: n_1a + n_1b = 1 + (Z0 + Z1)/2
    // under the two-electron sector map.
    PauliSum n(2);
    n.set_constant(1.0);
    n.add(PauliString("ZI"), 0.5);
    n.add(PauliString("IZ"), 0.5);
    fp.number_operator = n;
    fp.r_label = e.r;
    return fp;
}

AnsatzSpec optimal_ansatz(const ReferenceEntry& e) {
    AnsatzSpec spec;
    spec.mf.theta = {e.theta0, e.theta1};
    spec.mf.phi = {e.phi0, e.phi1};
    spec.generators = {PauliString("XY")};
    spec.tau = {e.tau};
    return spec;
}

Circuit reference_preopt_circuit(const ReferenceEntry& e, const std::string& basis) {
    if (e.preopt.size() != 7) throw std::invalid_argument("pre-optimization table incomplete");
    const std::vector<double>& t = e.preopt;
    Circuit c;
    c.n = 2;
    c.add(GateKind::RZ, 0, t[0]);
    c.add(GateKind::RY, 0, t[1]);
    c.add(GateKind::RZ, 1, t[2]);
    c.add(GateKind::RY, 1, t[3]);
    c.add(GateKind::H, 0);
    c.add(GateKind::RX, 1, t[4]);
    c.add_cnot(0, 1);
    c.add(GateKind::RZ, 1, t[5]);
    c.add_cnot(0, 1);
    c.add(GateKind::RX, 1, t[6]);
    c.add(GateKind::H, 0);
    c.measure_prep = basis;
    return c;
}

NativeCircuit reference_postopt_circuit(const ReferenceEntry& e, const std::string& basis) {
    auto it = e.postopt.find(basis);
    if (it == e.postopt.end())
        throw std::invalid_argument("no published post-optimization shape for basis " + basis);
    const std::vector<double>& a = it->second;
    NativeCircuit nc;
    nc.n = 2;
    if (basis == "ZZ") {
        nc.gates.push_back(NativeGate::r(0, a.at(0), kPi / 2));
        nc.gates.push_back(NativeGate::r(0, a.at(1), kPi / 2));
        nc.fixups.push_back({ClassicalOp::Xor, 0, 1});
    } else { // XZ and XX share the pulse layout; XX adds the parity fixup
        nc.gates.push_back(NativeGate::r(0, a.at(0), kPi / 2));
        nc.gates.push_back(NativeGate::r(1, a.at(1), kPi / 2));
        nc.gates.push_back(NativeGate::r(1, a.at(2), kPi / 2));
        if (basis == "XX") nc.fixups.push_back({ClassicalOp::Xor, 0, 1});
    }
    return nc;
}

IntegralSet load_toy_integrals(const std::string& dir) {
    return IntegralSet::from_text(read_file(dir + "/toy/integrals.txt"));
}

MeanFieldReference toy_mean_field(const IntegralSet& ints, int n_occ) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ints.h);
    MeanFieldReference mf;
    mf.mo_coeff = es.eigenvectors();
    mf.n_occ = n_occ;
    return mf;
}

} // namespace iondmet
