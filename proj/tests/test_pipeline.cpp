#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "iondmet/pipeline.hpp"

using namespace iondmet;

namespace {

const ReferenceData& data() {
    static ReferenceData d = load_reference_data();
    return d;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("run configuration rejects empty sampling plans") {
    RunConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.shots = 0;
    CHECK_THROWS(cfg.validate());
    cfg.shots = 100;
    cfg.resamples = 0;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("exact expectations agree with the Pauli operator averages") {
    StateVector psi = ansatz_state(optimal_ansatz(data().at(1.1)));
    auto exps = exact_expectations(psi);
    REQUIRE(exps.size() == 9);
    auto op_exp = [&](const std::string& letters) {
        PauliSum op(2);
        op.add(PauliString(letters), 1.0);
        return expectation(op, psi);
    };
    CHECK(exps.at("XX") == doctest::Approx(op_exp("XX")).epsilon(1e-12));
    CHECK(exps.at("YY") == doctest::Approx(op_exp("YY")).epsilon(1e-12));
    CHECK(exps.at("ZZ") == doctest::Approx(op_exp("ZZ")).epsilon(1e-12));
    CHECK(exps.at("XZ") == doctest::Approx(op_exp("XZ")).epsilon(1e-12));
    CHECK(exps.at("ZX") == doctest::Approx(op_exp("ZX")).epsilon(1e-12));
    CHECK(exps.at("X0") == doctest::Approx(op_exp("XI")).epsilon(1e-12));
    CHECK(exps.at("X1") == doctest::Approx(op_exp("IX")).epsilon(1e-12));
    CHECK(exps.at("Z0") == doctest::Approx(op_exp("ZI")).epsilon(1e-12));
    CHECK(exps.at("Z1") == doctest::Approx(op_exp("IZ")).epsilon(1e-12));
}

TEST_CASE("exact-mode curve reproduces the deterministic energy column") {
    RunConfig cfg;
    cfg.exact = true;
    auto rows = run_curve(cfg, data());
    REQUIRE(rows.size() == 5);
    for (const auto& row : rows) {
        const auto& ent = data().at(row.r);
        CHECK(std::abs(row.e_exp - ent.e_t) < 1e-5);
        CHECK(row.e_pur == doctest::Approx(row.e_exp).epsilon(1e-9));
        CHECK(row.sigma_exp == 0.0);
        CHECK(row.sigma_pur == 0.0);
        // The chemical-accuracy verdict is decided by the stored FCI column.
        bool expect_within = std::abs(ent.e_t - ent.e_fci) <= kChemicalAccuracy;
        CHECK(row.exp_within == expect_within);
        CHECK(row.pur_within == expect_within);
    }
}

TEST_CASE("curve CSV is byte-identical for a fixed configuration") {
    RunConfig cfg;
    cfg.r_values = {1.1};
    cfg.shots = 2000;
    cfg.seed = 9;
    cfg.noise_p01 = 0.01;
    cfg.noise_p10 = 0.02;
    cfg.resamples = 80;
    std::string a = curve_csv(run_curve(cfg, data()));
    std::string b = curve_csv(run_curve(cfg, data()));
    CHECK(a == b);

    cfg.seed = 10;
    std::string c = curve_csv(run_curve(cfg, data()));
    CHECK(a != c);
}

TEST_CASE("curve CSV carries the documented header and 6-decimal energies") {
    RunConfig cfg;
    cfg.exact = true;
    cfg.r_values = {0.7};
    std::string csv = curve_csv(run_curve(cfg, data()));
    std::istringstream is(csv);
    std::string header, row;
    std::getline(is, header);
    CHECK(header ==
          "R,E_HF,E_FCI,E_T,E_exp,sigma_exp,E_purified,sigma_purified,"
          "exp_within_chem_acc,purified_within_chem_acc");
    std::getline(is, row);
    CHECK(row.substr(0, 4) == "0.7,");
    CHECK(row.find("-0.460015") != std::string::npos); // deterministic column
}

TEST_CASE("sampled curve lands near the deterministic value with finite spread") {
    RunConfig cfg;
    cfg.r_values = {1.1};
    cfg.shots = 5000;
    cfg.seed = 4;
    cfg.noise_p01 = cfg.noise_p10 = 0.005;
    cfg.resamples = 120;
    auto rows = run_curve(cfg, data());
    REQUIRE(rows.size() == 1);
    const auto& row = rows.front();
    CHECK(row.sigma_exp > 0.0);
    CHECK(row.sigma_pur > 0.0);
    CHECK(std::abs(row.e_exp - data().at(1.1).e_t) < 5 * row.sigma_exp);
}

TEST_CASE("histogram streams are independent but reproducible") {
    RunConfig cfg;
    cfg.shots = 1000;
    cfg.seed = 21;
    auto circuits = compiled_basis_circuits(data().at(0.7));
    auto a = sample_basis_histograms(circuits, cfg, 0);
    auto b = sample_basis_histograms(circuits, cfg, 0);
    auto c = sample_basis_histograms(circuits, cfg, 1);
    CHECK(a.at("ZZ").counts == b.at("ZZ").counts);
    bool any_diff = false;
    for (const auto& [basis, h] : a) any_diff |= h.counts != c.at(basis).counts;
    CHECK(any_diff);
}

TEST_CASE("command entry points write their artifacts") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "iondmet_pipeline_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    RunConfig cfg;
    cfg.r_values = {1.1};
    cfg.exact = true;
    cfg.out_dir = dir.string();

    std::ostringstream os;
    CHECK(cmd_curve(cfg, os) == 0);
    std::string csv = slurp(dir / "curve.csv");
    CHECK(csv.find("1.1,") != std::string::npos);

    std::ostringstream os2;
    CHECK(cmd_compile(cfg, "", os2) == 0);
    CHECK(fs::exists(dir / "pre_r1.1_ZZ.txt"));
    CHECK(fs::exists(dir / "post_r1.1_YY.txt"));
    std::string post = slurp(dir / "post_r1.1_YY.txt");
    CHECK(post.find("MS") != std::string::npos);

    std::ostringstream os3;
    CHECK(cmd_entropy(cfg, os3) == 0);
    CHECK(os3.str().find("S_mo") != std::string::npos);

    std::ostringstream os4;
    CHECK(cmd_dmet_toy(cfg, os4) == 0);
    CHECK(os4.str().find("total") != std::string::npos);

    fs::remove_all(dir);
}

TEST_CASE("vqe command reports every requested bond length") {
    RunConfig cfg;
    cfg.r_values = {0.7, 1.0};
    std::ostringstream os;
    int rc = cmd_vqe(cfg, os);
    CHECK(rc == 0);
    CHECK(os.str().find("R=0.7") != std::string::npos);
    CHECK(os.str().find("R=1.0") != std::string::npos);
    CHECK(os.str().find("ok") != std::string::npos);
}
