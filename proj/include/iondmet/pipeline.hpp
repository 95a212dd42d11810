#pragma once
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "iondmet/mitigation.hpp"
#include "iondmet/refdata.hpp"

namespace iondmet {

constexpr double kChemicalAccuracy = 1.5936e-3; // hartree

struct RunConfig {
    std::vector<double> r_values = {0.7, 1.0, 1.1, 1.3, 1.6};
    std::uint64_t shots = 5000;
    std::uint64_t seed = 1;
    double noise_p01 = 0, noise_p10 = 0;
    int resamples = 500;
    bool exact = false;     // exact distributions instead of finite sampling
    std::string out_dir;    // empty: print to the stream only
    std::string data_dir;   // empty: compiled-in default

    void validate() const; // shots >= 1, resamples >= 1
};

// The nine expectation values of a two-qubit state.
std::map<std::string, double> exact_expectations(const StateVector& psi);

struct CurveRow {
    double r = 0;
    double e_hf = 0, e_fci = 0, e_t = 0;
    double e_exp = 0, sigma_exp = 0;
    double e_pur = 0, sigma_pur = 0;
    bool exp_within = false, pur_within = false;
};

// The four optimized basis circuits of one bond length (unrounded angles).
std::map<std::string, NativeCircuit> compiled_basis_circuits(const ReferenceEntry& e);

std::map<std::string, Histogram> sample_basis_histograms(
    const std::map<std::string, NativeCircuit>& circuits, const RunConfig& cfg,
    std::uint64_t stream);

std::vector<CurveRow> run_curve(const RunConfig& cfg, const ReferenceData& data);
std::string curve_csv(const std::vector<CurveRow>& rows);

int cmd_vqe(const RunConfig& cfg, std::ostream& os);
int cmd_curve(const RunConfig& cfg, std::ostream& os);
int cmd_entropy(const RunConfig& cfg, std::ostream& os);
int cmd_compile(const RunConfig& cfg, const std::string& basis, std::ostream& os);
int cmd_dmet_toy(const RunConfig& cfg, std::ostream& os);
int cmd_purify_sweep(const RunConfig& cfg, std::ostream& os);

} // namespace iondmet
