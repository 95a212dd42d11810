#pragma once
#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "iondmet/dmet.hpp"
#include "iondmet/fermion.hpp"
#include "iondmet/statevector.hpp"

namespace iondmet {

struct ConfusionModel {
    std::vector<double> p01, p10; // per-qubit readout flip probabilities

    static ConfusionModel uniform(int n, double p01v, double p10v);
    bool trivial() const;
    void validate() const; // probabilities in [0, 0.5)
};

struct SpamResult {
    Eigen::VectorXd probs; // corrected probabilities, qubit 0 most significant
    bool clipped = false;  // negative entries were clipped and renormalized
};

SpamResult spam_correct(const Histogram& h, const ConfusionModel& m);
SpamResult spam_correct(const Eigen::VectorXd& freqs, const ConfusionModel& m);

// The nine expectations from the four basis histograms, with single-qubit
// terms pooled across every circuit that measures them.
std::map<std::string, double> expectations_from_histograms(
    const std::map<std::string, Histogram>& hists, const ConfusionModel& m);
std::map<std::string, double> expectations_from_probs(
    const std::map<std::string, Eigen::VectorXd>& probs);

struct PurifyResult {
    Eigen::Matrix<cplx, 16, 16> two_rdm;
    int iterations = 0;
    double residual = 0;
};

// Iterated cubic map P <- 3P^2 - 2P^3 on the half-normalized pair matrix
// until the idempotency residual drops below epsilon.
PurifyResult mcweeny_purify(const Eigen::Matrix<cplx, 16, 16>& two_rdm, double epsilon = 1e-2,
                            int max_iter = 100);

double purified_energy(const Eigen::Matrix<cplx, 16, 16>& two_rdm_pure,
                       const FragmentProblem& fp);

struct BootstrapResult {
    double mean = 0;
    double sigma = 0;
    int resamples = 0;
    std::vector<double> energies;
};

BootstrapResult bootstrap(const std::map<std::string, Histogram>& hists,
                          const FragmentProblem& fp, const ConfusionModel& m,
                          int resamples = 500, bool purify = true, std::uint64_t seed = 0);

// Error surface of the purified energy when the (<XZ>+<ZX>, <X0>+<X1>) sums
// are swept away from their exact values (equal split between the two terms).
struct SweepResult {
    std::vector<double> xs, ys;
    Eigen::MatrixXd abs_error_mha; // rows follow xs, cols follow ys; NaN = no convergence
};
SweepResult sweep_purification_landscape(const FragmentProblem& fp,
                                         const std::map<std::string, double>& exact,
                                         int grid = 41, double half_range = 0.5);

struct YySweepPoint {
    double yy = 0;
    double e_unpurified = 0;
    double e_purified = 0;
};
std::vector<YySweepPoint> sweep_yy(const FragmentProblem& fp,
                                   const std::map<std::string, double>& exact, double lo = 0.0,
                                   double hi = 0.5, int points = 101);

} // namespace iondmet
