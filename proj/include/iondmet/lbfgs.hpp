#pragma once
#include <Eigen/Dense>
#include <functional>

namespace iondmet {

struct MinimizeResult {
    Eigen::VectorXd x;
    double f = 0;
    int iterations = 0;
    bool converged = false;
};

struct MinimizeOptions {
    double ftol = 1e-8;     // relative function decrease
    double gtol = 1e-6;     // gradient infinity norm
    int max_iter = 500;
    int memory = 10;
    double fd_step = 1e-6;  // central-difference gradient step
};

// Limited-memory quasi-Newton minimization with central finite-difference
// gradients and Armijo backtracking.
MinimizeResult lbfgs_minimize(const std::function<double(const Eigen::VectorXd&)>& f,
                              const Eigen::VectorXd& x0, const MinimizeOptions& opt = {});

} // namespace iondmet
