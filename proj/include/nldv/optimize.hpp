#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace nldv {

struct DescentOptions {
    int max_iter = 500;
    /// Stop when |grad|_inf falls below this.
    double grad_tol = 1e-8;
    int memory = 10;
};

struct DescentResult {
    Eigen::VectorXd x;
    double value = 0.0;
    double grad_norm = 0.0;  ///< sup-norm at x
    int iterations = 0;
    bool converged = false;
    std::string report;
    /// Objective value after each accepted step.
    std::vector<double> trace;
};

/// value(x, grad) returns f(x) and writes the gradient into grad (already sized).
/// The extended return type lets objectives that are small differences of
/// large sums keep their last digits.
using Objective = std::function<long double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// L-BFGS with a Wolfe line search (Ceres). The solver sees f(x) - f(x_start)
/// and is restarted from its last iterate (fresh curvature pairs, new
/// reference value) while the gradient test fails and steps still succeed.
/// Throws OptimizationError when the objective turns non-finite.
DescentResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x0, const DescentOptions& opts = {});

}  // namespace nldv
