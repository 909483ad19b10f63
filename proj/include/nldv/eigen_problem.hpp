#pragma once

#include "nldv/discretize.hpp"
#include "nldv/nonlocal_ops.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace nldv {

/// Principal eigenpair of the discrete operator: M phi = -lambda phi with
/// lambda of smallest real part and phi > 0, sup-normalized.
struct EigenPair {
    double lambda1 = 0.0;
    GridFunction phi1;
    double residual = 0.0;  ///< |M phi + lambda phi|_inf / |phi|_inf
    int iterations = 0;
    /// Collatz-Wielandt bracket of the last iterate.
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    std::vector<std::string> warnings;
};

/// Shifted inverse power iteration: (M + sigma) u_{k+1} = -u_k with the shift
/// kept below lambda_1 by the Collatz-Wielandt lower bound, so every iterate
/// stays positive. Stops when the bracket [min(-M u/u), max(-M u/u)] is
/// narrower than tol (relative to max(1, |lambda|)).
///
/// Throws IterationError when max_iter is reached and PositivityError when
/// the limit is sign-changing (possible once osc(h) >= 1).
EigenPair principal_eigenpair(const AssembledOperator& op, double tol = 1e-10, int max_iter = 500);

/// Dense oracle: eigenvalue of -M with smallest real part among the real
/// eigenvalues whose eigenvector has one sign.
struct DenseEigen {
    double lambda1 = 0.0;
    Eigen::VectorXd phi;         ///< positive, sup-normalized
    double imag_of_minimum = 0.0;  ///< imaginary part of the overall smallest-real-part eigenvalue
};
DenseEigen dense_principal_eigenpair(const AssembledOperator& op);

/// Positive left eigenvector psi (M^T psi = -lambda psi), sum-normalized.
Eigen::VectorXd left_principal_eigenvector(const AssembledOperator& op, const EigenPair& pair);

/// The measure mu* = phi psi / sum(phi psi), at which the min-max is attained.
Eigen::VectorXd optimal_measure(const AssembledOperator& op, const EigenPair& pair);

/// min_i (-M phi)_i / phi_i: the largest lambda with M phi <= -lambda phi.
double admissible_lambda(const AssembledOperator& op, const Eigen::VectorXd& phi);

struct SupCheck {
    bool admissible = false;
    /// min_i ((-M phi)_i / phi_i - lambda); nonnegative iff admissible.
    double margin = 0.0;
};

/// Checks M phi <= -lambda phi row by row. Throws InputError unless phi > 0.
SupCheck sup_characterization_check(const AssembledOperator& op, const Eigen::VectorXd& phi, double lambda);

/// min over mu of max over phi of sum_i mu_i (-M phi)_i / phi_i.
/// Measures must be probability vectors and test functions positive
/// (InputError otherwise).
double minmax_value(const AssembledOperator& op, const std::vector<Eigen::VectorXd>& measures,
                    const std::vector<Eigen::VectorXd>& tests);

/// Inverse power iterates u_0 = 1, u_{k+1} = (sigma - M)^{-1} u_k (sigma above
/// the coercivity shift keeps them positive); the first `count` of them.
std::vector<Eigen::VectorXd> power_iterates(const AssembledOperator& op, int count);

/// The comparison counterexample on the line: u = (1 - x^2)_+^{1+s} and a
/// drift h = H smoothstep(|x| - 1) vanishing on (-1, 1), evaluated as
/// (-Delta)^s u + B(h, u) with the normalized kernel.
struct MaxPrincipleReport {
    double s = 0.0;
    double H = 0.0;               ///< drift height used
    double H_threshold = 0.0;     ///< smallest height making all grid values <= 0
    double oscillation = 0.0;     ///< osc(h) = H
    double max_value = 0.0;       ///< max over the grid
    double u_at_zero = 0.0;
    double value_at_zero = 0.0;
    std::vector<double> x;
    std::vector<double> values;
};

/// `H` <= 0 selects 1.5 times the threshold height.
MaxPrincipleReport maxprinciple_violation_demo(double s, double H = -1.0, int grid_points = 199,
                                               const QuadratureScheme& quad = {});

/// The drift profile used by the demo.
SmoothFunction comparison_drift(double H);
/// (1 - x^2)_+^{1+s}.
SmoothFunction comparison_profile(double s);

}  // namespace nldv
