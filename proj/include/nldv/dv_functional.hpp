#pragma once

#include "nldv/discretize.hpp"
#include "nldv/nonlocal_ops.hpp"
#include "nldv/optimize.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace nldv {

/// A compactly supported probability density f_lambda(x) = lambda^{-N} f((x - x0)/lambda),
/// where the profile f is a weighted sum of smooth bumps.
///
/// Bump k is w_k Z_k^{-1} exp(2 - 2/(1 - |x - c_k|^2/r_k^2)), i.e. the square
/// of a standard C^inf bump, normalized to mass w_k, so sqrt(f) of a single
/// bump is smooth.
struct DensitySpec {
    struct Bump {
        Vec center;
        double radius = 1.0;
        double weight = 1.0;
    };
    int dim = 1;
    std::vector<Bump> bumps;
    Vec center;           ///< x0
    double lambda = 1.0;  ///< scale
    /// Caller's assertion that sqrt(f) is smooth enough (C^{2s+alpha}).
    bool sqrt_f_regular = true;

    static DensitySpec bump(int dim, double radius = 1.0);
    /// Weights are normalized to sum to one.
    static DensitySpec mixture(int dim, std::vector<Bump> bumps);

    /// Same profile, concentrated at x0 with scale lambda.
    DensitySpec rescaled(double lambda, const Vec& x0) const;

    double value(const Vec& x) const;
    SmoothFunction density() const;
    SmoothFunction sqrt_density() const;
    /// Ball containing the support.
    SupportBall support() const;
};

/// The lattice problem behind the functional: a box covering supp f, the
/// assembled operator L + B(., h) on it, and f sampled at the nodes and
/// renormalized so that sum_i f_i |cell| = 1 exactly.
struct DvSetup {
    DensitySpec density;
    std::shared_ptr<const LatticeDomain> lattice;
    AssembledOperator op;
    Eigen::VectorXd f;
    Eigen::VectorXd sqrt_f;
    /// Nodes with f > 0 (values below 1e-24 max f are set to zero).
    std::vector<Eigen::Index> support;
    /// Sampled mass before renormalization.
    double raw_mass = 0.0;
};

/// `cells` lattice cells across the support diameter (so the lattice scales
/// with lambda).
DvSetup make_dv_setup(const DensitySpec& density, const KernelSpec& spec, const SmoothFunction& h, int cells = 24,
                      const AssemblyOptions& opts = {});
DvSetup make_dv_setup(const DensitySpec& density, const KernelSpec& spec, int cells = 24,
                      const AssemblyOptions& opts = {});

/// sum_i mu_i (L u)_i / u_i with mu_i = f_i |cell|, where u takes the value
/// `exterior_value` outside the lattice domain. Throws DomainError unless
/// u > 0 on supp f.
double rayleigh_integral(const DvSetup& setup, const Eigen::VectorXd& u, double exterior_value = 0.0);

struct ClosedFormI {
    double value = 0.0;
    std::vector<std::string> warnings;
};
/// int B(sqrt f, sqrt f) as a lattice double sum.
ClosedFormI I_closed_form_h0(const DvSetup& setup);

/// I(mu) = -inf_u rayleigh_integral, minimized directly over u = e^z on
/// supp f (u = 0 elsewhere, where the infimum pushes it).
struct DirectMinimum {
    double I = 0.0;
    Eigen::VectorXd u;  ///< sup-normalized minimizer, zero off supp f
    DescentResult descent;
};
DirectMinimum I_direct(const DvSetup& setup, const DescentOptions& opts = {});

/// I(mu) = int B(sqrt f) - 1/2 int B(f, h) - E, with
///   E = inf_w sum_{i,j in supp f} |cell| W_ij sqrt(f_i f_j) Theta(w_j - w_i, h_j - h_i),
///   Theta(r, d) = cosh r - 1 + sinh(r) d / 2,
/// minimized by L-BFGS from w_init (zero when empty). E <= 0 since w = 0 is admissible.
struct Decomposition {
    double I = 0.0;
    double E = 0.0;
    double diffusion = 0.0;   ///< int B(sqrt f)
    double transport = 0.0;   ///< 1/2 int B(f, h)
    /// -sum |cell| W_ij sqrt(f_i f_j) (h_i - h_j)^2: lower bound for E when osc(h) <= 1.
    double E_lower_bound = 0.0;
    Eigen::VectorXd w;  ///< on all nodes, zero off supp f, mean zero on supp f
    DescentResult descent;
};
Decomposition I_decomposed(const DvSetup& setup, const Eigen::VectorXd& w_init = {},
                           const DescentOptions& opts = {});

/// The exponent functional Phi(w) above and its gradient (w on supp f only,
/// ordered as setup.support).
double exponent_functional(const DvSetup& setup, const Eigen::VectorXd& w, Eigen::VectorXd* grad = nullptr);

/// q(dw, dh) = cosh(dw) - 1 + sinh(dw) dh / 2 + C dh^2 / 2.
double Q_form(double dh, double dw, double C = 2.0);
/// The variant with unit cross coefficient: dh^2 + sinh(dw) dh + cosh(dw) - 1.
double Q_form_displayed(double dh, double dw);

struct ScalarMin {
    double value = 0.0;
    double argmin = 0.0;
};
/// min over r of Q_form(hbar, r, C) (Brent).
ScalarMin q_scalar_min(double hbar, double C = 2.0);

struct DualGapReport {
    std::vector<double> values;  ///< lambda_1(L + V) + sum V mu, per V
    double best = 0.0;
    double I = 0.0;
    double gap = 0.0;  ///< I - best
};
/// Potentials are given at the lattice nodes.
DualGapReport dual_gap(const DvSetup& setup, const std::vector<Eigen::VectorXd>& potentials, double I);
/// V = kappa |x - c|^2 / r^2 over the given amplitudes, with (c, r) the
/// support ball of the density, sampled on the lattice.
std::vector<Eigen::VectorXd> quadratic_wells(const DvSetup& setup, const std::vector<double>& kappas);

/// Pointwise checks of the minimizer equations at points x in supp f:
///   first order:  f L u / u^2 - L(f/u)
///   product form: 2 (f/u) L u - L f + 2 B(f/u, u)
/// with u = sqrt f unless given. All functions share one node set per x.
struct OptimalityResiduals {
    double first_order = 0.0;   ///< max |.| over the points
    double product_form = 0.0;
};
OptimalityResiduals optimality_residuals(const DensitySpec& density, const KernelSpec& spec,
                                         const std::vector<Vec>& points, const SmoothFunction* u = nullptr,
                                         const QuadratureScheme& quad = {});

}  // namespace nldv
