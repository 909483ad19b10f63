#pragma once

#include "nldv/kernel_field.hpp"
#include "nldv/types.hpp"

#include <vector>

namespace nldv {

/// Polar quadrature around the evaluation point x.
///
/// The ball |y - x| < inner_radius is integrated along antipodal direction
/// pairs on geometric panels, so the odd part of the integrand cancels. The
/// core |y - x| < inner_radius 2^{-inner_levels} is closed by its second-order
/// Taylor term. The annulus up to
/// outer_radius uses geometric panels; beyond it the integrand is replaced by
/// its far-field limit and integrated in closed form.
struct QuadratureScheme {
    double inner_radius = 0.25;
    double outer_radius = 0.0;  ///< 0: chosen from the functions' tail data
    int inner_levels = 8;       ///< geometric panels inside the ball
    int panel_nodes = 16;
    double panel_ratio = 1.5;
    int grading_levels = 10;    ///< sub-panels towards each breakpoint
    int directions = 16;        ///< angles in 2D, polar nodes in 3D
    bool tail_estimate_enabled = true;
    double tail_tolerance = 1e-6;

    /// Throws InputError on inconsistent parameters.
    void validate() const;
};

/// Quadrature nodes y_k and weights w_k with sum_k w_k F(y_k) ~ int F(y) K(x,y) dy
/// over |y - x| < R, plus the kernel mass of |y - x| > R.
struct KernelNodes {
    std::vector<Vec> points;
    std::vector<double> weights;
    double outer_radius = 0.0;
    double tail_mass = 0.0;
    /// True when every function is exactly at its far value beyond R.
    bool tail_exact = false;
};

KernelNodes kernel_nodes(const KernelSpec& spec, const Vec& x, const QuadratureScheme& quad,
                         const std::vector<const SmoothFunction*>& functions);

struct OperatorValue {
    double value = 0.0;
    double tail_term = 0.0;   ///< far-field contribution included in value
    double tail_bound = 0.0;  ///< bound on the error of the far-field term
};

OperatorValue evaluate_LK(const SmoothFunction& u, const KernelSpec& spec, const Vec& x, const QuadratureScheme& quad);
OperatorValue evaluate_B(const SmoothFunction& u, const SmoothFunction& v, const KernelSpec& spec, const Vec& x,
                         const QuadratureScheme& quad);

/// P.V. int (u(y) - u(x)) K(x,y) dy
double apply_LK(const SmoothFunction& u, const KernelSpec& spec, const Vec& x, const QuadratureScheme& quad = {});

/// 1/2 int (u(y) - u(x)) (v(y) - v(x)) K(x,y) dy
double apply_B(const SmoothFunction& u, const SmoothFunction& v, const KernelSpec& spec, const Vec& x,
               const QuadratureScheme& quad = {});

/// The same operators on a precomputed node set (built for all functions
/// involved), which makes the product rule hold to rounding.
double apply_LK(const KernelNodes& nodes, const SmoothFunction& u, const Vec& x);
double apply_B(const KernelNodes& nodes, const SmoothFunction& u, const SmoothFunction& v, const Vec& x);

/// L_K u + B(u, h)
double apply_drifted(const SmoothFunction& u, const SmoothFunction& h, const KernelSpec& spec, const Vec& x,
                     const QuadratureScheme& quad = {});

/// Distances rho > 0 along x + rho theta at which one of the functions has a
/// breakpoint or crosses its support sphere (appended to `out`).
void ray_breakpoints(const std::vector<const SmoothFunction*>& functions, const Vec& x, const Vec& theta,
                     std::vector<double>& out);

/// Kernel mass of {|y - x| > R}: int_{|z|>R} K(x, x+z) dz. The field is frozen
/// at |z| = R along each direction for variable fields.
double far_kernel_mass(const KernelSpec& spec, const Vec& x, double R, int directions = 16);

}  // namespace nldv
