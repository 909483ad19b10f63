#pragma once

#include "nldv/types.hpp"

#include <vector>

namespace nldv {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached n-point Gauss-Legendre rule.
const GaussRule& gauss_legendre(int n);

/// Node/weight pair on the unit sphere S^{N-1}.
struct Direction {
    Vec theta;
    double weight = 0.0;
};

/// Direction set on S^{N-1} that is closed under theta -> -theta, listed so
/// that entry i + size/2 is the antipode of entry i. Weights sum to |S^{N-1}|
/// (2 in 1D, 2 pi in 2D, 4 pi in 3D).
///
/// `resolution` is the number of angles in 2D and the number of polar nodes in
/// 3D (with twice as many azimuthal nodes). Ignored in 1D.
std::vector<Direction> sphere_directions(int dim, int resolution);

/// Surface measure of S^{N-1}.
double sphere_area(int dim);

/// Appends the Gauss nodes of [a, b] (mapped from the reference rule) to the
/// output vectors.
void append_panel(double a, double b, const GaussRule& rule, std::vector<double>& x, std::vector<double>& w);

/// Gauss panels on [a, b] (0 < a < b) whose edges grow geometrically from a
/// by `ratio`, refined geometrically (`levels` times) towards each breakpoint
/// so that kinks and jumps of the integrand sit on panel edges.
void graded_panels(double a, double b, const std::vector<double>& breaks, double ratio, int levels,
                   const GaussRule& rule, std::vector<double>& x, std::vector<double>& w);

/// Three-level extrapolation for F(t) = F0 + c t^p + ..., sampled at
/// t, t/2, t/4. The order p is measured from the samples.
struct Extrapolation {
    double limit = 0.0;
    double order = 0.0;
    double error_estimate = 0.0;
    bool monotone = true;
};

Extrapolation richardson3(double f_coarse, double f_mid, double f_fine);

/// Slope of the least-squares line through (log x_i, log y_i).
double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nldv
