#pragma once

#include "nldv/kernel_field.hpp"
#include "nldv/nonlocal_ops.hpp"

#include <string>
#include <vector>

namespace nldv {

/// C* = int_{R^{N-1}} dt' / (1 + |t'|^2)^{(N+2s)/2}; C*(1, s) = 1 (empty integral).
double C_star(int N, double s);
/// pi^{(N-1)/2} Gamma(s + 1/2) / Gamma(N/2 + s), from the polar form
/// |S^{N-2}| int_0^inf r^{N-2} (1 + r^2)^{-(N+2s)/2} dr = |S^{N-2}| B((N-1)/2, s + 1/2) / 2.
double C_star_radial(int N, double s);
/// Cartesian quadrature over R^{N-1} (N = 2, 3).
double C_star_quadrature(int N, double s);

/// J = int_{R^{N-1}} dy' / |y^T A y|^{(N+2s)/2} at y = (y1, y'), by nested
/// double-exponential quadrature split at the minimum of the quadratic form.
/// Throws DomainError for y1 = 0 and ResolutionError when the quadrature
/// error estimate exceeds `tol` (relative).
double J_quadrature(const Mat& A, double y1, double s, double tol = 1e-9);

/// |y1|^{-(1+2s)} |Det A'|^s |Det A|^{-(1+2s)/2} C*, with A' the lower-right
/// (N-1) block of A.
double J_closed_form(const Mat& A, double y1, double s);
/// a11^{-s} |y1|^{-(1+2s)} |Det A|^{-1/2} C*: the same value when the
/// coupling A(1, 2:N) vanishes, and wrong otherwise.
double J_block_closed_form(const Mat& A, double y1, double s);

/// P.V. int_R [(1 + y)_+^alpha - 1] |y|^{-1-2s} dy for 0 < alpha < 2s; zero at alpha = s.
/// Throws DomainError outside that range (the integral diverges).
double half_line_constant(double alpha, double s);

/// Barrier rho^alpha on a ball (an interval when N = 1), where
/// rho(x) = (R^2 - |x - c|^2) / (2R) is the distance to the boundary up to a
/// factor 1 - d/(2R), smooth inside and zero outside.
struct BarrierConfig {
    Vec center;
    double radius = 1.0;
    double alpha = 0.5;
    double delta = 0.1;   ///< scanned layer: d in [d_min, delta]
    double d_min = 0.0;   ///< 0: delta * 2^-8
    int samples = 9;      ///< geometric in d
    KernelSpec spec = KernelSpec::fractional_laplacian(1, 0.5, false);
    SmoothFunction h;     ///< drift; empty value means h = 0
    QuadratureScheme quad{};

    /// Throws InputError unless 0 < alpha < 2s + 1, 0 < d_min < delta < radius.
    void validate() const;
};

struct BarrierSample {
    double d = 0.0;
    double operator_term = 0.0;  ///< L_K rho^alpha
    double drift_term = 0.0;     ///< B(h, rho^alpha)
    double normalized = 0.0;     ///< d^{2s - alpha} (operator + drift)
};

struct BarrierReport {
    std::vector<BarrierSample> samples;  ///< d decreasing, along the ray c + (R - d) e_1
    double min_normalized = 0.0;
    double max_normalized = 0.0;
    double d_floor = 0.0;
    /// "positive" (alpha > s), "negative" (alpha < s) or "threshold".
    std::string predicted_sign;
    bool sign_consistent = false;  ///< every normalized value has the predicted sign
    /// Flat-boundary limit of d^{2s-alpha} L_K d^alpha: prefactor J(A, 1, s) times
    /// half_line_constant; NaN when alpha >= 2s.
    double predicted_limit = 0.0;
    /// Slope of log |B(h, rho^alpha)| against log d over the samples (NaN if h = 0).
    double drift_rate = 0.0;
    double drift_rate_expected = 0.0;  ///< alpha - 2s + 1
};

/// Constant fields only (the flat limit uses A(x0, x0), so the field is
/// frozen at the boundary point c + R e_1).
BarrierReport barrier_scan(const BarrierConfig& config);

}  // namespace nldv
