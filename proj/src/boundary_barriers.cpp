#include "nldv/boundary_barriers.hpp"

#include "nldv/errors.hpp"
#include "nldv/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace nldv {

namespace {

void check_order(double s) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("s must lie in (0, 1)");
}

struct Integral {
    double value = 0.0;
    double error = 0.0;
};

// int_R F over the two half-lines around `split`.
template <class F>
Integral whole_line(F&& f, double split, double tol) {
    boost::math::quadrature::exp_sinh<double> es;
    Integral out;
    double e1 = 0.0, e2 = 0.0;
    out.value = es.integrate([&](double t) { return f(split + t); }, tol, &e1) +
                es.integrate([&](double t) { return f(split - t); }, tol, &e2);
    out.error = e1 + e2;
    return out;
}

}  // namespace

double C_star(int N, double s) {
    check_order(s);
    if (N < 1 || N > kMaxDim) throw DomainError("C_star: dimension must be 1, 2 or 3");
    return N == 1 ? 1.0 : C_star_radial(N, s);
}

double C_star_radial(int N, double s) {
    check_order(s);
    if (N < 2 || N > kMaxDim) throw DomainError("C_star_radial: needs N in {2, 3}");
    const double m = 0.5 * (N - 1);
    // |S^{N-2}| = 2 pi^m / Gamma(m)
    const double sphere = 2.0 * std::pow(std::numbers::pi, m) / std::tgamma(m);
    return 0.5 * sphere * boost::math::beta(m, s + 0.5);
}

double C_star_quadrature(int N, double s) {
    check_order(s);
    if (N < 2 || N > kMaxDim) throw DomainError("C_star_quadrature: needs N in {2, 3}");
    const double p = 0.5 * (N + 2.0 * s);
    const double tol = 1e-12;
    boost::math::quadrature::exp_sinh<double> es;
    if (N == 2) return 2.0 * es.integrate([p](double t) { return std::pow(1.0 + t * t, -p); }, tol);
    boost::math::quadrature::exp_sinh<double> inner;
    return 4.0 * es.integrate(
                     [&](double t1) {
                         return inner.integrate(
                             [&](double t2) { return std::pow(1.0 + t1 * t1 + t2 * t2, -p); }, tol);
                     },
                     tol);
}

double J_quadrature(const Mat& A, double y1, double s, double tol) {
    check_order(s);
    const int N = static_cast<int>(A.rows());
    if (N < 1 || N > kMaxDim || A.cols() != N) throw InputError("J_quadrature: A must be square with N <= 3");
    if (y1 == 0.0) throw DomainError("J_quadrature: y1 must be nonzero");
    const double p = 0.5 * (N + 2.0 * s);
    auto form = [&](const Vec& y) {
        const double q = y.dot(A * y);
        if (!(q > 0.0)) throw EllipticityError("J_quadrature: quadratic form is not positive");
        return std::pow(q, -p);
    };
    Vec y(N);
    y[0] = y1;
    if (N == 1) return form(y);

    // minimizer of y^T A y over y' at fixed y1
    const Mat Ap = A.bottomRightCorner(N - 1, N - 1);
    const Vec v = A.block(1, 0, N - 1, 1);
    const Vec ystar = -y1 * Ap.ldlt().solve(v);

    Integral r;
    if (N == 2) {
        r = whole_line(
            [&](double t) {
                y[1] = t;
                return form(y);
            },
            ystar[0], 1e-12);
    } else {
        // relative error of the inner integrals that matter to the outer sum
        double inner_error = 0.0, inner_peak = 0.0;
        r = whole_line(
            [&](double t1) {
                // minimizer in y_3 at fixed (y1, t1)
                const double split = -(A(2, 0) * y1 + A(2, 1) * t1) / A(2, 2);
                const auto in = whole_line(
                    [&](double t2) {
                        Vec z(3);
                        z << y1, t1, t2;
                        return form(z);
                    },
                    split, 1e-12);
                inner_peak = std::max(inner_peak, in.value);
                if (in.value > 1e-8 * inner_peak) inner_error = std::max(inner_error, in.error / in.value);
                return in.value;
            },
            ystar[0], 1e-12);
        r.error += inner_error * r.value;
    }
    if (!std::isfinite(r.value) || r.error > tol * std::abs(r.value)) {
        std::ostringstream os;
        os << "J_quadrature: error estimate " << r.error << " for value " << r.value
           << " (tail decay not resolved)";
        throw ResolutionError(os.str());
    }
    return r.value;
}

double J_closed_form(const Mat& A, double y1, double s) {
    check_order(s);
    const int N = static_cast<int>(A.rows());
    if (y1 == 0.0) throw DomainError("J_closed_form: y1 must be nonzero");
    const double detA = A.determinant();
    const double detAp = N == 1 ? 1.0 : Mat(A.bottomRightCorner(N - 1, N - 1)).determinant();
    return std::pow(std::abs(y1), -(1.0 + 2.0 * s)) * std::pow(std::abs(detAp), s) *
           std::pow(std::abs(detA), -0.5 * (1.0 + 2.0 * s)) * C_star(N, s);
}

double J_block_closed_form(const Mat& A, double y1, double s) {
    check_order(s);
    const int N = static_cast<int>(A.rows());
    if (y1 == 0.0) throw DomainError("J_block_closed_form: y1 must be nonzero");
    return std::pow(A(0, 0), -s) * std::pow(std::abs(y1), -(1.0 + 2.0 * s)) *
           std::pow(std::abs(A.determinant()), -0.5) * C_star(N, s);
}

double half_line_constant(double alpha, double s) {
    check_order(s);
    if (!(alpha > 0.0 && alpha < 2.0 * s))
        throw DomainError("half_line_constant: needs 0 < alpha < 2s for convergence");
    const double tol = 1e-12;
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    // (-inf, -1): (1 + y)_+ = 0
    const double left = -1.0 / (2.0 * s);
    // (-1, 1), symmetrized; the bracket is O(y^2) at 0
    const double mid = ts.integrate(
        [&](double y) {
            if (y < 1e-4) {
                // Taylor: alpha (alpha - 1) y^2 + O(y^4)
                return alpha * (alpha - 1.0) * std::pow(y, 1.0 - 2.0 * s);
            }
            return (std::pow(1.0 + y, alpha) + std::pow(1.0 - y, alpha) - 2.0) * std::pow(y, -1.0 - 2.0 * s);
        },
        0.0, 1.0, tol);
    // (1, inf)
    const double right = es.integrate(
        [&](double t) {
            const double y = 1.0 + t;
            return (std::pow(1.0 + y, alpha) - 1.0) * std::pow(y, -1.0 - 2.0 * s);
        },
        tol);
    return left + mid + right;
}

void BarrierConfig::validate() const {
    const double s = spec.s();
    if (center.size() != spec.dim()) throw InputError("barrier: centre dimension does not match the kernel");
    if (!(radius > 0.0)) throw InputError("barrier: radius must be positive");
    if (!(alpha > 0.0 && alpha < 2.0 * s + 1.0)) throw InputError("barrier: need 0 < alpha < 2s + 1");
    const double dmin = d_min > 0.0 ? d_min : delta * std::pow(2.0, -8);
    if (!(delta > 0.0 && delta < radius && dmin < delta)) throw InputError("barrier: need 0 < d_min < delta < radius");
    if (samples < 2) throw InputError("barrier: need at least two samples");
}

BarrierReport barrier_scan(const BarrierConfig& cfg) {
    cfg.validate();
    const auto& spec = cfg.spec;
    if (!spec.field.is_constant()) throw InputError("barrier_scan: constant fields only");
    const int N = spec.dim();
    const double s = spec.s();
    const double R = cfg.radius;
    const Vec c = cfg.center;

    SmoothFunction u;
    const double alpha = cfg.alpha;
    u.value = [c, R, alpha](const Vec& x) {
        const double r = (R * R - (x - c).squaredNorm()) / (2.0 * R);
        return r > 0.0 ? std::pow(r, alpha) : 0.0;
    };
    u.support = SupportBall{c, R};
    u.far_value = 0.0;
    if (N == 1) u.breakpoints = {c[0] - R, c[0] + R};

    const bool has_drift = static_cast<bool>(cfg.h.value);

    BarrierReport rep;
    rep.d_floor = cfg.d_min > 0.0 ? cfg.d_min : cfg.delta * std::pow(2.0, -8);
    rep.predicted_sign = alpha > s ? "positive" : (alpha < s ? "negative" : "threshold");
    rep.drift_rate_expected = alpha - 2.0 * s + 1.0;
    {
        Mat A = spec.field.matrix();
        rep.predicted_limit = alpha < 2.0 * s
                                  ? spec.prefactor() * J_closed_form(A, 1.0, s) * half_line_constant(alpha, s)
                                  : std::numeric_limits<double>::quiet_NaN();
    }

    const double ratio = std::pow(rep.d_floor / cfg.delta, 1.0 / (cfg.samples - 1));
    rep.min_normalized = std::numeric_limits<double>::infinity();
    rep.max_normalized = -rep.min_normalized;
    rep.sign_consistent = rep.predicted_sign != "threshold";
    std::vector<double> ds, bs;
    for (int k = 0; k < cfg.samples; ++k) {
        const double d = cfg.delta * std::pow(ratio, k);
        Vec x = c;
        x[0] += R - d;
        BarrierSample smp;
        smp.d = d;
        smp.operator_term = apply_LK(u, spec, x, cfg.quad);
        smp.drift_term = has_drift ? apply_B(cfg.h, u, spec, x, cfg.quad) : 0.0;
        smp.normalized = std::pow(d, 2.0 * s - alpha) * (smp.operator_term + smp.drift_term);
        if (!std::isfinite(smp.normalized)) {
            std::ostringstream os;
            os << "barrier_scan: quadrature breakdown at d = " << d << " (floor " << rep.d_floor << ")";
            throw ResolutionError(os.str());
        }
        rep.min_normalized = std::min(rep.min_normalized, smp.normalized);
        rep.max_normalized = std::max(rep.max_normalized, smp.normalized);
        if (rep.predicted_sign == "positive" && !(smp.normalized > 0.0)) rep.sign_consistent = false;
        if (rep.predicted_sign == "negative" && !(smp.normalized < 0.0)) rep.sign_consistent = false;
        if (has_drift && smp.drift_term != 0.0) {
            ds.push_back(d);
            bs.push_back(std::abs(smp.drift_term));
        }
        rep.samples.push_back(smp);
    }
    rep.drift_rate = ds.size() >= 2 ? fit_loglog_slope(ds, bs) : std::numeric_limits<double>::quiet_NaN();
    return rep;
}

}  // namespace nldv
