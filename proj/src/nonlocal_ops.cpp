#include "nldv/nonlocal_ops.hpp"

#include "nldv/errors.hpp"
#include "nldv/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nldv {

namespace {

// K(x, x + rho theta) rho^{N-1}, i.e. the radial density of the kernel.
double radial_kernel(const KernelSpec& spec, const Vec& x, const Vec& theta, double q_const, double rho) {
    const int N = spec.dim();
    if (spec.field.is_constant()) {
        return spec.prefactor() * std::pow(q_const, -spec.exponent()) * std::pow(rho, -1.0 - 2.0 * spec.s());
    }
    const Vec y = x + rho * theta;
    return kernel_eval(spec, x, y) * std::pow(rho, N - 1);
}

// Distance from x to the nearest breakpoint or support boundary; used to keep the
// symmetrized ball inside the smooth region.
double nearest_break(const std::vector<const SmoothFunction*>& fs, const Vec& x) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto* f : fs) {
        if (x.size() == 1)
            for (double b : f->breakpoints) {
                const double d = std::abs(b - x[0]);
                if (d > 1e-12) best = std::min(best, d);
            }
        if (f->support) {
            const double d = std::abs((x - f->support->center).norm() - f->support->radius);
            if (d > 1e-12) best = std::min(best, d);
        }
    }
    return best;
}

}  // namespace

void ray_breakpoints(const std::vector<const SmoothFunction*>& fs, const Vec& x, const Vec& theta,
                    std::vector<double>& out) {
    for (const auto* f : fs) {
        if (x.size() == 1) {
            for (double b : f->breakpoints) {
                const double d = (b - x[0]) * theta[0];
                if (d > 0.0) out.push_back(d);
            }
        }
        if (f->support) {
            // |x + rho theta - c| = r
            const Vec dx = x - f->support->center;
            const double bq = dx.dot(theta);
            const double cq = dx.squaredNorm() - f->support->radius * f->support->radius;
            const double disc = bq * bq - cq;
            if (disc > 0.0) {
                const double sq = std::sqrt(disc);
                for (double d : {-bq - sq, -bq + sq})
                    if (d > 0.0) out.push_back(d);
            }
        }
    }
}

void QuadratureScheme::validate() const {
    if (!(inner_radius > 0.0)) throw InputError("inner_radius must be positive");
    if (outer_radius != 0.0 && !(outer_radius > inner_radius))
        throw InputError("outer_radius must exceed inner_radius");
    if (panel_nodes < 1 || directions < 1) throw InputError("node counts must be positive");
    if (inner_levels < 0 || inner_levels > 60) throw InputError("inner_levels must lie in [0, 60]");
    if (!(panel_ratio > 1.0)) throw InputError("panel_ratio must exceed 1");
    if (grading_levels < 0) throw InputError("grading_levels must be nonnegative");
    if (!(tail_tolerance > 0.0)) throw InputError("tail_tolerance must be positive");
}

double far_kernel_mass(const KernelSpec& spec, const Vec& x, double R, int directions) {
    const double s = spec.s();
    double total = 0.0;
    for (const auto& d : sphere_directions(spec.dim(), directions)) {
        double k;
        if (spec.field.is_constant()) {
            const double q = d.theta.dot(spec.field.matrix() * d.theta);
            k = spec.prefactor() * std::pow(q, -spec.exponent());
        } else {
            // frozen at |z| = R: K(x, x + R theta) R^{N + 2s}
            k = kernel_eval(spec, x, x + R * d.theta) * std::pow(R, spec.dim() + 2.0 * s);
        }
        total += d.weight * k;
    }
    return total * std::pow(R, -2.0 * s) / (2.0 * s);
}

KernelNodes kernel_nodes(const KernelSpec& spec, const Vec& x, const QuadratureScheme& quad,
                         const std::vector<const SmoothFunction*>& fs) {
    quad.validate();
    if (x.size() != spec.dim()) throw InputError("evaluation point has the wrong dimension");
    const double s = spec.s();
    const int N = spec.dim();

    bool all_supported = true;
    double support_cover = 0.0;
    double sup = 0.0;
    for (const auto* f : fs) {
        if (!f->has_tail_information())
            throw InputError("function has neither a support ball nor a sup bound; the far-field integral may diverge");
        if (f->support) {
            support_cover = std::max(support_cover, (x - f->support->center).norm() + f->support->radius);
            sup = std::max(sup, std::abs(f->far_value));
        } else {
            all_supported = false;
            sup = std::max(sup, *f->sup_bound);
        }
    }

    double R = quad.outer_radius;
    if (R == 0.0) {
        if (all_supported) {
            R = std::max(2.0 * quad.inner_radius, support_cover * 1.0001 + 1e-12);
        } else {
            // 2 sup T(R) <= tol with T(R) <= c gamma^{-p} |S| R^{-2s} / (2s)
            const double T1 = spec.prefactor() * std::pow(spec.bounds.gamma, -spec.exponent()) * sphere_area(N) /
                              (2.0 * s);
            const double target = 2.0 * std::max(sup, 1.0) * T1 / quad.tail_tolerance;
            R = std::clamp(std::pow(target, 1.0 / (2.0 * s)), 4.0 * quad.inner_radius, 1e12);
            R = std::max(R, support_cover * 1.0001);
        }
    } else {
        R = std::max(R, support_cover * 1.0001);
    }

    const double r = std::min({quad.inner_radius, 0.5 * nearest_break(fs, x), 0.5 * R});

    KernelNodes out;
    out.outer_radius = R;
    out.tail_exact = all_supported;

    const auto dirs = sphere_directions(N, quad.directions);
    const GaussRule& gp = gauss_legendre(quad.panel_nodes);

    // Inner radial nodes are direction independent so that antipodal pairs
    // share them and the odd part cancels: geometric panels down to r0.
    std::vector<double> rin, win;
    const double r0 = r * std::ldexp(1.0, -quad.inner_levels);
    for (int k = quad.inner_levels; k > 0; --k)
        append_panel(r * std::ldexp(1.0, -k), r * std::ldexp(1.0, 1 - k), gp, rin, win);
    // Below r0 sampling would amplify rounding in u(y) - u(x) by rho^{-1-2s};
    // the ball is closed with the second-order Taylor term instead, written as
    // an extra node at rho = r0: the symmetric difference at r0 times
    // r0^{-2s}/(2-2s) integrates the rho^2 term of the pair exactly. Using the
    // kernel at +-r0 rather than at the centre also captures the first-order
    // asymmetry of variable fields.
    const double core = std::pow(r0, -2.0 * s) / (2.0 - 2.0 * s);

    std::vector<double> breaks, ro, wo;
    for (const auto& d : dirs) {
        const double q = spec.field.is_constant() ? d.theta.dot(spec.field.matrix() * d.theta) : 0.0;
        out.points.push_back(x + r0 * d.theta);
        out.weights.push_back(d.weight * radial_kernel(spec, x, d.theta, q, r0) * std::pow(r0, 1.0 + 2.0 * s) * core);
        for (std::size_t i = 0; i < rin.size(); ++i) {
            out.points.push_back(x + rin[i] * d.theta);
            out.weights.push_back(d.weight * win[i] * radial_kernel(spec, x, d.theta, q, rin[i]));
        }

        breaks.clear();
        ray_breakpoints(fs, x, d.theta, breaks);
        ro.clear();
        wo.clear();
        graded_panels(r, R, breaks, quad.panel_ratio, quad.grading_levels, gp, ro, wo);
        for (std::size_t i = 0; i < ro.size(); ++i) {
            out.points.push_back(x + ro[i] * d.theta);
            out.weights.push_back(d.weight * wo[i] * radial_kernel(spec, x, d.theta, q, ro[i]));
        }
    }
    out.tail_mass = quad.tail_estimate_enabled ? far_kernel_mass(spec, x, R, quad.directions) : 0.0;
    return out;
}

double apply_LK(const KernelNodes& kn, const SmoothFunction& u, const Vec& x) {
    const double u0 = u(x);
    double acc = 0.0;
    for (std::size_t k = 0; k < kn.points.size(); ++k) acc += kn.weights[k] * (u(kn.points[k]) - u0);
    return acc + kn.tail_mass * (u.far_value - u0);
}

double apply_B(const KernelNodes& kn, const SmoothFunction& u, const SmoothFunction& v, const Vec& x) {
    const double u0 = u(x);
    const double v0 = v(x);
    double acc = 0.0;
    for (std::size_t k = 0; k < kn.points.size(); ++k)
        acc += kn.weights[k] * (u(kn.points[k]) - u0) * (v(kn.points[k]) - v0);
    return 0.5 * (acc + kn.tail_mass * (u.far_value - u0) * (v.far_value - v0));
}

OperatorValue evaluate_LK(const SmoothFunction& u, const KernelSpec& spec, const Vec& x, const QuadratureScheme& quad) {
    const KernelNodes kn = kernel_nodes(spec, x, quad, {&u});
    const double u0 = u(x);
    double acc = 0.0;
    for (std::size_t k = 0; k < kn.points.size(); ++k) acc += kn.weights[k] * (u(kn.points[k]) - u0);
    OperatorValue r;
    r.tail_term = kn.tail_mass * (u.far_value - u0);
    r.value = acc + r.tail_term;
    if (!(kn.tail_exact && spec.field.is_constant())) {
        const double M = u.sup_bound ? *u.sup_bound : std::abs(u.far_value);
        r.tail_bound = far_kernel_mass(spec, x, kn.outer_radius, quad.directions) * (M + std::abs(u0));
    }
    return r;
}

OperatorValue evaluate_B(const SmoothFunction& u, const SmoothFunction& v, const KernelSpec& spec, const Vec& x,
                         const QuadratureScheme& quad) {
    const KernelNodes kn = kernel_nodes(spec, x, quad, {&u, &v});
    const double u0 = u(x);
    const double v0 = v(x);
    double acc = 0.0;
    for (std::size_t k = 0; k < kn.points.size(); ++k)
        acc += kn.weights[k] * (u(kn.points[k]) - u0) * (v(kn.points[k]) - v0);
    OperatorValue r;
    r.tail_term = 0.5 * kn.tail_mass * (u.far_value - u0) * (v.far_value - v0);
    r.value = 0.5 * acc + r.tail_term;
    if (!(kn.tail_exact && spec.field.is_constant())) {
        const double Mu = (u.sup_bound ? *u.sup_bound : std::abs(u.far_value)) + std::abs(u0);
        const double Mv = (v.sup_bound ? *v.sup_bound : std::abs(v.far_value)) + std::abs(v0);
        r.tail_bound = 0.5 * far_kernel_mass(spec, x, kn.outer_radius, quad.directions) * Mu * Mv;
    }
    return r;
}

double apply_LK(const SmoothFunction& u, const KernelSpec& spec, const Vec& x, const QuadratureScheme& quad) {
    return evaluate_LK(u, spec, x, quad).value;
}

double apply_B(const SmoothFunction& u, const SmoothFunction& v, const KernelSpec& spec, const Vec& x,
               const QuadratureScheme& quad) {
    return evaluate_B(u, v, spec, x, quad).value;
}

double apply_drifted(const SmoothFunction& u, const SmoothFunction& h, const KernelSpec& spec, const Vec& x,
                     const QuadratureScheme& quad) {
    // One node set for both terms keeps the pair (L_K, B) consistent.
    const KernelNodes kn = kernel_nodes(spec, x, quad, {&u, &h});
    const double u0 = u(x);
    const double h0 = h(x);
    double acc = 0.0;
    for (std::size_t k = 0; k < kn.points.size(); ++k) {
        const double du = u(kn.points[k]) - u0;
        acc += kn.weights[k] * du * (1.0 + 0.5 * (h(kn.points[k]) - h0));
    }
    const double du_inf = u.far_value - u0;
    return acc + kn.tail_mass * du_inf * (1.0 + 0.5 * (h.far_value - h0));
}

}  // namespace nldv
