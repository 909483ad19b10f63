#include "nldv/errors.hpp"
#include "nldv/nonlocal_ops.hpp"
#include "nldv/quadrature.hpp"
#include "test_support.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>

using namespace nldv;
using testing_util::bump;
using testing_util::gaussian;

namespace {

// (2 pi)^{-N} int |xi|^{2s} \hat g(xi) dxi for the unit Gaussian, by radial quadrature
// on the Fourier side: \hat g(xi) = (2 pi)^{N/2} exp(-|xi|^2/2).
double gaussian_fractional_laplacian_at_zero(int N, double s) {
    boost::math::quadrature::exp_sinh<double> q;
    const double radial = q.integrate([&](double r) { return r > 80 ? 0.0 : std::pow(r, 2 * s + N - 1) * std::exp(-0.5 * r * r); });
    return std::pow(2 * std::numbers::pi, -0.5 * N) * sphere_area(N) * radial;
}

SmoothFunction remark_u(double s) {
    SmoothFunction u;
    u.value = [s](const Vec& x) {
        const double t = 1.0 - x[0] * x[0];
        return t > 0 ? std::pow(t, 1.0 + s) : 0.0;
    };
    u.support = SupportBall{make_point({0.0}), 1.0};
    u.sup_bound = 1.0;
    u.breakpoints = {-1.0, 1.0};
    return u;
}

SmoothFunction remark_h(double H) {
    SmoothFunction h;
    h.value = [H](const Vec& x) {
        const double t = std::clamp(std::abs(x[0]) - 1.0, 0.0, 1.0);
        return H * t * t * (3.0 - 2.0 * t);
    };
    h.sup_bound = H;
    h.far_value = H;
    h.breakpoints = {-2.0, -1.0, 1.0, 2.0};
    return h;
}

}  // namespace

TEST_CASE("constants are annihilated") {
    const auto spec = KernelSpec::fractional_laplacian(2, 0.4);
    const auto c = SmoothFunction::constant(3.0);
    CHECK(apply_LK(c, spec, make_point({0.1, 0.2})) == doctest::Approx(0.0).scale(1.0));
    const auto u = bump(make_point({0.0, 0.0}), 1.0);
    CHECK(std::abs(apply_B(u, c, spec, make_point({0.3, 0.1}))) < 1e-15);
    CHECK(apply_drifted(u, c, spec, make_point({0.3, 0.1})) ==
          doctest::Approx(apply_LK(u, spec, make_point({0.3, 0.1}))).epsilon(1e-14));
}

TEST_CASE("Gaussian against the Fourier-side value") {
    for (int N : {1, 2, 3})
        for (double s : {0.3, 0.5, 0.8}) {
            const auto spec = KernelSpec::fractional_laplacian(N, s, true);
            QuadratureScheme q;
            q.tail_tolerance = 1e-9;
            q.directions = 8;
            const double got = apply_LK(gaussian(N), spec, Vec::Zero(N), q);
            const double want = -gaussian_fractional_laplacian_at_zero(N, s);
            CAPTURE(N);
            CAPTURE(s);
            CHECK(got == doctest::Approx(want).epsilon(1e-6));
        }
    // s = 1/2, N = 1: -2 / sqrt(2 pi)
    CHECK(gaussian_fractional_laplacian_at_zero(1, 0.5) == doctest::Approx(2.0 / std::sqrt(2 * std::numbers::pi)));
}

TEST_CASE("quadrature refinement converges monotonically") {
    const auto spec = KernelSpec::fractional_laplacian(1, 0.5, true);
    const double want = -gaussian_fractional_laplacian_at_zero(1, 0.5);
    double prev = 1.0;
    std::vector<double> errs;
    for (int n : {2, 4, 8}) {
        QuadratureScheme q;
        q.panel_nodes = n;
        q.tail_tolerance = 1e-12;
        const double err = std::abs(apply_LK(gaussian(1), spec, make_point({0.0}), q) - want);
        errs.push_back(err);
        CHECK(err < prev);
        prev = err;
    }
    MESSAGE("Gaussian errors at 2/4/8 nodes per panel: " << errs[0] << " " << errs[1] << " " << errs[2]);
    CHECK(errs[2] < 1e-6);
}

TEST_CASE("shape law for (1-x^2)_+^{1+s}") {
    for (double s : {0.3, 0.5, 0.7}) {
        const auto spec = KernelSpec::fractional_laplacian(1, s, true);
        const auto u = remark_u(s);
        const double c = -apply_LK(u, spec, make_point({0.0}));
        CHECK(c > 0.0);
        double worst = 0.0;
        for (int i = 1; i < 40; ++i) {
            const double x = -0.975 + 0.05 * i;
            const double got = -apply_LK(u, spec, make_point({x}));
            worst = std::max(worst, std::abs(got - c * (1.0 - (1.0 + 2.0 * s) * x * x)) / c);
        }
        CAPTURE(s);
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("carre du champ: symmetry, bilinearity, positivity") {
    const auto spec = KernelSpec::fractional_laplacian(2, 0.6, false);
    const auto u = bump(make_point({0.1, 0.0}), 1.0);
    const auto v = bump(make_point({-0.3, 0.4}), 0.8, 2.0);
    const auto w = bump(make_point({0.5, -0.2}), 1.2, -1.0);
    QuadratureScheme q;
    q.outer_radius = 4.0;
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    for (int i = 0; i < 10; ++i) {
        const Vec x = make_point({U(rng), U(rng)});
        const double buv = apply_B(u, v, spec, x, q);
        CHECK(buv == doctest::Approx(apply_B(v, u, spec, x, q)).epsilon(1e-13));
        CHECK(apply_B(u, u, spec, x, q) >= 0.0);
        SmoothFunction comb;
        comb.value = [&](const Vec& y) { return 2.0 * u(y) - 3.0 * w(y); };
        comb.support = SupportBall{Vec::Zero(2), 2.0};
        const auto kn = kernel_nodes(spec, x, q, {&u, &v, &w, &comb});
        const double lhs = apply_B(kn, comb, v, x);
        const double rhs = 2.0 * apply_B(kn, u, v, x) - 3.0 * apply_B(kn, w, v, x);
        CHECK(std::abs(lhs - rhs) < 1e-13 * (1.0 + std::abs(lhs)));
        CHECK(lhs == doctest::Approx(apply_B(comb, v, spec, x, q)).epsilon(1e-5));
    }
}

TEST_CASE("drift term in the comparison counterexample") {
    const double s = 0.5;
    const auto spec = KernelSpec::fractional_laplacian(1, s, true);
    const auto u = remark_u(s);
    const auto h = remark_h(3.0);
    boost::math::quadrature::exp_sinh<double> tail;
    for (double x : {-0.8, -0.3, 0.0, 0.45, 0.9}) {
        // independent: -1/2 u(x) int_{|y|>1} h(y) c |x-y|^{-1-2s} dy
        auto integrand = [&](double y) {
            return h(make_point({y})) * normalization_constant(1, s) * std::pow(std::abs(x - y), -1 - 2 * s);
        };
        const double right = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 1.0, 2.0) +
                             tail.integrate([&](double t) { return integrand(2.0 + t); });
        const double left = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, -2.0, -1.0) +
                            tail.integrate([&](double t) { return integrand(-2.0 - t); });
        const double want = -0.5 * u(make_point({x})) * (left + right);
        CHECK(apply_B(h, u, spec, make_point({x})) == doctest::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("product rule at random points") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int N : {1, 2}) {
        const auto spec = KernelSpec::fractional_laplacian(N, 0.45, false);
        QuadratureScheme q;
        q.directions = 12;
        q.outer_radius = 5.0;
        int checked = 0;
        while (checked < (N == 1 ? 100 : 30)) {
            Vec cu(N), cv(N), x(N);
            for (int k = 0; k < N; ++k) {
                cu[k] = 0.5 * U(rng);
                cv[k] = 0.5 * U(rng);
                x[k] = 1.2 * U(rng);
            }
            const auto u = bump(cu, 0.8 + 0.3 * U(rng), 1.0 + U(rng));
            const auto v = bump(cv, 0.9 + 0.3 * U(rng), 1.0 - U(rng));
            const auto uv = testing_util::product(u, v);
            // shared nodes: exact up to rounding
            const auto kn = kernel_nodes(spec, x, q, {&u, &v, &uv});
            const double lhs = apply_LK(kn, uv, x);
            const double rhs = u(x) * apply_LK(kn, v, x) + v(x) * apply_LK(kn, u, x) + 2.0 * apply_B(kn, u, v, x);
            CHECK(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(lhs)));
            // independent node sets: agreement to quadrature accuracy
            const double sep = u(x) * apply_LK(v, spec, x, q) + v(x) * apply_LK(u, spec, x, q) +
                               2.0 * apply_B(u, v, spec, x, q);
            CHECK(std::abs(apply_LK(uv, spec, x, q) - sep) < 1e-6 * (1.0 + std::abs(lhs)));
            ++checked;
        }
    }
}

TEST_CASE("product rule with a variable field") {
    auto T = [](const Vec& x) {
        Mat m = Mat::Identity(2, 2);
        m(0, 0) = 1.0 + 0.3 * std::sin(x[0]);
        m(0, 1) = m(1, 0) = 0.1 * std::cos(x[1]);
        return m;
    };
    const KernelSpec spec(AnisotropyField::separable_sum(T, 2), EllipticityBounds(0.5, 4.0, 0.5, 2));
    const auto u = bump(make_point({0.1, 0.0}), 1.0);
    const auto v = bump(make_point({-0.2, 0.3}), 0.9);
    const auto uv = testing_util::product(u, v);
    QuadratureScheme q;
    q.outer_radius = 4.0;
    for (const Vec& x : {make_point({0.0, 0.0}), make_point({0.4, -0.2}), make_point({-0.5, 0.6})}) {
        const auto kn = kernel_nodes(spec, x, q, {&u, &v, &uv});
        const double lhs = apply_LK(kn, uv, x);
        const double rhs = u(x) * apply_LK(kn, v, x) + v(x) * apply_LK(kn, u, x) + 2.0 * apply_B(kn, u, v, x);
        CHECK(std::abs(lhs - rhs) < 1e-12);
        const double sep =
            u(x) * apply_LK(v, spec, x, q) + v(x) * apply_LK(u, spec, x, q) + 2.0 * apply_B(u, v, spec, x, q);
        CHECK(std::abs(apply_LK(uv, spec, x, q) - sep) < 1e-6);
    }
}

TEST_CASE("integration by parts on the line") {
    const double s = 0.5;
    const auto spec = KernelSpec::fractional_laplacian(1, s, false);
    const auto u = bump(make_point({0.2}), 0.8);
    const auto v = bump(make_point({-0.3}), 0.9);
    QuadratureScheme q;
    q.outer_radius = 3.0;
    const auto& g = gauss_legendre(16);
    auto integrate = [&](auto&& f, double a, double b, int panels) {
        std::vector<double> xs, ws;
        for (int p = 0; p < panels; ++p) append_panel(a + (b - a) * p / panels, a + (b - a) * (p + 1) / panels, g, xs, ws);
        double acc = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) acc += ws[i] * f(xs[i]);
        return acc;
    };
    const double lhs =
        integrate([&](double x) { return apply_LK(u, spec, make_point({x}), q) * v(make_point({x})); }, -1.2, 0.6, 16);
    // int B(u,v): |x| <= 2 on a fine grid, geometric shells outside, analytic remainder past X.
    auto B = [&](double x) { return apply_B(u, v, spec, make_point({x}), q); };
    double rhs = integrate(B, -2.0, 2.0, 32);
    double a = 2.0;
    const double X = 512.0;
    for (; a < X; a *= 2.0) rhs += integrate(B, a, 2 * a, 2) + integrate(B, -2 * a, -a, 2);
    const double m = integrate([&](double y) { return u(make_point({y})) * v(make_point({y})); }, -0.6, 0.6, 8);
    rhs += m * std::pow(X, -2 * s) / (2 * s);
    MESSAGE(std::setprecision(12) << "int L(u) v = " << lhs << ", int B(u,v) = " << rhs);
    CHECK(lhs == doctest::Approx(-rhs).epsilon(1e-6));
}

TEST_CASE("missing tail information is rejected") {
    SmoothFunction f;
    f.value = [](const Vec& x) { return x[0]; };
    CHECK_THROWS_AS(apply_LK(f, KernelSpec::fractional_laplacian(1, 0.5), make_point({0.0})), InputError);
    QuadratureScheme bad;
    bad.inner_radius = -1;
    CHECK_THROWS_AS(apply_LK(gaussian(1), KernelSpec::fractional_laplacian(1, 0.5), make_point({0.0}), bad), InputError);
}

TEST_CASE("tail error budget") {
    const auto spec = KernelSpec::fractional_laplacian(1, 0.5);
    QuadratureScheme q;
    q.tail_tolerance = 1e-6;
    const auto r = evaluate_LK(gaussian(1), spec, make_point({0.0}), q);
    CHECK(r.tail_bound <= 1e-6);
    CHECK(std::abs(r.tail_term) <= r.tail_bound);
}
