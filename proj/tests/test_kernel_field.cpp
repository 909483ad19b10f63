#include "nldv/errors.hpp"
#include "nldv/kernel_field.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nldv;

namespace {

Mat diag2(double a, double b) {
    Mat m = Mat::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

KernelSpec spec2(const AnisotropyField& f, double s) { return KernelSpec(f, EllipticityBounds(0.1, 10.0, s, 2)); }

AnisotropyField::MatrixMap rotating_field() {
    // Non-commuting values at different points.
    return [](const Vec& x) {
        const double a = 0.3 * std::sin(x[0]) + 0.2 * x[1] / (1.0 + x[1] * x[1]);
        Mat R(2, 2);
        R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
        return Mat(R * diag2(1.5, 0.8) * R.transpose());
    };
}

}  // namespace

TEST_CASE("kernel_eval on the identity field") {
    const auto spec = KernelSpec::fractional_laplacian(1, 0.5, false);
    CHECK(kernel_eval(spec, make_point({1.0}), make_point({0.0})) == doctest::Approx(1.0));
    // |x - y|^{-(N+2s)}
    for (double r : {0.3, 1.7, 4.0}) {
        const auto s3 = KernelSpec::fractional_laplacian(3, 0.3, false);
        CHECK(kernel_eval(s3, make_point({r, 0, 0}), make_point({0, 0, 0})) ==
              doctest::Approx(std::pow(r, -3.6)).epsilon(1e-13));
    }
}

TEST_CASE("kernel_eval with diag(4,1)") {
    const auto spec = spec2(AnisotropyField::constant(diag2(4, 1)), 0.5);
    CHECK(kernel_eval(spec, make_point({1, 0}), make_point({0, 0})) == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("kernel_eval errors") {
    const auto spec = KernelSpec::fractional_laplacian(2, 0.5, false);
    CHECK_THROWS_AS(kernel_eval(spec, make_point({1, 1}), make_point({1, 1})), DomainError);
    CHECK_THROWS_AS(AnisotropyField::constant(diag2(1, -1)), EllipticityError);
    // indefinite away from the probe point
    auto bad = AnisotropyField::separable_sum([](const Vec& x) { return diag2(1.0 - x[0], 1.0); }, 2);
    const KernelSpec sb(bad, EllipticityBounds(0.1, 10, 0.5, 2));
    CHECK_THROWS_AS(kernel_eval(sb, make_point({3, 0}), make_point({4, 0})), EllipticityError);
}

TEST_CASE("normalization constant") {
    CHECK(normalization_constant(1, 0.5) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-14));
    // reflection-free form: c_{N,s} = s 4^s Gamma(N/2+s) / (pi^{N/2} Gamma(1-s))
    for (int N : {1, 2, 3})
        for (double s : {0.1, 0.5, 0.9}) {
            const double alt = s * std::pow(4.0, s) * std::tgamma(0.5 * N + s) /
                               (std::pow(std::numbers::pi, 0.5 * N) * std::tgamma(1.0 - s));
            CHECK(normalization_constant(N, s) == doctest::Approx(alt).epsilon(1e-13));
        }
    // N = 3, s = 1/2: 2 Gamma(2) / (pi^{3/2} 2 sqrt(pi)) = 1/pi^2
    CHECK(normalization_constant(3, 0.5) == doctest::Approx(1.0 / (std::numbers::pi * std::numbers::pi)));
    CHECK_THROWS_AS(normalization_constant(1, 1.0), DomainError);
    CHECK_THROWS_AS(normalization_constant(1, 0.0), DomainError);
    CHECK_THROWS_AS(normalization_constant(0, 0.5), DomainError);
}

TEST_CASE("normalization constant near s = 1") {
    // Gamma(1-s) ~ 1/(1-s), so c_{N,s}/(1-s) -> 4 Gamma(N/2+1) / pi^{N/2}; linear extrapolation in 1-s.
    for (int N : {1, 2, 3}) {
        const double limit = 4.0 * std::tgamma(0.5 * N + 1.0) / std::pow(std::numbers::pi, 0.5 * N);
        const double e1 = normalization_constant(N, 1 - 1e-3) / 1e-3;
        const double e2 = normalization_constant(N, 1 - 5e-4) / 5e-4;
        CHECK((2 * e2 - e1) == doctest::Approx(limit).epsilon(1e-5));
    }
}

TEST_CASE("ellipticity report") {
    std::vector<EllipticitySample> samples;
    std::mt19937 rng(3);
    std::normal_distribution<double> g;
    for (int i = 0; i < 200; ++i)
        samples.push_back({make_point({g(rng), g(rng)}), make_point({g(rng), g(rng)}), make_point({g(rng), g(rng)})});
    samples.push_back({make_point({0, 0}), make_point({1, 0}), make_point({1, 0})});
    samples.push_back({make_point({0, 0}), make_point({1, 0}), make_point({0, 1})});

    auto id = validate_ellipticity(KernelSpec::fractional_laplacian(2, 0.5), samples);
    CHECK(id.min_quotient == doctest::Approx(1.0));
    CHECK(id.max_quotient == doctest::Approx(1.0));
    CHECK(id.passed);

    auto d = validate_ellipticity(spec2(AnisotropyField::constant(diag2(4, 1)), 0.5), samples);
    CHECK(d.min_quotient == doctest::Approx(1.0));
    CHECK(d.max_quotient == doctest::Approx(4.0));
    CHECK(d.passed);

    auto prod = AnisotropyField::separable_product([](const Vec&) { return Mat(Mat::Identity(2, 2)); }, 2);
    auto p = validate_ellipticity(spec2(prod, 0.5), samples);
    CHECK(p.min_quotient == doctest::Approx(2.0));
    CHECK(p.max_quotient == doctest::Approx(2.0));

    auto narrow = KernelSpec(AnisotropyField::constant(diag2(4, 1)), EllipticityBounds(1.5, 3.0, 0.5, 2));
    CHECK_FALSE(validate_ellipticity(narrow, samples).passed);
}

TEST_CASE("swap symmetry and scaling") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-2, 2);
    const std::vector<AnisotropyField> fields = {
        AnisotropyField::constant(diag2(2, 0.5)),
        AnisotropyField::separable_sum(rotating_field(), 2),
        AnisotropyField::separable_product(rotating_field(), 2),
    };
    for (const auto& f : fields) {
        const auto spec = spec2(f, 0.4);
        for (int i = 0; i < 100; ++i) {
            const Vec x = make_point({U(rng), U(rng)});
            const Vec y = make_point({U(rng), U(rng)});
            const double a = kernel_eval(spec, x, y);
            const double b = kernel_eval(spec, y, x);
            CHECK(std::abs(a - b) <= 1e-14 * a);
            const Mat A = f(x, y);
            CHECK((A - A.transpose()).norm() <= 1e-15 * A.norm());
        }
    }
    const auto spec = spec2(fields[0], 0.4);
    for (double lam : {0.5, 2.0, 7.0}) {
        const Vec x = make_point({0.3, -1.1}), y = make_point({1.2, 0.4});
        CHECK(kernel_eval(spec, lam * x, lam * y) ==
              doctest::Approx(std::pow(lam, -2.8) * kernel_eval(spec, x, y)).epsilon(1e-13));
    }
}

TEST_CASE("separable product of non-commuting matrices is symmetric") {
    auto T = rotating_field();
    const Vec x = make_point({0.9, 0.0}), y = make_point({-0.7, 1.3});
    const Mat tx = T(x), ty = T(y);
    REQUIRE((tx * ty - ty * tx).norm() > 1e-3);
    const Mat A = AnisotropyField::separable_product(T, 2)(x, y);
    CHECK((A - A.transpose()).norm() < 1e-15);
    CHECK((A - (tx * ty + ty * tx)).norm() < 1e-14);
    CHECK((AnisotropyField::separable_sum(T, 2)(x, y) - (tx + ty)).norm() < 1e-15);
}

TEST_CASE("bounds validation") {
    CHECK_THROWS_AS(EllipticityBounds(2.0, 1.0, 0.5, 1), DomainError);
    CHECK_THROWS_AS(EllipticityBounds(1.0, 1.0, 1.5, 1), DomainError);
    CHECK_THROWS_AS(EllipticityBounds(0.0, 1.0, 0.5, 1), DomainError);
}
