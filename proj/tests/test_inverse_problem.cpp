#include "nldv/discretize.hpp"
#include "nldv/errors.hpp"
#include "nldv/inverse_problem.hpp"
#include "nldv/nonlocal_ops.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace nldv;

namespace {

SmoothFunction gaussian() {
    SmoothFunction g;
    g.value = [](const Vec& x) { return std::exp(-0.5 * x.squaredNorm()); };
    g.sup_bound = 1.0;
    return g;
}

SmoothFunction bump(double radius = 1.0) {
    SmoothFunction b;
    b.value = [radius](const Vec& x) {
        const double t = x.squaredNorm() / (radius * radius);
        return t < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t)) : 0.0;
    };
    b.support = SupportBall{Vec::Zero(1), radius};
    return b;
}

Mat random_spd(int n, std::mt19937& rng) {
    std::normal_distribution<double> N01;
    Mat M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = N01(rng);
    return M * M.transpose() + 0.5 * Mat::Identity(n, n);
}

// -int g L_K g dx = int B_K(g, g) dx by a midpoint rule with pointwise operator values.
double real_space_energy(const SmoothFunction& g, const KernelSpec& spec, double half_width, int n) {
    const int N = spec.dim();
    const double h = 2.0 * half_width / n;
    double sum = 0.0;
    Vec x(N);
    const long total = static_cast<long>(std::pow(n, N));
    for (long lin = 0; lin < total; ++lin) {
        long r = lin;
        for (int k = 0; k < N; ++k) {
            x[k] = -half_width + (static_cast<double>(r % n) + 0.5) * h;
            r /= n;
        }
        const double gx = g(x);
        if (std::abs(gx) < 1e-12) continue;
        sum -= gx * apply_LK(g, spec, x);
    }
    return sum * std::pow(h, N);
}

}  // namespace

TEST_CASE("fourier energy: closed form of the Gaussian") {
    for (int N = 1; N <= 3; ++N)
        for (double s : {0.25, 0.5, 0.75}) {
            FourierGrid grid;
            grid.points = N == 3 ? 32 : 64;
            const auto e = fourier_energy(Mat::Identity(N, N), gaussian(), s, grid, FourierScale::Raw);
            // |g^|^2 = (2 pi)^N e^{-|xi|^2}
            const double exact = std::pow(2 * std::numbers::pi, N) * std::pow(std::numbers::pi, N / 2.0) *
                                 std::tgamma(N / 2.0 + s) / std::tgamma(N / 2.0);
            CHECK(e.value == doctest::Approx(exact).epsilon(1e-3));
            CHECK(std::abs(e.value - exact) < std::abs(e.fine - exact));
        }
}

TEST_CASE("fourier energy against real space") {
    // A = Identity: Gagliardo seminorm [g]^2 = 2 int B(g, g) from the lattice double sum.
    const double s = 0.4;
    const auto spec = KernelSpec::fractional_laplacian(1, s, false);
    const auto g = bump();
    FourierGrid grid;
    grid.half_width = 4.0;
    grid.points = 512;
    const double fourier = fourier_energy(Mat::Identity(1, 1), g, s, grid).value;
    const auto L = std::make_shared<const LatticeDomain>(LatticeDomain::interval(-1.0, 1.0, 1.0 / 400));
    const double lattice = seminorm_HsK(GridFunction::sample(L, [&](const Vec& x) { return g(x); }), spec);
    MESSAGE("[g]^2 lattice " << lattice << ", fourier " << 2 * fourier);
    CHECK(lattice == doctest::Approx(2.0 * fourier).epsilon(0.01));
    CHECK(real_space_energy(g, spec, 1.0, 200) == doctest::Approx(fourier).epsilon(1e-3));

    // A = diag(4, 1) with a Gaussian
    Mat A(2, 2);
    A << 4, 0, 0, 1;
    const KernelSpec aniso(AnisotropyField::constant(A), EllipticityBounds(1.0, 4.0, 0.5, 2));
    const double fa = fourier_energy(A, gaussian(), 0.5).value;
    const double ra = real_space_energy(gaussian(), aniso, 6.0, 30);
    MESSAGE("diag(4,1): fourier " << fa << ", real space " << ra);
    CHECK(ra == doctest::Approx(fa).epsilon(0.02));
}

TEST_CASE("fourier energy scaling and resolution errors") {
    for (int N : {1, 2})
        for (double s : {0.3, 0.7}) {
            const Mat I = Mat::Identity(N, N);
            const double base = fourier_energy(I, gaussian(), s).value;
            for (double c : {0.5, 2.0}) {
                SmoothFunction gc;
                gc.value = [c](const Vec& x) { return std::exp(-0.5 * c * c * x.squaredNorm()); };
                FourierGrid grid;
                grid.half_width = 8.0 / c;
                CHECK(fourier_energy(I, gc, s, grid).value ==
                      doctest::Approx(std::pow(c, 2 * s - N) * base).epsilon(1e-4));
                Probe p{gaussian(), Vec::Constant(N, 1.0 / c), I, "identity"};
                CHECK(fourier_energy(I, p, s).value == doctest::Approx(std::pow(c, 2 * s - N) * base).epsilon(1e-10));
            }
        }
    FourierGrid small;
    small.half_width = 2.0;
    CHECK_THROWS_AS(fourier_energy(Mat::Identity(1, 1), gaussian(), 0.5, small), ResolutionError);
    FourierGrid coarse;
    coarse.half_width = 40.0;
    coarse.points = 16;
    CHECK_THROWS_AS(fourier_energy(Mat::Identity(1, 1), gaussian(), 0.5, coarse), ResolutionError);
    Mat bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_THROWS_AS(fourier_energy(bad, gaussian(), 0.5), EllipticityError);
}

TEST_CASE("row swap and rotation algebra") {
    std::mt19937 rng(11);
    for (int t = 0; t < 50; ++t) {
        const int n = 2 + t % 2;
        const Mat Ainv = random_spd(n, rng).inverse();
        for (int k = 0; k < n; ++k) {
            const Mat E = axis_swap(n, k);
            CHECK((E * E.transpose() - Mat::Identity(n, n)).norm() < 1e-15);
            CHECK(std::abs((E * Ainv * E.transpose())(0, 0) - Ainv(k, k)) < 1e-14 * Ainv.norm());
            for (int m = k + 1; m < n; ++m) {
                const Mat R = rotation_frame(n, k, m);
                CHECK((R * R.transpose() - Mat::Identity(n, n)).norm() < 1e-14);
                const double expect = 0.5 * (Ainv(k, k) - 2 * Ainv(k, m) + Ainv(m, m));
                CHECK(std::abs((R * Ainv * R.transpose())(0, 0) - expect) < 1e-14 * Ainv.norm());
            }
        }
    }
}

TEST_CASE("matrix recovery") {
    SUBCASE("identity") {
        const auto rep = recover_matrix(fourier_oracle(Mat::Identity(2, 2), 0.5), 2, 0.5);
        CHECK((rep.recovered_matrix - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-3);
        CHECK(rep.rho == doctest::Approx(1.0).epsilon(1e-4));
        for (double r : rep.probe_ratios) CHECK(r == doctest::Approx(1.0).epsilon(1e-4));
    }
    SUBCASE("diag(4, 1)") {
        Mat A(2, 2);
        A << 4, 0, 0, 1;
        const auto rep = recover_matrix(fourier_oracle(A, 0.5), 2, 0.5);
        CHECK(rep.recovered_matrix(0, 0) == doctest::Approx(4.0).epsilon(0.03));
        CHECK(rep.recovered_matrix(1, 1) == doctest::Approx(1.0).epsilon(0.03));
        CHECK(std::abs(rep.recovered_matrix(0, 1)) < 0.03);
        CHECK(rep.probes.size() == 9);
        for (const auto& p : rep.probes) CHECK(p.normalization_exponent == doctest::Approx(0.0));
    }
    SUBCASE("rotated diag(2, 1): off-diagonal sign") {
        const double c = std::cos(std::numbers::pi / 6), sn = std::sin(std::numbers::pi / 6);
        Mat R(2, 2);
        R << c, -sn, sn, c;
        const Mat A = R * Eigen::Vector2d(2, 1).asDiagonal() * R.transpose();
        for (double s : {0.3, 0.7}) {
            const auto rep = recover_matrix(fourier_oracle(A, s), 2, s);
            CHECK(rep.recovered_matrix(0, 1) > 0.0);
            CHECK(rep.recovered_matrix(0, 1) == doctest::Approx(A(0, 1)).epsilon(0.05));
            CHECK((rep.recovered_matrix - A).cwiseAbs().maxCoeff() < 0.05);
        }
    }
    SUBCASE("random 3x3") {
        std::mt19937 rng(3);
        const Mat A = random_spd(3, rng);
        const auto rep = recover_matrix(fourier_oracle(A, 0.6), 3, 0.6);
        CHECK(((rep.recovered_matrix - A).cwiseAbs().maxCoeff()) < 0.05 * A.cwiseAbs().maxCoeff());
        for (double r : rep.per_entry_residuals) CHECK(r < 0.01);
    }
}

TEST_CASE("matrix recovery rejects bad oracles") {
    const double s = 0.5;
    // sum of two anisotropic energies is not the energy of one matrix
    Mat A(2, 2), B(2, 2);
    A << 9, 0, 0, 1.0 / 9;
    B << 1.0 / 9, 0, 0, 9;
    const auto ea = fourier_oracle(A, s), eb = fourier_oracle(B, s);
    CHECK_THROWS_AS(recover_matrix([&](const Probe& g) { return ea(g) + eb(g); }, 2, s), OracleInconsistencyError);
    // energy of a different order
    CHECK_THROWS_AS(recover_matrix(fourier_oracle(Mat::Identity(2, 2), 0.8), 2, s), OracleInconsistencyError);
    CHECK_THROWS_AS(recover_matrix([](const Probe&) { return -1.0; }, 2, s), OracleInconsistencyError);
    // exaggerated rotation probes: no positive definite inverse fits
    const auto id = fourier_oracle(Mat::Identity(2, 2), s);
    CHECK_THROWS_AS(
        recover_matrix([&](const Probe& g) { return g.tag.starts_with("rotation") ? 100 * id(g) : id(g); }, 2, s),
        ReconstructionError);
}

TEST_CASE("rescaled densities") {
    const auto f = DensitySpec::bump(2, 0.7);
    const auto same = rescale_density(f, 1.0, Vec::Zero(2));
    const Vec p = make_point({0.2, -0.3});
    CHECK(same.value(p) == f.value(p));
    for (double lam : {0.5, 0.25}) {
        const Vec x0 = make_point({0.3, 0.1});
        const auto fl = rescale_density(f, lam, x0);
        CHECK(fl.value(x0 + lam * p) == doctest::Approx(std::pow(lam, -2) * f.value(p)).epsilon(1e-14));
    }
    // lambda^{2s} int B(sqrt f_lambda) is lambda independent for a constant field
    const auto spec = KernelSpec::fractional_laplacian(1, 0.35, false);
    const auto f1 = DensitySpec::bump(1);
    const double base = I_closed_form_h0(make_dv_setup(f1, spec, 30)).value;
    for (double lam : {0.5, 0.25}) {
        const auto st = make_dv_setup(rescale_density(f1, lam, make_point({0.4})), spec, 30);
        CHECK(st.raw_mass == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(std::pow(lam, 0.7) * I_closed_form_h0(st).value == doctest::Approx(base).epsilon(1e-10));
    }
    const auto L = LatticeDomain::interval(-1.0, 1.0, 0.1);
    CHECK_NOTHROW(rescale_density(f1, 0.5, make_point({0.2}), &L));
    CHECK_THROWS_AS(rescale_density(f1, 0.5, make_point({0.8}), &L), CapacityError);
    CHECK_THROWS_AS(rescale_density(f1, 0.0, make_point({0.0}), &L), DomainError);
}

TEST_CASE("diffusion limit") {
    const auto f = DensitySpec::bump(1);
    const Vec x0 = make_point({0.1});
    const std::vector<double> lams{0.5, 0.25, 0.125};
    const auto spec = KernelSpec::fractional_laplacian(1, 0.5, false);

    const auto flat = diffusion_limit(spec, SmoothFunction::constant(0.0), f, x0, lams);
    for (const auto& p : flat.samples) CHECK(p.normalized_energy == doctest::Approx(flat.reference).epsilon(1e-10));

    SmoothFunction h;
    h.value = [](const Vec& x) { return 0.4 * std::tanh(x[0] - 0.3); };
    h.sup_bound = 0.4;
    const auto drift = diffusion_limit(spec, h, f, x0, lams);
    MESSAGE("s = 0.5 drift rate " << drift.rate);
    CHECK(drift.rate >= 1.0 - 0.2);
    CHECK(drift.limit == doctest::Approx(drift.reference).epsilon(5e-3));

    // separable product field against a frozen kernel assembled here
    auto field = AnisotropyField::separable_product(
        [](const Vec& x) {
            Mat t(1, 1);
            t(0, 0) = 1.0 + 0.3 * x[0] * x[0];
            return t;
        },
        1);
    const KernelSpec var(field, EllipticityBounds(1.0, 4.0, 0.5, 1));
    const auto vl = diffusion_limit(var, SmoothFunction::constant(0.0), f, x0, {0.2, 0.1, 0.05});
    Mat a(1, 1);
    a(0, 0) = 2.0 * std::pow(1.0 + 0.3 * 0.01, 2);
    const KernelSpec frozen(AnisotropyField::constant(a), EllipticityBounds(1.0, 4.0, 0.5, 1));
    const double direct = I_closed_form_h0(make_dv_setup(f, frozen, 24)).value;
    MESSAGE("variable field limit " << vl.limit << ", frozen " << direct);
    CHECK(vl.limit == doctest::Approx(direct).epsilon(1e-3));
    CHECK(vl.reference == doctest::Approx(direct).epsilon(1e-10));

    CHECK_THROWS_AS(diffusion_limit(spec, h, f, x0, {0.25, 0.5, 0.125}), InputError);
}

TEST_CASE("drift probe") {
    const auto f = DensitySpec::bump(1);
    const auto spec = KernelSpec::fractional_laplacian(1, 0.5, false);
    const std::vector<double> lams{0.5, 0.25, 0.125};

    const auto flat = drift_probe(SmoothFunction::constant(2.0), spec, make_point({0.0}), lams, f);
    for (const auto& p : flat.samples) CHECK(p.raw_energy == 0.0);

    const auto b = bump();
    const auto d = drift_probe(b, spec, make_point({0.0}), lams, f);
    MESSAGE("drift limit " << d.limit << ", L_K h(0) " << d.pointwise);
    CHECK(d.limit == doctest::Approx(d.pointwise).epsilon(0.02));

    SmoothFunction shifted = b;
    shifted.value = [b](const Vec& x) { return b(x) + 5.0; };
    shifted.far_value = 5.0;
    for (double x : {0.0, 0.4}) {
        const auto a1 = drift_probe(b, spec, make_point({x}), lams, f);
        const auto a2 = drift_probe(shifted, spec, make_point({x}), lams, f);
        for (std::size_t i = 0; i < lams.size(); ++i)
            CHECK(std::abs(a1.samples[i].raw_energy - a2.samples[i].raw_energy) < 1e-8);
    }

    // two dimensions, anisotropic
    Mat A(2, 2);
    A << 2, 0.3, 0.3, 1;
    const KernelSpec aniso(AnisotropyField::constant(A), EllipticityBounds(0.5, 3.0, 0.6, 2));
    SmoothFunction h2;
    h2.value = [](const Vec& x) { return std::exp(-x.squaredNorm()) * (1 + x[0]); };
    h2.sup_bound = 2.0;
    const auto d2 = drift_probe(h2, aniso, make_point({0.2, -0.1}), lams, DensitySpec::bump(2), 12);
    CHECK(d2.limit == doctest::Approx(d2.pointwise).epsilon(0.02));
}

TEST_CASE("constancy check") {
    const auto spec = KernelSpec::fractional_laplacian(1, 0.5, false);
    std::vector<Vec> pts;
    for (double x : {-1.0, -0.3, 0.0, 0.5, 2.0}) pts.push_back(make_point({x}));
    const auto c = constancy_check(SmoothFunction::constant(3.0), spec, pts);
    CHECK(c.max_LKw == 0.0);
    CHECK(c.oscillation == 0.0);
    CHECK((c.harmonic && c.constant));

    // w = h1 - h2 with h2 = h1 - 3
    const auto b = bump();
    SmoothFunction w;
    w.value = [b](const Vec& x) { return b(x) - (b(x) - 3.0); };
    w.support = b.support;
    w.far_value = 3.0;
    const auto m = constancy_check(w, spec, pts);
    CHECK(m.max_LKw < 1e-6);
    CHECK(m.oscillation < 1e-6);

    const auto nb = constancy_check(b, spec, pts);
    CHECK(nb.max_LKw > 0.1);
    CHECK_FALSE(nb.harmonic);
    CHECK_FALSE(nb.constant);
}
