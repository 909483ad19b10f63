#include "nldv/discretize.hpp"
#include "nldv/errors.hpp"
#include "nldv/nonlocal_ops.hpp"
#include "test_support.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

using namespace nldv;
using testing_util::bump;

namespace {

std::shared_ptr<const LatticeDomain> share(LatticeDomain d) { return std::make_shared<const LatticeDomain>(std::move(d)); }

Eigen::VectorXd sample(const LatticeDomain& L, const SmoothFunction& f) {
    Eigen::VectorXd v(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) v[i] = f(L.nodes()[i]);
    return v;
}

SmoothFunction smooth_drift(double amp) {
    SmoothFunction h;
    h.value = [amp](const Vec& x) { return amp * std::exp(-0.5 * x.squaredNorm()); };
    h.sup_bound = std::abs(amp);
    return h;
}

}  // namespace

TEST_CASE("lattice construction") {
    const auto I = LatticeDomain::interval(-1, 1, 0.1);
    CHECK(I.size() == 20);
    CHECK(I.nodes().front()[0] == doctest::Approx(-0.95));
    const auto B = LatticeDomain::ball(make_point({0, 0}), 1.0, 0.1);
    for (const auto& x : B.nodes()) CHECK(x.norm() < 1.0);
    const auto S = LatticeDomain::signed_distance([](const Vec& x) { return x.norm() - 1.0; }, make_point({-1, -1}),
                                                  make_point({1, 1}), 0.1);
    CHECK(S.size() == B.size());
    const auto empty = LatticeDomain::signed_distance([](const Vec&) { return 1.0; }, make_point({-1}),
                                                      make_point({1}), 0.5);
    CHECK(empty.size() == 0);
    CHECK_THROWS_AS(assemble(share(empty), KernelSpec::fractional_laplacian(1, 0.5)), DomainError);
    CHECK_THROWS_AS(LatticeDomain::interval(0, 1, -0.1), InputError);
    AssemblyOptions small;
    small.max_nodes = 10;
    CHECK_THROWS_AS(assemble(share(I), KernelSpec::fractional_laplacian(1, 0.5), small), CapacityError);
}

TEST_CASE("exterior mass against independent oracles") {
    const double s = 0.4;
    // interval: ((1-x)^{-2s} + (1+x)^{-2s}) / (2s)
    const auto L = share(LatticeDomain::interval(-1, 1, 0.1));
    const auto op = assemble(L, KernelSpec::fractional_laplacian(1, s, false));
    for (std::size_t i = 0; i < L->size(); ++i) {
        const double x = L->nodes()[i][0];
        CHECK(op.exterior_mass[i] ==
              doctest::Approx((std::pow(1 - x, -2 * s) + std::pow(1 + x, -2 * s)) / (2 * s)).epsilon(1e-13));
    }
    // square: angular integral of the exit distance by adaptive quadrature
    const auto Q = share(LatticeDomain::box(make_point({-1, -1}), make_point({1, 1}), 0.25));
    Mat A(2, 2);
    A << 2.0, 0.3, 0.3, 1.0;
    const KernelSpec spec(AnisotropyField::constant(A), EllipticityBounds(0.5, 3, s, 2));
    const auto opq = assemble(Q, spec);
    for (std::size_t i : {0ul, 5ul, 27ul}) {
        const Vec x = Q->nodes()[i];
        auto integrand = [&](double a) {
            const Vec t = make_point({std::cos(a), std::sin(a)});
            double exit = 1e300;
            for (int k = 0; k < 2; ++k)
                if (t[k] != 0) exit = std::min(exit, ((t[k] > 0 ? 1.0 : -1.0) - x[k]) / t[k]);
            return std::pow(t.dot(A * t), -(1 + s)) * std::pow(exit, -2 * s) / (2 * s);
        };
        double want = 0;
        // split at the corner directions, where the exit distance has kinks
        std::vector<double> cuts;
        for (double cx : {-1.0, 1.0})
            for (double cy : {-1.0, 1.0}) {
                double a = std::atan2(cy - x[1], cx - x[0]);
                cuts.push_back(a < 0 ? a + 2 * std::numbers::pi : a);
            }
        cuts.push_back(0);
        cuts.push_back(2 * std::numbers::pi);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
            want += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, cuts[k], cuts[k + 1], 15);
        CHECK(opq.exterior_mass[i] == doctest::Approx(want).epsilon(2e-3));
    }
}

TEST_CASE("row sums of the constant function") {
    const auto L = share(LatticeDomain::ball(make_point({0, 0}), 1.0, 0.2));
    Eigen::VectorXd V = Eigen::VectorXd::LinSpaced(L->size(), -1, 2);
    const auto op = assemble(L, KernelSpec::fractional_laplacian(2, 0.5), SmoothFunction::constant(0.0), V);
    const Eigen::VectorXd rows = op.matrix().rowwise().sum();
    for (Eigen::Index i = 0; i < rows.size(); ++i) {
        CHECK(rows[i] == doctest::Approx(V[i] - op.exterior_mass[i]).epsilon(1e-10));
        CHECK(rows[i] < V[i]);
    }
}

TEST_CASE("h = 0 matrix is symmetric negative definite") {
    const auto L = share(LatticeDomain::interval(-1, 1, 0.05));
    const auto op = assemble(L, KernelSpec::fractional_laplacian(1, 0.3));
    const Eigen::MatrixXd M = op.matrix();
    CHECK((M - M.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    CHECK(es.eigenvalues().maxCoeff() < 0.0);
    CHECK(coercivity_shift(op) == doctest::Approx(es.eigenvalues().maxCoeff()));
}

TEST_CASE("discrete integration by parts and product rule are exact") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int N : {1, 2}) {
        const auto L = share(N == 1 ? LatticeDomain::interval(-1, 1, 0.05)
                                    : LatticeDomain::box(make_point({-1, -1}), make_point({1, 1}), 0.1));
        const auto op = assemble(L, KernelSpec::fractional_laplacian(N, 0.6));
        const Eigen::MatrixXd M = op.matrix();
        for (int t = 0; t < 5; ++t) {
            const Eigen::VectorXd u = Eigen::VectorXd::Random(L->size());
            const Eigen::VectorXd v = Eigen::VectorXd::Random(L->size());
            const double ibp = -L->cell_volume() * u.dot(M * v);
            CHECK(ibp == doctest::Approx(dirichlet_form(op, u, v)).epsilon(1e-12));
            const Eigen::VectorXd uv = u.cwiseProduct(v);
            const Eigen::VectorXd res = op.apply(uv) - u.cwiseProduct(op.apply(v)) - v.cwiseProduct(op.apply(u)) -
                                        2.0 * carre_du_champ(op, u, v);
            CHECK(res.lpNorm<Eigen::Infinity>() < 1e-10 * (1 + op.apply(uv).lpNorm<Eigen::Infinity>()));
        }
    }
}

TEST_CASE("assembled operator converges to the pointwise operator") {
    const double s = 0.5;
    const auto spec = KernelSpec::fractional_laplacian(1, s, true);
    const auto u = bump(make_point({0.1}), 0.6);
    const auto h = smooth_drift(0.4);
    std::vector<double> errs;
    for (double mesh : {0.1, 0.05, 0.025}) {
        const auto L = share(LatticeDomain::interval(-1, 1, mesh));
        const auto op = assemble(L, spec, h, Eigen::VectorXd());
        const Eigen::VectorXd Mu = op.apply(sample(*L, u));
        double err = 0;
        for (double x : {-0.3, 0.1, 0.45}) {
            // nearest node
            std::size_t best = 0;
            for (std::size_t i = 0; i < L->size(); ++i)
                if (std::abs(L->nodes()[i][0] - x) < std::abs(L->nodes()[best][0] - x)) best = i;
            err = std::max(err, std::abs(Mu[best] - apply_drifted(u, h, spec, L->nodes()[best])));
        }
        errs.push_back(err);
    }
    MESSAGE("assembled vs pointwise error: " << errs[0] << " " << errs[1] << " " << errs[2]);
    CHECK(errs[1] < errs[0]);
    CHECK(errs[2] < errs[1]);
    CHECK(errs[2] < 0.05);
}

TEST_CASE("drift exterior term against pointwise quadrature") {
    // g_i + sum_j W_ij (h_j - h_i) approximates L_K h at the node.
    const auto spec = KernelSpec::fractional_laplacian(1, 0.5, true);
    const auto h = smooth_drift(1.0);
    const auto L = share(LatticeDomain::interval(-1, 1, 0.02));
    const auto op = assemble(L, spec, h, Eigen::VectorXd());
    const Eigen::VectorXd Lh = drift_laplacian(op);
    for (std::size_t i : {10ul, 50ul, 90ul}) CHECK(Lh[i] == doctest::Approx(apply_LK(h, spec, L->nodes()[i])).epsilon(0.02));
}

TEST_CASE("H^s_K seminorm") {
    const double s = 0.3;
    const auto L = share(LatticeDomain::interval(-1, 1, 0.1));
    const auto spec = KernelSpec::fractional_laplacian(1, s, false);
    CHECK(seminorm_HsK(GridFunction(L, Eigen::VectorXd::Zero(L->size())), spec) == 0.0);

    // hat function against a brute-force double loop (no self-cell term)
    AssemblyOptions plain;
    plain.self_cell_correction = false;
    const auto hat = GridFunction::sample(L, [](const Vec& x) { return std::max(0.0, 1.0 - 2 * std::abs(x[0])); });
    double brute = 0;
    const double hgrid = 0.1;
    for (std::size_t i = 0; i < L->size(); ++i) {
        const double xi = L->nodes()[i][0];
        for (std::size_t j = 0; j < L->size(); ++j)
            if (i != j) {
                const double d = hat.values[i] - hat.values[j];
                brute += d * d * std::pow(std::abs(xi - L->nodes()[j][0]), -1 - 2 * s) * hgrid * hgrid;
            }
        brute += 2 * hgrid * hat.values[i] * hat.values[i] * (std::pow(1 - xi, -2 * s) + std::pow(1 + xi, -2 * s)) /
                 (2 * s);
    }
    CHECK(seminorm_HsK(hat, spec, false, plain) == doctest::Approx(brute).epsilon(1e-12));

    // lambda^{N-2s} scaling on the scaled lattice
    const auto f = [](const Vec& x) { return std::exp(-4 * x.squaredNorm()) * (1 - x.squaredNorm()); };
    const auto B = LatticeDomain::box(make_point({-1, -1}), make_point({1, 1}), 0.1);
    const auto spec2 = KernelSpec::fractional_laplacian(2, s);
    const double base = seminorm_HsK(GridFunction::sample(share(B), f), spec2);
    for (double lam : {0.5, 0.25}) {
        const auto Bl = share(B.scaled(lam, Vec::Zero(2)));
        const double v = seminorm_HsK(GridFunction::sample(Bl, [&](const Vec& x) { return f(x / lam); }), spec2);
        CHECK(v == doctest::Approx(std::pow(lam, 2 - 2 * s) * base).epsilon(1e-10));
    }
}

TEST_CASE("Dirichlet problem") {
    const auto spec = KernelSpec::fractional_laplacian(1, 0.5, true);
    const auto L = share(LatticeDomain::interval(-1, 1, 0.05));
    const auto op = assemble(L, spec);
    auto zero = dirichlet_solve(op, 0.0, Eigen::VectorXd::Zero(L->size()));
    CHECK(zero.u.values.lpNorm<Eigen::Infinity>() == 0.0);

    // maximum principle: osc(h) < 1, C >= 0, rhs <= 0  =>  u >= 0
    SmoothFunction h = smooth_drift(0.9);
    const auto oph = assemble(L, spec, h, Eigen::VectorXd());
    CHECK(oph.drift_oscillation() < 1.0);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> U(0, 1);
    for (double C : {0.0, 0.5, 3.0}) {
        Eigen::VectorXd rhs(L->size());
        for (auto& r : rhs) r = -U(rng);
        const auto sol = dirichlet_solve(oph, C, rhs);
        CHECK(sol.u.values.minCoeff() >= 0.0);
        CHECK(sol.residual < 1e-10);
    }

    // (-Delta)^{1/2} u = 1 on (-1,1): u = sqrt(1 - x^2)
    std::vector<double> err;
    for (double mesh : {0.04, 0.02, 0.01}) {
        const auto Lm = share(LatticeDomain::interval(-1, 1, mesh));
        const auto sol = dirichlet_solve(assemble(Lm, spec), 0.0, -Eigen::VectorXd::Ones(Lm->size()));
        double e = 0;
        for (std::size_t i = 0; i < Lm->size(); ++i) {
            const double x = Lm->nodes()[i][0];
            if (std::abs(x) < 0.8) e = std::max(e, std::abs(sol.u.values[i] - std::sqrt(1 - x * x)));
        }
        err.push_back(e);
    }
    MESSAGE("fractional Poisson errors: " << err[0] << " " << err[1] << " " << err[2]);
    CHECK(err[1] < err[0]);
    CHECK(err[2] < err[1]);
    CHECK(err[2] < 0.02);

    // singular system
    const double C0 = coercivity_shift(op);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix());
    CHECK_THROWS_AS(dirichlet_solve(op, es.eigenvalues().maxCoeff(), Eigen::VectorXd::Ones(L->size()), 1e-10),
                    SolverError);
    CHECK(C0 < 0.0);
}

TEST_CASE("signed-distance exterior intervals match the ball") {
    const auto ball = LatticeDomain::ball(make_point({0, 0}), 1.0, 0.2);
    const auto sdf = LatticeDomain::signed_distance([](const Vec& x) { return x.norm() - 1.0; }, make_point({-1.2, -1.2}),
                                                    make_point({1.2, 1.2}), 0.2);
    const Vec x = make_point({0.3, -0.2});
    for (double a : {0.1, 1.0, 2.5, 4.0}) {
        const Vec t = make_point({std::cos(a), std::sin(a)});
        CHECK(sdf.exterior_intervals(x, t).front().first ==
              doctest::Approx(ball.exterior_intervals(x, t).front().first).epsilon(1e-12));
    }
    // an annulus: the ray from inside crosses the hole
    const auto ann = LatticeDomain::signed_distance(
        [](const Vec& x) { return std::max(x.norm() - 1.0, 0.3 - x.norm()); }, make_point({-1, -1}),
        make_point({1, 1}), 0.05);
    const auto iv = ann.exterior_intervals(make_point({-0.6, 0.0}), make_point({1.0, 0.0}));
    REQUIRE(iv.size() == 2);
    CHECK(iv[0].first == doctest::Approx(0.3));
    CHECK(iv[0].second == doctest::Approx(0.9));
    CHECK(iv[1].first == doctest::Approx(1.6));
}

TEST_CASE("grid function serialization") {
    const auto L = share(LatticeDomain::interval(0, 1, 0.25));
    const auto g = GridFunction::sample(L, [](const Vec& x) { return x[0]; });
    const auto dir = std::filesystem::temp_directory_path() / "nldv_gridfn_test";
    std::filesystem::create_directories(dir);
    g.write_csv(dir / "g.csv");
    g.write_metadata(dir / "g.json");
    std::ifstream is(dir / "g.csv");
    std::string header, first;
    std::getline(is, header);
    std::getline(is, first);
    CHECK(header == "index,x0,value");
    CHECK(first == "0,0.125,0.125");
    CHECK(std::filesystem::file_size(dir / "g.json") > 10);
    std::filesystem::remove_all(dir);
}
