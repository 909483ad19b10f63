#include "nldv/eigen_problem.hpp"

#include "nldv/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nldv {

namespace {

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
};

// Collatz-Wielandt quotients (-M u)_i / u_i for u > 0.
Bracket collatz_wielandt(const Eigen::MatrixXd& M, const Eigen::VectorXd& u) {
    const Eigen::ArrayXd q = (-(M * u)).array() / u.array();
    return {q.minCoeff(), q.maxCoeff()};
}

void normalize_sign_and_sup(Eigen::VectorXd& u) {
    if (u.sum() < 0.0) u = -u;
    const double m = u.cwiseAbs().maxCoeff();
    if (!(m > 0.0) || !std::isfinite(m)) throw IterationError("iterate vanished or overflowed", m);
    u /= m;
}

}  // namespace

EigenPair principal_eigenpair(const AssembledOperator& op, double tol, int max_iter) {
    if (!(tol > 0.0) || max_iter < 1) throw InputError("eigen solver needs tol > 0 and max_iter >= 1");
    const Eigen::MatrixXd M = op.matrix();
    const Eigen::Index n = M.rows();
    EigenPair out;
    if (op.drift_oscillation() >= 1.0)
        out.warnings.push_back("osc(h) >= 1: the principal eigenfunction need not be positive");

    Eigen::VectorXd u = Eigen::VectorXd::Ones(n);
    Bracket b = collatz_wielandt(M, u);
    double lo = b.lo, hi = b.hi;
    double sigma = std::numeric_limits<double>::quiet_NaN();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    double lambda_est = 0.5 * (lo + hi);
    bool positive = true;

    int k = 0;
    for (; k < max_iter; ++k) {
        const double scale = std::max(1.0, std::abs(lambda_est));
        if (positive && hi - lo <= tol * scale) break;
        // Shift strictly below lambda_1 keeps -(M + sigma) a nonsingular
        // M-matrix, so the iterates stay positive.
        const double target = lo - 0.05 * (hi - lo) - 1e-3 * tol * scale;
        if (std::isnan(sigma) || target - sigma > 0.1 * (hi - sigma)) {
            sigma = target;
            Eigen::MatrixXd S = M;
            S.diagonal().array() += sigma;
            lu.compute(S);
        }
        const Eigen::VectorXd prev = u;
        u = -lu.solve(prev);
        // Power-method estimate, valid with or without positivity.
        const double growth = prev.dot(u) / prev.dot(prev);
        normalize_sign_and_sup(u);
        positive = (u.array() > 0.0).all();
        if (positive) {
            b = collatz_wielandt(M, u);
            lo = std::max(lo, b.lo);
            hi = std::min(hi, b.hi);
            if (lo > hi) std::swap(lo, hi);  // rounding at convergence
            lambda_est = 0.5 * (lo + hi);
        } else {
            const double est = sigma + 1.0 / growth;
            if (std::abs(est - lambda_est) <= tol * std::max(1.0, std::abs(est))) {
                lambda_est = est;
                break;
            }
            lambda_est = est;
        }
    }

    out.iterations = k;
    out.lambda1 = lambda_est;
    out.lower_bound = lo;
    out.upper_bound = hi;
    out.residual = (M * u + lambda_est * u).lpNorm<Eigen::Infinity>() / u.lpNorm<Eigen::Infinity>();
    if (k >= max_iter) throw IterationError("principal eigenpair did not converge", out.residual);
    if (!positive) throw PositivityError("principal eigenvector candidate changes sign");
    out.phi1 = GridFunction(op.lattice, u);
    return out;
}

DenseEigen dense_principal_eigenpair(const AssembledOperator& op) {
    const Eigen::MatrixXd B = -op.matrix();
    const Eigen::Index n = B.rows();
    DenseEigen out;
    auto accept = [&](Eigen::VectorXd v) {
        if (v.sum() < 0.0) v = -v;
        v /= v.cwiseAbs().maxCoeff();
        return (v.array() > -1e-10).all() ? std::optional<Eigen::VectorXd>(v) : std::nullopt;
    };
    if (!op.has_drift()) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
        if (es.info() != Eigen::Success) throw SolverError("symmetric eigensolver failed", 0.0);
        for (Eigen::Index k = 0; k < n; ++k) {
            if (auto v = accept(es.eigenvectors().col(k))) {
                out.lambda1 = es.eigenvalues()[k];
                out.phi = *v;
                return out;
            }
        }
        throw PositivityError("no eigenvector of one sign");
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(B);
    if (es.info() != Eigen::Success) throw SolverError("nonsymmetric eigensolver failed", 0.0);
    const Eigen::VectorXcd ev = es.eigenvalues();
    std::vector<Eigen::Index> order(n);
    for (Eigen::Index k = 0; k < n; ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ev[a].real() < ev[b].real(); });
    out.imag_of_minimum = ev[order[0]].imag();
    const double scale = ev.cwiseAbs().maxCoeff();
    for (auto k : order) {
        if (std::abs(ev[k].imag()) > 1e-10 * scale) continue;
        const Eigen::VectorXcd vc = es.eigenvectors().col(k);
        if (auto v = accept(vc.real())) {
            out.lambda1 = ev[k].real();
            out.phi = *v;
            return out;
        }
    }
    throw PositivityError("no real eigenvalue with an eigenvector of one sign");
}

Eigen::VectorXd left_principal_eigenvector(const AssembledOperator& op, const EigenPair& pair) {
    const Eigen::MatrixXd M = op.matrix();
    const Eigen::Index n = M.rows();
    const double delta = std::max(1e-9, 1e-7 * std::abs(pair.lambda1));
    Eigen::MatrixXd S = -M.transpose();
    S.diagonal().array() -= pair.lambda1 - delta;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
    Eigen::VectorXd v = pair.phi1.values;
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd w = lu.solve(v);
        normalize_sign_and_sup(w);
        const double change = (w - v).lpNorm<Eigen::Infinity>();
        v = w;
        if (change < 1e-13) break;
    }
    if (!(v.array() > 0.0).all()) throw PositivityError("left eigenvector changes sign");
    (void)n;
    return v / v.sum();
}

Eigen::VectorXd optimal_measure(const AssembledOperator& op, const EigenPair& pair) {
    const Eigen::VectorXd psi = left_principal_eigenvector(op, pair);
    const Eigen::VectorXd mu = psi.cwiseProduct(pair.phi1.values);
    return mu / mu.sum();
}

double admissible_lambda(const AssembledOperator& op, const Eigen::VectorXd& phi) {
    if (!(phi.array() > 0.0).all()) throw InputError("test function must be positive");
    return ((-op.apply(phi)).array() / phi.array()).minCoeff();
}

SupCheck sup_characterization_check(const AssembledOperator& op, const Eigen::VectorXd& phi, double lambda) {
    SupCheck c;
    c.margin = admissible_lambda(op, phi) - lambda;
    c.admissible = c.margin >= 0.0;
    return c;
}

double minmax_value(const AssembledOperator& op, const std::vector<Eigen::VectorXd>& measures,
                    const std::vector<Eigen::VectorXd>& tests) {
    if (measures.empty() || tests.empty()) throw InputError("min-max needs nonempty families");
    const auto n = static_cast<Eigen::Index>(op.size());
    std::vector<Eigen::ArrayXd> quotients;
    for (const auto& phi : tests) {
        if (phi.size() != n || !(phi.array() > 0.0).all()) throw InputError("test functions must be positive");
        quotients.push_back((-op.apply(phi)).array() / phi.array());
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& mu : measures) {
        if (mu.size() != n || (mu.array() < 0.0).any() || std::abs(mu.sum() - 1.0) > 1e-10)
            throw InputError("measures must be probability vectors");
        double worst = -std::numeric_limits<double>::infinity();
        for (const auto& q : quotients) worst = std::max(worst, (mu.array() * q).sum());
        best = std::min(best, worst);
    }
    return best;
}

std::vector<Eigen::VectorXd> power_iterates(const AssembledOperator& op, int count) {
    const Eigen::MatrixXd M = op.matrix();
    const Eigen::Index n = M.rows();
    Eigen::VectorXd u = Eigen::VectorXd::Ones(n);
    // sigma > -lambda_1 because min(-M 1) <= lambda_1.
    const double sigma = -collatz_wielandt(M, u).lo + 1.0;
    Eigen::MatrixXd S = -M;
    S.diagonal().array() += sigma;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
    std::vector<Eigen::VectorXd> out;
    for (int k = 0; k < count; ++k) {
        out.push_back(u);
        u = lu.solve(u);
        normalize_sign_and_sup(u);
    }
    return out;
}

SmoothFunction comparison_profile(double s) {
    SmoothFunction u;
    u.value = [s](const Vec& x) {
        const double t = 1.0 - x[0] * x[0];
        return t > 0.0 ? std::pow(t, 1.0 + s) : 0.0;
    };
    u.support = SupportBall{make_point({0.0}), 1.0};
    u.sup_bound = 1.0;
    u.breakpoints = {-1.0, 1.0};
    return u;
}

SmoothFunction comparison_drift(double H) {
    SmoothFunction h;
    h.value = [H](const Vec& x) {
        const double t = std::clamp(std::abs(x[0]) - 1.0, 0.0, 1.0);
        return H * t * t * (3.0 - 2.0 * t);
    };
    h.sup_bound = std::abs(H);
    h.far_value = H;
    h.breakpoints = {-2.0, -1.0, 1.0, 2.0};
    return h;
}

MaxPrincipleReport maxprinciple_violation_demo(double s, double H, int grid_points, const QuadratureScheme& quad) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("s must lie in (0,1)");
    if (grid_points < 1) throw InputError("grid needs at least one point");
    const auto spec = KernelSpec::fractional_laplacian(1, s, true);
    const auto u = comparison_profile(s);
    const auto h1 = comparison_drift(1.0);

    // Both terms are linear in H: value(x) = a(x) + H b(x), b <= 0.
    MaxPrincipleReport r;
    r.s = s;
    std::vector<double> a, b;
    for (int k = 0; k < grid_points; ++k) {
        const double x = -1.0 + 2.0 * (k + 1) / (grid_points + 1);
        const Vec p = make_point({x});
        r.x.push_back(x);
        a.push_back(-apply_LK(u, spec, p, quad));
        b.push_back(apply_B(h1, u, spec, p, quad));
    }
    double threshold = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a[k] > 0.0) {
            if (!(b[k] < 0.0)) throw DomainError("drift term does not compensate at an interior point");
            threshold = std::max(threshold, a[k] / -b[k]);
        }
    r.H_threshold = threshold;
    r.H = H > 0.0 ? H : 1.5 * threshold;
    r.oscillation = std::abs(r.H);
    r.max_value = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < a.size(); ++k) {
        r.values.push_back(a[k] + r.H * b[k]);
        r.max_value = std::max(r.max_value, r.values.back());
    }
    r.u_at_zero = u(make_point({0.0}));
    r.value_at_zero = -apply_LK(u, spec, make_point({0.0}), quad) +
                      r.H * apply_B(h1, u, spec, make_point({0.0}), quad);
    return r;
}

}  // namespace nldv
