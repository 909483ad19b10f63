#include "nldv/dv_functional.hpp"

#include "nldv/eigen_problem.hpp"
#include "nldv/errors.hpp"
#include "nldv/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace nldv {

namespace {

// exp(2 - 2/(1 - t^2)) on |t| < 1: the square of exp(1 - 1/(1 - t^2)).
double squared_bump(double t2) {
    if (t2 >= 1.0) return 0.0;
    return std::exp(2.0 - 2.0 / (1.0 - t2));
}

// Integral of the squared bump over the unit ball of R^N.
double unit_bump_mass(int dim) {
    static const std::array<double, kMaxDim + 1> table = [] {
        std::array<double, kMaxDim + 1> t{};
        for (int n = 1; n <= kMaxDim; ++n) {
            auto radial = [n](double r) { return std::pow(r, n - 1) * squared_bump(r * r); };
            t[n] = sphere_area(n) *
                   boost::math::quadrature::gauss_kronrod<double, 61>::integrate(radial, 0.0, 1.0, 15, 1e-15);
        }
        return t;
    }();
    if (dim < 1 || dim > kMaxDim) throw InputError("dimension must be 1, 2 or 3");
    return table[dim];
}

Vec zero_point(int dim) { return Vec::Zero(dim); }

// Diagonal scale of both objectives on supp f: the Hessian entries behave
// like |cell| W_ij sqrt(f_i f_j), so without rescaling nodes where f is tiny
// stall the descent. Returns d with x = y / d.
Eigen::VectorXd support_scaling(const DvSetup& s) {
    const auto& S = s.support;
    const double vol = s.op.lattice->cell_volume();
    Eigen::VectorXd d(static_cast<Eigen::Index>(S.size()));
    for (std::size_t a = 0; a < S.size(); ++a) {
        const auto i = S[a];
        double row = 0.0;
        for (auto j : S) row += s.op.weights(i, j) * s.sqrt_f[j];
        d[static_cast<Eigen::Index>(a)] = std::sqrt(vol * s.sqrt_f[i] * (row + s.op.exterior_mass[i] * s.sqrt_f[i]));
    }
    return d;
}

DescentResult scaled_descent(const Objective& F, const Eigen::VectorXd& d, const Eigen::VectorXd& x0,
                             const DescentOptions& opts) {
    Eigen::VectorXd gx(d.size());
    auto G = [&](const Eigen::VectorXd& y, Eigen::VectorXd& gy) {
        const long double v = F(y.cwiseQuotient(d), gx);
        gy = gx.cwiseQuotient(d);
        return v;
    };
    auto r = minimize_lbfgs(G, x0.cwiseProduct(d), opts);
    r.x = r.x.cwiseQuotient(d);
    return r;
}

}  // namespace

DensitySpec DensitySpec::bump(int dim, double radius) {
    return mixture(dim, {Bump{zero_point(dim), radius, 1.0}});
}

DensitySpec DensitySpec::mixture(int dim, std::vector<Bump> bumps) {
    if (dim < 1 || dim > kMaxDim) throw InputError("dimension must be 1, 2 or 3");
    if (bumps.empty()) throw InputError("a density needs at least one bump");
    double total = 0.0;
    for (auto& b : bumps) {
        if (b.center.size() == 0) b.center = zero_point(dim);
        if (b.center.size() != dim) throw InputError("bump centre has the wrong dimension");
        if (!(b.radius > 0.0) || !(b.weight > 0.0)) throw InputError("bump radius and weight must be positive");
        total += b.weight;
    }
    for (auto& b : bumps) b.weight /= total;
    DensitySpec d;
    d.dim = dim;
    d.bumps = std::move(bumps);
    d.center = zero_point(dim);
    return d;
}

DensitySpec DensitySpec::rescaled(double lam, const Vec& x0) const {
    if (!(lam > 0.0)) throw InputError("scale must be positive");
    if (x0.size() != dim) throw InputError("centre has the wrong dimension");
    DensitySpec d = *this;
    d.lambda = lam;
    d.center = x0;
    return d;
}

double DensitySpec::value(const Vec& x) const {
    const Vec y = (x - center) / lambda;
    const double unit = unit_bump_mass(dim);
    double sum = 0.0;
    for (const auto& b : bumps) {
        const double t2 = (y - b.center).squaredNorm() / (b.radius * b.radius);
        if (t2 < 1.0) sum += b.weight * squared_bump(t2) / (unit * std::pow(b.radius, dim));
    }
    return sum / std::pow(lambda, dim);
}

SupportBall DensitySpec::support() const {
    Vec lo = bumps.front().center, hi = lo;
    for (const auto& b : bumps) {
        lo = lo.cwiseMin(b.center - Vec::Constant(dim, b.radius));
        hi = hi.cwiseMax(b.center + Vec::Constant(dim, b.radius));
    }
    const Vec mid = 0.5 * (lo + hi);
    double r = 0.0;
    for (const auto& b : bumps) r = std::max(r, (b.center - mid).norm() + b.radius);
    return {center + lambda * mid, lambda * r};
}

SmoothFunction DensitySpec::density() const {
    SmoothFunction f;
    const DensitySpec self = *this;
    f.value = [self](const Vec& x) { return self.value(x); };
    f.support = support();
    double peak = 0.0;
    for (const auto& b : bumps) peak += b.weight / (unit_bump_mass(dim) * std::pow(b.radius, dim));
    f.sup_bound = peak / std::pow(lambda, dim);
    return f;
}

SmoothFunction DensitySpec::sqrt_density() const {
    SmoothFunction g = density();
    const DensitySpec self = *this;
    g.value = [self](const Vec& x) { return std::sqrt(self.value(x)); };
    g.sup_bound = std::sqrt(*g.sup_bound);
    return g;
}

DvSetup make_dv_setup(const DensitySpec& density, const KernelSpec& spec, const SmoothFunction& h, int cells,
                      const AssemblyOptions& opts) {
    if (cells < 2) throw InputError("need at least two cells across the support");
    if (density.dim != spec.dim()) throw InputError("density and kernel dimensions differ");
    const auto ball = density.support();
    const double mesh = 2.0 * ball.radius / cells;
    const Vec r = Vec::Constant(density.dim, ball.radius);
    auto lattice = std::make_shared<const LatticeDomain>(
        density.dim == 1 ? LatticeDomain::interval(ball.center[0] - ball.radius, ball.center[0] + ball.radius, mesh)
                         : LatticeDomain::box(ball.center - r, ball.center + r, mesh));

    DvSetup s{density, lattice, {}, {}, {}, {}, 0.0};
    const auto n = static_cast<Eigen::Index>(lattice->size());
    s.op = assemble(lattice, spec, h, Eigen::VectorXd::Zero(n), opts);
    s.f.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) s.f[i] = density.value(lattice->nodes()[static_cast<std::size_t>(i)]);
    // Values this far below the peak change I by O(sqrt(floor)) but wreck
    // the conditioning of the minimizations; they are treated as zero.
    const double floor = 1e-24 * s.f.maxCoeff();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (s.f[i] > floor) s.support.push_back(i);
        else s.f[i] = 0.0;
    }
    if (s.support.empty()) throw DomainError("density vanishes on every lattice node");
    s.raw_mass = s.f.sum() * lattice->cell_volume();
    s.f /= s.raw_mass;
    s.sqrt_f = s.f.cwiseSqrt();
    return s;
}

DvSetup make_dv_setup(const DensitySpec& density, const KernelSpec& spec, int cells, const AssemblyOptions& opts) {
    return make_dv_setup(density, spec, SmoothFunction::constant(0.0), cells, opts);
}

double rayleigh_integral(const DvSetup& setup, const Eigen::VectorXd& u, double exterior_value) {
    const auto& op = setup.op;
    if (u.size() != static_cast<Eigen::Index>(op.size())) throw InputError("u does not match the lattice");
    for (auto i : setup.support)
        if (!(u[i] > 0.0)) throw DomainError("u must be positive on the support of f");
    Eigen::VectorXd Mu = op.apply(u);
    if (exterior_value != 0.0) Mu += exterior_value * (op.exterior_mass + 0.5 * op.drift_exterior);
    const double vol = op.lattice->cell_volume();
    double sum = 0.0;
    for (auto i : setup.support) sum += setup.f[i] * vol * Mu[i] / u[i];
    return sum;
}

ClosedFormI I_closed_form_h0(const DvSetup& setup) {
    ClosedFormI out;
    if (!setup.density.sqrt_f_regular)
        out.warnings.push_back("sqrt(f) not flagged as regular: the minimizer may differ from sqrt(f)");
    out.value = dirichlet_form(setup.op, setup.sqrt_f, setup.sqrt_f);
    return out;
}

DirectMinimum I_direct(const DvSetup& setup, const DescentOptions& opts) {
    const auto& S = setup.support;
    const auto m = static_cast<Eigen::Index>(S.size());
    const Eigen::MatrixXd M = setup.op.matrix()(S, S);
    const double vol = setup.op.lattice->cell_volume();
    const Eigen::VectorXd mu = setup.f(S) * vol;

    // The diagonal contributes the constant sum mu_i M_ii and cancels in the
    // gradient; keeping it out avoids a large cancellation.
    // Extended precision: F is a difference of sums much larger than itself.
    using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    LMat A = M.cast<long double>();
    A.diagonal().setZero();
    const LVec mul = mu.cast<long double>();
    const long double diag = mul.dot(M.diagonal().cast<long double>());
    auto F = [&](const Eigen::VectorXd& z, Eigen::VectorXd& g) {
        const LVec u = z.cast<long double>().array().exp().matrix();
        const LVec Au = A * u;
        const LVec r = mul.cwiseQuotient(u);
        g = (u.cwiseProduct(A.transpose() * r) - r.cwiseProduct(Au)).cast<double>();
        return r.dot(Au) + diag;
    };
    DirectMinimum out;
    out.descent = scaled_descent(F, support_scaling(setup), Eigen::VectorXd::Zero(m), opts);
    out.I = -out.descent.value;
    Eigen::VectorXd z = out.descent.x;
    z.array() -= z.maxCoeff();
    out.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(setup.op.size()));
    out.u(S) = z.array().exp().matrix();
    return out;
}

namespace {

long double exponent_sum(const DvSetup& setup, const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
    const auto& S = setup.support;
    const auto m = static_cast<Eigen::Index>(S.size());
    if (w.size() != m) throw InputError("w must live on the support of f");
    const double vol = setup.op.lattice->cell_volume();
    const auto& W = setup.op.weights;
    const auto& h = setup.op.drift;
    if (grad) grad->setZero(m);
    long double total = 0.0L;
    for (Eigen::Index a = 0; a < m; ++a) {
        const auto i = S[static_cast<std::size_t>(a)];
        for (Eigen::Index b = 0; b < m; ++b) {
            if (a == b) continue;
            const auto j = S[static_cast<std::size_t>(b)];
            const double A = vol * W(i, j) * setup.sqrt_f[i] * setup.sqrt_f[j];
            const double r = w[b] - w[a];
            const double d = h[j] - h[i];
            const double ch = std::cosh(r), sh = std::sinh(r);
            total += A * (ch - 1.0 + 0.5 * sh * d);
            if (grad) (*grad)[a] -= 2.0 * A * (sh + 0.5 * ch * d);
        }
    }
    return total;
}

}  // namespace

double exponent_functional(const DvSetup& setup, const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
    return static_cast<double>(exponent_sum(setup, w, grad));
}

Decomposition I_decomposed(const DvSetup& setup, const Eigen::VectorXd& w_init, const DescentOptions& opts) {
    const auto& S = setup.support;
    const auto m = static_cast<Eigen::Index>(S.size());
    Decomposition out;
    out.diffusion = dirichlet_form(setup.op, setup.sqrt_f, setup.sqrt_f);
    out.transport = 0.5 * drift_form(setup.op, setup.f);

    const double vol = setup.op.lattice->cell_volume();
    for (auto i : S)
        for (auto j : S) {
            const double d = setup.op.drift[i] - setup.op.drift[j];
            out.E_lower_bound -= vol * setup.op.weights(i, j) * setup.sqrt_f[i] * setup.sqrt_f[j] * d * d;
        }

    Eigen::VectorXd w0 = Eigen::VectorXd::Zero(m);
    if (w_init.size() == static_cast<Eigen::Index>(setup.op.size())) w0 = w_init(S);
    else if (w_init.size() == m) w0 = w_init;
    else if (w_init.size() != 0) throw InputError("w_init must be given on all nodes or on the support");

    if (setup.op.has_drift()) {
        auto Phi = [&](const Eigen::VectorXd& w, Eigen::VectorXd& g) { return exponent_sum(setup, w, &g); };
        out.descent = scaled_descent(Phi, support_scaling(setup), w0, opts);
    } else {
        // Phi >= 0 = Phi(const) without drift; still report the start value.
        Eigen::VectorXd g(m);
        out.descent.x = Eigen::VectorXd::Zero(m);
        out.descent.value = exponent_functional(setup, out.descent.x, &g);
        out.descent.grad_norm = g.lpNorm<Eigen::Infinity>();
        out.descent.converged = true;
    }
    out.E = out.descent.value;
    out.I = out.diffusion - out.transport - out.E;
    Eigen::VectorXd w = out.descent.x;
    w.array() -= w.mean();
    out.w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(setup.op.size()));
    out.w(S) = w;
    return out;
}

double Q_form(double dh, double dw, double C) {
    return std::cosh(dw) - 1.0 + 0.5 * std::sinh(dw) * dh + 0.5 * C * dh * dh;
}

double Q_form_displayed(double dh, double dw) { return dh * dh + std::sinh(dw) * dh + std::cosh(dw) - 1.0; }

ScalarMin q_scalar_min(double hbar, double C) {
    auto q = [&](double r) { return Q_form(hbar, r, C); };
    const auto [r, v] = boost::math::tools::brent_find_minima(q, -40.0, 40.0, std::numeric_limits<double>::digits);
    return {v, r};
}

DualGapReport dual_gap(const DvSetup& setup, const std::vector<Eigen::VectorXd>& potentials, double I) {
    if (potentials.empty()) throw InputError("empty potential family");
    DualGapReport rep;
    rep.I = I;
    rep.best = -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd mu = setup.f * setup.op.lattice->cell_volume();
    for (const auto& V : potentials) {
        const auto pair = principal_eigenpair(setup.op.with_potential(V));
        rep.values.push_back(pair.lambda1 + V.dot(mu));
        rep.best = std::max(rep.best, rep.values.back());
    }
    rep.gap = I - rep.best;
    return rep;
}

std::vector<Eigen::VectorXd> quadratic_wells(const DvSetup& setup, const std::vector<double>& kappas) {
    const auto ball = setup.density.support();
    const auto& nodes = setup.op.lattice->nodes();
    std::vector<Eigen::VectorXd> out;
    for (double k : kappas) {
        Eigen::VectorXd V(static_cast<Eigen::Index>(nodes.size()));
        for (std::size_t i = 0; i < nodes.size(); ++i)
            V[static_cast<Eigen::Index>(i)] = k * (nodes[i] - ball.center).squaredNorm() / (ball.radius * ball.radius);
        out.push_back(std::move(V));
    }
    return out;
}

OptimalityResiduals optimality_residuals(const DensitySpec& density, const KernelSpec& spec,
                                         const std::vector<Vec>& points, const SmoothFunction* u,
                                         const QuadratureScheme& quad) {
    const SmoothFunction f = density.density();
    const SmoothFunction root = density.sqrt_density();
    const SmoothFunction& uu = u ? *u : root;
    SmoothFunction ratio = f;  // f / u, zero off the support
    ratio.value = [&f, &uu](const Vec& x) {
        const double fx = f(x);
        return fx > 0.0 ? fx / uu(x) : 0.0;
    };
    ratio.sup_bound.reset();

    OptimalityResiduals out;
    for (const auto& x : points) {
        const double fx = f(x), ux = uu(x);
        if (!(fx > 0.0) || !(ux > 0.0)) throw DomainError("residual points must lie where f > 0 and u > 0");
        const auto nodes = kernel_nodes(spec, x, quad, {&f, &uu, &ratio});
        const double Lu = apply_LK(nodes, uu, x);
        const double Lf = apply_LK(nodes, f, x);
        const double Lratio = apply_LK(nodes, ratio, x);
        const double Bru = apply_B(nodes, ratio, uu, x);
        out.first_order = std::max(out.first_order, std::abs(fx * Lu / (ux * ux) - Lratio));
        out.product_form = std::max(out.product_form, std::abs(2.0 * fx / ux * Lu - Lf + 2.0 * Bru));
    }
    return out;
}

}  // namespace nldv
