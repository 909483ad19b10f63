#include "nldv/discretize.hpp"

#include "nldv/errors.hpp"
#include "nldv/nonlocal_ops.hpp"
#include "nldv/quadrature.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace nldv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int cells_for(double length, double mesh) {
    if (!(mesh > 0.0)) throw InputError("mesh width must be positive");
    if (!(length > 0.0)) throw InputError("domain has empty extent");
    return std::max(1, static_cast<int>(std::lround(length / mesh)));
}

// Distance along x + t theta to the boundary of the box [lo, hi] (x inside).
double box_exit(const Vec& x, const Vec& theta, const Vec& lo, const Vec& hi) {
    double t = kInf;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        if (theta[k] > 0.0) t = std::min(t, (hi[k] - x[k]) / theta[k]);
        else if (theta[k] < 0.0) t = std::min(t, (lo[k] - x[k]) / theta[k]);
    }
    return std::max(t, 0.0);
}

// Radial density of the kernel, K(x, x + rho theta) rho^{N-1}.
double radial_density(const KernelSpec& spec, const Vec& x, const Vec& theta, double rho) {
    return kernel_eval(spec, x, x + rho * theta) * std::pow(rho, spec.dim() - 1);
}

// int_a^b K(x, x + rho theta) rho^{N-1} d rho.
double ray_mass(const KernelSpec& spec, const Vec& x, const Vec& theta, double a, double b, const GaussRule& rule) {
    const double s = spec.s();
    if (!(b > a)) return 0.0;
    if (spec.field.is_constant()) {
        const double q = theta.dot(spec.field.matrix() * theta);
        const double k = spec.prefactor() * std::pow(q, -spec.exponent());
        const double upper = std::isinf(b) ? 0.0 : std::pow(b, -2.0 * s);
        return k * (std::pow(a, -2.0 * s) - upper) / (2.0 * s);
    }
    // Geometric panels up to 1e6 a; beyond, the field is frozen.
    const double cap = std::min(b, a * 1e6);
    std::vector<double> xs, ws;
    graded_panels(a, cap, {}, 4.0, 0, rule, xs, ws);
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) acc += ws[i] * radial_density(spec, x, theta, xs[i]);
    if (cap < b) {
        const double kf = kernel_eval(spec, x, x + cap * theta) * std::pow(cap, spec.dim() + 2.0 * s);
        const double upper = std::isinf(b) ? 0.0 : std::pow(b, -2.0 * s);
        acc += kf * (std::pow(cap, -2.0 * s) - upper) / (2.0 * s);
    }
    return acc;
}

std::vector<Direction> assembly_directions(int dim, int resolution) {
    return sphere_directions(dim, dim == 3 ? std::max(2, resolution / 8) : resolution);
}

// c_k = 1/2 int_cell z_k^2 K(x, x + z) dz with the field frozen at A(x, x).
Eigen::VectorXd self_cell_moments(const KernelSpec& spec, const Vec& x, const Vec& spacing) {
    const int N = spec.dim();
    const double s = spec.s();
    const Mat A = spec.field(x, x);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(N);
    for (const auto& d : sphere_directions(N, N == 2 ? 720 : 48)) {
        double rho = kInf;
        for (int k = 0; k < N; ++k)
            if (d.theta[k] != 0.0) rho = std::min(rho, 0.5 * spacing[k] / std::abs(d.theta[k]));
        const double kq = spec.prefactor() * std::pow(d.theta.dot(A * d.theta), -spec.exponent());
        const double radial = kq * std::pow(rho, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
        for (int k = 0; k < N; ++k) c[k] += d.weight * d.theta[k] * d.theta[k] * radial;
    }
    return 0.5 * c;
}

}  // namespace

// ---------------------------------------------------------------------------
// LatticeDomain

LatticeDomain LatticeDomain::interval(double a, double b, double mesh) {
    LatticeDomain d = box(make_point({a}), make_point({b}), mesh);
    d.shape_ = Shape::Interval;
    return d;
}

LatticeDomain LatticeDomain::box(const Vec& lo, const Vec& hi, double mesh) {
    if (lo.size() != hi.size() || lo.size() < 1 || lo.size() > kMaxDim) throw InputError("box corners disagree");
    LatticeDomain d;
    d.shape_ = Shape::Box;
    d.lo_ = lo;
    d.hi_ = hi;
    d.dom_lo_ = lo;
    d.dom_hi_ = hi;
    d.spacing_ = Vec(lo.size());
    for (Eigen::Index k = 0; k < lo.size(); ++k) {
        const int n = cells_for(hi[k] - lo[k], mesh);
        d.counts_.push_back(n);
        d.spacing_[k] = (hi[k] - lo[k]) / n;
    }
    d.build();
    return d;
}

LatticeDomain LatticeDomain::ball(const Vec& center, double radius, double mesh) {
    if (!(radius > 0.0)) throw InputError("ball radius must be positive");
    LatticeDomain d = box(center.array() - radius, center.array() + radius, mesh);
    d.shape_ = Shape::Ball;
    d.center_ = center;
    d.radius_ = radius;
    d.build();
    return d;
}

LatticeDomain LatticeDomain::signed_distance(Sdf sdf, const Vec& lo, const Vec& hi, double mesh) {
    if (!sdf) throw InputError("signed-distance domain needs a callable");
    LatticeDomain d = box(lo, hi, mesh);
    d.shape_ = Shape::SignedDistance;
    d.sdf_ = std::move(sdf);
    d.build();
    return d;
}

LatticeDomain LatticeDomain::scaled(double lambda, const Vec& x0) const {
    if (!(lambda > 0.0)) throw InputError("scale must be positive");
    LatticeDomain d = *this;
    auto map = [&](const Vec& x) -> Vec { return x0 + lambda * (x - x0); };
    d.lo_ = map(lo_);
    d.hi_ = map(hi_);
    d.spacing_ = lambda * spacing_;
    if (dom_lo_.size()) {
        d.dom_lo_ = map(dom_lo_);
        d.dom_hi_ = map(dom_hi_);
    }
    if (center_.size()) d.center_ = map(center_);
    d.radius_ = lambda * radius_;
    if (sdf_) {
        auto inner = sdf_;
        const Vec c = x0;
        d.sdf_ = [inner, c, lambda](const Vec& x) { return lambda * inner(c + (x - c) / lambda); };
    }
    d.build();
    return d;
}

void LatticeDomain::build() {
    const int N = dim();
    std::size_t total = 1;
    for (int n : counts_) total *= static_cast<std::size_t>(n);
    nodes_.clear();
    indices_.clear();
    mask_.assign(total, false);
    lookup_.assign(total, -1);
    std::array<int, kMaxDim> idx{0, 0, 0};
    for (std::size_t lin = 0; lin < total; ++lin) {
        std::size_t rem = lin;
        Vec x(N);
        for (int k = 0; k < N; ++k) {
            idx[k] = static_cast<int>(rem % counts_[k]);
            rem /= counts_[k];
            x[k] = lo_[k] + (idx[k] + 0.5) * spacing_[k];
        }
        if (contains(x)) {
            mask_[lin] = true;
            lookup_[lin] = static_cast<long>(nodes_.size());
            nodes_.push_back(x);
            indices_.push_back(idx);
        }
    }
}

long LatticeDomain::interior_index(const std::array<int, kMaxDim>& idx) const {
    std::size_t lin = 0, stride = 1;
    for (int k = 0; k < dim(); ++k) {
        if (idx[k] < 0 || idx[k] >= counts_[k]) return -1;
        lin += stride * static_cast<std::size_t>(idx[k]);
        stride *= counts_[k];
    }
    return lookup_[lin];
}

bool LatticeDomain::contains(const Vec& x) const {
    switch (shape_) {
        case Shape::Interval:
        case Shape::Box:
            return (x.array() > dom_lo_.array()).all() && (x.array() < dom_hi_.array()).all();
        case Shape::Ball:
            return (x - center_).norm() < radius_;
        case Shape::SignedDistance:
            return (x.array() > lo_.array()).all() && (x.array() < hi_.array()).all() && sdf_(x) < 0.0;
    }
    return false;
}

std::vector<std::pair<double, double>> LatticeDomain::exterior_intervals(const Vec& x, const Vec& theta) const {
    switch (shape_) {
        case Shape::Interval:
        case Shape::Box:
            return {{box_exit(x, theta, dom_lo_, dom_hi_), kInf}};
        case Shape::Ball: {
            const Vec dx = x - center_;
            const double b = dx.dot(theta);
            const double c = dx.squaredNorm() - radius_ * radius_;
            return {{-b + std::sqrt(std::max(0.0, b * b - c)), kInf}};
        }
        case Shape::SignedDistance: {
            // March to the bounding box, bisecting each sign change of the sdf.
            const double t_box = box_exit(x, theta, lo_, hi_);
            const double step = 0.25 * spacing_.minCoeff();
            std::vector<std::pair<double, double>> out;
            auto outside = [&](double t) { return sdf_(x + t * theta) >= 0.0; };
            auto crossing = [&](double a, double b) {
                const bool oa = outside(a);
                for (int it = 0; it < 60; ++it) {
                    const double m = 0.5 * (a + b);
                    (outside(m) == oa ? a : b) = m;
                }
                return 0.5 * (a + b);
            };
            bool out_now = false;
            double start = 0.0, t = 0.0;
            while (t < t_box) {
                const double next = std::min(t + step, t_box);
                const bool o = outside(next);
                if (o != out_now) {
                    const double tc = crossing(t, next);
                    if (o) start = tc;
                    else out.emplace_back(start, tc);
                    out_now = o;
                }
                t = next;
            }
            if (out_now) out.emplace_back(start, kInf);
            else out.emplace_back(t_box, kInf);
            return out;
        }
    }
    return {};
}

std::string LatticeDomain::describe() const {
    static const char* names[] = {"interval", "box", "ball", "signed_distance"};
    std::ostringstream os;
    os << names[static_cast<int>(shape_)] << " lattice, " << size() << " interior nodes";
    return os.str();
}

// ---------------------------------------------------------------------------
// GridFunction

GridFunction::GridFunction(std::shared_ptr<const LatticeDomain> l, Eigen::VectorXd v)
    : lattice(std::move(l)), values(std::move(v)) {
    if (!lattice) throw InputError("grid function without lattice");
    if (static_cast<std::size_t>(values.size()) != lattice->size())
        throw InputError("grid function size does not match the lattice");
}

GridFunction GridFunction::sample(std::shared_ptr<const LatticeDomain> l, const std::function<double(const Vec&)>& f) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(l->size()));
    for (std::size_t i = 0; i < l->size(); ++i) v[static_cast<Eigen::Index>(i)] = f(l->nodes()[i]);
    return GridFunction(std::move(l), std::move(v));
}

void GridFunction::write_csv(const std::filesystem::path& path) const {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open " + path.string());
    os << "index";
    for (int k = 0; k < lattice->dim(); ++k) os << ",x" << k;
    os << ",value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < lattice->size(); ++i) {
        os << i;
        for (int k = 0; k < lattice->dim(); ++k) os << ',' << lattice->nodes()[i][k];
        os << ',' << values[static_cast<Eigen::Index>(i)] << '\n';
    }
}

void GridFunction::write_metadata(const std::filesystem::path& path) const {
    static const char* names[] = {"interval", "box", "ball", "signed_distance"};
    nlohmann::json j;
    const auto& L = *lattice;
    j["shape"] = names[static_cast<int>(L.shape())];
    j["dim"] = L.dim();
    j["lo"] = std::vector<double>(L.lo().data(), L.lo().data() + L.dim());
    j["hi"] = std::vector<double>(L.hi().data(), L.hi().data() + L.dim());
    j["spacing"] = std::vector<double>(L.spacing().data(), L.spacing().data() + L.dim());
    j["counts"] = L.counts();
    j["interior_nodes"] = L.size();
    std::ofstream os(path);
    if (!os) throw InputError("cannot open " + path.string());
    os << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Assembly

namespace {

AssembledOperator assemble_impl(std::shared_ptr<const LatticeDomain> lattice, const KernelSpec& spec,
                                const SmoothFunction* h, const Eigen::VectorXd& V, const AssemblyOptions& opts) {
    if (!lattice) throw InputError("assembly without lattice");
    const LatticeDomain& L = *lattice;
    if (L.dim() != spec.dim()) throw InputError("lattice and kernel dimensions differ");
    const auto n = static_cast<Eigen::Index>(L.size());
    if (n == 0) throw DomainError("lattice has no interior nodes");
    if (L.size() > opts.max_nodes)
        throw CapacityError("dense assembly of " + std::to_string(L.size()) + " nodes exceeds the limit of " +
                            std::to_string(opts.max_nodes));
    if (V.size() != 0 && V.size() != n) throw InputError("potential size does not match the lattice");
    if (h && !h->has_tail_information()) throw InputError("drift needs a support ball or a sup bound");

    AssembledOperator op;
    op.lattice = lattice;
    op.kernel = std::make_shared<const KernelSpec>(spec);
    op.potential = V.size() ? V : Eigen::VectorXd::Zero(n);
    op.drift = Eigen::VectorXd::Zero(n);
    op.drift_exterior = Eigen::VectorXd::Zero(n);
    op.exterior_mass = Eigen::VectorXd::Zero(n);
    op.drift_far_value = h ? h->far_value : 0.0;

    const double vol = L.cell_volume();
    const auto& X = L.nodes();
    const int N = L.dim();

    // Pair weights.
    op.weights.setZero(n, n);
    if (spec.field.is_constant()) {
        const Mat& A = spec.field.matrix();
        const double p = spec.exponent();
        const double c = spec.prefactor() * vol;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = j + 1; i < n; ++i) {
                const Vec d = X[i] - X[j];
                const double w = c * std::pow(d.dot(A * d), -p);
                op.weights(i, j) = w;
                op.weights(j, i) = w;
            }
    } else {
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = j + 1; i < n; ++i) {
                const double w = kernel_eval(spec, X[i], X[j]) * vol;
                op.weights(i, j) = w;
                op.weights(j, i) = w;
            }
    }

    if (opts.self_cell_correction) {
        std::vector<Eigen::VectorXd> moments;
        if (spec.field.is_constant()) moments.assign(1, self_cell_moments(spec, X[0], L.spacing()));
        else
            for (Eigen::Index i = 0; i < n; ++i) moments.push_back(self_cell_moments(spec, X[i], L.spacing()));
        auto moment = [&](Eigen::Index i, int k) { return moments[moments.size() == 1 ? 0 : i][k]; };
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& idx = L.indices()[i];
            for (int k = 0; k < N; ++k) {
                auto nb = idx;
                nb[k] += 1;
                const long j = L.interior_index(nb);
                if (j < 0) continue;  // exterior neighbours carry u = 0 and are covered by e_i
                const double hk = L.spacing()[k];
                const double add = 0.5 * (moment(i, k) + moment(j, k)) / (hk * hk);
                op.weights(i, j) += add;
                op.weights(j, i) += add;
            }
        }
    }

    // Exterior mass and drift exterior integrals along rays.
    const auto dirs = N == 1 ? sphere_directions(1, 1) : assembly_directions(N, opts.directions);
    const GaussRule& rule = gauss_legendre(opts.radial_nodes);
    const double s = spec.s();

    double drift_cover = 0.0;  // radius beyond which h is at its far value (relative to the node)
    std::vector<double> breaks, xs, ws;
    for (Eigen::Index i = 0; i < n; ++i) {
        const Vec& x = X[i];
        const double hi_val = h ? (*h)(x) : 0.0;
        op.drift[i] = hi_val;
        double e = 0.0, g = 0.0;
        double R_far = kInf;
        if (h) {
            if (h->support) {
                R_far = (x - h->support->center).norm() + h->support->radius;
            } else {
                // 2 sup T(R) <= 1e-9 with T(R) <= c gamma^{-p} |S| R^{-2s} / (2s)
                const double T1 = spec.prefactor() * std::pow(spec.bounds.gamma, -spec.exponent()) * sphere_area(N) /
                                  (2.0 * s);
                R_far = std::clamp(std::pow(2.0 * std::max(1.0, *h->sup_bound) * T1 / 1e-9, 1.0 / (2.0 * s)), 1.0,
                                   1e12);
            }
            drift_cover = std::max(drift_cover, R_far);
        }
        for (const auto& d : dirs) {
            const auto ext = L.exterior_intervals(x, d.theta);
            if (h) {
                breaks.clear();
                ray_breakpoints({h}, x, d.theta, breaks);
            }
            for (const auto& [a, b] : ext) {
                e += d.weight * ray_mass(spec, x, d.theta, a, b, rule);
                if (!h) continue;
                const double top = std::min(b, R_far);
                if (top > a) {
                    xs.clear();
                    ws.clear();
                    graded_panels(a, top, breaks, 1.5, 10, rule, xs, ws);
                    double acc = 0.0;
                    for (std::size_t k = 0; k < xs.size(); ++k) {
                        const Vec y = x + xs[k] * d.theta;
                        acc += ws[k] * ((*h)(y)-hi_val) * radial_density(spec, x, d.theta, xs[k]);
                    }
                    g += d.weight * acc;
                }
                const double from = std::max(a, R_far);
                if (b > from) g += d.weight * (h->far_value - hi_val) * ray_mass(spec, x, d.theta, from, b, rule);
            }
        }
        op.exterior_mass[i] = e;
        op.drift_exterior[i] = g;
    }
    return op;
}

}  // namespace

AssembledOperator assemble(std::shared_ptr<const LatticeDomain> lattice, const KernelSpec& spec,
                           const SmoothFunction& h, const Eigen::VectorXd& V, const AssemblyOptions& opts) {
    return assemble_impl(std::move(lattice), spec, &h, V, opts);
}

AssembledOperator assemble(std::shared_ptr<const LatticeDomain> lattice, const KernelSpec& spec,
                           const AssemblyOptions& opts) {
    return assemble_impl(std::move(lattice), spec, nullptr, Eigen::VectorXd(), opts);
}

bool AssembledOperator::has_drift() const {
    return (drift.array() != drift_far_value).any() || (drift_exterior.array() != 0.0).any();
}

double AssembledOperator::drift_oscillation() const {
    if (drift.size() == 0) return 0.0;
    const double hi = std::max(drift.maxCoeff(), drift_far_value);
    const double lo = std::min(drift.minCoeff(), drift_far_value);
    return hi - lo;
}

Eigen::MatrixXd AssembledOperator::matrix() const {
    const Eigen::Index n = weights.rows();
    Eigen::MatrixXd M(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) M(i, j) = weights(i, j) * (1.0 + 0.5 * (drift[j] - drift[i]));
    for (Eigen::Index i = 0; i < n; ++i) M(i, i) = 0.0;
    const Eigen::VectorXd rows = M.rowwise().sum();
    for (Eigen::Index i = 0; i < n; ++i)
        M(i, i) = -rows[i] - exterior_mass[i] - 0.5 * drift_exterior[i] + potential[i];
    return M;
}

Eigen::VectorXd AssembledOperator::apply(const Eigen::VectorXd& u) const {
    const Eigen::Index n = weights.rows();
    if (u.size() != n) throw InputError("vector size does not match the operator");
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            acc += weights(j, i) * (1.0 + 0.5 * (drift[j] - drift[i])) * (u[j] - u[i]);
        out[i] = acc + (potential[i] - exterior_mass[i] - 0.5 * drift_exterior[i]) * u[i];
    }
    return out;
}

AssembledOperator AssembledOperator::with_potential(Eigen::VectorXd V) const {
    if (V.size() != exterior_mass.size()) throw InputError("potential size does not match the operator");
    AssembledOperator op = *this;
    op.potential = std::move(V);
    return op;
}

double dirichlet_form(const AssembledOperator& op, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    const Eigen::Index n = op.weights.rows();
    if (u.size() != n || v.size() != n) throw InputError("vector size does not match the operator");
    double pair = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) pair += op.weights(i, j) * (u[i] - u[j]) * (v[i] - v[j]);
    const double ext = (op.exterior_mass.array() * u.array() * v.array()).sum();
    return op.lattice->cell_volume() * (0.5 * pair + ext);
}

double drift_form(const AssembledOperator& op, const Eigen::VectorXd& f) {
    const Eigen::Index n = op.weights.rows();
    if (f.size() != n) throw InputError("vector size does not match the operator");
    double pair = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            pair += op.weights(i, j) * (f[i] - f[j]) * (op.drift[i] - op.drift[j]);
    return op.lattice->cell_volume() * (0.5 * pair - f.dot(op.drift_exterior));
}

Eigen::VectorXd carre_du_champ(const AssembledOperator& op, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    const Eigen::Index n = op.weights.rows();
    if (u.size() != n || v.size() != n) throw InputError("vector size does not match the operator");
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) acc += op.weights(j, i) * (u[j] - u[i]) * (v[j] - v[i]);
        out[i] = 0.5 * (acc + op.exterior_mass[i] * u[i] * v[i]);
    }
    return out;
}

Eigen::VectorXd drift_laplacian(const AssembledOperator& op) {
    const Eigen::Index n = op.weights.rows();
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) acc += op.weights(j, i) * (op.drift[j] - op.drift[i]);
        out[i] = acc + op.drift_exterior[i];
    }
    return out;
}

double seminorm_HsK(const AssembledOperator& op, const Eigen::VectorXd& u, bool interior_only) {
    const Eigen::Index n = op.weights.rows();
    if (u.size() != n) throw InputError("vector size does not match the operator");
    double pair = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) pair += op.weights(i, j) * (u[i] - u[j]) * (u[i] - u[j]);
    double total = pair;
    if (!interior_only) total += 2.0 * (op.exterior_mass.array() * u.array().square()).sum();
    return op.lattice->cell_volume() * total;
}

double seminorm_HsK(const GridFunction& u, const KernelSpec& spec, bool interior_only, const AssemblyOptions& opts) {
    const auto op = assemble(u.lattice, spec, opts);
    return seminorm_HsK(op, u.values, interior_only);
}

DirichletSolution dirichlet_solve(const AssembledOperator& op, double C, const Eigen::VectorXd& rhs,
                                  double rcond_floor) {
    const Eigen::Index n = op.weights.rows();
    if (rhs.size() != n) throw InputError("right-hand side size does not match the operator");
    Eigen::MatrixXd A = op.matrix();
    A.diagonal().array() -= C;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const double rc = lu.rcond();
    if (!(rc > rcond_floor)) throw SolverError("Dirichlet system is singular or ill-conditioned", rc > 0 ? 1.0 / rc : kInf);
    DirichletSolution sol;
    Eigen::VectorXd u = lu.solve(rhs);
    sol.residual = (A * u - rhs).lpNorm<Eigen::Infinity>();
    sol.condition_estimate = 1.0 / rc;
    sol.u = GridFunction(op.lattice, std::move(u));
    return sol;
}

double coercivity_shift(const AssembledOperator& op) {
    const Eigen::MatrixXd M = op.matrix();
    const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

}  // namespace nldv
