#include "nldv/inverse_problem.hpp"

#include "nldv/errors.hpp"
#include "nldv/nonlocal_ops.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace nldv {

namespace {

void check_lambdas(const std::vector<double>& lambdas, std::size_t min_count) {
    if (lambdas.size() < min_count) throw InputError("need at least three scales");
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0)) throw DomainError("scales must be positive");
        if (i > 0 && !(lambdas[i] < lambdas[i - 1])) throw InputError("scales must be decreasing");
    }
}

Extrapolation extrapolate_tail(const std::vector<ProbeResult>& samples, std::vector<std::string>& warnings) {
    const auto n = samples.size();
    const auto e = richardson3(samples[n - 3].normalized_energy, samples[n - 2].normalized_energy,
                               samples[n - 1].normalized_energy);
    if (!e.monotone) warnings.push_back("non-monotone residuals: extrapolation falls back to the finest scale");
    return e;
}

}  // namespace

DensitySpec rescale_density(const DensitySpec& f, double lambda, const Vec& x0, const LatticeDomain* lattice) {
    if (!(lambda > 0.0)) throw DomainError("rescale_density: lambda must be positive");
    if (x0.size() != f.dim) throw InputError("rescale_density: x0 has the wrong dimension");
    auto out = f.rescaled(lambda, x0);
    if (lattice) {
        if (lattice->dim() != f.dim) throw InputError("rescale_density: lattice dimension mismatch");
        const auto ball = out.support();
        const Vec r = Vec::Constant(f.dim, ball.radius);
        if (((ball.center - r).array() < lattice->lo().array()).any() ||
            ((ball.center + r).array() > lattice->hi().array()).any())
            throw CapacityError("rescale_density: support of f_lambda leaves the lattice");
    }
    return out;
}

ScalingLimit diffusion_limit(const KernelSpec& spec, const SmoothFunction& h, const DensitySpec& f, const Vec& x0,
                             const std::vector<double>& lambdas, int cells) {
    check_lambdas(lambdas, 3);
    const double s = spec.s();
    ScalingLimit out;
    for (double lam : lambdas) {
        const auto st = make_dv_setup(rescale_density(f, lam, x0), spec, h, cells);
        const auto dec = I_decomposed(st);
        if (!dec.descent.converged)
            out.warnings.push_back("exponent minimization did not converge at lambda = " + std::to_string(lam));
        ProbeResult p;
        p.lambda = lam;
        p.raw_energy = dec.I;
        p.normalization_exponent = 2.0 * s;
        p.normalized_energy = std::pow(lam, 2.0 * s) * dec.I;
        p.error_estimate = std::pow(lam, 2.0 * s) * dec.descent.grad_norm;
        out.samples.push_back(p);
    }
    out.extrapolation = extrapolate_tail(out.samples, out.warnings);
    out.limit = out.extrapolation.limit;

    // Frozen kernel on the finest lattice; lambda^{2s} scaling is exact for it.
    const KernelSpec frozen(AnisotropyField::constant(spec.field(x0, x0)), spec.bounds, spec.normalized);
    const double lam = lambdas.back();
    const auto st = make_dv_setup(rescale_density(f, lam, x0), frozen, cells);
    out.reference = std::pow(lam, 2.0 * s) * I_closed_form_h0(st).value;

    std::vector<double> ls, rs;
    for (const auto& p : out.samples) {
        const double r = std::abs(p.normalized_energy - out.reference);
        if (r > 1e-13 * std::abs(out.reference)) {
            ls.push_back(p.lambda);
            rs.push_back(r);
        }
    }
    out.rate = ls.size() >= 2 ? fit_loglog_slope(ls, rs) : std::numeric_limits<double>::quiet_NaN();
    return out;
}

DriftLimit drift_probe(const SmoothFunction& h, const KernelSpec& spec, const Vec& x0,
                       const std::vector<double>& lambdas, const DensitySpec& f, int nodes,
                       const QuadratureScheme& quad) {
    check_lambdas(lambdas, 3);
    if (nodes < 2) throw InputError("drift_probe: need at least two nodes per axis");
    const int N = spec.dim();
    if (f.dim != N || x0.size() != N) throw InputError("drift_probe: dimension mismatch");
    const auto& rule = gauss_legendre(nodes);
    const auto& gx = rule.nodes;
    const auto& gw = rule.weights;

    DriftLimit out;
    for (double lam : lambdas) {
        const auto fl = rescale_density(f, lam, x0);
        const auto ball = fl.support();
        double num = 0.0, mass = 0.0;
        std::vector<int> idx(static_cast<std::size_t>(N), 0);
        Vec x(N);
        const std::size_t total = static_cast<std::size_t>(std::pow(nodes, N));
        for (std::size_t lin = 0; lin < total; ++lin) {
            std::size_t r = lin;
            double w = 1.0;
            for (int k = 0; k < N; ++k) {
                const auto i = r % static_cast<std::size_t>(nodes);
                r /= static_cast<std::size_t>(nodes);
                x[k] = ball.center[k] + ball.radius * gx[i];
                w *= ball.radius * gw[i];
            }
            const double fx = fl.value(x);
            if (fx <= 0.0) continue;
            num += w * fx * apply_LK(h, spec, x, quad);
            mass += w * fx;
        }
        ProbeResult p;
        p.lambda = lam;
        // normalized by the discrete mass, which cancels most of the node error
        p.raw_energy = num / mass;
        p.normalized_energy = p.raw_energy;
        p.error_estimate = std::abs(mass - 1.0) * std::abs(p.raw_energy);
        out.samples.push_back(p);
    }
    out.extrapolation = extrapolate_tail(out.samples, out.warnings);
    out.limit = out.extrapolation.limit;
    out.pointwise = apply_LK(h, spec, x0, quad);
    return out;
}

ConstancyReport constancy_check(const SmoothFunction& w, const KernelSpec& spec, const std::vector<Vec>& points,
                                double tol, const QuadratureScheme& quad) {
    ConstancyReport rep;
    if (points.empty()) return rep;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& x : points) {
        rep.max_LKw = std::max(rep.max_LKw, std::abs(apply_LK(w, spec, x, quad)));
        const double v = w(x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    rep.oscillation = hi - lo;
    rep.harmonic = rep.max_LKw < tol;
    rep.constant = rep.oscillation < tol;
    return rep;
}

EnergyOracle fourier_oracle(const Mat& A, double s, const FourierGrid& grid) {
    return [A, s, grid](const Probe& g) { return fourier_energy(A, g, s, grid).value; };
}

Probe coordinate_probe(const Mat& frame, double lambda, const std::string& tag) {
    Probe p;
    p.profile.value = [](const Vec& y) { return std::exp(-0.5 * y.squaredNorm()); };
    p.profile.sup_bound = 1.0;
    p.scale = Vec::Ones(frame.rows());
    p.scale[0] = lambda;
    p.frame = frame;
    p.tag = tag;
    return p;
}

Mat axis_swap(int dim, int k) {
    Mat E = Mat::Identity(dim, dim);
    if (k != 0) E.row(0).swap(E.row(k));
    return E;
}

Mat rotation_frame(int dim, int k, int m) {
    if (k == m || k < 0 || m < 0 || k >= dim || m >= dim) throw InputError("rotation_frame: need distinct axes");
    Mat E = Mat::Zero(dim, dim);
    const double r = 1.0 / std::numbers::sqrt2;
    E(0, k) = r;
    E(0, m) = -r;
    E(1, k) = r;
    E(1, m) = r;
    int row = 2;
    for (int j = 0; j < dim; ++j)
        if (j != k && j != m) E(row++, j) = 1.0;
    return E;
}

ReconstructionReport recover_matrix(const EnergyOracle& oracle, int dim, double s, const RecoveryOptions& opts) {
    if (dim < 1 || dim > kMaxDim) throw InputError("recover_matrix: dimension must be 1, 2 or 3");
    if (!(s > 0.0 && s < 1.0)) throw DomainError("recover_matrix: s must lie in (0, 1)");
    check_lambdas(opts.lambdas, 3);
    const Mat I = Mat::Identity(dim, dim);

    auto ask = [&](const Probe& g) {
        const double v = oracle(g);
        if (!std::isfinite(v) || v <= 0.0)
            throw OracleInconsistencyError("recover_matrix: oracle returned a non-positive energy for " + g.tag);
        return v;
    };

    struct Plan {
        Mat frame;
        std::string tag;
    };
    std::vector<Plan> plan;
    for (int k = 0; k < dim; ++k) plan.push_back({axis_swap(dim, k), "axis_swap(" + std::to_string(k) + ")"});
    for (int k = 0; k < dim; ++k)
        for (int m = k + 1; m < dim; ++m)
            plan.push_back({rotation_frame(dim, k, m), "rotation(" + std::to_string(k) + "," + std::to_string(m) + ")"});

    ReconstructionReport rep;
    std::vector<double> q;
    for (const auto& pr : plan) {
        std::vector<ProbeResult> ratios;
        for (double lam : opts.lambdas) {
            const auto g = coordinate_probe(pr.frame, lam, pr.tag);
            const double raw = ask(g);
            const double ref = fourier_energy(I, g, s, opts.grid).value;
            ProbeResult p;
            p.transform_tag = pr.tag;
            p.lambda = lam;
            p.raw_energy = raw;
            p.normalization_exponent = 2.0 * s - 1.0;
            p.normalized_energy = std::pow(lam, 2.0 * s - 1.0) * raw;
            rep.probes.push_back(p);
            ProbeResult r = p;
            r.normalized_energy = raw / ref;  // the lambda factors cancel
            ratios.push_back(r);
        }
        const auto e = extrapolate_tail(ratios, rep.warnings);
        rep.probes.back().error_estimate = e.error_estimate * std::pow(opts.lambdas.back(), 2.0 * s - 1.0) *
                                           rep.probes.back().raw_energy / ratios.back().normalized_energy;
        if (!(e.limit > 0.0) || e.error_estimate > opts.tolerance * e.limit) {
            std::ostringstream os;
            os << "recover_matrix: probe " << pr.tag << " has no stable limit (ratio " << e.limit << " +- "
               << e.error_estimate << ")";
            throw OracleInconsistencyError(os.str());
        }
        rep.probe_ratios.push_back(e.limit);
        q.push_back(std::pow(e.limit, 1.0 / s));
    }

    // q = |Det A|^{-1/(2s)} times the probed entries of A^{-1}.
    Mat T(dim, dim);
    for (int k = 0; k < dim; ++k) T(k, k) = q[static_cast<std::size_t>(k)];
    std::size_t next = static_cast<std::size_t>(dim);
    for (int k = 0; k < dim; ++k)
        for (int m = k + 1; m < dim; ++m) {
            T(k, m) = T(m, k) = 0.5 * (T(k, k) + T(m, m)) - q[next++];
        }
    Eigen::SelfAdjointEigenSolver<Mat> es(T);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw ReconstructionError("recover_matrix: recovered inverse is not positive definite");

    // A^{-1} = rho T with rho = |Det A|^{1/(2s)} = (rho^N Det T)^{-1/(2s)}.
    rep.rho_determinant = std::pow(T.determinant(), -1.0 / (dim + 2.0 * s));
    rep.recovered_inverse = rep.rho_determinant * T;
    rep.recovered_matrix = rep.recovered_inverse.inverse();
    rep.recovered_matrix = (0.5 * (rep.recovered_matrix + rep.recovered_matrix.transpose())).eval();

    const auto g0 = coordinate_probe(I, 1.0, "identity");
    const double ratio = ask(g0) / fourier_energy(rep.recovered_matrix, g0, s, opts.grid).value;
    rep.rho = std::pow(ratio, 1.0 / (0.5 * dim + s));
    if (std::abs(rep.rho - 1.0) > opts.tolerance) {
        std::ostringstream os;
        os << "recover_matrix: global scale rho = " << rep.rho << " is not 1; the oracle is not the energy of a "
           << "constant matrix";
        throw OracleInconsistencyError(os.str());
    }

    for (const auto& pr : plan) {
        const auto g = coordinate_probe(pr.frame, opts.lambdas.back(), pr.tag);
        const double a = ask(g), b = fourier_energy(rep.recovered_matrix, g, s, opts.grid).value;
        rep.per_entry_residuals.push_back(std::abs(a - b) / a);
    }
    return rep;
}

}  // namespace nldv
