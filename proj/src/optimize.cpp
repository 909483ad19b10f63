#include "nldv/optimize.hpp"

#include "nldv/errors.hpp"

#include <ceres/ceres.h>

#include <cmath>

namespace nldv {

namespace {

class Wrapped final : public ceres::FirstOrderFunction {
public:
    Wrapped(const Objective& f, int n, const long double& reference) : f_(f), n_(n), ref_(reference), g_(n) {}

    bool Evaluate(const double* x, double* cost, double* gradient) const override {
        const Eigen::Map<const Eigen::VectorXd> xv(x, n_);
        *cost = static_cast<double>(f_(xv, g_) - ref_);
        if (!std::isfinite(*cost) || !g_.allFinite()) return false;
        if (gradient) Eigen::Map<Eigen::VectorXd>(gradient, n_) = g_;
        return true;
    }
    int NumParameters() const override { return n_; }

private:
    const Objective& f_;
    int n_;
    const long double& ref_;
    mutable Eigen::VectorXd g_;
};

class Recorder final : public ceres::IterationCallback {
public:
    Recorder(std::vector<double>& trace, const long double& reference) : trace_(trace), ref_(reference) {}
    ceres::CallbackReturnType operator()(const ceres::IterationSummary& s) override {
        if (!std::isfinite(s.cost)) return ceres::SOLVER_ABORT;
        if (s.step_is_successful) trace_.push_back(static_cast<double>(s.cost + ref_));
        return ceres::SOLVER_CONTINUE;
    }

private:
    std::vector<double>& trace_;
    const long double& ref_;
};

}  // namespace

DescentResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x0, const DescentOptions& opts) {
    const int n = static_cast<int>(x0.size());
    DescentResult out;
    if (n == 0) {
        Eigen::VectorXd g(0);
        out.value = static_cast<double>(f(x0, g));
        out.converged = true;
        return out;
    }
    long double reference = 0.0L;
    ceres::GradientProblem problem(new Wrapped(f, n, reference));
    Recorder rec(out.trace, reference);
    Eigen::VectorXd g(n);
    reference = f(x0, g);
    // Ceres also stops when a step leaves f unchanged; restarting with fresh
    // curvature memory usually gets past that, within the iteration budget.
    for (int round = 0; round < 8 && out.iterations < opts.max_iter; ++round) {
        ceres::GradientProblemSolver::Options o;
        o.line_search_direction_type = ceres::LBFGS;
        o.line_search_type = ceres::WOLFE;
        o.max_lbfgs_rank = opts.memory;
        o.max_num_iterations = opts.max_iter - out.iterations;
        o.gradient_tolerance = opts.grad_tol;
        o.function_tolerance = 0.0;
        o.parameter_tolerance = 0.0;
        o.logging_type = ceres::SILENT;
        o.callbacks.push_back(&rec);

        ceres::GradientProblemSolver::Summary summary;
        ceres::Solve(o, problem, x0.data(), &summary);
        out.report = summary.BriefReport();
        out.iterations += std::max(0, static_cast<int>(summary.iterations.size()) - 1);
        const long double v = f(x0, g);
        reference = v;
        out.value = static_cast<double>(v);
        if (!std::isfinite(out.value) || summary.termination_type == ceres::USER_FAILURE)
            throw OptimizationError("descent diverged: " + out.report);
        out.grad_norm = g.lpNorm<Eigen::Infinity>();
        out.converged = out.grad_norm < opts.grad_tol;
        if (out.converged || summary.iterations.size() <= 1) break;
    }
    out.x = std::move(x0);
    return out;
}

}  // namespace nldv
