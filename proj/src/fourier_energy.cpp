#include "nldv/fourier_energy.hpp"

#include "nldv/errors.hpp"
#include "nldv/kernel_field.hpp"

#include <fftw3.h>

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <sstream>
#include <vector>

namespace nldv {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffers {
    double* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;
    ~FftwBuffers() {
        std::lock_guard lock(planner_mutex());
        if (plan) fftw_destroy_plan(plan);
        fftw_free(in);
        fftw_free(out);
    }
};

// |Det A|^{-1/2} sum <A^{-1} xi, xi>^s |g^|^2 dxi^N on an n^N grid over [-W, W]^N.
double riemann_sum(const Mat& Ainv, double inv_sqrt_det, const SmoothFunction& g, double s, int n, double W,
                   double tol) {
    const int N = static_cast<int>(Ainv.rows());
    const double h = 2.0 * W / n;
    const int half = n / 2 + 1;
    std::size_t total_in = 1, total_out = 1;
    for (int k = 0; k < N; ++k) {
        total_in *= static_cast<std::size_t>(n);
        total_out *= static_cast<std::size_t>(k + 1 == N ? half : n);
    }

    FftwBuffers buf;
    buf.in = fftw_alloc_real(total_in);
    buf.out = fftw_alloc_complex(total_out);
    if (!buf.in || !buf.out) throw CapacityError("fourier_energy: cannot allocate FFT buffers");
    {
        std::array<int, kMaxDim> dims{};
        for (int k = 0; k < N; ++k) dims[static_cast<std::size_t>(k)] = n;
        std::lock_guard lock(planner_mutex());
        buf.plan = fftw_plan_dft_r2c(N, dims.data(), buf.in, buf.out, FFTW_ESTIMATE);
    }

    // Row-major sampling (last axis fastest), cell centres.
    double gmax = 0.0, edge = 0.0;
    std::array<int, kMaxDim> idx{};
    Vec x(N);
    for (std::size_t lin = 0; lin < total_in; ++lin) {
        std::size_t r = lin;
        bool on_edge = false;
        for (int k = N - 1; k >= 0; --k) {
            idx[static_cast<std::size_t>(k)] = static_cast<int>(r % static_cast<std::size_t>(n));
            r /= static_cast<std::size_t>(n);
            const int i = idx[static_cast<std::size_t>(k)];
            x[k] = -W + (i + 0.5) * h;
            on_edge = on_edge || i == 0 || i == n - 1;
        }
        const double v = g(x);
        if (!std::isfinite(v)) throw DomainError("fourier_energy: function is not finite on the grid");
        buf.in[lin] = v;
        gmax = std::max(gmax, std::abs(v));
        if (on_edge) edge = std::max(edge, std::abs(v));
    }
    if (gmax == 0.0) return 0.0;
    if (edge > tol * gmax) {
        std::ostringstream os;
        os << "fourier_energy: function not negligible on the box edge (" << edge / gmax
           << " of its maximum); enlarge half_width";
        throw ResolutionError(os.str());
    }

    fftw_execute(buf.plan);

    const double dxi = 2.0 * std::numbers::pi / (n * h);
    const double hN = std::pow(h, N);
    double sum = 0.0, shell = 0.0;
    Vec xi(N);
    for (std::size_t lin = 0; lin < total_out; ++lin) {
        std::size_t r = lin;
        int mmax = 0;
        double w = 1.0;
        for (int k = N - 1; k >= 0; --k) {
            const int len = (k + 1 == N) ? half : n;
            const int m = static_cast<int>(r % static_cast<std::size_t>(len));
            r /= static_cast<std::size_t>(len);
            const int mt = (k + 1 == N) ? m : (m <= n / 2 ? m : m - n);
            if (k + 1 == N && m != 0 && 2 * m != n) w = 2.0;  // Hermitian partner
            xi[k] = dxi * mt;
            mmax = std::max(mmax, std::abs(mt));
        }
        const double re = buf.out[lin][0], im = buf.out[lin][1];
        const double power = hN * hN * (re * re + im * im);
        const double q = xi.dot(Ainv * xi);
        const double term = w * std::pow(std::max(q, 0.0), s) * power;
        sum += term;
        if (5 * mmax > 2 * n) shell += term;
    }
    if (sum > 0.0 && shell > tol * sum) {
        std::ostringstream os;
        os << "fourier_energy: spectrum not resolved (" << shell / sum
           << " of the energy above 0.8 Nyquist); increase points";
        throw ResolutionError(os.str());
    }
    return inv_sqrt_det * sum * std::pow(dxi, N);
}

}  // namespace

FourierEnergy fourier_energy(const Mat& A, const SmoothFunction& g, double s, const FourierGrid& grid,
                             FourierScale scale) {
    const int N = static_cast<int>(A.rows());
    if (N < 1 || N > kMaxDim || A.cols() != N) throw InputError("fourier_energy: A must be square with N <= 3");
    if (!(s > 0.0 && s < 1.0)) throw DomainError("fourier_energy: s must lie in (0, 1)");
    if (grid.points < 8 || grid.points % 2 != 0 || !(grid.half_width > 0.0))
        throw InputError("fourier_energy: need an even number of points >= 8 and a positive box");
    if (!g.value) throw InputError("fourier_energy: empty function");
    Eigen::SelfAdjointEigenSolver<Mat> es(A);
    if (es.eigenvalues().minCoeff() <= 0.0 || (A - A.transpose()).norm() > 1e-12 * A.norm())
        throw EllipticityError("fourier_energy: A must be symmetric positive definite");
    const Mat Ainv = A.inverse();
    const double inv_sqrt_det = 1.0 / std::sqrt(A.determinant());

    FourierEnergy out;
    out.coarse = riemann_sum(Ainv, inv_sqrt_det, g, s, grid.points, grid.half_width, grid.tolerance);
    out.fine = riemann_sum(Ainv, inv_sqrt_det, g, s, 2 * grid.points, 2.0 * grid.half_width, grid.tolerance);
    // Leading frequency-step error ~ dxi^{N+2s} from the cusp of |xi|^{2s} at the origin.
    const double r = std::pow(2.0, N + 2.0 * s);
    out.value = (r * out.fine - out.coarse) / (r - 1.0);
    out.error_estimate = std::abs(out.value - out.fine);

    double factor = 1.0;
    if (scale != FourierScale::Raw) {
        factor = std::pow(2.0 * std::numbers::pi, -N);
        if (scale == FourierScale::Energy) factor /= normalization_constant(N, s);
    }
    out.value *= factor;
    out.coarse *= factor;
    out.fine *= factor;
    out.error_estimate *= factor;
    return out;
}

double Probe::operator()(const Vec& x) const {
    return profile((frame * x).cwiseQuotient(scale));
}

FourierEnergy fourier_energy(const Mat& A, const Probe& g, double s, const FourierGrid& grid, FourierScale scale) {
    const auto N = A.rows();
    if (g.scale.size() != N || g.frame.rows() != N || g.frame.cols() != N)
        throw InputError("fourier_energy: probe dimension does not match A");
    if ((g.scale.array() <= 0.0).any()) throw InputError("fourier_energy: probe scales must be positive");
    if ((g.frame * g.frame.transpose() - Mat::Identity(N, N)).norm() > 1e-10)
        throw InputError("fourier_energy: probe frame must be orthogonal");
    const Mat D = g.scale.asDiagonal();
    Mat At = D * g.frame * A * g.frame.transpose() * D;
    At = 0.5 * (At + At.transpose()).eval();
    auto e = fourier_energy(At, g.profile, s, grid, scale);
    const double d2 = std::pow(g.scale.prod(), 2);
    e.value *= d2;
    e.coarse *= d2;
    e.fine *= d2;
    e.error_estimate *= d2;
    return e;
}

}  // namespace nldv
