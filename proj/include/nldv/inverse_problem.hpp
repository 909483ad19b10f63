#pragma once

#include "nldv/dv_functional.hpp"
#include "nldv/fourier_energy.hpp"
#include "nldv/quadrature.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nldv {

/// One sample of a scaling limit at scale lambda.
struct ProbeResult {
    std::string transform_tag = "identity";  ///< identity, axis_swap(k) or rotation(k,m)
    double lambda = 1.0;
    double raw_energy = 0.0;
    /// raw_energy * lambda^normalization_exponent
    double normalized_energy = 0.0;
    double normalization_exponent = 0.0;
    double error_estimate = 0.0;
};

/// f_lambda centred at x0. With a lattice given, its support ball must fit
/// inside the lattice box (CapacityError otherwise).
DensitySpec rescale_density(const DensitySpec& f, double lambda, const Vec& x0,
                            const LatticeDomain* lattice = nullptr);

struct ScalingLimit {
    std::vector<ProbeResult> samples;
    Extrapolation extrapolation;  ///< over the last three samples
    double limit = 0.0;           ///< extrapolated value
    /// Frozen-coefficient energy int B_{A(x0,x0)}(sqrt f) on the same lattice.
    double reference = 0.0;
    /// Slope of log |normalized - reference| against log lambda (NaN when all residuals vanish).
    double rate = 0.0;
    std::vector<std::string> warnings;
};

/// lambda^{2s} I(f_lambda) for each lambda (decreasing, halving), with I from
/// the lattice decomposition and `cells` cells across the support.
ScalingLimit diffusion_limit(const KernelSpec& spec, const SmoothFunction& h, const DensitySpec& f, const Vec& x0,
                             const std::vector<double>& lambdas, int cells = 24);

struct DriftLimit {
    std::vector<ProbeResult> samples;
    Extrapolation extrapolation;
    double limit = 0.0;
    double pointwise = 0.0;  ///< L_K h(x0) evaluated directly
    std::vector<std::string> warnings;
};

/// int f_lambda L_K h dx (= -int B_K(f_lambda, h) dx) for each lambda, by
/// tensor Gauss-Legendre over the support box with `nodes` points per axis,
/// extrapolated to lambda -> 0.
DriftLimit drift_probe(const SmoothFunction& h, const KernelSpec& spec, const Vec& x0,
                       const std::vector<double>& lambdas, const DensitySpec& f, int nodes = 16,
                       const QuadratureScheme& quad = {});

struct ConstancyReport {
    double max_LKw = 0.0;
    double oscillation = 0.0;
    bool harmonic = false;  ///< max |L_K w| < tol
    bool constant = false;  ///< osc w < tol
};
ConstancyReport constancy_check(const SmoothFunction& w, const KernelSpec& spec, const std::vector<Vec>& points,
                                double tol = 1e-6, const QuadratureScheme& quad = {});

/// Returns int B_A(g, g) dx for the hidden operator.
using EnergyOracle = std::function<double(const Probe&)>;

/// Oracle backed by fourier_energy with a known matrix.
EnergyOracle fourier_oracle(const Mat& A, double s, const FourierGrid& grid = {});

/// Gaussian probe exp(-|y|^2/2) in the frame E, narrowed by lambda along the
/// first frame axis.
Probe coordinate_probe(const Mat& frame, double lambda, const std::string& tag);
/// Row swap of axes 0 and k (identity for k = 0).
Mat axis_swap(int dim, int k);
/// Orthogonal E whose first row is (e_k - e_m)/sqrt 2 and second (e_k + e_m)/sqrt 2.
Mat rotation_frame(int dim, int k, int m);

struct RecoveryOptions {
    std::vector<double> lambdas{0.125, 0.0625, 0.03125};
    FourierGrid grid{};
    /// Allowed |rho - 1| and relative Richardson error before the oracle is
    /// declared inconsistent.
    double tolerance = 0.05;
};

struct ReconstructionReport {
    Mat recovered_matrix;
    Mat recovered_inverse;
    /// Scale mismatch between the oracle and the recovered matrix on an
    /// unnarrowed probe: the oracle energy equals rho^{N/2+s} times the
    /// energy of recovered_matrix.
    double rho = 1.0;
    /// The scale fixed by the determinant relation.
    double rho_determinant = 1.0;
    /// Per probe: extrapolated oracle limit relative to the identity reference.
    std::vector<double> probe_ratios;
    /// Per probe: relative difference between the oracle and the recovered
    /// matrix at the finest lambda.
    std::vector<double> per_entry_residuals;
    std::vector<ProbeResult> probes;
    std::vector<std::string> warnings;
};

ReconstructionReport recover_matrix(const EnergyOracle& oracle, int dim, double s,
                                    const RecoveryOptions& opts = {});

}  // namespace nldv
