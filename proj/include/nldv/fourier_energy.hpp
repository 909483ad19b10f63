#pragma once

#include "nldv/types.hpp"

#include <string>

namespace nldv {

/// Sampling box for the FFT: [-half_width, half_width]^N around the origin
/// with `points` samples per axis. The finer of the two evaluations doubles
/// both (same spacing, half the frequency step).
struct FourierGrid {
    int points = 64;
    double half_width = 8.0;
    /// Relative tolerance for the spectral-tail and box-edge checks.
    double tolerance = 1e-8;
};

enum class FourierScale {
    /// int B_A(g, g) dx for the kernel |(x-y)^T A (x-y)|^{-(N+2s)/2} without c_{N,s}.
    Energy,
    /// Same with the c_{N,s} prefactor.
    NormalizedEnergy,
    /// |Det A|^{-1/2} int <A^{-1} xi, xi>^s |g^(xi)|^2 d xi with g^(xi) = int e^{-i x.xi} g.
    Raw,
};

struct FourierEnergy {
    double value = 0.0;
    double coarse = 0.0;  ///< Riemann sum on the base grid
    double fine = 0.0;    ///< on the doubled box
    /// |value - fine|: size of the frequency-step correction.
    double error_estimate = 0.0;
};

/// |Det A|^{-1/2} int <A^{-1} xi, xi>^s |g^(xi)|^2 d xi by FFT, scaled per
/// `scale`. The frequency-step error of the Riemann sum is c dxi^{N+2s}
/// (the |xi|^{2s} cusp at 0), removed by extrapolating the base and doubled
/// boxes. Throws ResolutionError if g is not negligible on the box edge or
/// its spectrum not negligible near the Nyquist frequency.
FourierEnergy fourier_energy(const Mat& A, const SmoothFunction& g, double s, const FourierGrid& grid = {},
                             FourierScale scale = FourierScale::Energy);

/// A probe g(x) = profile(D^{-1} E x) with D = diag(scale) and E orthogonal.
struct Probe {
    SmoothFunction profile;
    Vec scale;  ///< D
    Mat frame;  ///< E
    std::string tag = "identity";

    double operator()(const Vec& x) const;
};

/// Energy of a probe, computed on the profile's own grid through
///   int B_A(g, g) = det(D)^2 int B_{D E A E^T D}(profile, profile).
FourierEnergy fourier_energy(const Mat& A, const Probe& g, double s, const FourierGrid& grid = {},
                             FourierScale scale = FourierScale::Energy);

}  // namespace nldv
