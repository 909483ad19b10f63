#pragma once

#include "nldv/types.hpp"

#include <functional>
#include <vector>

namespace nldv {

/// Ellipticity constants, fractional order and dimension of a kernel.
struct EllipticityBounds {
    double gamma = 1.0;
    double Gamma = 1.0;
    double s = 0.5;
    int dim = 1;

    EllipticityBounds() = default;
    EllipticityBounds(double gamma, double Gamma, double s, int dim);
};

/// Matrix map A(x, y) defining an anisotropic kernel.
///
/// Three variants are supported:
///   - Constant:          A(x, y) = M
///   - SeparableSum:      A(x, y) = T(x) + T(y)
///   - SeparableProduct:  A(x, y) = T(x) T(y) + T(y) T(x)
/// All of them are symmetric under x <-> y, and the product variant yields a
/// symmetric matrix even when T(x) and T(y) do not commute.
class AnisotropyField {
public:
    enum class Variant { Constant, SeparableSum, SeparableProduct };
    using MatrixMap = std::function<Mat(const Vec&)>;

    /// Throws EllipticityError if M is not symmetric positive definite.
    static AnisotropyField constant(const Mat& M);
    /// The map is checked for symmetric positive definiteness at `probe`
    /// (the origin when omitted). Smoothness is the caller's contract.
    static AnisotropyField separable_sum(MatrixMap tilde, int dim, std::optional<Vec> probe = {});
    static AnisotropyField separable_product(MatrixMap tilde, int dim, std::optional<Vec> probe = {});

    Variant variant() const { return variant_; }
    int dim() const { return dim_; }
    bool is_constant() const { return variant_ == Variant::Constant; }
    const Mat& matrix() const { return matrix_; }
    const MatrixMap& tilde() const { return tilde_; }

    Mat operator()(const Vec& x, const Vec& y) const;

    /// (x - y)^T A(x, y) (x - y)
    double quadratic_form(const Vec& x, const Vec& y) const;

private:
    AnisotropyField(Variant v, int dim, Mat m, MatrixMap tilde)
        : variant_(v), dim_(dim), matrix_(std::move(m)), tilde_(std::move(tilde)) {}

    Variant variant_;
    int dim_;
    Mat matrix_;
    MatrixMap tilde_;
};

/// Kernel K(x, y) = |(x-y)^T A(x,y) (x-y)|^{-(N+2s)/2}, optionally multiplied
/// by the fractional-Laplacian constant c_{N,s}.
struct KernelSpec {
    AnisotropyField field;
    EllipticityBounds bounds;
    bool normalized = false;

    KernelSpec(AnisotropyField f, EllipticityBounds b, bool normalized = false);

    int dim() const { return bounds.dim; }
    double s() const { return bounds.s; }
    /// c_{N,s} when normalized, 1 otherwise.
    double prefactor() const { return prefactor_; }
    double exponent() const { return 0.5 * (bounds.dim + 2.0 * bounds.s); }

    /// Fractional Laplacian kernel (A = Identity).
    static KernelSpec fractional_laplacian(int dim, double s, bool normalized = true);

private:
    double prefactor_ = 1.0;
};

/// K(x, y). Throws DomainError for x == y and EllipticityError when the
/// quadratic form is not positive.
double kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& y);

/// c_{N,s} = 4^s Gamma(N/2 + s) / (pi^{N/2} |Gamma(-s)|).
double normalization_constant(int N, double s);

struct EllipticitySample {
    Vec x;
    Vec y;
    Vec xi;
};

struct EllipticityReport {
    double min_quotient = 0.0;
    double max_quotient = 0.0;
    bool passed = false;
    std::size_t samples = 0;
};

/// Rayleigh quotients xi^T A(x,y) xi / |xi|^2 over the samples, checked
/// against [gamma, Gamma].
EllipticityReport validate_ellipticity(const KernelSpec& spec, const std::vector<EllipticitySample>& samples);

}  // namespace nldv
