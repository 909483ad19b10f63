#include "nldv/kernel_field.hpp"

#include "nldv/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace nldv {

namespace {

void require_spd(const Mat& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw EllipticityError(std::string(what) + ": matrix must be square");
    if (!m.isApprox(m.transpose(), 1e-12))
        throw EllipticityError(std::string(what) + ": matrix must be symmetric");
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success)
        throw EllipticityError(std::string(what) + ": matrix is not positive definite");
}

}  // namespace

EllipticityBounds::EllipticityBounds(double gamma_, double Gamma_, double s_, int dim_)
    : gamma(gamma_), Gamma(Gamma_), s(s_), dim(dim_) {
    if (!(gamma > 0.0) || !(Gamma >= gamma) || !std::isfinite(Gamma))
        throw DomainError("ellipticity bounds require 0 < gamma <= Gamma < inf");
    if (!(s > 0.0 && s < 1.0)) throw DomainError("fractional order s must lie in (0,1)");
    if (dim < 1 || dim > kMaxDim) throw DomainError("dimension must be 1, 2 or 3");
}

AnisotropyField AnisotropyField::constant(const Mat& M) {
    require_spd(M, "constant anisotropy field");
    return AnisotropyField(Variant::Constant, static_cast<int>(M.rows()), M, {});
}

AnisotropyField AnisotropyField::separable_sum(MatrixMap tilde, int dim, std::optional<Vec> probe) {
    const Vec p = probe.value_or(Vec::Zero(dim));
    require_spd(tilde(p), "separable-sum factor");
    return AnisotropyField(Variant::SeparableSum, dim, Mat(), std::move(tilde));
}

AnisotropyField AnisotropyField::separable_product(MatrixMap tilde, int dim, std::optional<Vec> probe) {
    const Vec p = probe.value_or(Vec::Zero(dim));
    require_spd(tilde(p), "separable-product factor");
    return AnisotropyField(Variant::SeparableProduct, dim, Mat(), std::move(tilde));
}

Mat AnisotropyField::operator()(const Vec& x, const Vec& y) const {
    switch (variant_) {
        case Variant::Constant:
            return matrix_;
        case Variant::SeparableSum:
            return tilde_(x) + tilde_(y);
        case Variant::SeparableProduct: {
            const Mat tx = tilde_(x);
            const Mat ty = tilde_(y);
            return tx * ty + ty * tx;
        }
    }
    return matrix_;
}

double AnisotropyField::quadratic_form(const Vec& x, const Vec& y) const {
    const Vec d = x - y;
    if (variant_ == Variant::Constant) return d.dot(matrix_ * d);
    return d.dot((*this)(x, y) * d);
}

KernelSpec::KernelSpec(AnisotropyField f, EllipticityBounds b, bool norm)
    : field(std::move(f)), bounds(b), normalized(norm) {
    if (field.dim() != bounds.dim) throw DomainError("field and bounds disagree on the dimension");
    prefactor_ = normalized ? normalization_constant(bounds.dim, bounds.s) : 1.0;
}

KernelSpec KernelSpec::fractional_laplacian(int dim, double s, bool normalized) {
    return KernelSpec(AnisotropyField::constant(Mat::Identity(dim, dim)), EllipticityBounds(1.0, 1.0, s, dim),
                      normalized);
}

double kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& y) {
    if ((x - y).squaredNorm() == 0.0) throw DomainError("kernel evaluated at coincident points");
    const double q = spec.field.quadratic_form(x, y);
    if (!(q > 0.0)) throw EllipticityError("quadratic form of the anisotropy field is not positive");
    return spec.prefactor() * std::pow(q, -spec.exponent());
}

double normalization_constant(int N, double s) {
    if (!(s > 0.0 && s < 1.0)) throw DomainError("normalization constant requires s in (0,1)");
    if (N < 1) throw DomainError("normalization constant requires N >= 1");
    return std::pow(4.0, s) * std::tgamma(0.5 * N + s) /
           (std::pow(std::numbers::pi, 0.5 * N) * std::abs(std::tgamma(-s)));
}

EllipticityReport validate_ellipticity(const KernelSpec& spec, const std::vector<EllipticitySample>& samples) {
    EllipticityReport r;
    if (samples.empty()) throw InputError("ellipticity validation needs at least one sample");
    r.min_quotient = std::numeric_limits<double>::infinity();
    r.max_quotient = -std::numeric_limits<double>::infinity();
    for (const auto& smp : samples) {
        const double n2 = smp.xi.squaredNorm();
        if (n2 == 0.0) throw InputError("ellipticity sample with zero direction");
        const double q = smp.xi.dot(spec.field(smp.x, smp.y) * smp.xi) / n2;
        r.min_quotient = std::min(r.min_quotient, q);
        r.max_quotient = std::max(r.max_quotient, q);
    }
    r.samples = samples.size();
    r.passed = r.min_quotient >= spec.bounds.gamma && r.max_quotient <= spec.bounds.Gamma;
    return r;
}

}  // namespace nldv
