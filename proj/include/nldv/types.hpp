#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

namespace nldv {

// Points live in R^N with N <= 3; the fixed upper bound keeps them off the heap.
inline constexpr int kMaxDim = 3;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline Vec make_point(std::initializer_list<double> xs) {
    Vec v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v[i++] = x;
    return v;
}

/// Ball {y : |y - center| <= radius} outside of which a function equals its
/// far value.
struct SupportBall {
    Vec center;
    double radius = 0.0;
};

/// A function R^N -> R given analytically, together with the tail
/// information the quadrature needs: either a ball outside which the function
/// is constant (`far_value`), or a global bound on |f|.
struct SmoothFunction {
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;  // optional
    std::optional<SupportBall> support;
    std::optional<double> sup_bound;
    /// Value outside the support; without a support ball, the limit at
    /// infinity assumed beyond the truncation radius.
    double far_value = 0.0;
    /// 1D only: points where the function is not smooth (panel boundaries).
    std::vector<double> breakpoints;

    double operator()(const Vec& x) const { return value(x); }

    bool has_tail_information() const { return support.has_value() || sup_bound.has_value(); }

    static SmoothFunction constant(double c) {
        SmoothFunction f;
        f.value = [c](const Vec&) { return c; };
        f.sup_bound = std::abs(c);
        f.far_value = c;
        return f;
    }
};

}  // namespace nldv
