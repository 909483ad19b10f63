#pragma once

#include "nldv/types.hpp"

#include <cmath>

namespace testing_util {

using nldv::SmoothFunction;
using nldv::Vec;

/// C-infinity bump exp(1 - 1/(1 - |x-c|^2/r^2)) scaled by `amp`; equals amp at c.
inline SmoothFunction bump(Vec c, double r, double amp = 1.0) {
    SmoothFunction f;
    f.value = [c, r, amp](const Vec& x) {
        const double t = (x - c).squaredNorm() / (r * r);
        return t < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - t)) : 0.0;
    };
    f.support = nldv::SupportBall{c, r};
    f.sup_bound = std::abs(amp);
    return f;
}

inline SmoothFunction gaussian(int dim, double sigma = 1.0) {
    SmoothFunction f;
    f.value = [sigma](const Vec& x) { return std::exp(-0.5 * x.squaredNorm() / (sigma * sigma)); };
    f.sup_bound = 1.0;
    (void)dim;
    return f;
}

inline SmoothFunction product(const SmoothFunction& a, const SmoothFunction& b) {
    SmoothFunction f;
    f.value = [a, b](const Vec& x) { return a(x) * b(x); };
    if (a.support) f.support = a.support;
    else if (b.support) f.support = b.support;
    if (a.sup_bound && b.sup_bound) f.sup_bound = *a.sup_bound * *b.sup_bound;
    f.far_value = a.far_value * b.far_value;
    f.breakpoints = a.breakpoints;
    // Where one factor switches off inside the other's support the product is
    // only as smooth as the factor; on the line, mark those edges.
    for (const auto* g : {&a, &b})
        if (g->support && g->support->center.size() == 1) {
            f.breakpoints.push_back(g->support->center[0] - g->support->radius);
            f.breakpoints.push_back(g->support->center[0] + g->support->radius);
        }
    f.breakpoints.insert(f.breakpoints.end(), b.breakpoints.begin(), b.breakpoints.end());
    return f;
}

}  // namespace testing_util
