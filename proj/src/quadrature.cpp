#include "nldv/quadrature.hpp"

#include "nldv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

namespace nldv {

namespace {

GaussRule compute_gauss_legendre(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = -x;
        rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    if (n == 1) {
        rule.nodes[0] = 0.0;
        rule.weights[0] = 2.0;
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
    if (n < 1) throw DomainError("Gauss rule needs at least one node");
    static std::mutex mutex;
    static std::map<int, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
    return it->second;
}

double sphere_area(int dim) {
    switch (dim) {
        case 1: return 2.0;
        case 2: return 2.0 * std::numbers::pi;
        case 3: return 4.0 * std::numbers::pi;
        default: throw DomainError("unsupported dimension");
    }
}

std::vector<Direction> sphere_directions(int dim, int resolution) {
    std::vector<Direction> half;
    if (dim == 1) {
        half.push_back({make_point({1.0}), 1.0});
    } else if (dim == 2) {
        const int m = std::max(2, resolution + (resolution % 2));
        const double w = 2.0 * std::numbers::pi / m;
        for (int k = 0; k < m / 2; ++k) {
            const double a = 2.0 * std::numbers::pi * (k + 0.5) / m;
            half.push_back({make_point({std::cos(a), std::sin(a)}), w});
        }
    } else if (dim == 3) {
        const int np = std::max(2, resolution);
        const int na = 2 * np;
        const GaussRule& g = gauss_legendre(np);
        const double wa = 2.0 * std::numbers::pi / na;
        // Azimuths in [0, pi) paired with all polar nodes form one hemisphere
        // modulo antipodes: (ct, phi) -> (-ct, phi + pi).
        for (int a = 0; a < na / 2; ++a) {
            const double phi = 2.0 * std::numbers::pi * (a + 0.5) / na;
            for (int p = 0; p < np; ++p) {
                const double ct = g.nodes[p];
                const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
                half.push_back({make_point({st * std::cos(phi), st * std::sin(phi), ct}), g.weights[p] * wa});
            }
        }
    } else {
        throw DomainError("unsupported dimension");
    }
    std::vector<Direction> all = half;
    for (const auto& d : half) all.push_back({Vec(-d.theta), d.weight});
    return all;
}

void append_panel(double a, double b, const GaussRule& rule, std::vector<double>& x, std::vector<double>& w) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        x.push_back(mid + half * rule.nodes[i]);
        w.push_back(half * rule.weights[i]);
    }
}

void graded_panels(double a, double b, const std::vector<double>& breaks, double ratio, int levels,
                   const GaussRule& rule, std::vector<double>& x, std::vector<double>& w) {
    if (!(b > a)) return;
    std::vector<double> cuts;
    for (double t = a; t < b; t *= ratio) cuts.push_back(t);
    cuts.push_back(b);
    for (double c : breaks) {
        if (!(c > a && c < b)) continue;
        cuts.push_back(c);
        double g = 0.5;
        for (int k = 0; k < levels; ++k, g *= 0.5) {
            cuts.push_back(c * (1.0 - g * (1.0 - 1.0 / ratio)));
            cuts.push_back(c * (1.0 + g * (ratio - 1.0)));
        }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> edges;
    for (double c : cuts) {
        if (c < a || c > b) continue;
        if (!edges.empty() && c - edges.back() <= 1e-14 * c) continue;
        edges.push_back(c);
    }
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) append_panel(edges[e], edges[e + 1], rule, x, w);
}

Extrapolation richardson3(double f0, double f1, double f2) {
    Extrapolation e;
    const double d1 = f0 - f1;
    const double d2 = f1 - f2;
    e.monotone = (d1 == 0.0 && d2 == 0.0) || (d1 * d2 > 0.0);
    if (d2 == 0.0 || !e.monotone || std::abs(d1) <= std::abs(d2)) {
        // No measurable contraction: treat the finest value as converged.
        e.limit = f2;
        e.order = d2 == 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        e.error_estimate = std::abs(d2);
        return e;
    }
    const double ratio = d1 / d2;
    e.order = std::log2(ratio);
    e.limit = f2 - d2 / (ratio - 1.0);
    e.error_estimate = std::abs(d2 / (ratio - 1.0));
    return e;
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InputError("log-log fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InputError("log-log fit needs positive data");
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace nldv
