#include "config.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace nldv::cli {

Node Node::at(const std::string& key) const {
    if (!j_->is_object()) fail("expected an object");
    const auto it = j_->find(key);
    if (it == j_->end()) throw ConfigError(path_ + "." + key, "missing");
    return Node(*it, path_ + "." + key);
}

Node Node::at(std::size_t i) const {
    if (!j_->is_array() || i >= j_->size()) fail("expected an array with at least " + std::to_string(i + 1) + " entries");
    return Node((*j_)[i], path_ + "[" + std::to_string(i) + "]");
}

std::size_t Node::size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
}

double Node::number() const {
    if (!j_->is_number()) fail("expected a number");
    const double v = j_->get<double>();
    if (!std::isfinite(v)) fail("expected a finite number");
    return v;
}

int Node::integer() const {
    if (!j_->is_number_integer()) fail("expected an integer");
    return j_->get<int>();
}

bool Node::boolean() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
}

std::string Node::string() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
}

std::vector<double> Node::numbers() const {
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
    return out;
}

Vec Node::vec(int expected_dim) const {
    const auto xs = numbers();
    if (expected_dim >= 0 && static_cast<int>(xs.size()) != expected_dim)
        fail("expected " + std::to_string(expected_dim) + " coordinates");
    Vec v(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) v[static_cast<Eigen::Index>(i)] = xs[i];
    return v;
}

Mat Node::matrix(int expected_dim) const {
    const int n = static_cast<int>(size());
    if (expected_dim >= 0 && n != expected_dim) fail("expected " + std::to_string(expected_dim) + " rows");
    Mat M(n, n);
    for (int i = 0; i < n; ++i) M.row(i) = at(static_cast<std::size_t>(i)).vec(n).transpose();
    return M;
}

Node ExperimentConfig::block(const std::string& key) const { return root().at(key); }

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("$", "cannot open " + path);
    ExperimentConfig cfg;
    try {
        cfg.doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("$", std::string("malformed JSON: ") + e.what());
    }
    const Node r = cfg.root();
    if (!cfg.doc.is_object()) r.fail("expected an object");
    cfg.command = r.at("command").string();
    if (std::find(commands().begin(), commands().end(), cfg.command) == commands().end())
        r.at("command").fail("unknown command '" + cfg.command + "'");
    if (r.has("seed")) {
        const auto& s = cfg.doc["seed"];
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            r.at("seed").fail("expected a non-negative integer");
        cfg.seed = s.get<std::uint64_t>();
    }
    cfg.threads = r.integer("threads", 1);
    if (cfg.threads < 1) r.at("threads").fail("expected at least 1");
    if (r.has("output")) {
        const Node o = r.at("output");
        cfg.output_dir = o.string("dir", cfg.output_dir);
        cfg.prefix = o.string("prefix", "");
    }
    return cfg;
}

KernelSpec parse_kernel(const Node& n) {
    const int dim = n.at("dim").integer();
    if (dim < 1 || dim > 3) n.at("dim").fail("expected 1, 2 or 3");
    const double s = n.at("s").number();
    if (!(s > 0.0 && s < 1.0)) n.at("s").fail("expected 0 < s < 1");
    const bool normalized = n.boolean("normalized", false);
    const Mat A = n.has("matrix") ? n.at("matrix").matrix(dim) : Mat::Identity(dim, dim);
    if ((A - A.transpose()).norm() > 1e-12 * (1.0 + A.norm())) n.at("matrix").fail("expected a symmetric matrix");
    const Eigen::SelfAdjointEigenSolver<Mat> es(A);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) n.at("matrix").fail("expected a positive definite matrix");
    // gamma |z|^2 <= z^T A z <= Gamma |z|^2
    return KernelSpec(AnisotropyField::constant(A), EllipticityBounds(lo, hi, s, dim), normalized);
}

SmoothFunction parse_drift(const Node& n, int dim) {
    const std::string type = n.at("type").string();
    if (type == "zero") return SmoothFunction::constant(0.0);
    if (type == "constant") return SmoothFunction::constant(n.at("value").number());
    const double a = n.at("amplitude").number();
    SmoothFunction h;
    h.sup_bound = std::abs(a);
    if (type == "tanh") {
        // a tanh(k (x_1 - c)); tends to -a and a at the two ends, so no single far value
        const double k = n.number("rate", 1.0), c = n.number("shift", 0.0);
        h.value = [a, k, c](const Vec& x) { return a * std::tanh(k * (x[0] - c)); };
        return h;
    }
    if (type == "gaussian") {
        const Vec c = n.has("center") ? n.at("center").vec(dim) : Vec::Zero(dim);
        const double w = n.number("width", 1.0);
        if (!(w > 0.0)) n.at("width").fail("expected a positive width");
        const double base = n.number("offset", 0.0);
        h.value = [a, c, w, base](const Vec& x) { return base + a * std::exp(-(x - c).squaredNorm() / (w * w)); };
        h.sup_bound = std::abs(a) + std::abs(base);
        h.far_value = base;
        return h;
    }
    n.at("type").fail("unknown drift type '" + type + "' (zero, constant, tanh, gaussian)");
}

std::shared_ptr<const LatticeDomain> parse_domain(const Node& n, int dim) {
    const std::string shape = n.string("shape", dim == 1 ? "interval" : "box");
    const double mesh = n.at("mesh").number();
    if (!(mesh > 0.0)) n.at("mesh").fail("expected a positive mesh");
    if (shape == "interval") {
        if (dim != 1) n.at("shape").fail("interval needs dim 1");
        const Vec lo = n.at("lo").vec(1), hi = n.at("hi").vec(1);
        return std::make_shared<const LatticeDomain>(LatticeDomain::interval(lo[0], hi[0], mesh));
    }
    if (shape == "box")
        return std::make_shared<const LatticeDomain>(LatticeDomain::box(n.at("lo").vec(dim), n.at("hi").vec(dim), mesh));
    if (shape == "ball")
        return std::make_shared<const LatticeDomain>(
            LatticeDomain::ball(n.at("center").vec(dim), n.at("radius").number(), mesh));
    n.at("shape").fail("unknown shape '" + shape + "' (interval, box, ball)");
}

DensitySpec parse_density(const Node& n, int dim) {
    if (!n.has("bumps")) return DensitySpec::bump(dim, n.number("radius", 1.0));
    const Node b = n.at("bumps");
    std::vector<DensitySpec::Bump> bumps;
    for (std::size_t i = 0; i < b.size(); ++i) {
        const Node e = b.at(i);
        DensitySpec::Bump bump;
        bump.center = e.at("center").vec(dim);
        bump.radius = e.number("radius", 1.0);
        bump.weight = e.number("weight", 1.0);
        if (!(bump.radius > 0.0)) e.at("radius").fail("expected a positive radius");
        if (!(bump.weight > 0.0)) e.at("weight").fail("expected a positive weight");
        bumps.push_back(bump);
    }
    if (bumps.empty()) b.fail("expected at least one bump");
    return DensitySpec::mixture(dim, std::move(bumps));
}

SmoothFunction parse_bump(const Node& n, int dim) {
    const Vec c = n.has("center") ? n.at("center").vec(dim) : Vec::Zero(dim);
    const double r = n.number("radius", 1.0), amp = n.number("amplitude", 1.0);
    if (!(r > 0.0)) n.at("radius").fail("expected a positive radius");
    SmoothFunction f;
    f.value = [c, r, amp](const Vec& x) {
        const double t = (x - c).squaredNorm() / (r * r);
        return t < 1.0 ? amp * std::exp(1.0 - 1.0 / (1.0 - t)) : 0.0;
    };
    f.support = SupportBall{c, r};
    f.sup_bound = std::abs(amp);
    if (dim == 1) f.breakpoints = {c[0] - r, c[0] + r};
    return f;
}

}  // namespace nldv::cli
