#pragma once

#include "nldv/dv_functional.hpp"
#include "nldv/kernel_field.hpp"
#include "nldv/discretize.hpp"

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace nldv::cli {

using json = nlohmann::json;

/// Schema violation; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& what) : std::runtime_error(path + ": " + what) {}
};

/// A JSON node that remembers where it came from, so every lookup failure
/// can name the field.
class Node {
public:
    Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    const json& raw() const { return *j_; }
    bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

    Node at(const std::string& key) const;
    Node at(std::size_t i) const;
    std::size_t size() const;

    double number() const;
    int integer() const;
    bool boolean() const;
    std::string string() const;
    Vec vec(int expected_dim = -1) const;
    Mat matrix(int expected_dim = -1) const;

    double number(const std::string& key, double fallback) const { return has(key) ? at(key).number() : fallback; }
    int integer(const std::string& key, int fallback) const { return has(key) ? at(key).integer() : fallback; }
    bool boolean(const std::string& key, bool fallback) const { return has(key) ? at(key).boolean() : fallback; }
    std::string string(const std::string& key, const std::string& fallback) const {
        return has(key) ? at(key).string() : fallback;
    }
    std::vector<double> numbers() const;

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_, what); }

private:
    const json* j_;
    std::string path_;
};

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"operator-eval",  "eigen",         "dv-functional", "recover-matrix",
                                            "recover-drift", "barrier-check", "verify"};
    return c;
}

struct ExperimentConfig {
    json doc;  ///< the parsed file, echoed into the provenance block
    std::string command;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string output_dir = "nldv-out";
    std::string prefix;  ///< file stem; the command name when empty

    Node root() const { return Node(doc, "$"); }
    Node block(const std::string& key) const;  ///< required block
};

/// Parses and checks the top level. Throws ConfigError.
ExperimentConfig load_config(const std::string& path);

KernelSpec parse_kernel(const Node& n);
/// h from {"type": "zero" | "constant" | "tanh" | "gaussian", ...}.
SmoothFunction parse_drift(const Node& n, int dim);
std::shared_ptr<const LatticeDomain> parse_domain(const Node& n, int dim);
DensitySpec parse_density(const Node& n, int dim);
/// Bump u(x) = amplitude exp(1 - 1/(1 - |x-c|^2/r^2)).
SmoothFunction parse_bump(const Node& n, int dim);

}  // namespace nldv::cli
