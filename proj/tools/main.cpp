// nldv: batch driver for the nonlocal operator library.
//
// Exit status: 0 success, 1 verify found failing criteria, 2 configuration
// error (message names the field), 3 numerical failure.
#include "commands.hpp"
#include "config.hpp"

#include "nldv/errors.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace nldv::cli;

namespace {

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("nldv");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("NONLOCAL_DV_LOG");
    spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

void write_outputs(const ExperimentConfig& cfg, const CommandResult& res) {
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const std::string stem = cfg.prefix.empty() ? cfg.command : cfg.prefix;

    json prov = {{"tool", "nldv"}, {"version", "0.1.0"}, {"command", cfg.command}, {"seed", cfg.seed},
                 {"threads", cfg.threads}, {"config", cfg.doc}};
    prov["results"] = res.provenance;
    json doc = {{"command", cfg.command}, {"summary", res.summary}, {"provenance", prov}};
    if (!res.table.rows.empty()) doc["table"] = stem + ".csv";

    std::ofstream js(dir / (stem + ".json"));
    js << doc.dump(2) << '\n';
    if (!js) throw std::runtime_error("cannot write " + (dir / (stem + ".json")).string());

    if (!res.table.rows.empty()) {
        std::ofstream csv(dir / (stem + ".csv"));
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) csv << (i ? "," : "") << cells[i];
            csv << '\n';
        };
        line(res.table.header);
        for (const auto& r : res.table.rows) line(r);
        if (!csv) throw std::runtime_error("cannot write " + (dir / (stem + ".csv")).string());
    }
    spdlog::info("wrote {}", (dir / (stem + ".json")).string());
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();

    CLI::App app{"Nonlocal operators, principal eigenvalues and inverse problems"};
    std::string config_path, output_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    app.add_option("--config", config_path, "JSON experiment file")->required();
    auto* out_opt = app.add_option("--output-dir", output_dir, "overrides output.dir");
    auto* seed_opt = app.add_option("--seed", seed, "overrides seed");
    auto* thr_opt = app.add_option("--threads", threads, "overrides threads")->check(CLI::PositiveNumber);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
        if (*out_opt) cfg.output_dir = output_dir;
        if (*seed_opt) cfg.seed = seed;
        if (*thr_opt) cfg.threads = threads;
        cfg.doc["seed"] = cfg.seed;
        cfg.doc["threads"] = cfg.threads;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    Eigen::setNbThreads(cfg.threads);

    try {
        const auto res = run_command(cfg);
        write_outputs(cfg, res);
        std::cout << res.summary.dump(2) << '\n';
        return res.ok ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const nldv::InputError& e) {
        std::cerr << "config error: $: " << e.what() << '\n';
        return 2;
    } catch (const nldv::Error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
