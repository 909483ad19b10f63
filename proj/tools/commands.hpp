#pragma once

#include "config.hpp"

#include <map>
#include <string>
#include <vector>

namespace nldv::cli {

/// Plot-ready table; cells are preformatted.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct CommandResult {
    json summary = json::object();
    Table table;
    /// Result key -> library routine that produced it.
    std::map<std::string, std::string> provenance;
    bool ok = true;  ///< false only for verify with failing criteria
};

CommandResult run_command(const ExperimentConfig& cfg);

std::string cell(double v);

}  // namespace nldv::cli
