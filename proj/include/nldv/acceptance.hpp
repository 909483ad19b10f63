#pragma once

#include <string>
#include <vector>

namespace nldv {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    /// Measured quantities against their thresholds, human readable. Timing
    /// is kept out of it (it appears only when the budget is exceeded).
    std::string detail;
    double seconds = 0.0;
    double budget_seconds = 0.0;
};

/// Ids 1-9. A criterion fails if any of its checks fails, if it throws, or
/// if it exceeds its time budget.
CriterionResult run_criterion(int id);
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {1, 2, 3, 4, 5, 6, 7, 8, 9});

/// "PASS [3] title (1.2 s): detail"
std::string format_result(const CriterionResult& r);

}  // namespace nldv
