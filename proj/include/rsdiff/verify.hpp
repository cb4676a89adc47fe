#pragma once

#include <optional>
#include <string>
#include <vector>

namespace rsdiff {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

struct VerifyOptions {
    std::optional<std::string> family; // fibonacci | noble | perioddoubling
    std::optional<double> p_override;  // applied to the period doubling criteria
};

/// Runs the acceptance checks (all of them, or the subset touching the
/// requested family) and returns one result per criterion.
std::vector<CriterionResult> run_acceptance(const VerifyOptions& opts = {});

/// Pretty-prints one pass/fail line per criterion; returns true iff all pass.
bool print_acceptance_report(const std::vector<CriterionResult>& results);

} // namespace rsdiff
