#pragma once

#include <string>
#include <vector>

namespace lindyn {

struct CriterionResult {
    int id{0};
    std::string name;
    bool pass{false};
    std::string detail;
    double seconds{0.0};
};

/// Runs the full acceptance battery (the golden classification and shadowing
/// tables, the quantitative periodic/bootstrap bounds, chain constructors,
/// oracle concordance, the invariance suite, the contraction bound, the chaos
/// pipeline and the negative controls). Every tolerance is pinned here.
std::vector<CriterionResult> run_acceptance();

/// CSV rendering (criterion id, pass/fail, seconds, detail).
std::string acceptance_csv(const std::vector<CriterionResult>& results);

}  // namespace lindyn
