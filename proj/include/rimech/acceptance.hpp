#pragma once

#include <string>
#include <vector>

namespace rimech {

// One verdict of the release gate.  Every sub-check inside a criterion is
// normalized to value/tolerance, so `measured` <= `threshold` (the tolerance
// scale, 1.0 by default) if and only if the criterion passed.
struct CriterionOutcome {
    int id = 0;
    std::string title;
    bool passed = false;
    double measured = 0.0;   // worst sub-check ratio value/tolerance
    double threshold = 1.0;  // the tolerance scale the ratios were judged against
    std::string detail;      // per-sub-check values with their tolerances
};

int acceptance_criteria_count();

// Runs one numbered criterion (1-based).  tol_scale loosens (>1) or tightens
// (<1) every pinned tolerance uniformly.
CriterionOutcome run_acceptance_criterion(int id, double tol_scale = 1.0);

std::vector<CriterionOutcome> run_all_acceptance_criteria(double tol_scale = 1.0);

}  // namespace rimech
