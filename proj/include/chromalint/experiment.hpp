#pragma once

#include <string>
#include <vector>

#include "chromalint/evaluation.hpp"
#include "chromalint/synthetic.hpp"

namespace chromalint {

// The wrong-procedure demonstration: a perfect oracle scored with a mismatched
// pipeline. right_run compares the subtracted-image ground truth against
// itself (errors ~0); wrong_run scores the ground truth extracted from the
// *unsubtracted* images against the subtracted one, which is exactly the
// category error the harness exists to flag.
struct OracleMismatchResult {
    EvaluationRun right_run;
    EvaluationRun wrong_run;
    std::vector<std::string> warnings;
};

OracleMismatchResult oracle_mismatch_experiment(const synthetic::Dataset& dataset,
                                                double black_level, int jobs = 1);

}  // namespace chromalint
