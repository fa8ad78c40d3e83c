#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nvm {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// Run one verification criterion (1..14) or all of them. Each prints one
// PASS/FAIL line to stdout. The CSV written by write_results carries no
// timing, so repeated runs are byte-identical.
CriterionResult run_criterion(int id);
std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids = {});
void write_results_csv(const std::vector<CriterionResult>& results, const std::string& path);
int count_failures(const std::vector<CriterionResult>& results);

}  // namespace nvm
