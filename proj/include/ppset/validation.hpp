#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace ppset {

struct Check {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    std::string relation;  // "<=", ">=", "==" against bound; "info" = reported only, always passes
    bool pass = false;
};

struct SuiteReport {
    std::string suite;
    std::vector<Check> checks;

    bool passed() const;
    void add(std::string name, double measured, std::string relation, double bound, double tol = 0.0);
};

// Monte-Carlo tolerance: 3 binomial standard errors of a proportion p over `trials`.
double mc_band(double p, std::size_t trials);

SuiteReport validate_pruner_oracle(std::uint64_t seed, std::size_t instances = 500);
SuiteReport validate_greedy(std::uint64_t seed, std::size_t instances = 500);
SuiteReport validate_monotonicity(std::uint64_t seed, std::size_t tasks = 100);
SuiteReport validate_pvalues(std::uint64_t seed, std::size_t draws = 20000);
SuiteReport validate_fwer(std::uint64_t seed, std::size_t trials = 2000);
SuiteReport validate_coverage(std::uint64_t seed, std::size_t trials = 200, int jobs = 1);
SuiteReport validate_selective_bound(std::uint64_t seed, std::size_t reps = 2000);
SuiteReport validate_combined(std::uint64_t seed, std::size_t trials = 300, int jobs = 1);
SuiteReport validate_trends(std::uint64_t seed, std::size_t trials = 100, int jobs = 1);

const std::vector<std::string>& suite_names();
// Runs one named suite ("all" runs every suite). Throws ConfigError on an unknown name.
std::vector<SuiteReport> run_suite(const std::string& name, std::uint64_t seed, int jobs = 1);

void print_suite(std::ostream& os, const SuiteReport& r);

}  // namespace ppset
