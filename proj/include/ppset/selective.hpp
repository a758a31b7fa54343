#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <json.hpp>

namespace ppset {

enum class BoundKind { hoeffding, clt };

BoundKind parse_bound(const std::string& name);

struct SelectiveConfig {
    std::size_t h = 0;            // number of draws
    double epsilon = 0.1;         // tolerated label error rate
    double gamma = 0.01;          // bound failure probability
    std::vector<double> weights;  // execution probabilities in (0, 1]; empty = all 1
    BoundKind bound = BoundKind::hoeffding;
    std::uint64_t seed = 0;
    int jobs = 1;

    void validate(std::size_t programs) const;
    double weight(std::size_t i) const { return weights.empty() ? 1.0 : weights[i]; }
    double omega_min() const;
};

struct SelectiveSample {
    std::size_t j = 0;       // draw index
    std::size_t index = 0;   // program drawn
    double score = 0.0;      // U of the drawn program
    bool xi = false;         // whether its tests were run
    std::optional<int> executed_loss;
    double z = 0.0;          // loss / omega when executed, else 0
};

struct SelectiveOutcome {
    std::optional<double> u_hat;  // nullopt = execute everything
    std::vector<int> labels;      // predicted correctness per program
    std::vector<std::size_t> executed;
    std::vector<std::pair<double, double>> bound_curve;  // (u, upper bound on L(u))
    double fraction_saved = 0.0;
    std::size_t ties_at_threshold = 0;  // programs whose score equals u_hat
    std::vector<SelectiveSample> samples;
};

// Returns 1 when program i passes its tests, 0 otherwise. Throws ExecutorError on failure.
using Executor = std::function<int(std::size_t)>;

double hoeffding_delta(std::size_t h, double gamma, double omega_min);

// Upper confidence bound on the accepted-error rate at threshold u.
double error_upper_bound(const std::vector<SelectiveSample>& samples, double u, const SelectiveConfig& cfg);

// Mean of z_j * 1{U_j <= u}.
double importance_mean(const std::vector<SelectiveSample>& samples, double u);

// Largest candidate u whose bound is <= epsilon; nullopt when none qualifies.
std::optional<double> select_threshold(const std::vector<SelectiveSample>& samples,
                                       const std::vector<double>& candidates, const SelectiveConfig& cfg);

// Draw phase only: h uniform indices with replacement, each followed by a Bernoulli(omega) coin.
// `cache` receives the executed programs' results.
std::vector<SelectiveSample> draw_samples(const std::vector<double>& scores, const SelectiveConfig& cfg,
                                          const Executor& exec, std::vector<std::optional<int>>& cache);

SelectiveOutcome run_selective_execution(const std::vector<double>& scores, const Executor& exec,
                                         const SelectiveConfig& cfg);

nlohmann::json outcome_to_json(const SelectiveOutcome& o);

}  // namespace ppset
