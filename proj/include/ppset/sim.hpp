#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppset/ltt.hpp"
#include "ppset/selective.hpp"

namespace ppset {

struct WeightModel {
    enum class Kind { uniform, heavy_tail } kind = Kind::uniform;
    double a = 0.0;      // uniform lower end
    double b = 0.3;      // uniform upper end
    double scale = 0.1;  // heavy-tail (Pareto, shape 1.5) scale
};

/**
 * How correct programs relate to the generated one.
 *
 * A task is bug-free with probability `p_bug_free`; otherwise 1..max_bugs small subtrees of
 * the generated tree are wrong.  A correct program rewrites, for each bug, the subtree of an
 * ancestor `lift` levels above the bug (lift 0 = the bug itself), with
 * P(lift = l) = p_exact (1 - p_exact)^l truncated at the depth available.  Each of the m
 * samples is correct with probability `p_correct`.  The reference solution rewrites at the
 * highest level (the root's child on the bug path).
 */
struct LabelModel {
    double p_bug_free = 0.3;
    int max_bugs = 2;
    std::size_t bug_max_size = 4;  // bug subtrees are at most this large
    double p_correct = 0.5;
    double p_exact = 0.25;
    double bug_boost = 3.0;  // extra nats carried by wrong nodes
    bool include_reference = true;
};

struct SyntheticConfig {
    std::size_t n_tasks = 200;
    std::size_t tree_size_min = 8;
    std::size_t tree_size_max = 24;
    WeightModel weight_model;
    LabelModel label_model;
    double miscalibration = 0.0;
    std::size_t m = 20;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SyntheticSample {
    AnnotatedAst ast;
    bool correct = false;
    double score = 0.0;  // uncertainty in (0, 1), higher = less certain
};

struct SyntheticTask {
    CalibrationRecord record;  // ground-truth labels
    std::vector<SyntheticSample> samples;
    std::optional<AnnotatedAst> reference;
    std::vector<NodeId> bugs;  // roots of the wrong subtrees in record.generated
    // The correct program that rewrites exactly the bug subtrees (absent for bug-free tasks).
    std::optional<AnnotatedAst> minimal_fix;
};

std::vector<SyntheticTask> generate_synthetic_tasks(const SyntheticConfig& cfg);
std::vector<CalibrationRecord> generate_synthetic_set(const SyntheticConfig& cfg);

// Record whose label set is the reference plus the samples flagged in `accepted`.
CalibrationRecord relabel(const SyntheticTask& task, const std::vector<int>& accepted);

struct TrialResult {
    std::uint64_t seed = 0;
    std::optional<double> lambda_hat;
    double test_risk = 0.0;
    double removal = 0.0;  // mean removed-node fraction on the test half
    int coverage = 0;      // 1{test_risk <= alpha}
    std::optional<double> fraction_saved;
    std::optional<int> within_relaxed;  // 1{test_risk <= alpha + eps (1 - alpha)}
};

struct Aggregate {
    double mean = 0.0;
    double sd = 0.0;
};

Aggregate aggregate(const std::vector<double>& xs);

struct SweepRow {
    double value = 0.0;  // swept parameter value
    double alpha = 0.1;
    std::vector<TrialResult> trials;

    Aggregate coverage() const;
    Aggregate removal() const;
    std::optional<Aggregate> saved() const;
    std::size_t abstentions() const;
};

struct TrialReport {
    std::string parameter = "alpha";
    std::vector<SweepRow> rows;
};

// How the swept selective-execution settings map onto each trial.
struct SelectiveTrialConfig {
    SelectiveConfig base;       // epsilon, gamma, bound; weights/h resolved per trial
    double omega = 1.0;         // uniform sampling weight
    double h_fraction = 0.1;    // used when base.h == 0
};

struct TrialOptions {
    std::size_t n_trials = 100;
    double split = 0.5;  // calibration fraction
    double grid_step = 0.02;
    int jobs = 1;
};

TrialResult run_trial(const SyntheticConfig& cfg, const LttConfig& ltt, const TrialOptions& opt,
                      std::uint64_t trial_seed, const SelectiveTrialConfig* selective = nullptr);

SweepRow run_trials(const SyntheticConfig& cfg, const LttConfig& ltt, const TrialOptions& opt);
SweepRow run_selective_trials(const SyntheticConfig& cfg, const SelectiveTrialConfig& sel, const LttConfig& ltt,
                              const TrialOptions& opt);

nlohmann::json synthetic_config_to_json(const SyntheticConfig& cfg);
// Overlays the fields present in `j` on top of `base`; unknown fields are rejected.
SyntheticConfig synthetic_config_from_json(const nlohmann::json& j, SyntheticConfig base = {});

}  // namespace ppset
