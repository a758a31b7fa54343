#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ppset/ast.hpp"
#include "ppset/pruner.hpp"

namespace ppset {

// A generated tree with whole subtrees cut out; denotes every program extending it.
struct PartialProgram {
    const AnnotatedAst* base = nullptr;
    RemovalSet removal;

    PartialProgram(const AnnotatedAst& b, RemovalSet r);
};

struct CalibrationRecord {
    std::string task_id;
    AnnotatedAst generated;
    std::vector<AnnotatedAst> labels;  // known-correct programs, deduplicated by shape and labels
    std::optional<double> score;       // program uncertainty, higher = less certain

    // Validates label non-emptiness and drops duplicate labels (first occurrence wins).
    static CalibrationRecord make(std::string task_id, AnnotatedAst generated, std::vector<AnnotatedAst> labels,
                                  std::optional<double> score = std::nullopt);
};

// True iff every retained node of `partial` has a node with the same NodePath in `candidate`.
bool contains(const PartialProgram& partial, const AnnotatedAst& candidate);

// 0 if some label lies in the prediction set, else 1.
int set_loss(const PartialProgram& partial, const std::vector<AnnotatedAst>& labels);

struct RiskReport {
    double risk = 0.0;
    std::vector<int> losses;
    double mean_removal_fraction = 0.0;
};

RiskReport empirical_risk(const std::vector<CalibrationRecord>& records, const PruneConfig& cfg,
                          PruneStrategy strategy = PruneStrategy::exact, int jobs = 1);

nlohmann::json record_to_json(const CalibrationRecord& r);
CalibrationRecord record_from_json(const nlohmann::json& j);
// JSON-lines; ParseError messages carry the 1-based line number.
std::vector<CalibrationRecord> parse_records_jsonl(std::string_view text);
std::string records_to_jsonl(const std::vector<CalibrationRecord>& records);

}  // namespace ppset
