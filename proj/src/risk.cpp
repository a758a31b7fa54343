#include "ppset/risk.hpp"

#include <unordered_set>

#include "ppset/errors.hpp"
#include "ppset/parallel.hpp"

namespace ppset {

using nlohmann::json;

PartialProgram::PartialProgram(const AnnotatedAst& b, RemovalSet r) : base(&b), removal(std::move(r)) {
    removal.check_matches(b);
}

CalibrationRecord CalibrationRecord::make(std::string task_id, AnnotatedAst generated,
                                          std::vector<AnnotatedAst> labels, std::optional<double> score) {
    if (labels.empty()) throw ValidationError("record '" + task_id + "' has no labels");
    if (score && !(*score >= 0.0)) throw ValidationError("record '" + task_id + "' has a negative score");
    std::unordered_set<std::string> seen;
    std::vector<AnnotatedAst> unique;
    for (auto& y : labels)
        if (seen.insert(canonical_serialization(y)).second) unique.push_back(std::move(y));
    return CalibrationRecord{std::move(task_id), std::move(generated), std::move(unique), score};
}

namespace {

bool match(const AnnotatedAst& base, const RemovalSet& removal, NodeId v, const AnnotatedAst& cand, NodeId w) {
    if (base.node(v).label != cand.node(w).label) return false;
    const auto& bch = base.node(v).children;
    const auto& cch = cand.node(w).children;
    for (std::size_t k = 0; k < bch.size(); ++k) {
        if (removal.removed(bch[k])) continue;
        if (k >= cch.size() || !match(base, removal, bch[k], cand, cch[k])) return false;
    }
    return true;
}

}  // namespace

bool contains(const PartialProgram& partial, const AnnotatedAst& candidate) {
    const AnnotatedAst& base = *partial.base;
    if (partial.removal.removed(base.root())) return true;
    return match(base, partial.removal, base.root(), candidate, candidate.root());
}

int set_loss(const PartialProgram& partial, const std::vector<AnnotatedAst>& labels) {
    for (const auto& y : labels)
        if (contains(partial, y)) return 0;
    return 1;
}

RiskReport empirical_risk(const std::vector<CalibrationRecord>& records, const PruneConfig& cfg,
                          PruneStrategy strategy, int jobs) {
    if (records.empty()) throw ConfigError("empirical_risk needs at least one record");
    RiskReport rep;
    rep.losses.assign(records.size(), 0);
    std::vector<double> fractions(records.size(), 0.0);
    parallel_for(records.size(), jobs, [&](std::size_t i) {
        const auto& rec = records[i];
        PartialProgram p(rec.generated, prune(rec.generated, cfg, strategy));
        rep.losses[i] = set_loss(p, rec.labels);
        fractions[i] = static_cast<double>(p.removal.count()) / static_cast<double>(rec.generated.size());
    });
    std::size_t lost = 0;
    double frac = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        lost += static_cast<std::size_t>(rep.losses[i]);
        frac += fractions[i];
    }
    rep.risk = static_cast<double>(lost) / static_cast<double>(records.size());
    rep.mean_removal_fraction = frac / static_cast<double>(records.size());
    return rep;
}

json record_to_json(const CalibrationRecord& r) {
    json labels = json::array();
    for (const auto& y : r.labels) labels.push_back(ast_to_json(y));
    return {{"task_id", r.task_id},
            {"generated", ast_to_json(r.generated)},
            {"labels", std::move(labels)},
            {"score", r.score ? json(*r.score) : json(nullptr)}};
}

CalibrationRecord record_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("record: expected a JSON object");
    for (const auto& [key, _] : j.items())
        if (key != "task_id" && key != "generated" && key != "labels" && key != "score")
            throw ParseError("record: unknown field '" + key + "'");
    for (const char* key : {"task_id", "generated", "labels"})
        if (!j.contains(key)) throw ParseError(std::string("record: missing field '") + key + "'");
    if (!j["task_id"].is_string()) throw ParseError("record: field 'task_id' must be a string");
    if (!j["labels"].is_array()) throw ParseError("record: field 'labels' must be an array");
    std::optional<double> score;
    if (j.contains("score") && !j["score"].is_null()) {
        if (!j["score"].is_number()) throw ParseError("record: field 'score' must be a number or null");
        score = j["score"].get<double>();
    }
    std::vector<AnnotatedAst> labels;
    for (const auto& y : j["labels"]) labels.push_back(ast_from_json(y));
    return CalibrationRecord::make(j["task_id"].get<std::string>(), ast_from_json(j["generated"]), std::move(labels),
                                   score);
}

std::vector<CalibrationRecord> parse_records_jsonl(std::string_view text) {
    std::vector<CalibrationRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        ++line_no;
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            if (end == text.size()) break;
            continue;
        }
        try {
            json j;
            try {
                j = json::parse(line.begin(), line.end());
            } catch (const json::parse_error& e) {
                throw ParseError(std::string("invalid JSON: ") + e.what());
            }
            out.push_back(record_from_json(j));
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::string records_to_jsonl(const std::vector<CalibrationRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += record_to_json(r).dump();
        out += '\n';
    }
    return out;
}

}  // namespace ppset
