#include "ppset/ltt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ppset/errors.hpp"
#include "ppset/parallel.hpp"

namespace ppset {

using nlohmann::json;

LambdaGrid::LambdaGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ConfigError("lambda grid must have at least one value");
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!std::isfinite(values_[k]) || values_[k] < 0.0)
            throw ConfigError("lambda grid values must be finite and nonnegative");
        if (k > 0 && !(values_[k - 1] < values_[k])) throw ConfigError("lambda grid must be strictly increasing");
    }
}

LambdaGrid LambdaGrid::uniform(double max_total, double step) {
    if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("grid step must be positive");
    if (!(max_total >= 0.0) || !std::isfinite(max_total)) throw ConfigError("grid upper end must be nonnegative");
    auto points = static_cast<std::size_t>(std::ceil(max_total / step - 1e-9));
    std::vector<double> v(points + 1);
    for (std::size_t k = 0; k <= points; ++k) v[k] = static_cast<double>(k) * step;
    return LambdaGrid(std::move(v));
}

LambdaGrid LambdaGrid::for_records(const std::vector<CalibrationRecord>& records, double step) {
    double hi = 0.0;
    for (const auto& r : records) hi = std::max(hi, total_weight(r.generated));
    return uniform(hi, step);
}

FwerMethod parse_fwer(const std::string& name) {
    if (name == "bonferroni") return FwerMethod::bonferroni;
    if (name == "holm") return FwerMethod::holm;
    if (name == "fst" || name == "fixed_sequence") return FwerMethod::fixed_sequence;
    throw ConfigError("unknown FWER method '" + name + "' (expected bonferroni, holm or fst)");
}

std::string fwer_name(FwerMethod m) {
    switch (m) {
        case FwerMethod::bonferroni: return "bonferroni";
        case FwerMethod::holm: return "holm";
        case FwerMethod::fixed_sequence: return "fst";
    }
    return "?";
}

void LttConfig::validate() const {
    if (grid.size() == 0) throw ConfigError("lambda grid is empty");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
    if (t_max < 1) throw ConfigError("t_max must be at least 1");
    if (fst_starts < 0 || static_cast<std::size_t>(fst_starts) > grid.size())
        throw ConfigError("fst_starts must lie in [1, N]");
}

int LttConfig::effective_starts() const {
    return fst_starts > 0 ? fst_starts : static_cast<int>(std::min<std::size_t>(10, grid.size()));
}

double binomial_tail_pvalue_count(std::size_t n, double alpha, std::size_t losses) {
    if (n == 0) throw ConfigError("binomial p-value needs n >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (losses > n) throw ConfigError("loss count exceeds n");
    if (losses == n) return 1.0;
    const double nd = static_cast<double>(n);
    const double la = std::log(alpha);
    const double lb = std::log1p(-alpha);
    const double lgn = std::lgamma(nd + 1.0);
    std::vector<double> terms(losses + 1);
    for (std::size_t k = 0; k <= losses; ++k) {
        double kd = static_cast<double>(k);
        terms[k] = lgn - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) + kd * la + (nd - kd) * lb;
    }
    double peak = *std::max_element(terms.begin(), terms.end());
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - peak);
    double log_p = 1.0 + peak + std::log(acc);
    return log_p >= 0.0 ? 1.0 : std::exp(log_p);
}

double binomial_tail_pvalue(std::size_t n, double alpha, double risk_hat) {
    if (!(risk_hat >= 0.0 && risk_hat <= 1.0)) throw ConfigError("empirical risk must lie in [0, 1]");
    double scaled = static_cast<double>(n) * risk_hat;
    double snapped = std::floor(scaled + 0.5);
    if (std::abs(scaled - snapped) > 1e-9) throw ConfigError("n * risk_hat must be an integer");
    return binomial_tail_pvalue_count(n, alpha, static_cast<std::size_t>(snapped));
}

std::vector<std::size_t> bonferroni(const std::vector<double>& pvalues, double delta) {
    std::vector<std::size_t> out;
    const double thr = delta / static_cast<double>(pvalues.size());
    for (std::size_t k = 0; k < pvalues.size(); ++k)
        if (pvalues[k] <= thr) out.push_back(k);
    return out;
}

std::vector<std::size_t> holm_bonferroni(const std::vector<double>& pvalues, double delta) {
    const std::size_t n = pvalues.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < n; ++k) {
        if (pvalues[order[k]] > delta / static_cast<double>(n - k)) break;
        out.push_back(order[k]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> fixed_sequence_starts(std::size_t n, std::size_t starts) {
    if (starts == 0 || starts > n) throw ConfigError("fixed-sequence starts must lie in [1, N]");
    std::vector<std::size_t> idx(starts);
    for (std::size_t i = 0; i < starts; ++i) idx[i] = i * n / starts;
    return idx;
}

// Walks from each start toward larger lambda (riskier, fewer removals) until the first
// p-value above delta/|starts|. The usual formulation lists lambda in descending order
// and steps k -> k-1; with ascending storage that is k -> k+1.
std::vector<std::size_t> fixed_sequence(const std::vector<double>& pvalues, double delta, std::size_t starts) {
    const std::size_t n = pvalues.size();
    const auto begin = fixed_sequence_starts(n, starts);
    const double thr = delta / static_cast<double>(begin.size());
    std::vector<bool> valid(n, false);
    for (std::size_t k : begin) {
        if (valid[k]) continue;
        while (k < n && pvalues[k] <= thr) {
            valid[k] = true;
            ++k;
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < n; ++k)
        if (valid[k]) out.push_back(k);
    return out;
}

std::vector<std::size_t> apply_fwer(const std::vector<double>& pvalues, const LttConfig& cfg) {
    switch (cfg.fwer) {
        case FwerMethod::bonferroni: return bonferroni(pvalues, cfg.delta);
        case FwerMethod::holm: return holm_bonferroni(pvalues, cfg.delta);
        case FwerMethod::fixed_sequence:
            return fixed_sequence(pvalues, cfg.delta, static_cast<std::size_t>(cfg.effective_starts()));
    }
    return {};
}

CalibrationResult calibrate(const std::vector<CalibrationRecord>& records, const LttConfig& cfg) {
    cfg.validate();
    if (records.empty()) throw ConfigError("calibration needs at least one record");
    const auto& grid = cfg.grid.values();
    const std::size_t n = records.size();
    const std::size_t N = grid.size();

    // losses[i][k], removal fraction[i][k]
    std::vector<std::vector<unsigned char>> losses(n);
    std::vector<std::vector<double>> fractions(n);
    parallel_for(n, cfg.jobs, [&](std::size_t i) {
        const auto& rec = records[i];
        auto path = prune_exact_path(rec.generated, grid, cfg.t_max, cfg.prune_time_limit);
        losses[i].resize(N);
        fractions[i].resize(N);
        for (std::size_t k = 0; k < N; ++k) {
            // Consecutive equal solutions share a loss.
            if (k > 0 && path[k] == path[k - 1]) {
                losses[i][k] = losses[i][k - 1];
            } else {
                PartialProgram p(rec.generated, path[k]);
                losses[i][k] = static_cast<unsigned char>(set_loss(p, rec.labels));
            }
            fractions[i][k] = static_cast<double>(path[k].count()) / static_cast<double>(rec.generated.size());
        }
    });

    CalibrationResult res;
    res.grid = grid;
    res.pvalues.resize(N);
    res.risk.resize(N);
    res.removal.resize(N);
    for (std::size_t k = 0; k < N; ++k) {
        std::size_t lost = 0;
        double frac = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            lost += losses[i][k];
            frac += fractions[i][k];
        }
        res.risk[k] = static_cast<double>(lost) / static_cast<double>(n);
        res.removal[k] = frac / static_cast<double>(n);
        res.pvalues[k] = binomial_tail_pvalue_count(n, cfg.alpha, lost);
    }
    for (std::size_t k : apply_fwer(res.pvalues, cfg)) res.valid.push_back(grid[k]);
    if (!res.valid.empty()) res.lambda_hat = res.valid.back();
    return res;
}

std::optional<PartialProgram> predict(const AnnotatedAst& ast, const CalibrationResult& result, int t_max) {
    if (result.abstained()) return std::nullopt;
    return PartialProgram(ast, prune_exact(ast, PruneConfig{*result.lambda_hat, t_max}));
}

json result_to_json(const CalibrationResult& r) {
    return {{"grid", r.grid},
            {"pvalues", r.pvalues},
            {"valid", r.valid},
            {"lambda_hat", r.lambda_hat ? json(*r.lambda_hat) : json(nullptr)},
            {"risk", r.risk},
            {"removal", r.removal}};
}

CalibrationResult result_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("calibration result: expected a JSON object");
    for (const auto& [key, _] : j.items())
        if (key != "grid" && key != "pvalues" && key != "valid" && key != "lambda_hat" && key != "risk" &&
            key != "removal")
            throw ParseError("calibration result: unknown field '" + key + "'");
    CalibrationResult r;
    try {
        r.grid = j.at("grid").get<std::vector<double>>();
        r.pvalues = j.at("pvalues").get<std::vector<double>>();
        r.valid = j.at("valid").get<std::vector<double>>();
        r.risk = j.at("risk").get<std::vector<double>>();
        r.removal = j.at("removal").get<std::vector<double>>();
        const auto& lh = j.at("lambda_hat");
        if (!lh.is_null()) r.lambda_hat = lh.get<double>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("calibration result: ") + e.what());
    }
    if (r.pvalues.size() != r.grid.size() || r.risk.size() != r.grid.size() || r.removal.size() != r.grid.size())
        throw ValidationError("calibration result: per-lambda arrays must match the grid length");
    if (r.lambda_hat && (r.valid.empty() || *r.lambda_hat != r.valid.back()))
        throw ValidationError("calibration result: lambda_hat must equal max(valid)");
    if (!r.lambda_hat && !r.valid.empty()) throw ValidationError("calibration result: null lambda_hat with valid set");
    return r;
}

}  // namespace ppset
