#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppset/risk.hpp"

namespace ppset {

// Strictly increasing, nonnegative lambda values.
class LambdaGrid {
public:
    LambdaGrid() = default;
    explicit LambdaGrid(std::vector<double> values);

    // 0, step, 2*step, ... up to the first point >= max_total (so the top point prunes nothing).
    static LambdaGrid uniform(double max_total, double step);
    // uniform() over the largest generated-tree weight in `records`.
    static LambdaGrid for_records(const std::vector<CalibrationRecord>& records, double step);

    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t k) const { return values_[k]; }

private:
    std::vector<double> values_;
};

enum class FwerMethod { bonferroni, holm, fixed_sequence };

FwerMethod parse_fwer(const std::string& name);
std::string fwer_name(FwerMethod m);

struct LttConfig {
    LambdaGrid grid;
    double alpha = 0.1;
    double delta = 0.1;
    int t_max = 1;
    FwerMethod fwer = FwerMethod::fixed_sequence;
    int fst_starts = 0;  // 0 = min(10, N)
    int jobs = 1;
    std::chrono::milliseconds prune_time_limit{0};

    void validate() const;
    int effective_starts() const;
};

struct CalibrationResult {
    std::vector<double> grid;
    std::vector<double> pvalues;
    std::vector<double> valid;
    std::optional<double> lambda_hat;  // nullopt = abstain
    std::vector<double> risk;
    std::vector<double> removal;

    bool abstained() const { return !lambda_hat.has_value(); }
    bool operator==(const CalibrationResult&) const = default;
};

// e * P(Bin(n, alpha) <= losses), clamped to 1.
double binomial_tail_pvalue_count(std::size_t n, double alpha, std::size_t losses);
// Same, from the empirical risk; n * risk_hat must be an integer to within 1e-9.
double binomial_tail_pvalue(std::size_t n, double alpha, double risk_hat);

// FWER procedures. Inputs are p-values indexed like the ascending lambda grid; outputs are
// sorted indices into that grid.
std::vector<std::size_t> bonferroni(const std::vector<double>& pvalues, double delta);
std::vector<std::size_t> holm_bonferroni(const std::vector<double>& pvalues, double delta);
std::vector<std::size_t> fixed_sequence(const std::vector<double>& pvalues, double delta, std::size_t starts);
// Evenly spaced start indices (ascending-lambda indexing); always contains index 0.
std::vector<std::size_t> fixed_sequence_starts(std::size_t n, std::size_t starts);

std::vector<std::size_t> apply_fwer(const std::vector<double>& pvalues, const LttConfig& cfg);

CalibrationResult calibrate(const std::vector<CalibrationRecord>& records, const LttConfig& cfg);

// Prunes a new program at lambda_hat; nullopt when the calibration abstained.
std::optional<PartialProgram> predict(const AnnotatedAst& ast, const CalibrationResult& result, int t_max);

nlohmann::json result_to_json(const CalibrationResult& r);
CalibrationResult result_from_json(const nlohmann::json& j);

}  // namespace ppset
