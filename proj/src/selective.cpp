#include "ppset/selective.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "ppset/errors.hpp"
#include "ppset/parallel.hpp"

namespace ppset {

using nlohmann::json;

BoundKind parse_bound(const std::string& name) {
    if (name == "hoeffding") return BoundKind::hoeffding;
    if (name == "clt") return BoundKind::clt;
    throw ConfigError("unknown bound '" + name + "' (expected hoeffding or clt)");
}

void SelectiveConfig::validate(std::size_t programs) const {
    if (programs == 0) throw ConfigError("selective execution needs at least one program");
    if (h == 0) throw ConfigError("h must be positive");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in [0, 1)");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    if (!weights.empty() && weights.size() != programs)
        throw ConfigError("expected " + std::to_string(programs) + " sampling weights, got " +
                          std::to_string(weights.size()));
    for (double w : weights)
        if (!(w > 0.0 && w <= 1.0)) throw ConfigError("sampling weights must lie in (0, 1]");
    if (bound == BoundKind::clt && h < 2) throw ConfigError("the CLT bound needs h >= 2");
}

double SelectiveConfig::omega_min() const {
    return weights.empty() ? 1.0 : *std::min_element(weights.begin(), weights.end());
}

double hoeffding_delta(std::size_t h, double gamma, double omega_min) {
    if (h == 0 || !(gamma > 0.0 && gamma < 1.0) || !(omega_min > 0.0))
        throw ConfigError("hoeffding_delta needs h >= 1, gamma in (0,1), omega_min > 0");
    return std::sqrt(std::log(2.0 / gamma) / (2.0 * static_cast<double>(h))) / omega_min;
}

double importance_mean(const std::vector<SelectiveSample>& samples, double u) {
    double s = 0.0;
    for (const auto& x : samples)
        if (x.score <= u) s += x.z;
    return s / static_cast<double>(samples.size());
}

double error_upper_bound(const std::vector<SelectiveSample>& samples, double u, const SelectiveConfig& cfg) {
    const std::size_t h = samples.size();
    if (h == 0) throw ConfigError("error bound needs at least one sample");
    const double mean = importance_mean(samples, u);
    if (cfg.bound == BoundKind::hoeffding) return mean + hoeffding_delta(h, cfg.gamma, cfg.omega_min());

    if (h < 2) throw ConfigError("the CLT bound needs at least two samples");
    double ss = 0.0;
    for (const auto& x : samples) {
        double d = (x.score <= u ? x.z : 0.0) - mean;
        ss += d * d;
    }
    const double sigma = std::sqrt(ss / static_cast<double>(h));
    const double z = boost::math::quantile(boost::math::normal_distribution<double>(), 1.0 - cfg.gamma);
    return mean + z * sigma / std::sqrt(static_cast<double>(h));
}

std::optional<double> select_threshold(const std::vector<SelectiveSample>& samples,
                                       const std::vector<double>& candidates, const SelectiveConfig& cfg) {
    // With zero tolerated error nothing may be accepted unverified, whatever the bound says.
    if (cfg.epsilon <= 0.0) return std::nullopt;
    std::optional<double> best;
    for (double u : candidates)
        if (error_upper_bound(samples, u, cfg) <= cfg.epsilon && (!best || u > *best)) best = u;
    return best;
}

std::vector<SelectiveSample> draw_samples(const std::vector<double>& scores, const SelectiveConfig& cfg,
                                          const Executor& exec, std::vector<std::optional<int>>& cache) {
    const std::size_t m = scores.size();
    cfg.validate(m);
    cache.resize(m);
    // Per draw: one index, then one coin, from a single generator.
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::size_t> pick(0, m - 1);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<SelectiveSample> samples(cfg.h);
    for (std::size_t j = 0; j < cfg.h; ++j) {
        auto& s = samples[j];
        s.j = j;
        s.index = pick(rng);
        s.score = scores[s.index];
        const double w = cfg.weight(s.index);
        s.xi = coin(rng) < w;
        if (!s.xi) continue;
        if (!cache[s.index]) cache[s.index] = exec(s.index);
        const int correct = *cache[s.index];
        if (correct != 0 && correct != 1) throw ExecutorError(s.index, "result must be 0 or 1");
        s.executed_loss = 1 - correct;
        s.z = static_cast<double>(*s.executed_loss) / w;
    }
    return samples;
}

SelectiveOutcome run_selective_execution(const std::vector<double>& scores, const Executor& exec,
                                         const SelectiveConfig& cfg) {
    const std::size_t m = scores.size();
    cfg.validate(m);
    for (double u : scores)
        if (!std::isfinite(u)) throw ConfigError("uncertainty scores must be finite");

    std::vector<std::optional<int>> cache;
    SelectiveOutcome out;
    out.samples = draw_samples(scores, cfg, exec, cache);

    std::vector<double> candidates = scores;
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (double u : candidates) out.bound_curve.emplace_back(u, error_upper_bound(out.samples, u, cfg));
    out.u_hat = cfg.epsilon <= 0.0 ? std::nullopt : select_threshold(out.samples, candidates, cfg);

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < m; ++i) {
        const bool accept = out.u_hat && scores[i] < *out.u_hat;
        if (!accept && !cache[i]) todo.push_back(i);
        if (out.u_hat && scores[i] == *out.u_hat) ++out.ties_at_threshold;
    }
    std::vector<int> results(todo.size(), 0);
    parallel_for(todo.size(), cfg.jobs, [&](std::size_t k) { results[k] = exec(todo[k]); });
    for (std::size_t k = 0; k < todo.size(); ++k) {
        if (results[k] != 0 && results[k] != 1) throw ExecutorError(todo[k], "result must be 0 or 1");
        cache[todo[k]] = results[k];
    }

    out.labels.resize(m);
    std::size_t saved = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (out.u_hat && scores[i] < *out.u_hat) {
            out.labels[i] = 1;
            ++saved;
        } else {
            out.labels[i] = *cache[i];
        }
        if (cache[i]) out.executed.push_back(i);
    }
    out.fraction_saved = static_cast<double>(saved) / static_cast<double>(m);
    return out;
}

json outcome_to_json(const SelectiveOutcome& o) {
    json bound = json::array();
    for (const auto& [u, l] : o.bound_curve) bound.push_back(json::array({u, l}));
    return {{"u_hat", o.u_hat ? json(*o.u_hat) : json("exec_all")},
            {"labels", o.labels},
            {"executed", o.executed},
            {"fraction_saved", o.fraction_saved},
            {"bound", std::move(bound)}};
}

}  // namespace ppset
