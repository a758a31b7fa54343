#include "ppset/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include <boost/math/distributions/binomial.hpp>

#include "ppset/errors.hpp"
#include "ppset/ltt.hpp"
#include "ppset/rng.hpp"
#include "ppset/selective.hpp"
#include "ppset/sim.hpp"

namespace ppset {

bool SuiteReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

void SuiteReport::add(std::string name, double measured, std::string relation, double bound, double tol) {
    bool pass = false;
    if (relation == "<=") pass = measured <= bound + tol;
    else if (relation == ">=") pass = measured >= bound - tol;
    else if (relation == "==") pass = std::abs(measured - bound) <= tol;
    else if (relation == "info") pass = true;  // reported, not asserted
    else throw std::logic_error("unknown relation " + relation);
    checks.push_back(Check{std::move(name), measured, bound, std::move(relation), pass});
}

double mc_band(double p, std::size_t trials) {
    return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

namespace {

using Rng = std::mt19937_64;
using Seconds = std::chrono::duration<double>;

AnnotatedAst random_tree(Rng& rng, std::size_t max_nodes, double max_weight, const std::string& id) {
    const auto n = std::uniform_int_distribution<std::size_t>(1, max_nodes)(rng);
    std::uniform_real_distribution<double> w(0.0, max_weight);
    std::vector<AstNode> nodes(n);
    for (NodeId i = 0; i < n; ++i) nodes[i] = AstNode{i, "n" + std::to_string(i % 3), {}, w(rng)};
    for (NodeId i = 1; i < n; ++i) nodes[std::uniform_int_distribution<NodeId>(0, i - 1)(rng)].children.push_back(i);
    return AnnotatedAst::create(id, 0, std::move(nodes));
}

bool feasible(const AnnotatedAst& ast, const RemovalSet& r, const PruneConfig& cfg) {
    // Rebuilding from the removed ids re-checks downward closure.
    RemovalSet again = RemovalSet::from_removed(ast, r.removed_ids());
    return again == r && r.edge_roots(ast) <= static_cast<std::size_t>(cfg.t_max) &&
           within_budget(retained_weight(ast, r), cfg.lambda, total_weight(ast));
}

}  // namespace

SuiteReport validate_pruner_oracle(std::uint64_t seed, std::size_t instances) {
    SuiteReport rep{"pruner-oracle", {}};
    Rng rng(derive_seed(seed, "pruner-oracle"));
    std::size_t objective_mismatch = 0, solution_mismatch = 0, infeasible = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t k = 0; k < instances; ++k) {
        auto ast = random_tree(rng, 12, 2.0, "rand-" + std::to_string(k));
        PruneConfig cfg;
        cfg.t_max = std::uniform_int_distribution<int>(1, 3)(rng);
        cfg.lambda = std::uniform_real_distribution<double>(0.0, total_weight(ast))(rng);
        auto exact = prune_exact(ast, cfg);
        auto brute = prune_bruteforce(ast, cfg);
        if (exact.count() != brute.count()) ++objective_mismatch;
        if (exact.roots() != brute.roots()) ++solution_mismatch;
        if (!feasible(ast, exact, cfg)) ++infeasible;
    }
    const double secs = Seconds(std::chrono::steady_clock::now() - t0).count();
    rep.add("objective mismatches over " + std::to_string(instances) + " trees", double(objective_mismatch), "==", 0.0);
    rep.add("tie-broken solution mismatches", double(solution_mismatch), "==", 0.0);
    rep.add("infeasible exact solutions (root count/budget)", double(infeasible), "==", 0.0);
    rep.add("runtime seconds", secs, "<=", 60.0);
    return rep;
}

SuiteReport validate_greedy(std::uint64_t seed, std::size_t instances) {
    SuiteReport rep{"greedy", {}};
    Rng rng(derive_seed(seed, "greedy"));
    std::size_t worse = 0, infeasible = 0;
    for (std::size_t k = 0; k < instances; ++k) {
        auto ast = random_tree(rng, 20, 2.0, "rand-" + std::to_string(k));
        PruneConfig cfg;
        cfg.t_max = std::uniform_int_distribution<int>(1, 3)(rng);
        cfg.lambda = std::uniform_real_distribution<double>(0.0, total_weight(ast))(rng);
        auto exact = prune_exact(ast, cfg);
        auto greedy = prune_greedy(ast, cfg);
        if (greedy.count() < exact.count()) ++worse;
        if (!feasible(ast, greedy, cfg)) ++infeasible;
    }
    rep.add("instances where greedy removes fewer nodes than exact", double(worse), "==", 0.0);
    rep.add("infeasible greedy solutions", double(infeasible), "==", 0.0);
    return rep;
}

SuiteReport validate_monotonicity(std::uint64_t seed, std::size_t tasks) {
    SuiteReport rep{"monotonicity", {}};
    SyntheticConfig cfg;
    cfg.n_tasks = tasks;
    cfg.m = 0;
    cfg.seed = derive_seed(seed, "monotonicity");
    auto records = generate_synthetic_set(cfg);
    auto grid = LambdaGrid::for_records(records, 0.02);
    std::size_t violations = 0, pairs = 0, path_mismatch = 0;
    for (int t_max : {1, 2}) {
        for (const auto& rec : records) {
            auto path = prune_exact_path(rec.generated, grid.values(), t_max);
            std::size_t prev = rec.generated.size() + 1;
            for (std::size_t k = 0; k < grid.size(); ++k) {
                auto direct = prune_exact(rec.generated, PruneConfig{grid[k], t_max});
                if (!(direct == path[k])) ++path_mismatch;
                if (k > 0) {
                    ++pairs;
                    if (direct.count() > prev) ++violations;
                }
                prev = direct.count();
            }
        }
    }
    rep.add("removal-count increases over " + std::to_string(pairs) + " adjacent grid pairs", double(violations), "==",
            0.0);
    rep.add("grid-path solutions differing from direct solves", double(path_mismatch), "==", 0.0);
    return rep;
}

SuiteReport validate_pvalues(std::uint64_t seed, std::size_t draws) {
    SuiteReport rep{"pvalues", {}};
    // Frozen from exact rational arithmetic: e * 0.8^20 and e * (0.9^50 + 5 * 0.9^49).
    rep.add("p(n=20, a=0.2, R=0) vs e*0.8^20", binomial_tail_pvalue(20, 0.2, 0.0), "==", 0.0313396558, 1e-6);
    rep.add("p(n=50, a=0.1, R=0.02) vs e*(0.9^50+5*0.9^49)", binomial_tail_pvalue(50, 0.1, 0.02), "==",
            0.0918394885, 1e-6);
    rep.add("p(R=1) clamps to 1", binomial_tail_pvalue(30, 0.3, 1.0), "==", 1.0);

    // Independent route: Boost's regularized-incomplete-beta binomial CDF.
    double worst = 0.0;
    for (std::size_t n : {1u, 7u, 50u, 200u, 1000u})
        for (double a : {0.01, 0.1, 0.3, 0.7})
            for (std::size_t k = 0; k < n; k += std::max<std::size_t>(1, n / 9)) {
                double ref = std::min(1.0, std::exp(1.0) * boost::math::cdf(boost::math::binomial(double(n), a), double(k)));
                double got = binomial_tail_pvalue_count(n, a, k);
                if (ref > 1e-280) worst = std::max(worst, std::abs(got - ref) / ref);
            }
    rep.add("max relative deviation from incomplete-beta CDF", worst, "<=", 1e-9);

    // Null boundary: true risk exactly alpha.
    const std::size_t n = 100;
    const double alpha = 0.1;
    Rng rng(derive_seed(seed, "pvalues"));
    std::binomial_distribution<std::size_t> losses(n, alpha);
    std::vector<double> ps(draws);
    for (auto& p : ps) p = binomial_tail_pvalue_count(n, alpha, losses(rng));
    for (double u : {0.01, 0.05, 0.1, 0.25, 0.5}) {
        double frac = double(std::count_if(ps.begin(), ps.end(), [u](double p) { return p <= u; })) / double(draws);
        char name[64];
        std::snprintf(name, sizeof name, "P(p <= %.2f) at the null boundary", u);
        rep.add(name, frac, "<=", u + mc_band(u, draws));
    }
    return rep;
}

SuiteReport validate_fwer(std::uint64_t seed, std::size_t trials) {
    SuiteReport rep{"fwer", {}};
    const std::size_t N = 20, n = 100;
    const double alpha = 0.1, delta = 0.1;
    Rng rng(derive_seed(seed, "fwer-null"));
    // Every hypothesis sits at the null boundary (true risk = alpha).
    std::binomial_distribution<std::size_t> losses(n, alpha);
    std::size_t bonf = 0, holm = 0, fst = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        std::vector<double> p(N);
        for (auto& x : p) x = binomial_tail_pvalue_count(n, alpha, losses(rng));
        bonf += !bonferroni(p, delta).empty();
        holm += !holm_bonferroni(p, delta).empty();
        fst += !fixed_sequence(p, delta, std::min<std::size_t>(10, N)).empty();
    }
    const double bound = delta + mc_band(delta, trials);
    rep.add("Bonferroni non-empty rate under the null", double(bonf) / double(trials), "<=", bound);
    rep.add("Holm non-empty rate under the null", double(holm) / double(trials), "<=", bound);
    rep.add("fixed-sequence non-empty rate under the null", double(fst) / double(trials), "<=", bound);

    Rng prng(derive_seed(seed, "fwer-nesting"));
    std::size_t not_superset = 0, fst_all_starts_differs = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto len = std::uniform_int_distribution<std::size_t>(1, 30)(prng);
        std::vector<double> p(len);
        // Mix tiny and large p-values so that rejections actually happen.
        for (auto& x : p) x = std::pow(std::uniform_real_distribution<double>(0.0, 1.0)(prng), 4.0);
        const double d = std::uniform_real_distribution<double>(0.01, 0.5)(prng);
        auto b = bonferroni(p, d);
        auto h = holm_bonferroni(p, d);
        if (!std::includes(h.begin(), h.end(), b.begin(), b.end())) ++not_superset;
        if (fixed_sequence(p, d, len) != b) ++fst_all_starts_differs;
    }
    rep.add("Holm not a superset of Bonferroni (1000 vectors)", double(not_superset), "==", 0.0);
    rep.add("fixed-sequence with |I|=N differing from Bonferroni", double(fst_all_starts_differs), "==", 0.0);

    // End to end: every lambda has true risk ~0.2 > alpha, so calibration should abstain.
    SyntheticConfig cfg;
    cfg.n_tasks = 200;
    cfg.m = 0;
    cfg.label_model.p_bug_free = 0.8;
    cfg.seed = derive_seed(seed, "fwer-abstain");
    LttConfig ltt;
    ltt.grid = LambdaGrid({1e6});
    TrialOptions opt;
    opt.n_trials = 200;
    auto row = run_trials(cfg, ltt, opt);
    double abstain = double(row.abstentions()) / double(opt.n_trials);
    rep.add("abstention rate in an all-null synthetic configuration", abstain, ">=",
            1.0 - delta - mc_band(delta, opt.n_trials));
    return rep;
}

SuiteReport validate_coverage(std::uint64_t seed, std::size_t trials, int jobs) {
    SuiteReport rep{"coverage", {}};
    SyntheticConfig cfg;
    cfg.n_tasks = 200;
    cfg.seed = derive_seed(seed, "coverage");
    LttConfig ltt;
    ltt.alpha = 0.1;
    ltt.delta = 0.1;
    ltt.t_max = 1;
    ltt.fwer = FwerMethod::fixed_sequence;
    TrialOptions opt;
    opt.n_trials = trials;
    opt.split = 0.5;
    opt.grid_step = 0.02;
    opt.jobs = jobs;
    auto row = run_trials(cfg, ltt, opt);
    rep.add("fraction of trials with test risk <= alpha (default setting)", row.coverage().mean, ">=",
            0.9 - mc_band(0.9, trials));
    return rep;
}

namespace {

struct FixedPool {
    std::vector<double> scores;
    std::vector<int> correct;
    std::vector<double> weights;

    // L with the strict inequality used for acceptance.
    double accepted_error(double u) const {
        double s = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) s += (1 - correct[i]) * (scores[i] < u ? 1.0 : 0.0);
        return s / double(scores.size());
    }
    // Expectation of Z_j(u), which uses U <= u.
    double z_expectation(double u) const {
        double s = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) s += (1 - correct[i]) * (scores[i] <= u ? 1.0 : 0.0);
        return s / double(scores.size());
    }
};

FixedPool make_pool(std::uint64_t seed, std::size_t m) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    FixedPool pool;
    for (std::size_t i = 0; i < m; ++i) {
        double u = u01(rng);
        pool.scores.push_back(u);
        pool.correct.push_back(u01(rng) < 1.0 - 0.4 * u ? 1 : 0);
        pool.weights.push_back(0.5 + 0.5 * u01(rng));
    }
    return pool;
}

// Sampled programs of the synthetic model, all executed with probability 1.
FixedPool synthetic_pool(std::uint64_t seed, std::size_t m) {
    SyntheticConfig cfg;
    cfg.n_tasks = (m + 19) / 20;
    cfg.m = 20;
    cfg.seed = seed;
    FixedPool pool;
    for (const auto& task : generate_synthetic_tasks(cfg))
        for (const auto& s : task.samples) {
            if (pool.scores.size() == m) break;
            pool.scores.push_back(s.score);
            pool.correct.push_back(s.correct ? 1 : 0);
        }
    return pool;
}

double bound_coverage(const FixedPool& pool, double u, BoundKind kind, std::size_t h, double gamma, std::size_t reps,
                      std::uint64_t seed) {
    Executor exec = [&](std::size_t i) { return pool.correct[i]; };
    const double target = pool.accepted_error(u);
    std::size_t covered = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        SelectiveConfig cfg;
        cfg.h = h;
        cfg.gamma = gamma;
        cfg.bound = kind;
        cfg.weights = pool.weights;
        cfg.seed = derive_seed(seed, std::uint64_t(r));
        std::vector<std::optional<int>> cache;
        auto samples = draw_samples(pool.scores, cfg, exec, cache);
        covered += error_upper_bound(samples, u, cfg) >= target;
    }
    return double(covered) / double(reps);
}

}  // namespace

SuiteReport validate_selective_bound(std::uint64_t seed, std::size_t reps) {
    SuiteReport rep{"selective-bound", {}};
    // sqrt(ln 40 / 2000) from exact ln 40 = 3.68887945411393630...
    rep.add("hoeffding_delta(h=1000, gamma=0.05, omega_min=1) vs sqrt(ln40/2000)", hoeffding_delta(1000, 0.05, 1.0),
            "==", 0.0429469408, 1e-7);

    const double gamma = 0.05;
    const double floor = 1.0 - gamma - mc_band(1.0 - gamma, reps);

    // Programs from the synthetic model, threshold at the median score.
    const FixedPool sim = synthetic_pool(derive_seed(seed, "sim-pool"), 2000);
    std::vector<double> sorted = sim.scores;
    std::sort(sorted.begin(), sorted.end());
    const double u_sim = sorted[sorted.size() / 2];
    rep.add("L(u) of the synthetic pool at its median score", sim.accepted_error(u_sim), "info", 0.0);
    rep.add("P(bound >= L(u)) hoeffding h=200, synthetic pool",
            bound_coverage(sim, u_sim, BoundKind::hoeffding, 200, gamma, reps, derive_seed(seed, "cov-h200")), ">=",
            floor);
    rep.add("P(bound >= L(u)) clt h=200, synthetic pool",
            bound_coverage(sim, u_sim, BoundKind::clt, 200, gamma, reps, derive_seed(seed, "cov-c200")), ">=", floor);
    rep.add("P(bound >= L(u)) clt h=1000, synthetic pool",
            bound_coverage(sim, u_sim, BoundKind::clt, 1000, gamma, reps, derive_seed(seed, "cov-c1000")), ">=",
            floor);

    // Rare losses with weights in [0.5, 1].
    const FixedPool pool = make_pool(derive_seed(seed, "pool"), 2000);
    const double u = 0.6;
    rep.add("L(0.6) of the rare-loss pool", pool.accepted_error(u), "info", 0.0);
    rep.add("P(bound >= L(u)) hoeffding h=200, rare-loss weighted pool",
            bound_coverage(pool, u, BoundKind::hoeffding, 200, gamma, reps, derive_seed(seed, "rare-h200")), ">=",
            floor);
    rep.add("P(bound >= L(u)) clt h=200, rare-loss weighted pool",
            bound_coverage(pool, u, BoundKind::clt, 200, gamma, reps, derive_seed(seed, "rare-c200")), ">=", floor);
    rep.add("P(bound >= L(u)) clt h=1000, rare-loss weighted pool",
            bound_coverage(pool, u, BoundKind::clt, 1000, gamma, reps, derive_seed(seed, "rare-c1000")), ">=",
            floor);

    Executor exec = [&](std::size_t i) { return pool.correct[i]; };
    // Unbiasedness of the importance-weighted mean at five thresholds.
    const std::size_t ureps = 10000;
    const double us[] = {0.1, 0.3, 0.5, 0.7, 1.0};
    std::vector<std::vector<double>> means(5);
    std::size_t non_monotone = 0;
    for (std::size_t r = 0; r < ureps; ++r) {
        SelectiveConfig cfg;
        cfg.h = 100;
        cfg.weights = pool.weights;
        cfg.seed = derive_seed(seed, std::uint64_t(r) + 1000003);
        std::vector<std::optional<int>> cache;
        auto samples = draw_samples(pool.scores, cfg, exec, cache);
        double prev = -1.0;
        for (int k = 0; k < 5; ++k) {
            double mu = importance_mean(samples, us[k]);
            means[k].push_back(mu);
            if (mu < prev) ++non_monotone;
            prev = mu;
        }
    }
    for (int k = 0; k < 5; ++k) {
        auto agg = aggregate(means[k]);
        const double se = agg.sd / std::sqrt(double(ureps));
        char name[80];
        std::snprintf(name, sizeof name, "|mean mu_Z(%.1f) - L(%.1f)| over %zu replications", us[k], us[k], ureps);
        rep.add(name, std::abs(agg.mean - pool.z_expectation(us[k])), "<=", 3.0 * se);
    }
    rep.add("decreases of mu_Z(u) along increasing u", double(non_monotone), "==", 0.0);
    return rep;
}

SuiteReport validate_combined(std::uint64_t seed, std::size_t trials, int jobs) {
    SuiteReport rep{"combined", {}};
    SyntheticConfig cfg;
    cfg.n_tasks = 200;
    cfg.seed = derive_seed(seed, "combined");
    LttConfig ltt;
    ltt.alpha = 0.1;
    ltt.delta = 0.1;
    TrialOptions opt;
    opt.n_trials = trials;
    opt.jobs = jobs;
    SelectiveTrialConfig sel;
    sel.base.epsilon = 0.1;
    sel.base.gamma = 0.05;
    auto row = run_selective_trials(cfg, sel, ltt, opt);
    std::size_t ok = 0;
    for (const auto& t : row.trials) ok += static_cast<std::size_t>(t.within_relaxed.value_or(0));
    const double target = (1.0 - 0.05) * (1.0 - 0.1);
    rep.add("fraction with test risk <= alpha + eps(1 - alpha) = 0.19", double(ok) / double(trials), ">=",
            target - mc_band(target, trials));

    // eps = 0 must reproduce exhaustive labeling exactly.
    TrialOptions small = opt;
    small.n_trials = std::min<std::size_t>(trials, 50);
    sel.base.epsilon = 0.0;
    auto zero = run_selective_trials(cfg, sel, ltt, small);
    auto full = run_trials(cfg, ltt, small);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < small.n_trials; ++i) {
        const auto& a = zero.trials[i];
        const auto& b = full.trials[i];
        diff += !(a.lambda_hat == b.lambda_hat && a.test_risk == b.test_risk && a.removal == b.removal &&
                  a.coverage == b.coverage);
    }
    diff += !(zero.coverage().mean == full.coverage().mean && zero.removal().mean == full.removal().mean &&
              zero.removal().sd == full.removal().sd);
    rep.add("eps=0 trials differing from exhaustive labeling", double(diff), "==", 0.0);
    return rep;
}

SuiteReport validate_trends(std::uint64_t seed, std::size_t trials, int jobs) {
    SuiteReport rep{"trends", {}};
    SyntheticConfig cfg;
    cfg.n_tasks = 200;
    cfg.seed = derive_seed(seed, "trends");
    TrialOptions opt;
    opt.n_trials = trials;
    opt.jobs = jobs;

    for (double alpha : {0.05, 0.1, 0.15, 0.2, 0.25, 0.3}) {
        LttConfig ltt;
        ltt.alpha = alpha;
        auto row = run_trials(cfg, ltt, opt);
        char name[64];
        std::snprintf(name, sizeof name, "coverage at alpha=%.2f vs 1-alpha", alpha);
        rep.add(name, row.coverage().mean, ">=", 1.0 - alpha - mc_band(1.0 - alpha, trials));
    }

    LttConfig ltt;
    double prev_mean = 0.0;
    bool first = true;
    for (std::size_t m : {1u, 5u, 20u, 80u}) {
        SyntheticConfig c = cfg;
        c.m = m;
        auto row = run_trials(c, ltt, opt);
        auto rem = row.removal();
        if (!first) {
            const double se = rem.sd / std::sqrt(double(trials));
            char name[64];
            std::snprintf(name, sizeof name, "mean removal increase from previous m to m=%zu", m);
            rep.add(name, rem.mean - prev_mean, "<=", se);
        }
        prev_mean = rem.mean;
        first = false;
    }

    SelectiveTrialConfig sel;
    sel.base.gamma = 0.01;
    double prev_saved = -1.0, first_saved = 0.0, last_saved = 0.0;
    std::size_t drops = 0;
    for (double eps : {0.05, 0.1, 0.2, 0.3}) {
        sel.base.epsilon = eps;
        auto row = run_selective_trials(cfg, sel, ltt, opt);
        double s = row.saved()->mean;
        if (prev_saved >= 0.0 && s < prev_saved) ++drops;
        if (prev_saved < 0.0) first_saved = s;
        last_saved = s;
        prev_saved = s;
    }
    rep.add("decreases of mean fraction_saved along eps = 0.05, 0.1, 0.2, 0.3", double(drops), "==", 0.0);
    rep.add("fraction_saved gain from eps=0.05 to eps=0.3", last_saved - first_saved, ">=", 1e-9);
    return rep;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"pruner-oracle", "greedy",   "monotonicity", "pvalues", "fwer",
                                                "coverage",      "selective", "trends",       "all"};
    return names;
}

std::vector<SuiteReport> run_suite(const std::string& name, std::uint64_t seed, int jobs) {
    std::vector<SuiteReport> out;
    const bool all = name == "all";
    bool known = all;
    auto want = [&](const char* s) {
        bool hit = all || name == s;
        known = known || hit;
        return hit;
    };
    if (want("pruner-oracle")) out.push_back(validate_pruner_oracle(seed));
    if (want("greedy")) out.push_back(validate_greedy(seed));
    if (want("monotonicity")) out.push_back(validate_monotonicity(seed));
    if (want("pvalues")) out.push_back(validate_pvalues(seed));
    if (want("fwer")) out.push_back(validate_fwer(seed));
    if (want("coverage")) out.push_back(validate_coverage(seed, 200, jobs));
    if (want("selective")) {
        out.push_back(validate_selective_bound(seed));
        out.push_back(validate_combined(seed, 300, jobs));
    }
    if (want("trends")) out.push_back(validate_trends(seed, 100, jobs));
    if (!known) throw ConfigError("unknown suite '" + name + "'");
    return out;
}

void print_suite(std::ostream& os, const SuiteReport& r) {
    for (const auto& c : r.checks) {
        char line[256];
        std::snprintf(line, sizeof line, "[%s] %-14s %-62s measured=%-12.6g %s %.6g\n", c.relation == "info" ? "INFO" : c.pass ? "PASS" : "FAIL",
                      r.suite.c_str(), c.name.c_str(), c.measured, c.relation.c_str(), c.bound);
        os << line;
    }
}

}  // namespace ppset
