#include "ppset/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ppset/errors.hpp"
#include "ppset/parallel.hpp"
#include "ppset/rng.hpp"

namespace ppset {

using nlohmann::json;

void SyntheticConfig::validate() const {
    if (n_tasks < 2) throw ConfigError("n_tasks must be at least 2");
    if (tree_size_min < 2 || tree_size_max < tree_size_min)
        throw ConfigError("tree_size_range must satisfy 2 <= min <= max");
    if (weight_model.kind == WeightModel::Kind::uniform && !(0.0 <= weight_model.a && weight_model.a <= weight_model.b))
        throw ConfigError("uniform weight model needs 0 <= a <= b");
    if (weight_model.kind == WeightModel::Kind::heavy_tail && !(weight_model.scale > 0.0))
        throw ConfigError("heavy-tail weight model needs scale > 0");
    const auto& lm = label_model;
    if (!(lm.p_bug_free >= 0.0 && lm.p_bug_free <= 1.0)) throw ConfigError("p_bug_free must lie in [0, 1]");
    if (!(lm.p_correct >= 0.0 && lm.p_correct <= 1.0)) throw ConfigError("p_correct must lie in [0, 1]");
    if (!(lm.p_exact > 0.0 && lm.p_exact <= 1.0)) throw ConfigError("p_exact must lie in (0, 1]");
    if (lm.max_bugs < 1) throw ConfigError("max_bugs must be at least 1");
    if (lm.bug_max_size < 1) throw ConfigError("bug_max_size must be at least 1");
    if (!(lm.bug_boost >= 0.0)) throw ConfigError("bug_boost must be nonnegative");
    if (!(miscalibration >= 0.0)) throw ConfigError("miscalibration must be nonnegative");
}

namespace {

constexpr int kAlphabet = 8;

using Rng = std::mt19937_64;

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

double draw_weight(const WeightModel& wm, Rng& rng) {
    if (wm.kind == WeightModel::Kind::uniform) return wm.a + (wm.b - wm.a) * uniform01(rng);
    double u = 1.0 - uniform01(rng);  // (0, 1]
    return wm.scale * (std::pow(u, -1.0 / 1.5) - 1.0);
}

std::string random_label(Rng& rng, const char* prefix) {
    return prefix + std::to_string(std::uniform_int_distribution<int>(0, kAlphabet - 1)(rng));
}

// Scores live in (0, 1); `signal` pushes wrong programs up and correct ones down.
double uncertainty(Rng& rng, bool wrong, double miscalibration) {
    double shift = (wrong ? 1.5 : -1.5) * (1.0 - std::min(1.0, miscalibration));
    double x = shift + std::normal_distribution<double>(0.0, 1.0)(rng);
    return 1.0 / (1.0 + std::exp(-x));
}

// Mutable tree used while building programs; converted to AnnotatedAst at the end.
struct Draft {
    std::vector<std::string> label;
    std::vector<std::vector<NodeId>> children;
    std::vector<double> weight;

    NodeId add(std::string l, double w) {
        label.push_back(std::move(l));
        children.emplace_back();
        weight.push_back(w);
        return label.size() - 1;
    }
};

AnnotatedAst freeze(const Draft& d, const std::string& task_id) {
    std::vector<AstNode> nodes(d.label.size());
    for (NodeId v = 0; v < nodes.size(); ++v) nodes[v] = AstNode{v, d.label[v], d.children[v], d.weight[v]};
    return AnnotatedAst::create(task_id, 0, std::move(nodes));
}

// Appends a fresh random subtree of 1..3 nodes under a root labelled `root_label`.
NodeId grow_alternative(Draft& d, Rng& rng, const WeightModel& wm, std::string root_label) {
    NodeId r = d.add(std::move(root_label), draw_weight(wm, rng));
    int extra = std::uniform_int_distribution<int>(0, 2)(rng);
    for (int k = 0; k < extra; ++k) {
        NodeId c = d.add(random_label(rng, "k"), draw_weight(wm, rng));
        d.children[r].push_back(c);
    }
    return r;
}

// Copy of `g` in which every subtree rooted in `rewrite` (an antichain) is replaced by a
// freshly drawn subtree whose root label differs from the original.
AnnotatedAst rewrite_copy(const AnnotatedAst& g, const std::vector<NodeId>& rewrite, Rng& rng, const WeightModel& wm,
                          const std::string& task_id) {
    Draft d;
    auto copy = [&](auto&& self, NodeId v) -> NodeId {
        if (std::find(rewrite.begin(), rewrite.end(), v) != rewrite.end())
            return grow_alternative(d, rng, wm, random_label(rng, "alt"));
        NodeId nv = d.add(g.node(v).label, g.node(v).weight);
        for (NodeId c : g.node(v).children) {
            NodeId nc = self(self, c);
            d.children[nv].push_back(nc);
        }
        return nv;
    };
    copy(copy, g.root());
    return freeze(d, task_id);
}

std::size_t depth(const AnnotatedAst& g, NodeId v) {
    std::size_t d = 0;
    for (; !g.is_root(v); v = g.parent(v)) ++d;
    return d;
}

NodeId lift(const AnnotatedAst& g, NodeId v, std::size_t levels) {
    for (std::size_t k = 0; k < levels && !g.is_root(g.parent(v)); ++k) v = g.parent(v);
    return v;
}

std::vector<NodeId> antichain(const AnnotatedAst& g, std::vector<NodeId> nodes) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    std::vector<NodeId> out;
    for (NodeId v : nodes) {
        bool covered = false;
        for (NodeId w : nodes) covered = covered || (w != v && g.is_ancestor_or_self(w, v));
        if (!covered) out.push_back(v);
    }
    return out;
}

SyntheticTask make_task(const SyntheticConfig& cfg, std::size_t index) {
    const auto& lm = cfg.label_model;
    const auto& wm = cfg.weight_model;
    const std::uint64_t task_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(index));
    const std::string task_id = "task-" + std::to_string(index);
    Rng rng(derive_seed(task_seed, "tree"));

    // Random recursive tree: node i attaches to a uniformly chosen earlier node.
    const auto n = std::uniform_int_distribution<std::size_t>(cfg.tree_size_min, cfg.tree_size_max)(rng);
    std::vector<NodeId> parent(n, 0);
    std::vector<std::vector<NodeId>> children(n);
    for (NodeId i = 1; i < n; ++i) {
        parent[i] = std::uniform_int_distribution<NodeId>(0, i - 1)(rng);
        children[parent[i]].push_back(i);
    }
    std::vector<std::string> labels(n);
    labels[0] = "Module";
    for (NodeId i = 1; i < n; ++i) labels[i] = random_label(rng, "k");
    std::vector<AstNode> shape(n);
    for (NodeId i = 0; i < n; ++i) shape[i] = AstNode{i, labels[i], children[i], 0.0};
    const AnnotatedAst skeleton = AnnotatedAst::create(task_id, 0, shape);

    std::vector<NodeId> bugs;
    if (!bernoulli(rng, lm.p_bug_free)) {
        const int want = std::uniform_int_distribution<int>(1, lm.max_bugs)(rng);
        std::vector<NodeId> cand;
        for (NodeId v = 1; v < n; ++v)
            if (skeleton.subtree_size(v) <= lm.bug_max_size) cand.push_back(v);
        std::shuffle(cand.begin(), cand.end(), rng);
        for (NodeId v : cand) {
            if (static_cast<int>(bugs.size()) >= want) break;
            bool clash = false;
            for (NodeId b : bugs) clash = clash || skeleton.is_ancestor_or_self(b, v) || skeleton.is_ancestor_or_self(v, b);
            if (!clash) bugs.push_back(v);
        }
        std::sort(bugs.begin(), bugs.end());
    }

    // Wrong nodes carry extra weight; miscalibration hands that signal to random nodes instead.
    const double noise = std::min(1.0, cfg.miscalibration);
    for (NodeId v = 0; v < n; ++v) {
        bool wrong = false;
        for (NodeId b : bugs) wrong = wrong || skeleton.is_ancestor_or_self(b, v);
        bool signal = bernoulli(rng, noise) ? bernoulli(rng, 0.2) : wrong;
        shape[v].weight = draw_weight(wm, rng) + (signal ? lm.bug_boost : 0.0);
    }
    AnnotatedAst generated = AnnotatedAst::create(task_id, 0, std::move(shape));
    const double gen_score = uncertainty(rng, !bugs.empty(), cfg.miscalibration);

    SyntheticTask task{CalibrationRecord::make(task_id, generated, {generated}, gen_score), {}, std::nullopt, bugs,
                       std::nullopt};
    if (bugs.empty()) {
        task.reference = generated;
    } else {
        std::vector<NodeId> top;
        for (NodeId b : bugs) top.push_back(lift(generated, b, depth(generated, b)));
        task.reference = rewrite_copy(generated, antichain(generated, top), rng, wm, task_id + "/ref");
        task.minimal_fix = rewrite_copy(generated, bugs, rng, wm, task_id + "/fix");
    }

    // Samples come from their own stream so that a larger m extends a smaller m's samples.
    Rng srng(derive_seed(task_seed, "samples"));
    for (std::size_t j = 0; j < cfg.m; ++j) {
        const bool correct = bernoulli(srng, lm.p_correct);
        const std::string sid = task_id + "/s" + std::to_string(j);
        std::vector<NodeId> rewrite;
        if (correct && !bugs.empty()) {
            for (NodeId b : bugs) {
                std::size_t levels = 0;
                const std::size_t room = depth(generated, b) - 1;
                while (levels < room && !bernoulli(srng, lm.p_exact)) ++levels;
                rewrite.push_back(lift(generated, b, levels));
            }
        } else if (n > 1 && bernoulli(srng, 0.5)) {
            // Correct variant of a bug-free program, or a wrong program with an extra edit.
            NodeId v = std::uniform_int_distribution<NodeId>(1, n - 1)(srng);
            bool overlaps_bug = false;
            for (NodeId b : bugs) overlaps_bug = overlaps_bug || generated.is_ancestor_or_self(v, b) ||
                                                 generated.is_ancestor_or_self(b, v);
            if (!overlaps_bug) rewrite.push_back(v);
        } else if (!correct && bugs.empty() && n > 1) {
            rewrite.push_back(std::uniform_int_distribution<NodeId>(1, n - 1)(srng));
        }
        // A wrong sample of a bug-free task must actually differ from the generated program.
        if (!correct && bugs.empty() && rewrite.empty()) rewrite.push_back(1);
        AnnotatedAst ast = rewrite.empty() ? generated : rewrite_copy(generated, antichain(generated, rewrite), srng, wm, sid);
        const double score = uncertainty(srng, !correct, cfg.miscalibration);
        task.samples.push_back(SyntheticSample{std::move(ast), correct, score});
    }

    std::vector<int> truth;
    for (const auto& s : task.samples) truth.push_back(s.correct ? 1 : 0);
    task.record = relabel(task, truth);
    return task;
}

}  // namespace

CalibrationRecord relabel(const SyntheticTask& task, const std::vector<int>& accepted) {
    std::vector<AnnotatedAst> labels;
    const bool use_reference = task.reference.has_value();
    for (std::size_t j = 0; j < task.samples.size(); ++j)
        if (accepted.at(j)) labels.push_back(task.samples[j].ast);
    if (use_reference) {
        // Reference first so deduplication keeps it.
        labels.insert(labels.begin(), *task.reference);
    }
    return CalibrationRecord::make(task.record.task_id, task.record.generated, std::move(labels), task.record.score);
}

std::vector<SyntheticTask> generate_synthetic_tasks(const SyntheticConfig& cfg) {
    cfg.validate();
    std::vector<SyntheticTask> tasks;
    tasks.reserve(cfg.n_tasks);
    for (std::size_t i = 0; i < cfg.n_tasks; ++i) {
        auto t = make_task(cfg, i);
        if (!cfg.label_model.include_reference) {
            std::vector<int> truth;
            for (const auto& s : t.samples) truth.push_back(s.correct ? 1 : 0);
            bool any = std::any_of(truth.begin(), truth.end(), [](int x) { return x != 0; });
            // The reference stays only when no sampled program is correct.
            if (any) t.reference.reset();
            t.record = relabel(t, truth);
        }
        tasks.push_back(std::move(t));
    }
    return tasks;
}

std::vector<CalibrationRecord> generate_synthetic_set(const SyntheticConfig& cfg) {
    std::vector<CalibrationRecord> out;
    for (auto& t : generate_synthetic_tasks(cfg)) out.push_back(std::move(t.record));
    return out;
}

Aggregate aggregate(const std::vector<double>& xs) {
    Aggregate a;
    if (xs.empty()) return a;
    a.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - a.mean) * (x - a.mean);
        a.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return a;
}

Aggregate SweepRow::coverage() const {
    std::vector<double> xs;
    for (const auto& t : trials) xs.push_back(t.coverage);
    return aggregate(xs);
}

Aggregate SweepRow::removal() const {
    std::vector<double> xs;
    for (const auto& t : trials) xs.push_back(t.removal);
    return aggregate(xs);
}

std::optional<Aggregate> SweepRow::saved() const {
    std::vector<double> xs;
    for (const auto& t : trials)
        if (t.fraction_saved) xs.push_back(*t.fraction_saved);
    if (xs.empty()) return std::nullopt;
    return aggregate(xs);
}

std::size_t SweepRow::abstentions() const {
    return static_cast<std::size_t>(
        std::count_if(trials.begin(), trials.end(), [](const TrialResult& t) { return !t.lambda_hat; }));
}

TrialResult run_trial(const SyntheticConfig& cfg, const LttConfig& ltt, const TrialOptions& opt,
                      std::uint64_t trial_seed, const SelectiveTrialConfig* selective) {
    SyntheticConfig scfg = cfg;
    scfg.seed = derive_seed(trial_seed, "synth");
    auto tasks = generate_synthetic_tasks(scfg);

    std::vector<std::size_t> order(tasks.size());
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng(derive_seed(trial_seed, "split"));
    std::shuffle(order.begin(), order.end(), split_rng);
    auto n_cal = static_cast<std::size_t>(std::llround(opt.split * static_cast<double>(tasks.size())));
    n_cal = std::clamp<std::size_t>(n_cal, 1, tasks.size() - 1);

    TrialResult res;
    res.seed = trial_seed;
    std::vector<CalibrationRecord> cal;
    cal.reserve(n_cal);
    if (selective) {
        std::vector<double> scores;
        std::vector<std::pair<std::size_t, std::size_t>> owner;  // (task, sample)
        std::vector<int> truth;
        for (std::size_t k = 0; k < n_cal; ++k) {
            const auto& t = tasks[order[k]];
            for (std::size_t j = 0; j < t.samples.size(); ++j) {
                scores.push_back(t.samples[j].score);
                owner.emplace_back(order[k], j);
                truth.push_back(t.samples[j].correct ? 1 : 0);
            }
        }
        std::vector<std::vector<int>> accepted(tasks.size());
        for (std::size_t k = 0; k < n_cal; ++k) accepted[order[k]].assign(tasks[order[k]].samples.size(), 0);
        double saved = 0.0;
        if (!scores.empty()) {
            SelectiveConfig sc = selective->base;
            sc.seed = derive_seed(trial_seed, "selective");
            sc.jobs = 1;
            if (sc.h == 0)
                sc.h = std::max<std::size_t>(
                    2, static_cast<std::size_t>(std::llround(selective->h_fraction * static_cast<double>(scores.size()))));
            sc.weights.clear();
            if (selective->omega < 1.0) sc.weights.assign(scores.size(), selective->omega);
            auto outcome = run_selective_execution(scores, [&](std::size_t i) { return truth[i]; }, sc);
            for (std::size_t i = 0; i < scores.size(); ++i) accepted[owner[i].first][owner[i].second] = outcome.labels[i];
            saved = outcome.fraction_saved;
        }
        for (std::size_t k = 0; k < n_cal; ++k) cal.push_back(relabel(tasks[order[k]], accepted[order[k]]));
        res.fraction_saved = saved;
    } else {
        for (std::size_t k = 0; k < n_cal; ++k) cal.push_back(tasks[order[k]].record);
    }

    LttConfig lcfg = ltt;
    lcfg.jobs = 1;
    if (lcfg.grid.size() == 0) lcfg.grid = LambdaGrid::for_records(cal, opt.grid_step);
    const auto result = calibrate(cal, lcfg);
    res.lambda_hat = result.lambda_hat;

    const std::size_t n_test = tasks.size() - n_cal;
    std::size_t lost = 0;
    double removed = 0.0;
    for (std::size_t k = n_cal; k < tasks.size(); ++k) {
        const auto& rec = tasks[order[k]].record;
        if (!result.lambda_hat) {
            removed += 1.0;  // abstention: no program content is asserted
            continue;
        }
        PartialProgram p(rec.generated, prune_exact(rec.generated, PruneConfig{*result.lambda_hat, ltt.t_max,
                                                                                ltt.prune_time_limit}));
        lost += static_cast<std::size_t>(set_loss(p, rec.labels));
        removed += static_cast<double>(p.removal.count()) / static_cast<double>(rec.generated.size());
    }
    res.test_risk = static_cast<double>(lost) / static_cast<double>(n_test);
    res.removal = removed / static_cast<double>(n_test);
    res.coverage = res.test_risk <= ltt.alpha ? 1 : 0;
    if (selective) {
        const double eps = selective->base.epsilon;
        res.within_relaxed = res.test_risk <= ltt.alpha + eps * (1.0 - ltt.alpha) + 1e-12 ? 1 : 0;
    }
    return res;
}

namespace {

SweepRow run_many(const SyntheticConfig& cfg, const LttConfig& ltt, const TrialOptions& opt,
                  const SelectiveTrialConfig* sel) {
    if (opt.n_trials == 0) throw ConfigError("n_trials must be at least 1");
    if (!(opt.split > 0.0 && opt.split < 1.0)) throw ConfigError("split must lie in (0, 1)");
    cfg.validate();
    SweepRow row;
    row.alpha = ltt.alpha;
    row.trials.resize(opt.n_trials);
    parallel_for(opt.n_trials, opt.jobs, [&](std::size_t i) {
        const std::uint64_t seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
        try {
            row.trials[i] = run_trial(cfg, ltt, opt, seed, sel);
        } catch (const std::exception& e) {
            throw std::runtime_error("trial " + std::to_string(i) + " (seed " + std::to_string(seed) + "): " + e.what());
        }
    });
    return row;
}

}  // namespace

SweepRow run_trials(const SyntheticConfig& cfg, const LttConfig& ltt, const TrialOptions& opt) {
    return run_many(cfg, ltt, opt, nullptr);
}

SweepRow run_selective_trials(const SyntheticConfig& cfg, const SelectiveTrialConfig& sel, const LttConfig& ltt,
                              const TrialOptions& opt) {
    return run_many(cfg, ltt, opt, &sel);
}

json synthetic_config_to_json(const SyntheticConfig& c) {
    json wm = c.weight_model.kind == WeightModel::Kind::uniform
                  ? json{{"kind", "uniform"}, {"a", c.weight_model.a}, {"b", c.weight_model.b}}
                  : json{{"kind", "heavy_tail"}, {"scale", c.weight_model.scale}};
    const auto& lm = c.label_model;
    return {{"n_tasks", c.n_tasks},
            {"tree_size_range", {c.tree_size_min, c.tree_size_max}},
            {"weight_model", wm},
            {"label_model",
             {{"p_bug_free", lm.p_bug_free},
              {"max_bugs", lm.max_bugs},
              {"bug_max_size", lm.bug_max_size},
              {"p_correct", lm.p_correct},
              {"p_exact", lm.p_exact},
              {"bug_boost", lm.bug_boost},
              {"include_reference", lm.include_reference}}},
            {"miscalibration", c.miscalibration},
            {"m", c.m},
            {"seed", c.seed}};
}

SyntheticConfig synthetic_config_from_json(const json& j, SyntheticConfig c) {
    if (!j.is_object()) throw ParseError("synthetic config: expected a JSON object");
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "n_tasks") c.n_tasks = v.get<std::size_t>();
            else if (key == "tree_size_range") {
                auto r = v.get<std::vector<std::size_t>>();
                if (r.size() != 2) throw ParseError("tree_size_range must be [min, max]");
                c.tree_size_min = r[0];
                c.tree_size_max = r[1];
            } else if (key == "weight_model") {
                auto kind = v.at("kind").get<std::string>();
                if (kind == "uniform") {
                    c.weight_model.kind = WeightModel::Kind::uniform;
                    c.weight_model.a = v.value("a", c.weight_model.a);
                    c.weight_model.b = v.value("b", c.weight_model.b);
                } else if (kind == "heavy_tail") {
                    c.weight_model.kind = WeightModel::Kind::heavy_tail;
                    c.weight_model.scale = v.value("scale", c.weight_model.scale);
                } else {
                    throw ParseError("weight_model.kind must be uniform or heavy_tail");
                }
            } else if (key == "label_model") {
                auto& lm = c.label_model;
                for (const auto& [k2, v2] : v.items()) {
                    if (k2 == "p_bug_free") lm.p_bug_free = v2.get<double>();
                    else if (k2 == "max_bugs") lm.max_bugs = v2.get<int>();
                    else if (k2 == "bug_max_size") lm.bug_max_size = v2.get<std::size_t>();
                    else if (k2 == "p_correct") lm.p_correct = v2.get<double>();
                    else if (k2 == "p_exact") lm.p_exact = v2.get<double>();
                    else if (k2 == "bug_boost") lm.bug_boost = v2.get<double>();
                    else if (k2 == "include_reference") lm.include_reference = v2.get<bool>();
                    else throw ParseError("label_model: unknown field '" + k2 + "'");
                }
            } else if (key == "miscalibration") c.miscalibration = v.get<double>();
            else if (key == "m") c.m = v.get<std::size_t>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else throw ParseError("synthetic config: unknown field '" + key + "'");
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("synthetic config: ") + e.what());
    }
    return c;
}

}  // namespace ppset
