#include "ppset/pruner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "ppset/errors.hpp"

namespace ppset {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

void PruneConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be a finite nonnegative number");
    if (t_max < 1) throw ConfigError("t_max must be at least 1");
    if (time_limit.count() < 0) throw ConfigError("time limit must be nonnegative");
}

RemovalSet RemovalSet::from_roots(const AnnotatedAst& ast, std::vector<NodeId> roots) {
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    RemovalSet r;
    r.task_id_ = ast.task_id();
    r.removed_.assign(ast.size(), false);
    for (std::size_t a = 0; a < roots.size(); ++a) {
        for (std::size_t b = 0; b < roots.size(); ++b) {
            if (a != b && ast.is_ancestor_or_self(roots[a], roots[b]))
                throw ValidationError("removal roots " + std::to_string(roots[a]) + " and " + std::to_string(roots[b]) +
                                      " overlap");
        }
    }
    const auto& pre = ast.preorder();
    for (NodeId root : roots) {
        if (root >= ast.size()) throw ValidationError("removal root " + std::to_string(root) + " does not exist");
        // A subtree occupies a contiguous pre-order range starting at its root.
        auto start = std::find(pre.begin(), pre.end(), root);
        for (std::size_t k = 0; k < ast.subtree_size(root); ++k) r.removed_[*(start + k)] = true;
        r.count_ += ast.subtree_size(root);
    }
    r.roots_ = std::move(roots);
    return r;
}

RemovalSet RemovalSet::from_removed(const AnnotatedAst& ast, const std::vector<NodeId>& removed) {
    std::vector<bool> mask(ast.size(), false);
    for (NodeId id : removed) {
        if (id >= ast.size()) throw ValidationError("removed id " + std::to_string(id) + " does not exist");
        mask[id] = true;
    }
    std::vector<NodeId> roots;
    for (NodeId v = 0; v < ast.size(); ++v) {
        if (!mask[v]) continue;
        for (NodeId c : ast.node(v).children) {
            if (!mask[c])
                throw ValidationError("removal is not downward closed: node " + std::to_string(v) +
                                      " removed but child " + std::to_string(c) + " retained");
        }
        if (ast.is_root(v) || !mask[ast.parent(v)]) roots.push_back(v);
    }
    return from_roots(ast, std::move(roots));
}

std::vector<NodeId> RemovalSet::removed_ids() const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < removed_.size(); ++v)
        if (removed_[v]) out.push_back(v);
    return out;
}

std::size_t RemovalSet::edge_roots(const AnnotatedAst& ast) const {
    return static_cast<std::size_t>(
        std::count_if(roots_.begin(), roots_.end(), [&](NodeId v) { return !ast.is_root(v); }));
}

void RemovalSet::check_matches(const AnnotatedAst& ast) const {
    if (task_id_ != ast.task_id() || removed_.size() != ast.size())
        throw ValidationError("removal set for '" + task_id_ + "' (" + std::to_string(removed_.size()) +
                              " nodes) does not match tree '" + ast.task_id() + "' (" + std::to_string(ast.size()) +
                              " nodes)");
}

double retained_weight(const AnnotatedAst& ast, const RemovalSet& r) {
    r.check_matches(ast);
    double s = 0.0;
    for (const auto& n : ast.nodes())
        if (!r.removed(n.id)) s += n.weight;
    return s;
}

std::size_t removal_count(const RemovalSet& r) { return r.count(); }

bool within_budget(double retained, double lambda, double total) {
    return retained <= lambda + 1e-12 * std::max(1.0, total);
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Max removed weight over antichains of removal roots, indexed by (root count, removed node count).
struct Table {
    int roots = 0;
    std::size_t cap = 0;
    std::vector<double> w;

    Table(int r, std::size_t c) : roots(r), cap(c), w(static_cast<std::size_t>(r + 1) * (c + 1), kNegInf) {}
    double& at(int j, std::size_t c) { return w[static_cast<std::size_t>(j) * (cap + 1) + c]; }
    double at(int j, std::size_t c) const { return w[static_cast<std::size_t>(j) * (cap + 1) + c]; }
};

class ExactSolver {
public:
    ExactSolver(const AnnotatedAst& ast, const PruneConfig& cfg)
        : ast_(ast), cfg_(cfg), total_(total_weight(ast)) {
        if (cfg.time_limit.count() > 0) deadline_ = Clock::now() + cfg.time_limit;
    }

    RemovalSet solve() {
        if (within_budget(total_, cfg_.lambda, total_)) return RemovalSet::none(ast_);
        const std::size_t n = ast_.size();
        std::vector<bool> allowed(n, true);
        allowed[ast_.root()] = false;
        const int max_roots = std::min<int>(cfg_.t_max, static_cast<int>(n));
        Table t = table(allowed, max_roots, n - 1);
        std::size_t best = n;
        for (std::size_t c = 1; c < n && best == n; ++c)
            for (int j = 1; j <= max_roots; ++j)
                if (feasible(0.0, t.at(j, c))) {
                    best = c;
                    break;
                }
        if (best == n) return RemovalSet::all(ast_);
        return reconstruct(best);
    }

private:
    bool feasible(double forced_weight, double extra) const {
        if (extra == kNegInf) return false;
        return within_budget(total_ - (forced_weight + extra), cfg_.lambda, total_);
    }

    void check_deadline() const {
        if (deadline_ && Clock::now() > *deadline_)
            throw PruneTimeout("prune_exact exceeded " + std::to_string(cfg_.time_limit.count()) +
                               " ms on task '" + ast_.task_id() + "'");
    }

    Table table(const std::vector<bool>& allowed, int max_roots, std::size_t cap) const {
        const auto& pre = ast_.preorder();
        std::vector<Table> tabs;
        tabs.reserve(ast_.size());
        std::vector<std::size_t> slot(ast_.size(), 0);
        for (auto it = pre.rbegin(); it != pre.rend(); ++it) {
            check_deadline();
            NodeId v = *it;
            std::size_t vcap = std::min(cap, ast_.subtree_size(v));
            Table cur(max_roots, vcap);
            cur.at(0, 0) = 0.0;
            std::size_t used = 0;  // nodes covered by already-merged children
            for (NodeId ch : ast_.node(v).children) {
                const Table& ct = tabs[slot[ch]];
                std::size_t ucap = std::min(vcap, used + ct.cap);
                Table next(max_roots, vcap);
                for (int j1 = 0; j1 <= max_roots; ++j1)
                    for (std::size_t c1 = 0; c1 <= std::min(used, vcap); ++c1) {
                        double a = cur.at(j1, c1);
                        if (a == kNegInf) continue;
                        for (int j2 = 0; j1 + j2 <= max_roots; ++j2)
                            for (std::size_t c2 = 0; c2 <= ct.cap && c1 + c2 <= ucap; ++c2) {
                                double b = ct.at(j2, c2);
                                if (b == kNegInf) continue;
                                double& dst = next.at(j1 + j2, c1 + c2);
                                dst = std::max(dst, a + b);
                            }
                    }
                cur = std::move(next);
                used += ast_.subtree_size(ch);
                tabs[slot[ch]].w.clear();
            }
            if (allowed[v] && max_roots >= 1 && ast_.subtree_size(v) <= vcap) {
                double& dst = cur.at(1, ast_.subtree_size(v));
                dst = std::max(dst, ast_.subtree_weight(v));
            }
            slot[v] = tabs.size();
            tabs.push_back(std::move(cur));
        }
        return std::move(tabs[slot[ast_.root()]]);
    }

    // Can `chosen` be extended, using only roots with id > last, to a feasible set of at most
    // `target` removed nodes and t_max roots?
    bool completable(const std::vector<NodeId>& chosen, std::size_t target) const {
        std::size_t size = 0;
        double weight = 0.0;
        for (NodeId r : chosen) {
            size += ast_.subtree_size(r);
            weight += ast_.subtree_weight(r);
        }
        if (size > target) return false;
        if (feasible(weight, 0.0)) return true;
        int left = std::min<int>(cfg_.t_max, static_cast<int>(ast_.size())) - static_cast<int>(chosen.size());
        if (left <= 0 || size == target) return false;
        std::vector<bool> allowed(ast_.size(), false);
        NodeId last = chosen.back();
        for (NodeId v = last + 1; v < ast_.size(); ++v) allowed[v] = admissible(chosen, v);
        Table t = table(allowed, left, target - size);
        for (int j = 1; j <= left; ++j)
            for (std::size_t c = 1; c <= t.cap; ++c)
                if (feasible(weight, t.at(j, c))) return true;
        return false;
    }

    bool admissible(const std::vector<NodeId>& chosen, NodeId v) const {
        if (ast_.is_root(v)) return false;
        for (NodeId r : chosen)
            if (ast_.is_ancestor_or_self(r, v) || ast_.is_ancestor_or_self(v, r)) return false;
        return true;
    }

    // Builds the lexicographically smallest sorted root list among optima of size `target`.
    RemovalSet reconstruct(std::size_t target) {
        std::vector<NodeId> chosen;
        for (;;) {
            if (!chosen.empty()) {
                double weight = 0.0;
                for (NodeId r : chosen) weight += ast_.subtree_weight(r);
                if (feasible(weight, 0.0)) break;
            }
            NodeId start = chosen.empty() ? 0 : chosen.back() + 1;
            bool extended = false;
            for (NodeId v = start; v < ast_.size(); ++v) {
                if (!admissible(chosen, v)) continue;
                chosen.push_back(v);
                if (completable(chosen, target)) {
                    extended = true;
                    break;
                }
                chosen.pop_back();
            }
            if (!extended) throw std::logic_error("prune_exact: optimum of size " + std::to_string(target) +
                                                  " could not be reconstructed");
        }
        return RemovalSet::from_roots(ast_, chosen);
    }

    const AnnotatedAst& ast_;
    const PruneConfig& cfg_;
    double total_;
    std::optional<Clock::time_point> deadline_;
};

}  // namespace

RemovalSet prune_exact(const AnnotatedAst& ast, const PruneConfig& cfg) {
    cfg.validate();
    return ExactSolver(ast, cfg).solve();
}

RemovalSet prune_bruteforce(const AnnotatedAst& ast, const PruneConfig& cfg) {
    cfg.validate();
    const std::size_t n = ast.size();
    if (n > kBruteforceMaxNodes)
        throw ConfigError("prune_bruteforce refuses trees larger than " + std::to_string(kBruteforceMaxNodes) +
                          " nodes (got " + std::to_string(n) + ")");
    const double total = total_weight(ast);

    std::size_t best_count = n;
    std::vector<NodeId> best_roots{ast.root()};
    std::vector<NodeId> chosen;

    auto evaluate = [&] {
        std::vector<bool> removed(n, false);
        std::size_t count = 0;
        for (NodeId v = 0; v < n; ++v) {
            for (NodeId r : chosen)
                if (ast.is_ancestor_or_self(r, v)) {
                    removed[v] = true;
                    ++count;
                    break;
                }
        }
        double retained = 0.0;
        for (NodeId v = 0; v < n; ++v)
            if (!removed[v]) retained += ast.node(v).weight;
        if (!within_budget(retained, cfg.lambda, total)) return;
        if (count < best_count || (count == best_count && chosen < best_roots)) {
            best_count = count;
            best_roots = chosen;
        }
    };

    // Antichains enumerated with roots in increasing id order, so `chosen` is always sorted.
    auto extend = [&](auto&& self, NodeId from) -> void {
        evaluate();
        if (chosen.size() >= static_cast<std::size_t>(cfg.t_max)) return;
        for (NodeId v = from; v < n; ++v) {
            if (ast.is_root(v)) continue;
            bool clash = false;
            for (NodeId r : chosen) clash = clash || ast.is_ancestor_or_self(r, v) || ast.is_ancestor_or_self(v, r);
            if (clash) continue;
            chosen.push_back(v);
            self(self, v + 1);
            chosen.pop_back();
        }
    };
    extend(extend, 0);
    return RemovalSet::from_roots(ast, best_roots);
}

RemovalSet prune_greedy(const AnnotatedAst& ast, const PruneConfig& cfg) {
    cfg.validate();
    const std::size_t n = ast.size();
    const double total = total_weight(ast);
    std::vector<NodeId> roots;
    RemovalSet current = RemovalSet::none(ast);
    while (!within_budget(retained_weight(ast, current), cfg.lambda, total)) {
        std::optional<NodeId> pick;
        std::vector<NodeId> pick_roots;
        double pick_gain = 0.0;
        for (NodeId v = 0; v < n; ++v) {
            if (ast.is_root(v) || current.removed(v)) continue;
            std::vector<NodeId> next{v};
            double gain = ast.subtree_weight(v);
            for (NodeId r : roots) {
                if (ast.is_ancestor_or_self(v, r))
                    gain -= ast.subtree_weight(r);
                else
                    next.push_back(r);
            }
            if (next.size() > static_cast<std::size_t>(cfg.t_max)) continue;
            if (gain > pick_gain) {
                pick = v;
                pick_gain = gain;
                pick_roots = std::move(next);
            }
        }
        if (!pick) return RemovalSet::all(ast);
        roots = std::move(pick_roots);
        current = RemovalSet::from_roots(ast, roots);
    }
    return current;
}

std::vector<RemovalSet> prune_exact_path(const AnnotatedAst& ast, const std::vector<double>& grid, int t_max,
                                         std::chrono::milliseconds time_limit) {
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k - 1] < grid[k])) throw ConfigError("lambda grid must be strictly increasing");
    std::vector<std::optional<RemovalSet>> out(grid.size());
    auto solve = [&](std::size_t k) -> const RemovalSet& {
        if (!out[k]) out[k] = prune_exact(ast, PruneConfig{grid[k], t_max, time_limit});
        return *out[k];
    };
    auto fill = [&](auto&& self, std::size_t lo, std::size_t hi) -> void {
        if (hi <= lo + 1) return;
        if (solve(lo) == solve(hi)) {
            for (std::size_t k = lo + 1; k < hi; ++k) out[k] = out[lo];
            return;
        }
        std::size_t mid = lo + (hi - lo) / 2;
        solve(mid);
        self(self, lo, mid);
        self(self, mid, hi);
    };
    if (!grid.empty()) {
        solve(0);
        solve(grid.size() - 1);
        fill(fill, 0, grid.size() - 1);
    }
    std::vector<RemovalSet> result;
    result.reserve(grid.size());
    for (auto& r : out) result.push_back(std::move(*r));
    return result;
}

RemovalSet prune(const AnnotatedAst& ast, const PruneConfig& cfg, PruneStrategy strategy) {
    return strategy == PruneStrategy::exact ? prune_exact(ast, cfg) : prune_greedy(ast, cfg);
}

json removal_to_json(const RemovalSet& r) { return {{"task_id", r.task_id()}, {"removed", r.removed_ids()}}; }

RemovalSet removal_from_json(const AnnotatedAst& ast, const json& j) {
    if (!j.is_object() || !j.contains("task_id") || !j.contains("removed") || !j["removed"].is_array())
        throw ParseError("removal set: expected {\"task_id\": str, \"removed\": [int]}");
    for (const auto& [key, _] : j.items())
        if (key != "task_id" && key != "removed") throw ParseError("removal set: unknown field '" + key + "'");
    if (j["task_id"].get<std::string>() != ast.task_id())
        throw ValidationError("removal set task '" + j["task_id"].get<std::string>() + "' does not match tree '" +
                              ast.task_id() + "'");
    std::vector<NodeId> removed;
    for (const auto& v : j["removed"]) {
        if (!v.is_number_unsigned()) throw ParseError("removal set: ids must be nonnegative integers");
        removed.push_back(v.get<NodeId>());
    }
    return RemovalSet::from_removed(ast, removed);
}

}  // namespace ppset
