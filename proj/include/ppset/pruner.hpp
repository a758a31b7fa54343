#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppset/ast.hpp"

namespace ppset {

struct PruneConfig {
    double lambda = 0.0;  // retained-weight budget in nats
    int t_max = 1;        // maximum number of removal roots
    // Wall-clock limit for prune_exact; zero disables it.
    std::chrono::milliseconds time_limit{0};

    void validate() const;
};

/**
 * Per-node removal assignment over one tree.  Always downward closed: a node
 * is removed iff it lies inside the subtree of one of the removal roots.
 */
class RemovalSet {
public:
    RemovalSet() = default;
    // Builds the set from removal roots; the roots must form an antichain.
    static RemovalSet from_roots(const AnnotatedAst& ast, std::vector<NodeId> roots);
    static RemovalSet none(const AnnotatedAst& ast) { return from_roots(ast, {}); }
    static RemovalSet all(const AnnotatedAst& ast) { return from_roots(ast, {ast.root()}); }
    // Accepts an arbitrary removed-node list and checks it is downward closed.
    static RemovalSet from_removed(const AnnotatedAst& ast, const std::vector<NodeId>& removed);

    const std::string& task_id() const { return task_id_; }
    std::size_t node_count() const { return removed_.size(); }
    bool removed(NodeId id) const { return removed_.at(id); }
    // Removed nodes whose parent is retained, plus the tree root when it is removed. Sorted.
    const std::vector<NodeId>& roots() const { return roots_; }
    std::vector<NodeId> removed_ids() const;
    std::size_t count() const { return count_; }
    // Number of removal roots counted against t_max (the tree root counts zero).
    std::size_t edge_roots(const AnnotatedAst& ast) const;

    // Throws ValidationError when this set was built for a different tree.
    void check_matches(const AnnotatedAst& ast) const;

    bool operator==(const RemovalSet&) const = default;

private:
    std::string task_id_;
    std::vector<bool> removed_;
    std::vector<NodeId> roots_;
    std::size_t count_ = 0;
};

double retained_weight(const AnnotatedAst& ast, const RemovalSet& r);
std::size_t removal_count(const RemovalSet& r);

// Budget test shared by every solver: retained <= lambda up to rounding noise.
bool within_budget(double retained, double lambda, double total);

// Minimum-removal solution; ties go to the lexicographically smallest sorted root list.
RemovalSet prune_exact(const AnnotatedAst& ast, const PruneConfig& cfg);
// Exhaustive enumeration over removal-root antichains. Test oracle, <= 20 nodes.
RemovalSet prune_bruteforce(const AnnotatedAst& ast, const PruneConfig& cfg);
// Repeatedly removes the heaviest admissible subtree until within budget.
RemovalSet prune_greedy(const AnnotatedAst& ast, const PruneConfig& cfg);

inline constexpr std::size_t kBruteforceMaxNodes = 20;

/**
 * prune_exact evaluated on every value of an ascending lambda grid.
 *
 * The tie-broken optimum is a step function of lambda: if the solutions at two
 * budgets coincide, every budget in between yields that same solution.  The
 * grid is therefore bisected and interior points are filled without solving.
 */
std::vector<RemovalSet> prune_exact_path(const AnnotatedAst& ast, const std::vector<double>& grid, int t_max,
                                         std::chrono::milliseconds time_limit = std::chrono::milliseconds{0});

enum class PruneStrategy { exact, greedy };

RemovalSet prune(const AnnotatedAst& ast, const PruneConfig& cfg, PruneStrategy strategy);

nlohmann::json removal_to_json(const RemovalSet& r);
RemovalSet removal_from_json(const AnnotatedAst& ast, const nlohmann::json& j);

}  // namespace ppset
