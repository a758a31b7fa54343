#include <doctest.h>

#include <random>

#include "common.hpp"
#include "ppset/errors.hpp"
#include "ppset/pruner.hpp"

using namespace ppset;
using testutil::tree;

namespace {

AnnotatedAst random_tree(std::mt19937_64& rng, std::size_t max_nodes, const std::string& id) {
    const std::size_t n = 1 + rng() % max_nodes;
    std::vector<AstNode> nodes(n);
    std::uniform_real_distribution<double> w(0.0, 2.0);
    for (NodeId i = 0; i < n; ++i) nodes[i] = AstNode{i, "n", {}, w(rng)};
    for (NodeId i = 1; i < n; ++i) nodes[rng() % i].children.push_back(i);
    return AnnotatedAst::create(id, 0, std::move(nodes));
}

}  // namespace

TEST_CASE("tiny: lambda=1, t_max=1 removes the whole tree") {
    auto ast = testutil::tiny();
    auto r = prune_exact(ast, {1.0, 1});
    CHECK(r.count() == 4);
    CHECK(r.roots() == std::vector<NodeId>{0});
    CHECK(r.edge_roots(ast) == 0);
    CHECK(retained_weight(ast, r) == 0.0);
}

TEST_CASE("tiny: lambda=1, t_max=2 removes B and D") {
    auto ast = testutil::tiny();
    for (auto r : {prune_exact(ast, {1.0, 2}), prune_bruteforce(ast, {1.0, 2})}) {
        CHECK(r.roots() == std::vector<NodeId>{1, 3});
        CHECK(r.count() == 2);
        CHECK(removal_count(r) == 2);
        CHECK(retained_weight(ast, r) == doctest::Approx(0.4));
    }
}

TEST_CASE("tiny: greedy at lambda=1.9 removes B") {
    auto ast = testutil::tiny();
    auto r = prune_greedy(ast, {1.9, 1});
    CHECK(r.roots() == std::vector<NodeId>{1});
    CHECK(retained_weight(ast, r) == doctest::Approx(1.9));
}

TEST_CASE("budget extremes") {
    auto ast = testutil::tiny();
    for (auto s : {PruneStrategy::exact, PruneStrategy::greedy}) {
        CHECK(prune(ast, {3.9, 1}, s).count() == 0);
        CHECK(prune(ast, {100.0, 3}, s).count() == 0);
        CHECK(prune(ast, {0.0, 1}, s).count() == 4);
        CHECK(prune(ast, {0.0, 3}, s).count() == 4);
    }
    auto one = tree("one", {{"x", 0.5, {}}});
    CHECK(prune_bruteforce(one, {0.0, 1}).count() == 1);
    CHECK(prune_bruteforce(one, {0.5, 1}).count() == 0);
    CHECK(prune_exact(one, {0.5, 1}).count() == 0);
}

TEST_CASE("removal set accounting") {
    auto ast = testutil::tiny();
    auto none = RemovalSet::none(ast);
    CHECK(retained_weight(ast, none) == total_weight(ast));
    CHECK(none.count() == 0);
    auto all = RemovalSet::all(ast);
    CHECK(retained_weight(ast, all) == 0.0);
    CHECK(all.count() == 4);
    auto bd = RemovalSet::from_roots(ast, {3, 1});
    CHECK(bd.roots() == std::vector<NodeId>{1, 3});
    CHECK(retained_weight(ast, bd) == doctest::Approx(0.4));
    CHECK(bd.edge_roots(ast) == 2);

    CHECK_THROWS_AS(RemovalSet::from_roots(ast, {2, 3}), ValidationError);  // not an antichain
    CHECK_THROWS_AS(RemovalSet::from_removed(ast, {2}), ValidationError);   // C without its child D
    CHECK(RemovalSet::from_removed(ast, {2, 3}) == RemovalSet::from_roots(ast, {2}));

    auto other = tree("other", {{"A", 0.1, {}}});
    CHECK_THROWS_AS(bd.check_matches(other), ValidationError);
}

TEST_CASE("removal json round trip") {
    auto ast = testutil::tiny();
    auto r = RemovalSet::from_roots(ast, {1, 3});
    auto j = removal_to_json(r);
    CHECK(j["task_id"] == "tiny");
    CHECK(j["removed"] == nlohmann::json::array({1, 3}));
    CHECK(removal_from_json(ast, j) == r);
}

TEST_CASE("config validation") {
    auto ast = testutil::tiny();
    CHECK_THROWS_AS(prune_exact(ast, {-1.0, 1}), ConfigError);
    CHECK_THROWS_AS(prune_exact(ast, {1.0, 0}), ConfigError);
    std::vector<AstNode> chain(21);
    for (NodeId i = 0; i < 21; ++i) chain[i] = AstNode{i, "c", i + 1 < 21 ? std::vector<NodeId>{i + 1} : std::vector<NodeId>{}, 1.0};
    auto big = AnnotatedAst::create("big", 0, chain);
    CHECK_THROWS_AS(prune_bruteforce(big, {1.0, 1}), ConfigError);
}

TEST_CASE("exact matches brute force, including tie-breaking") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 300; ++k) {
        auto ast = random_tree(rng, 10, "r");
        PruneConfig cfg{std::uniform_real_distribution<double>(0.0, total_weight(ast))(rng), int(1 + rng() % 3)};
        auto e = prune_exact(ast, cfg);
        auto b = prune_bruteforce(ast, cfg);
        REQUIRE(e.count() == b.count());
        REQUIRE(e.roots() == b.roots());
        CHECK(within_budget(retained_weight(ast, e), cfg.lambda, total_weight(ast)));
        CHECK(e.edge_roots(ast) <= std::size_t(cfg.t_max));
    }
}

TEST_CASE("ties prefer the lexicographically smallest root list") {
    // Two interchangeable leaves; removing either meets the budget.
    auto ast = tree("tie", {{"r", 0.0, {1, 2}}, {"a", 1.0, {}}, {"b", 1.0, {}}});
    CHECK(prune_exact(ast, {1.0, 1}).roots() == std::vector<NodeId>{1});
    CHECK(prune_bruteforce(ast, {1.0, 1}).roots() == std::vector<NodeId>{1});
    CHECK(prune_greedy(ast, {1.0, 1}).roots() == std::vector<NodeId>{1});
}

TEST_CASE("greedy never beats exact and stays feasible") {
    std::mt19937_64 rng(9);
    for (int k = 0; k < 300; ++k) {
        auto ast = random_tree(rng, 25, "g");
        PruneConfig cfg{std::uniform_real_distribution<double>(0.0, total_weight(ast))(rng), int(1 + rng() % 3)};
        auto g = prune_greedy(ast, cfg);
        CHECK(g.count() >= prune_exact(ast, cfg).count());
        CHECK(within_budget(retained_weight(ast, g), cfg.lambda, total_weight(ast)));
        CHECK(g.edge_roots(ast) <= std::size_t(cfg.t_max));
    }
}

TEST_CASE("grid path equals pointwise solves and is monotone") {
    std::mt19937_64 rng(13);
    for (int k = 0; k < 60; ++k) {
        auto ast = random_tree(rng, 40, "p");
        std::vector<double> grid;
        for (double l = 0.0; l < total_weight(ast) + 0.05; l += 0.05) grid.push_back(l);
        const int t = int(1 + rng() % 3);
        auto path = prune_exact_path(ast, grid, t);
        REQUIRE(path.size() == grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            CHECK(path[i] == prune_exact(ast, {grid[i], t}));
            if (i > 0) CHECK(path[i].count() <= path[i - 1].count());
        }
        CHECK(path.back().count() == 0);
    }
}

TEST_CASE("time limit raises PruneTimeout") {
    std::mt19937_64 rng(3);
    const std::size_t n = 4000;
    std::vector<AstNode> nodes(n);
    for (NodeId i = 0; i < n; ++i) nodes[i] = AstNode{i, "n", {}, 1.0 + double(i % 7) / 10};
    for (NodeId i = 1; i < n; ++i) nodes[rng() % i].children.push_back(i);
    auto ast = AnnotatedAst::create("huge", 0, nodes);
    PruneConfig cfg{total_weight(ast) / 2, 200, std::chrono::milliseconds(1)};
    CHECK_THROWS_AS(prune_exact(ast, cfg), PruneTimeout);
}
