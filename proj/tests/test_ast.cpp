#include <doctest.h>

#include <random>

#include "common.hpp"
#include "ppset/ast.hpp"
#include "ppset/errors.hpp"

using namespace ppset;
using testutil::tree;

TEST_CASE("single-node tree") {
    auto ast = parse_ast_json(R"({"task_id":"s","root":0,"nodes":[{"id":0,"label":"Module","children":[],"weight":0.0}]})");
    CHECK(ast.size() == 1);
    CHECK(ast.root() == 0);
    CHECK(total_weight(ast) == 0.0);
    CHECK(node_path(ast, 0) == NodePath{"Module", {}});
}

TEST_CASE("tiny fixture loads field by field") {
    auto ast = testutil::tiny();
    REQUIRE(ast.size() == 4);
    CHECK(ast.task_id() == "tiny");
    CHECK(ast.root() == 0);
    CHECK(ast.node(0).label == "A");
    CHECK(ast.node(0).children == std::vector<NodeId>{1, 2});
    CHECK(ast.node(1).label == "B");
    CHECK(ast.node(1).weight == 2.0);
    CHECK(ast.node(2).children == std::vector<NodeId>{3});
    CHECK(ast.node(3).label == "D");
    CHECK(ast.node(3).weight == 1.5);
    CHECK(ast.parent(3) == 2);
    CHECK(ast.parent(0) == 0);
    CHECK(ast.subtree_size(2) == 2);
    CHECK(ast.subtree_weight(2) == doctest::Approx(1.8));
    CHECK(ast.preorder() == std::vector<NodeId>{0, 1, 2, 3});
    CHECK(ast.is_ancestor_or_self(2, 3));
    CHECK_FALSE(ast.is_ancestor_or_self(1, 3));
}

TEST_CASE("total weight") {
    CHECK(total_weight(testutil::tiny()) == doctest::Approx(3.9).epsilon(1e-15));
    auto ones = tree("o", {{"a", 1.0, {1, 2}}, {"b", 1.0, {3}}, {"c", 1.0, {}}, {"d", 1.0, {}}});
    CHECK(total_weight(ones) == 4.0);
}

TEST_CASE("node paths") {
    auto ast = testutil::tiny();
    NodePath d{"A", {{1, "C"}, {0, "D"}}};
    CHECK(node_path(ast, 3) == d);
    CHECK_THROWS_AS(node_path(ast, 9), std::out_of_range);

    auto twins = tree("t", {{"r", 0.0, {1, 2}}, {"x", 0.0, {}}, {"x", 0.0, {}}});
    auto p1 = node_path(twins, 1), p2 = node_path(twins, 2);
    CHECK(p1 != p2);
    CHECK(p1.steps[0].second == p2.steps[0].second);
    CHECK(p1.steps[0].first == 0);
    CHECK(p2.steps[0].first == 1);
}

TEST_CASE("canonical serialization ignores weights only") {
    auto a = testutil::tiny();
    auto b = testutil::tiny();
    CHECK(canonical_serialization(a) == canonical_serialization(b));

    auto relabeled = tree("tiny", {{"A", 0.1, {1, 2}}, {"B", 2.0, {}}, {"C", 0.3, {3}}, {"E", 1.5, {}}});
    CHECK(canonical_serialization(a) != canonical_serialization(relabeled));

    auto doubled = tree("tiny", {{"A", 0.2, {1, 2}}, {"B", 4.0, {}}, {"C", 0.6, {3}}, {"D", 3.0, {}}});
    CHECK(canonical_serialization(a) == canonical_serialization(doubled));

    // Same label multiset, different shape.
    auto reshaped = tree("tiny", {{"A", 0.1, {1}}, {"B", 2.0, {2}}, {"C", 0.3, {3}}, {"D", 1.5, {}}});
    CHECK(canonical_serialization(a) != canonical_serialization(reshaped));
}

TEST_CASE("validation errors") {
    CHECK_THROWS_WITH_AS(
        parse_ast_json(R"({"task_id":"x","root":0,"nodes":[{"id":0,"label":"A","children":[],"weight":-0.5}]})"),
        doctest::Contains("negative weight"), ValidationError);
    // two parents
    CHECK_THROWS_AS(parse_ast_json(R"({"task_id":"x","root":0,"nodes":[
        {"id":0,"label":"A","children":[1,2],"weight":0},{"id":1,"label":"B","children":[2],"weight":0},
        {"id":2,"label":"C","children":[],"weight":0}]})"),
                    ValidationError);
    // cycle unreachable from the root
    CHECK_THROWS_AS(parse_ast_json(R"({"task_id":"x","root":0,"nodes":[
        {"id":0,"label":"A","children":[],"weight":0},{"id":1,"label":"B","children":[2],"weight":0},
        {"id":2,"label":"C","children":[1],"weight":0}]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_ast_json(R"({"task_id":"x","root":3,"nodes":[{"id":0,"label":"A","children":[],"weight":0}]})"),
                    ValidationError);
    CHECK_THROWS_AS(parse_ast_json(R"({"task_id":"x","root":0,"nodes":[{"id":0,"label":"A","children":[],"weight":0,"extra":1}]})"),
                    ParseError);
    CHECK_THROWS_AS(parse_ast_json(R"({"task_id":"x","root":0,"nodes":[)"), ParseError);
    CHECK_THROWS_AS(parse_ast_json(R"({"task_id":"x","root":0,"nodes":[{"id":1.5,"label":"A","children":[],"weight":0}]})"),
                    ParseError);
}

TEST_CASE("parse-serialize-parse is the identity, weights bit-exact") {
    std::mt19937_64 rng(11);
    for (int k = 0; k < 200; ++k) {
        const std::size_t n = 1 + rng() % 30;
        std::vector<AstNode> nodes(n);
        for (NodeId i = 0; i < n; ++i)
            nodes[i] = AstNode{i, "l" + std::to_string(rng() % 5),
                               {},
                               std::uniform_real_distribution<double>(0.0, 10.0)(rng)};
        for (NodeId i = 1; i < n; ++i) nodes[rng() % i].children.push_back(i);
        auto ast = AnnotatedAst::create("r" + std::to_string(k), 0, nodes);
        auto again = parse_ast_json(serialize_ast_json(ast));
        REQUIRE(again == ast);
        for (NodeId i = 0; i < n; ++i) CHECK(again.node(i).weight == ast.node(i).weight);
        CHECK(serialize_ast_json(again) == serialize_ast_json(ast));
    }
}

TEST_CASE("nodes may be listed out of id order") {
    auto ast = parse_ast_json(R"({"task_id":"x","root":0,"nodes":[
        {"id":1,"label":"B","children":[],"weight":1},{"id":0,"label":"A","children":[1],"weight":2}]})");
    CHECK(ast.node(0).label == "A");
    CHECK(total_weight(ast) == 3.0);
}
