#include <doctest.h>

#include <random>

#include "common.hpp"
#include "ppset/errors.hpp"
#include "ppset/risk.hpp"

using namespace ppset;
using testutil::tree;

namespace {

// A -> {E, C -> {D}}: B replaced by E.
AnnotatedAst with_e() { return tree("tiny", {{"A", 0, {1, 2}}, {"E", 0, {}}, {"C", 0, {3}}, {"D", 0, {}}}); }
// A -> {C -> {D}}: C moved to child index 0.
AnnotatedAst without_b() { return tree("tiny", {{"A", 0, {1}}, {"C", 0, {2}}, {"D", 0, {}}}); }

}  // namespace

TEST_CASE("contains") {
    auto ast = testutil::tiny();
    PartialProgram whole(ast, RemovalSet::none(ast));
    CHECK(contains(whole, testutil::tiny()));
    CHECK_FALSE(contains(whole, with_e()));

    PartialProgram empty(ast, RemovalSet::all(ast));
    CHECK(contains(empty, with_e()));
    CHECK(contains(empty, tree("z", {{"Z", 1, {}}})));

    PartialProgram no_b(ast, RemovalSet::from_roots(ast, {1}));
    CHECK(contains(no_b, with_e()));
    CHECK(contains(no_b, testutil::tiny()));
    CHECK_FALSE(contains(no_b, without_b()));
    // Extra nodes in the candidate are fine.
    CHECK(contains(no_b, tree("x", {{"A", 0, {1, 2, 4}}, {"E", 0, {}}, {"C", 0, {3}}, {"D", 0, {5}}, {"F", 0, {}}, {"G", 0, {}}})));
}

TEST_CASE("set_loss") {
    auto ast = testutil::tiny();
    CHECK(set_loss(PartialProgram(ast, RemovalSet::none(ast)), {testutil::tiny()}) == 0);
    CHECK(set_loss(PartialProgram(ast, RemovalSet::all(ast)), {without_b()}) == 0);
    CHECK(set_loss(PartialProgram(ast, RemovalSet::from_roots(ast, {1})), {without_b()}) == 1);
    CHECK(set_loss(PartialProgram(ast, RemovalSet::from_roots(ast, {1})), {without_b(), with_e()}) == 0);
}

TEST_CASE("partial program rejects a removal for another tree") {
    auto ast = testutil::tiny();
    auto small = without_b();
    CHECK_THROWS_AS(PartialProgram(small, RemovalSet::from_roots(ast, {1})), ValidationError);
}

TEST_CASE("contains is monotone in pruning") {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 200; ++k) {
        const std::size_t n = 2 + rng() % 10;
        std::vector<AstNode> a(n), b(n);
        for (NodeId i = 0; i < n; ++i) {
            a[i] = AstNode{i, "l" + std::to_string(rng() % 2), {}, 1.0};
            b[i] = AstNode{i, "l" + std::to_string(rng() % 2), {}, 1.0};
        }
        for (NodeId i = 1; i < n; ++i) {
            a[rng() % i].children.push_back(i);
            b[rng() % i].children.push_back(i);
        }
        auto ga = AnnotatedAst::create("m", 0, a);
        auto gb = AnnotatedAst::create("m", 0, b);
        // Grow the removal one subtree at a time; once contained, always contained.
        std::vector<bool> removed(n, false);
        bool seen = false;
        for (int step = 0; step < 4; ++step) {
            NodeId v = rng() % n;
            std::vector<NodeId> ids;
            for (NodeId u = 0; u < n; ++u) {
                if (ga.is_ancestor_or_self(v, u)) removed[u] = true;
                if (removed[u]) ids.push_back(u);
            }
            bool now = contains(PartialProgram(ga, RemovalSet::from_removed(ga, ids)), gb);
            if (seen) CHECK(now);
            seen = seen || now;
        }
    }
}

TEST_CASE("empirical risk") {
    auto ast = testutil::tiny();
    std::vector<CalibrationRecord> recs;
    recs.push_back(CalibrationRecord::make("r0", ast, {ast}));
    recs.push_back(CalibrationRecord::make("r1", ast, {without_b()}));
    recs.push_back(CalibrationRecord::make("r2", ast, {with_e(), ast}));

    // Nothing pruned: only r1 misses.
    auto r = empirical_risk(recs, {10.0, 1});
    CHECK(r.risk == doctest::Approx(1.0 / 3.0));
    CHECK(r.losses == std::vector<int>{0, 1, 0});
    CHECK(r.mean_removal_fraction == 0.0);

    auto zero = empirical_risk(recs, {0.0, 1});
    CHECK(zero.risk == 0.0);
    CHECK(zero.mean_removal_fraction == 1.0);

    auto parallel = empirical_risk(recs, {1.0, 2}, PruneStrategy::exact, 3);
    auto serial = empirical_risk(recs, {1.0, 2}, PruneStrategy::exact, 1);
    CHECK(parallel.losses == serial.losses);
    CHECK(parallel.mean_removal_fraction == serial.mean_removal_fraction);
}

TEST_CASE("records: dedup, validation and json lines") {
    auto ast = testutil::tiny();
    auto heavier = tree("tiny", {{"A", 9, {1, 2}}, {"B", 9, {}}, {"C", 9, {3}}, {"D", 9, {}}});
    auto rec = CalibrationRecord::make("t", ast, {ast, heavier, with_e()}, 0.25);
    CHECK(rec.labels.size() == 2);
    CHECK(rec.labels[0] == ast);
    CHECK_THROWS_AS(CalibrationRecord::make("t", ast, {}), ValidationError);

    auto text = records_to_jsonl({rec, CalibrationRecord::make("u", with_e(), {with_e()})});
    auto back = parse_records_jsonl(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].task_id == "t");
    CHECK(back[0].score == 0.25);
    CHECK(back[0].labels == rec.labels);
    CHECK_FALSE(back[1].score.has_value());
    CHECK(records_to_jsonl(back) == text);

    CHECK_THROWS_WITH_AS(parse_records_jsonl(testutil::slurp(testutil::fixture("malformed.jsonl"))),
                         doctest::Contains("line 2:"), ParseError);
    CHECK_THROWS_WITH_AS(parse_records_jsonl("{\"task_id\":\"x\"}\n"), doctest::Contains("line 1:"), ParseError);
}
