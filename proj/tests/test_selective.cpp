#include <doctest.h>

#include <cmath>
#include <random>

#include "ppset/errors.hpp"
#include "ppset/selective.hpp"

using namespace ppset;

namespace {

std::vector<SelectiveSample> zeros(std::size_t h, double score = 0.5) {
    std::vector<SelectiveSample> s(h);
    for (std::size_t j = 0; j < h; ++j) s[j] = SelectiveSample{j, j, score, true, 0, 0.0};
    return s;
}

}  // namespace

TEST_CASE("hoeffding delta") {
    const double base = std::sqrt(std::log(40.0) / 2000.0);
    CHECK(hoeffding_delta(1000, 0.05, 1.0) == doctest::Approx(0.0429469408).epsilon(1e-9));
    CHECK(hoeffding_delta(1000, 0.05, 1.0) == doctest::Approx(base).epsilon(1e-12));
    CHECK(hoeffding_delta(1000, 0.05, 0.5) == doctest::Approx(2 * base).epsilon(1e-12));
    CHECK(hoeffding_delta(4000, 0.05, 1.0) == doctest::Approx(base / 2).epsilon(1e-12));
    CHECK_THROWS_AS(hoeffding_delta(0, 0.05, 1.0), ConfigError);
    CHECK_THROWS_AS(hoeffding_delta(10, 0.0, 1.0), ConfigError);
}

TEST_CASE("error upper bound") {
    SelectiveConfig cfg;
    cfg.gamma = 0.05;
    cfg.bound = BoundKind::hoeffding;
    CHECK(error_upper_bound(zeros(1000), 1.0, cfg) == doctest::Approx(0.0429469408).epsilon(1e-9));
    cfg.bound = BoundKind::clt;
    CHECK(error_upper_bound(zeros(1000), 1.0, cfg) == 0.0);

    auto half = zeros(10);
    for (std::size_t j = 0; j < 5; ++j) {
        half[j].executed_loss = 1;
        half[j].z = 1.0;
    }
    cfg.gamma = 0.5;
    CHECK(error_upper_bound(half, INFINITY, cfg) == doctest::Approx(0.5).epsilon(1e-12));
    // sigma uses divisor h: sd of five ones and five zeros is 0.5.
    cfg.gamma = 0.05;
    CHECK(error_upper_bound(half, INFINITY, cfg) == doctest::Approx(0.5 + 1.6448536269514722 * 0.5 / std::sqrt(10.0)));
    CHECK_THROWS_AS(error_upper_bound(zeros(1), 1.0, cfg), ConfigError);
}

TEST_CASE("importance mean uses U <= u and is monotone") {
    std::vector<SelectiveSample> s;
    for (std::size_t j = 0; j < 4; ++j) s.push_back(SelectiveSample{j, j, 0.1 * double(j + 1), true, 1, 2.0});
    CHECK(importance_mean(s, 0.0) == 0.0);
    CHECK(importance_mean(s, 0.2) == doctest::Approx(1.0));
    CHECK(importance_mean(s, 0.4) == doctest::Approx(2.0));
    double prev = -1;
    for (double u = 0.0; u < 0.5; u += 0.01) {
        CHECK(importance_mean(s, u) >= prev);
        prev = importance_mean(s, u);
    }
}

TEST_CASE("select threshold") {
    SelectiveConfig cfg;
    cfg.gamma = 0.05;
    cfg.epsilon = 0.2;
    auto s = zeros(1000);
    CHECK(select_threshold(s, {0.1, 0.5, 0.9}, cfg) == 0.9);
    cfg.epsilon = 0.04;  // below the Hoeffding floor
    CHECK_FALSE(select_threshold(s, {0.1, 0.5, 0.9}, cfg).has_value());
    cfg.epsilon = 0.0;
    cfg.bound = BoundKind::clt;  // the bound is 0 here, but eps = 0 still executes everything
    CHECK_FALSE(select_threshold(s, {0.1, 0.5, 0.9}, cfg).has_value());
}

TEST_CASE("eps = 0 recovers exhaustive execution") {
    std::mt19937_64 rng(4);
    std::vector<double> scores(80);
    std::vector<int> truth(80);
    for (std::size_t i = 0; i < 80; ++i) {
        scores[i] = std::uniform_real_distribution<double>(0, 1)(rng);
        truth[i] = int(rng() % 2);
    }
    SelectiveConfig cfg;
    cfg.h = 8;
    cfg.epsilon = 0.0;
    std::size_t calls = 0;
    auto out = run_selective_execution(scores, [&](std::size_t i) { ++calls; return truth[i]; }, cfg);
    CHECK_FALSE(out.u_hat.has_value());
    CHECK(out.labels == truth);
    CHECK(out.fraction_saved == 0.0);
    CHECK(out.executed.size() == 80);
    CHECK(calls == 80);  // draws are cached, never re-executed
    CHECK(outcome_to_json(out)["u_hat"] == "exec_all");
}

TEST_CASE("all programs correct") {
    std::vector<double> scores;
    for (int i = 0; i < 500; ++i) scores.push_back(double(i) / 500.0);
    SelectiveConfig cfg;
    cfg.h = 2000;
    cfg.epsilon = 0.1;
    cfg.gamma = 0.05;
    cfg.seed = 3;
    auto out = run_selective_execution(scores, [](std::size_t) { return 1; }, cfg);
    REQUIRE(out.u_hat.has_value());
    CHECK(*out.u_hat == scores.back());
    CHECK(std::all_of(out.labels.begin(), out.labels.end(), [](int l) { return l == 1; }));
    // Only the boundary program U = u_hat is executed after the draws.
    CHECK(out.fraction_saved == doctest::Approx(499.0 / 500.0));
    CHECK(out.ties_at_threshold == 1);
}

TEST_CASE("low-uncertainty programs mostly correct: realized error stays below eps") {
    const std::size_t m = 1000;
    std::size_t ok = 0, positive = 0;
    const int trials = 500;
    for (int t = 0; t < trials; ++t) {
        std::mt19937_64 rng(1000 + t);
        std::uniform_real_distribution<double> u01(0, 1);
        std::vector<double> scores(m);
        std::vector<int> truth(m);
        for (std::size_t i = 0; i < m; ++i) {
            scores[i] = u01(rng);
            truth[i] = u01(rng) < (scores[i] < 0.5 ? 0.99 : 0.4) ? 1 : 0;
        }
        SelectiveConfig cfg;
        cfg.h = 400;
        cfg.epsilon = 0.1;
        cfg.gamma = 0.05;
        cfg.seed = std::uint64_t(t);
        auto out = run_selective_execution(scores, [&](std::size_t i) { return truth[i]; }, cfg);
        positive += out.u_hat && *out.u_hat > 0;
        std::size_t wrong = 0;
        for (std::size_t i = 0; i < m; ++i) wrong += out.labels[i] != truth[i];
        ok += double(wrong) / double(m) <= 0.1;
    }
    CHECK(positive == trials);
    CHECK(double(ok) / trials >= 0.95 - 3 * std::sqrt(0.95 * 0.05 / trials));
}

TEST_CASE("draws are reproducible and follow index-then-coin order") {
    std::vector<double> scores{0.1, 0.2, 0.3, 0.4, 0.5};
    SelectiveConfig cfg;
    cfg.h = 50;
    cfg.seed = 99;
    cfg.weights = {0.5, 0.5, 0.5, 0.5, 0.5};
    std::vector<std::optional<int>> c1, c2;
    auto exec = [](std::size_t i) { return int(i % 2); };
    auto a = draw_samples(scores, cfg, exec, c1);
    auto b = draw_samples(scores, cfg, exec, c2);

    std::mt19937_64 rng(99);
    std::uniform_int_distribution<std::size_t> pick(0, 4);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    for (std::size_t j = 0; j < 50; ++j) {
        CHECK(a[j].index == b[j].index);
        CHECK(a[j].xi == b[j].xi);
        const std::size_t i = pick(rng);
        const bool xi = coin(rng) < 0.5;
        CHECK(a[j].index == i);
        CHECK(a[j].xi == xi);
        CHECK(a[j].z == (xi ? double(1 - int(i % 2)) / 0.5 : 0.0));
        CHECK(a[j].z <= 1.0 / cfg.omega_min());
    }
}

TEST_CASE("config validation and executor errors") {
    SelectiveConfig cfg;
    cfg.h = 4;
    auto ok = [](std::size_t) { return 1; };
    CHECK_THROWS_AS(run_selective_execution({}, ok, cfg), ConfigError);
    cfg.weights = {0.5};
    CHECK_THROWS_AS(run_selective_execution({0.1, 0.2}, ok, cfg), ConfigError);
    cfg.weights = {0.0, 1.0};
    CHECK_THROWS_AS(run_selective_execution({0.1, 0.2}, ok, cfg), ConfigError);
    cfg.weights.clear();
    cfg.epsilon = 1.5;
    CHECK_THROWS_AS(run_selective_execution({0.1, 0.2}, ok, cfg), ConfigError);
    cfg.epsilon = 0.1;
    CHECK_THROWS_AS(run_selective_execution({0.1, 0.2}, [](std::size_t) { return 7; }, cfg), ExecutorError);
    std::optional<std::size_t> failed;
    try {
        run_selective_execution({0.1, 0.2, 0.3}, [](std::size_t i) -> int { if (i == 2) throw ExecutorError(i, "boom"); return 1; }, cfg);
    } catch (const ExecutorError& e) {
        failed = e.index();
    }
    CHECK(failed == std::optional<std::size_t>(2));
}

TEST_CASE("parallel labeling is order independent") {
    std::vector<double> scores;
    std::vector<int> truth;
    for (int i = 0; i < 300; ++i) {
        scores.push_back(double((i * 37) % 300) / 300.0);
        truth.push_back(i % 3 == 0 ? 0 : 1);
    }
    SelectiveConfig cfg;
    cfg.h = 30;
    cfg.epsilon = 0.3;
    cfg.gamma = 0.1;
    cfg.seed = 5;
    auto exec = [&](std::size_t i) { return truth[i]; };
    auto a = run_selective_execution(scores, exec, cfg);
    cfg.jobs = 4;
    auto b = run_selective_execution(scores, exec, cfg);
    CHECK(outcome_to_json(a).dump() == outcome_to_json(b).dump());
}
