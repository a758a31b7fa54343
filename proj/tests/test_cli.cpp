#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "common.hpp"

using testutil::fixture;
using testutil::slurp;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run ppset_run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = ppset::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("ppset_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("calibrate: self-labeled records") {
    TempDir d("cal");
    auto r = ppset_run({"calibrate", fixture("self_labeled.jsonl"), "--out", d.path.string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("lambda_hat ") != std::string::npos);
    CHECK(r.out.find("ABSTAIN") == std::string::npos);
    auto j = nlohmann::json::parse(slurp(d / "calibration.json"));
    CHECK(j["lambda_hat"].is_number());

    // Byte-identical on rerun.
    const auto first = slurp(d / "calibration.json");
    CHECK(ppset_run({"calibrate", fixture("self_labeled.jsonl"), "--out", d.path.string(), "--jobs", "3"}).code == 0);
    CHECK(slurp(d / "calibration.json") == first);
}

TEST_CASE("calibrate: adversarial records abstain with exit 3") {
    TempDir d("adv");
    auto r = ppset_run({"calibrate", fixture("adversarial.jsonl"), "--config", fixture("huge_grid.json"), "--out",
                        d.path.string()});
    CHECK(r.code == 3);
    CHECK(r.out.find("ABSTAIN") != std::string::npos);
    CHECK(nlohmann::json::parse(slurp(d / "calibration.json"))["lambda_hat"].is_null());
}

TEST_CASE("calibrate: malformed input exits 2 with the line number") {
    TempDir d("bad");
    auto r = ppset_run({"calibrate", fixture("malformed.jsonl"), "--out", d.path.string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 2") != std::string::npos);
}

TEST_CASE("flag validation") {
    CHECK(ppset_run({}).code == 2);
    CHECK(ppset_run({"frobnicate"}).code == 2);
    CHECK(ppset_run({"calibrate", fixture("self_labeled.jsonl"), "--alpha", "1.5", "--out", "/tmp"}).code == 2);
    CHECK(ppset_run({"calibrate", fixture("self_labeled.jsonl"), "--fwer", "bh"}).code == 2);
    CHECK(ppset_run({"calibrate", "/nonexistent.jsonl"}).code == 2);
    CHECK(ppset_run({"--help"}).code == 0);
}

TEST_CASE("predict renders holes and honours abstention") {
    TempDir d("pred");
    auto write = [&](const std::string& name, const nlohmann::json& j) {
        std::ofstream(d / name) << j.dump();
        return d / name;
    };
    auto result = [](std::optional<double> lam) {
        return nlohmann::json{{"grid", {0.0, 1.0, 10.0}},
                              {"pvalues", {0.01, 0.01, 0.01}},
                              {"valid", lam ? nlohmann::json::array({*lam}) : nlohmann::json::array()},
                              {"lambda_hat", lam ? nlohmann::json(*lam) : nlohmann::json(nullptr)},
                              {"risk", {0, 0, 0}},
                              {"removal", {1, 0.5, 0}}};
    };
    auto tiny = fixture("tiny.json");

    auto none = ppset_run({"predict", tiny, write("r10.json", result(10.0))});
    CHECK(none.code == 0);
    CHECK(none.out.find("??") == std::string::npos);
    CHECK(none.out.find("\"removed\":[]") != std::string::npos);

    auto all = ppset_run({"predict", tiny, write("r0.json", result(0.0))});
    CHECK(all.out.rfind("?? (hole: A, 4 nodes)\n", 0) == 0);

    auto two = ppset_run({"predict", tiny, write("r1.json", result(1.0)), "--tmax", "2", "--out", d.path.string()});
    CHECK(two.code == 0);
    CHECK(two.out ==
          "A  [0.1]\n"
          "  ?? (hole: B, 1 node)\n"
          "  C  [0.3]\n"
          "    ?? (hole: D, 1 node)\n"
          "{\"removed\":[1,3],\"task_id\":\"tiny\"}\n");
    CHECK(nlohmann::json::parse(slurp(d / "removal.json"))["removed"] == nlohmann::json::array({1, 3}));

    auto abst = ppset_run({"predict", tiny, write("rn.json", result(std::nullopt))});
    CHECK(abst.code == 3);
    CHECK(abst.out == "ABSTAIN\n");
}

TEST_CASE("validate") {
    auto ok = ppset_run({"validate", "pruner-oracle", "--seed", "4"});
    CHECK(ok.code == 0);
    CHECK(ok.out.find("[FAIL]") == std::string::npos);
    CHECK(ok.out.find("[PASS] pruner-oracle") != std::string::npos);
    CHECK(ppset_run({"validate", "nonsense"}).code == 2);
}

TEST_CASE("selective-exec with a subprocess executor") {
    TempDir d("sel");
    const std::string judge = "grep -q ok && echo 1 || echo 0";
    auto r = ppset_run({"selective-exec", fixture("programs.jsonl"), "--executor", judge, "--epsilon", "0.3", "--h",
                        "30", "--seed", "2", "--out", d.path.string()});
    REQUIRE(r.code == 0);
    auto out = nlohmann::json::parse(slurp(d / "outcome.json"));
    CHECK(out["labels"].size() == 60);
    CHECK(out.contains("fraction_saved"));
    CHECK(r.out.find("fraction_saved") != std::string::npos);

    // Executed programs carry their true label.
    std::vector<std::string> payloads;
    std::istringstream lines(slurp(fixture("programs.jsonl")));
    for (std::string line; std::getline(lines, line);) payloads.push_back(nlohmann::json::parse(line)["payload"]);
    for (std::size_t i : out["executed"].get<std::vector<std::size_t>>())
        CHECK(out["labels"][i] == (payloads[i] == "ok" ? 1 : 0));

    const auto first = slurp(d / "outcome.json");
    CHECK(ppset_run({"selective-exec", fixture("programs.jsonl"), "--executor", judge, "--epsilon", "0.3", "--h", "30",
                     "--seed", "2", "--jobs", "4", "--out", d.path.string()})
              .code == 0);
    CHECK(slurp(d / "outcome.json") == first);
}

TEST_CASE("selective-exec: eps = 0 executes everything") {
    TempDir d("sel0");
    auto r = ppset_run({"selective-exec", fixture("programs.jsonl"), "--executor", "cat >/dev/null; echo 1",
                        "--epsilon", "0", "--out", d.path.string()});
    REQUIRE(r.code == 0);
    auto out = nlohmann::json::parse(slurp(d / "outcome.json"));
    CHECK(out["u_hat"] == "exec_all");
    CHECK(out["executed"].size() == 60);
    CHECK(out["fraction_saved"] == 0.0);
}

TEST_CASE("selective-exec: constant-correct executor saves work") {
    TempDir d("sel1");
    auto r = ppset_run({"selective-exec", fixture("programs.jsonl"), "--executor", "echo 1", "--epsilon", "0.5",
                        "--h", "40", "--out", d.path.string()});
    REQUIRE(r.code == 0);
    auto out = nlohmann::json::parse(slurp(d / "outcome.json"));
    for (const auto& l : out["labels"]) CHECK(l == 1);
    CHECK(out["fraction_saved"].get<double>() > 0.0);
}

TEST_CASE("selective-exec: executor failures exit 4 with the program index") {
    TempDir d("selerr");
    auto slow = ppset_run({"selective-exec", fixture("programs.jsonl"), "--executor", "sleep 5; echo 1",
                           "--timeout-ms", "150", "--out", d.path.string()});
    CHECK(slow.code == 4);
    CHECK(slow.err.find("timed out") != std::string::npos);
    CHECK(slow.err.find("program ") != std::string::npos);

    auto crash = ppset_run({"selective-exec", fixture("programs.jsonl"), "--executor", "exit 3", "--out",
                            d.path.string()});
    CHECK(crash.code == 4);
    CHECK(crash.err.find("exit status 3") != std::string::npos);

    auto garbage = ppset_run({"selective-exec", fixture("programs.jsonl"), "--executor", "echo maybe", "--out",
                              d.path.string()});
    CHECK(garbage.code == 4);
}

TEST_CASE("simulate and report") {
    TempDir d("sim");
    auto r = ppset_run({"simulate", "--sweep", "alpha", "--values", "0.1,0.2", "--trials", "3", "--seed", "5",
                        "--out", d.path.string(), "--config", fixture("small_sim.json")});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("alpha,coverage_mean,coverage_sd,removal_mean,removal_sd\n", 0) == 0);
    for (const char* f : {"report.json", "report.csv", "report.svg"}) CHECK(fs::exists(d / f));
    const auto json_first = slurp(d / "report.json");

    auto again = ppset_run({"simulate", "--sweep", "alpha", "--values", "0.1,0.2", "--trials", "3", "--seed", "5",
                            "--out", d.path.string(), "--config", fixture("small_sim.json"), "--jobs", "2"});
    CHECK(again.code == 0);
    CHECK(slurp(d / "report.json") == json_first);

    TempDir out("rep");
    auto rep = ppset_run({"report", d / "report.json", "--format", "csv,svg", "--out", out.path.string()});
    CHECK(rep.code == 0);
    CHECK(slurp(out / "report.csv") == slurp(d / "report.csv"));
    CHECK(slurp(out / "report.svg") == slurp(d / "report.svg"));

    auto eps = ppset_run({"simulate", "--sweep", "epsilon", "--values", "0.2", "--trials", "2", "--out",
                          d.path.string(), "--config", fixture("small_sim.json"), "--format", "csv"});
    CHECK(eps.code == 0);
    CHECK(eps.out.rfind("epsilon,coverage_mean,coverage_sd,removal_mean,removal_sd,saved_mean,saved_sd\n", 0) == 0);
}
