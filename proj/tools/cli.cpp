#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ppset/errors.hpp"
#include "ppset/ltt.hpp"
#include "ppset/report.hpp"
#include "ppset/rng.hpp"
#include "ppset/selective.hpp"
#include "ppset/sim.hpp"
#include "ppset/validation.hpp"
#include "subprocess_executor.hpp"

namespace ppset::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags shared by several subcommands. Unset optionals leave config-file values alone.
struct Flags {
    std::string config_path;
    std::string out_dir = ".";
    std::string log_level = "info";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;

    std::optional<double> alpha, delta, grid_step, epsilon, gamma;
    std::optional<int> tmax, fst_starts;
    std::optional<std::string> fwer, bound;
    std::optional<std::size_t> h;
    std::optional<long> timeout_ms, prune_timeout_ms;
};

// Everything a config file may set, with built-in defaults.
struct Settings {
    SyntheticConfig synthetic;
    LttConfig ltt;
    double grid_step = 0.02;
    SelectiveTrialConfig selective;
    TrialOptions trials;
    long timeout_ms = 10000;
};

class Logger {
public:
    Logger(std::ostream& err, const std::string& level) : err_(err), level_(level == "quiet" ? 0 : 1) {}
    void info(const std::string& msg) const {
        if (level_ > 0) err_ << msg << '\n';
    }

private:
    std::ostream& err_;
    int level_;
};

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot read " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& body) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << body;
    if (!f) throw std::runtime_error("failed writing " + path.string());
}

json parse_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::string fmt(const char* f, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ParseError(where + ": expected a JSON object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ParseError(where + ": unknown field '" + k + "'");
    }
}

void load_config(Settings& s, const std::string& path) {
    if (path.empty()) return;
    const json j = parse_json_file(path);
    check_keys(j, "config", {"synthetic", "ltt", "selective", "trials"});
    try {
        if (j.contains("synthetic")) s.synthetic = synthetic_config_from_json(j["synthetic"], s.synthetic);
        if (j.contains("ltt")) {
            const json& l = j["ltt"];
            check_keys(l, "config.ltt",
                       {"alpha", "delta", "t_max", "fwer", "fst_starts", "grid", "grid_step", "prune_time_limit_ms"});
            s.ltt.alpha = l.value("alpha", s.ltt.alpha);
            s.ltt.delta = l.value("delta", s.ltt.delta);
            s.ltt.t_max = l.value("t_max", s.ltt.t_max);
            s.ltt.fst_starts = l.value("fst_starts", s.ltt.fst_starts);
            if (l.contains("fwer")) s.ltt.fwer = parse_fwer(l["fwer"].get<std::string>());
            if (l.contains("grid")) s.ltt.grid = LambdaGrid(l["grid"].get<std::vector<double>>());
            s.grid_step = l.value("grid_step", s.grid_step);
            if (l.contains("prune_time_limit_ms"))
                s.ltt.prune_time_limit = std::chrono::milliseconds(l["prune_time_limit_ms"].get<long>());
        }
        if (j.contains("selective")) {
            const json& sj = j["selective"];
            check_keys(sj, "config.selective",
                       {"h", "epsilon", "gamma", "bound", "weights", "omega", "h_fraction", "timeout_ms"});
            auto& b = s.selective.base;
            b.h = sj.value("h", b.h);
            b.epsilon = sj.value("epsilon", b.epsilon);
            b.gamma = sj.value("gamma", b.gamma);
            if (sj.contains("bound")) b.bound = parse_bound(sj["bound"].get<std::string>());
            if (sj.contains("weights")) b.weights = sj["weights"].get<std::vector<double>>();
            s.selective.omega = sj.value("omega", s.selective.omega);
            s.selective.h_fraction = sj.value("h_fraction", s.selective.h_fraction);
            s.timeout_ms = sj.value("timeout_ms", s.timeout_ms);
        }
        if (j.contains("trials")) {
            const json& t = j["trials"];
            check_keys(t, "config.trials", {"n_trials", "split"});
            s.trials.n_trials = t.value("n_trials", s.trials.n_trials);
            s.trials.split = t.value("split", s.trials.split);
        }
    } catch (const json::exception& e) {
        throw ParseError("config: " + std::string(e.what()));
    }
}

Settings resolve(const Flags& f) {
    Settings s;
    load_config(s, f.config_path);
    if (f.alpha) s.ltt.alpha = *f.alpha;
    if (f.delta) s.ltt.delta = *f.delta;
    if (f.tmax) s.ltt.t_max = *f.tmax;
    if (f.fwer) s.ltt.fwer = parse_fwer(*f.fwer == "fst" ? "fixed_sequence" : *f.fwer);
    if (f.fst_starts) s.ltt.fst_starts = *f.fst_starts;
    if (f.grid_step) {
        s.grid_step = *f.grid_step;
        s.ltt.grid = LambdaGrid();  // an explicit step beats a configured grid
    }
    if (f.prune_timeout_ms) s.ltt.prune_time_limit = std::chrono::milliseconds(*f.prune_timeout_ms);
    if (f.epsilon) s.selective.base.epsilon = *f.epsilon;
    if (f.gamma) s.selective.base.gamma = *f.gamma;
    if (f.h) s.selective.base.h = *f.h;
    if (f.bound) s.selective.base.bound = parse_bound(*f.bound);
    if (f.timeout_ms) s.timeout_ms = *f.timeout_ms;
    if (f.seed_set) s.synthetic.seed = f.seed;
    s.ltt.jobs = f.jobs;
    s.selective.base.jobs = f.jobs;
    s.trials.jobs = f.jobs;
    s.trials.grid_step = s.grid_step;
    if (s.timeout_ms < 0) throw ConfigError("--timeout-ms must be nonnegative");
    if (f.jobs < 1) throw ConfigError("--jobs must be at least 1");
    return s;
}

void add_ltt_flags(CLI::App* c, Flags& f) {
    c->add_option("--alpha", f.alpha, "Target risk level (default 0.1)");
    c->add_option("--delta", f.delta, "Allowed failure probability (default 0.1)");
    c->add_option("--tmax", f.tmax, "Maximum number of removed subtrees (default 1)");
    c->add_option("--grid-step", f.grid_step, "Lambda grid increment (default 0.02)");
    c->add_option("--fwer", f.fwer, "FWER procedure (default fst)")
        ->check(CLI::IsMember({"bonferroni", "holm", "fst", "fixed_sequence"}));
    c->add_option("--fst-starts", f.fst_starts, "Fixed-sequence start count (default min(10, N))");
    c->add_option("--prune-timeout-ms", f.prune_timeout_ms, "Per-tree exact solver time limit (0 = none)");
}

void add_selective_flags(CLI::App* c, Flags& f) {
    c->add_option("--epsilon", f.epsilon, "Tolerated label error rate (default 0.1)");
    c->add_option("--gamma", f.gamma, "Bound failure probability (default 0.01)");
    c->add_option("--h", f.h, "Number of draws (default 10% of the programs)");
    c->add_option("--bound", f.bound, "Error bound (default hoeffding)")->check(CLI::IsMember({"hoeffding", "clt"}));
}

void add_common_flags(CLI::App* c, Flags& f) {
    c->add_option("--config", f.config_path, "JSON config file; flags override its values");
    c->add_option("--out", f.out_dir, "Output directory (default .)");
    c->add_option("--jobs", f.jobs, "Worker threads (default 1)");
    c->add_option("--log-level", f.log_level, "info or quiet")->check(CLI::IsMember({"info", "quiet"}));
}

// ---- calibrate ----

int cmd_calibrate(const Flags& f, const std::string& records_path, std::ostream& out, const Logger& log) {
    Settings s = resolve(f);
    auto records = parse_records_jsonl(read_file(records_path));
    if (records.empty()) throw ParseError(records_path + ": no records");
    if (s.ltt.grid.size() == 0) s.ltt.grid = LambdaGrid::for_records(records, s.grid_step);
    auto result = calibrate(records, s.ltt);

    const fs::path path = fs::path(f.out_dir) / "calibration.json";
    write_file(path, result_to_json(result).dump(2) + "\n");
    log.info("wrote " + path.string());

    out << "records " << records.size() << ", grid " << result.grid.size() << " points, fwer "
        << fwer_name(s.ltt.fwer) << ", alpha " << fmt("%g", s.ltt.alpha) << ", delta " << fmt("%g", s.ltt.delta)
        << "\n";
    out << "lambda       risk      removal   p-value       valid\n";
    std::size_t v = 0;
    for (std::size_t k = 0; k < result.grid.size(); ++k) {
        const bool valid = v < result.valid.size() && result.valid[v] == result.grid[k];
        if (valid) ++v;
        char line[128];
        std::snprintf(line, sizeof line, "%-12.6g %-9.4f %-9.4f %-13.6g %s\n", result.grid[k], result.risk[k],
                      result.removal[k], result.pvalues[k], valid ? "*" : "");
        out << line;
    }
    if (result.abstained()) {
        out << "ABSTAIN\n";
        return kAbstain;
    }
    out << "lambda_hat " << fmt("%.6g", *result.lambda_hat) << "\n";
    return kOk;
}

// ---- predict ----

void render(const AnnotatedAst& ast, const RemovalSet& r, NodeId id, int depth, std::ostream& out) {
    const std::string indent(2 * static_cast<std::size_t>(depth), ' ');
    const AstNode& n = ast.node(id);
    if (r.removed(id)) {
        out << indent << "?? (hole: " << n.label << ", " << ast.subtree_size(id)
            << (ast.subtree_size(id) == 1 ? " node" : " nodes") << ")\n";
        return;
    }
    out << indent << n.label << "  [" << fmt("%.4g", n.weight) << "]\n";
    for (NodeId c : n.children) render(ast, r, c, depth + 1, out);
}

int cmd_predict(const Flags& f, const std::string& ast_path, const std::string& result_path, bool write_out,
                std::ostream& out, const Logger& log) {
    Settings s = resolve(f);
    auto ast = parse_ast_json(read_file(ast_path));
    CalibrationResult result;
    try {
        result = result_from_json(parse_json_file(result_path));
    } catch (const json::exception& e) {
        throw ParseError(result_path + ": " + e.what());
    }
    auto partial = predict(ast, result, s.ltt.t_max);
    if (!partial) {
        out << "ABSTAIN\n";
        return kAbstain;
    }
    render(ast, partial->removal, ast.root(), 0, out);
    const json rj = removal_to_json(partial->removal);
    out << rj.dump() << "\n";
    if (write_out) {
        const fs::path path = fs::path(f.out_dir) / "removal.json";
        write_file(path, rj.dump(2) + "\n");
        log.info("wrote " + path.string());
    }
    return kOk;
}

// ---- validate ----

int cmd_validate(const Flags& f, const std::string& suite, std::ostream& out) {
    auto reports = run_suite(suite, f.seed, f.jobs);
    bool ok = true;
    for (const auto& r : reports) {
        print_suite(out, r);
        ok = ok && r.passed();
    }
    out << (ok ? "ALL PASSED" : "FAILURES") << "\n";
    return ok ? kOk : kFailed;
}

// ---- selective-exec ----

struct ProgramSet {
    std::vector<double> scores;
    std::vector<double> weights;  // empty unless some line sets one
    std::vector<std::string> payloads;
};

ProgramSet parse_programs(const std::string& text) {
    ProgramSet p;
    std::vector<std::optional<double>> weights;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const json j = json::parse(line);
            check_keys(j, "program", {"score", "weight", "payload"});
            const double u = j.at("score").get<double>();
            if (!std::isfinite(u)) throw ConfigError("score must be finite");
            p.scores.push_back(u);
            weights.push_back(j.contains("weight") ? std::optional<double>(j["weight"].get<double>()) : std::nullopt);
            const json& payload = j.at("payload");
            p.payloads.push_back(payload.is_string() ? payload.get<std::string>() : payload.dump());
        } catch (const std::exception& e) {
            throw ParseError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    const bool any = std::any_of(weights.begin(), weights.end(), [](const auto& w) { return w.has_value(); });
    if (any)
        for (const auto& w : weights) p.weights.push_back(w.value_or(1.0));
    return p;
}

int cmd_selective_exec(const Flags& f, const std::string& programs_path, const std::string& executor_cmd,
                       std::ostream& out, const Logger& log) {
    Settings s = resolve(f);
    ProgramSet progs = parse_programs(read_file(programs_path));
    if (progs.scores.empty()) throw ParseError(programs_path + ": no programs");
    const std::size_t m = progs.scores.size();

    SelectiveConfig cfg = s.selective.base;
    if (!progs.weights.empty()) cfg.weights = progs.weights;
    if (cfg.h == 0)
        cfg.h = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(s.selective.h_fraction * double(m))));
    cfg.seed = derive_seed(f.seed, "selective");
    cfg.validate(m);

    SubprocessExecutor exec(executor_cmd, std::move(progs.payloads), std::chrono::milliseconds(s.timeout_ms));
    auto outcome = run_selective_execution(progs.scores, std::ref(exec), cfg);

    const fs::path path = fs::path(f.out_dir) / "outcome.json";
    write_file(path, outcome_to_json(outcome).dump(2) + "\n");
    log.info("wrote " + path.string());
    out << "programs " << m << ", draws " << cfg.h << ", executed " << outcome.executed.size() << "\n";
    out << "u_hat " << (outcome.u_hat ? fmt("%.6g", *outcome.u_hat) : std::string("exec_all")) << "\n";
    out << "fraction_saved " << fmt("%.6g", outcome.fraction_saved) << "\n";
    return kOk;
}

// ---- simulate / report ----

std::vector<ReportFormat> parse_formats(const std::vector<std::string>& names) {
    std::vector<ReportFormat> out;
    for (const auto& n : names) {
        if (n == "json") out.push_back(ReportFormat::json);
        else if (n == "csv") out.push_back(ReportFormat::csv);
        else if (n == "svg") out.push_back(ReportFormat::svg);
        else throw ConfigError("unknown report format '" + n + "'");
    }
    return out;
}

void emit_all(const TrialReport& report, const std::vector<std::string>& formats, const std::string& dir,
              const std::string& stem, const Logger& log) {
    for (ReportFormat fm : parse_formats(formats)) log.info("wrote " + emit_report(report, fm, dir, stem).string());
}

int cmd_simulate(const Flags& f, const std::string& sweep, std::vector<double> values, std::optional<std::size_t> n_trials,
                 bool selective, const std::vector<std::string>& formats, std::ostream& out, const Logger& log) {
    Settings s = resolve(f);
    if (n_trials) s.trials.n_trials = *n_trials;
    TrialReport report;
    report.parameter = sweep.empty() ? "alpha" : sweep;
    if (values.empty()) {
        if (sweep == "alpha") values = {0.05, 0.1, 0.15, 0.2, 0.25, 0.3};
        else if (sweep == "m") values = {1, 5, 20, 80};
        else if (sweep == "epsilon") values = {0.05, 0.1, 0.2, 0.3};
        else values = {sweep.empty() ? s.ltt.alpha : 0.0};
    }
    const bool use_selective = selective || sweep == "epsilon";
    for (double v : values) {
        SyntheticConfig syn = s.synthetic;
        LttConfig ltt = s.ltt;
        SelectiveTrialConfig sel = s.selective;
        if (report.parameter == "alpha") ltt.alpha = v;
        else if (report.parameter == "m") {
            if (v < 0 || v != std::floor(v)) throw ConfigError("m values must be nonnegative integers");
            syn.m = static_cast<std::size_t>(v);
        } else {
            sel.base.epsilon = v;
        }
        SweepRow row = use_selective ? run_selective_trials(syn, sel, ltt, s.trials) : run_trials(syn, ltt, s.trials);
        row.value = v;
        report.rows.push_back(std::move(row));
    }
    emit_all(report, formats, f.out_dir, "report", log);
    out << report_to_csv(report);
    return kOk;
}

int cmd_report(const Flags& f, const std::string& in_path, const std::vector<std::string>& formats, std::ostream& out,
               const Logger& log) {
    TrialReport report = report_from_json(parse_json_file(in_path));
    const std::string stem = fs::path(in_path).stem().string();
    emit_all(report, formats, f.out_dir, stem, log);
    out << report_to_csv(report);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Risk-controlled partial-program prediction sets and selective execution", "ppset"};
    app.require_subcommand(1, 1);
    app.set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
    app.fallthrough();  // --seed may follow the subcommand
    Flags f;
    auto seed_opt = app.add_option("--seed", f.seed, "Master seed (default 0)");

    auto* cal = app.add_subcommand("calibrate", "Calibrate lambda on JSON-lines calibration records");
    std::string records_path;
    cal->add_option("records", records_path, "Calibration records (JSON lines)")->required()->check(CLI::ExistingFile);
    add_common_flags(cal, f);
    add_ltt_flags(cal, f);

    auto* pred = app.add_subcommand("predict", "Prune a new program at the calibrated lambda");
    std::string ast_path, result_path;
    pred->add_option("ast", ast_path, "Annotated AST (JSON)")->required()->check(CLI::ExistingFile);
    pred->add_option("result", result_path, "Calibration result (JSON)")->required()->check(CLI::ExistingFile);
    add_common_flags(pred, f);
    pred->add_option("--tmax", f.tmax, "Maximum number of removed subtrees (default 1)");

    auto* val = app.add_subcommand("validate", "Run a statistical validation suite");
    std::string suite;
    val->add_option("suite", suite, "Suite name")->required()->check(CLI::IsMember(suite_names()));
    val->add_option("--jobs", f.jobs, "Worker threads (default 1)");

    auto* sel = app.add_subcommand("selective-exec", "Label programs, executing tests only where needed");
    std::string programs_path, executor_cmd;
    sel->add_option("programs", programs_path, "Programs (JSON lines: score, weight?, payload)")
        ->required()
        ->check(CLI::ExistingFile);
    sel->add_option("--executor", executor_cmd, "Shell command reading a payload on stdin and printing 1 or 0")
        ->required();
    sel->add_option("--timeout-ms", f.timeout_ms, "Per-program executor timeout (default 10000, 0 = none)");
    add_common_flags(sel, f);
    add_selective_flags(sel, f);

    auto* sim = app.add_subcommand("simulate", "Run synthetic calibration trials and write reports");
    std::string sweep;
    std::vector<double> values;
    std::optional<std::size_t> n_trials;
    bool selective = false;
    std::vector<std::string> formats{"json", "csv", "svg"};
    sim->add_option("--sweep", sweep, "Swept parameter")->check(CLI::IsMember({"alpha", "m", "epsilon"}));
    sim->add_option("--values", values, "Swept values (comma separated)")->delimiter(',');
    sim->add_option("--trials", n_trials, "Trials per value (default 100)");
    sim->add_flag("--selective", selective, "Label calibration data by selective execution");
    sim->add_option("--format", formats, "Report formats (json,csv,svg)")->delimiter(',');
    add_common_flags(sim, f);
    add_ltt_flags(sim, f);
    add_selective_flags(sim, f);

    auto* rep = app.add_subcommand("report", "Render a saved JSON report as csv/svg/json");
    std::string report_path;
    std::vector<std::string> rep_formats{"csv", "svg"};
    rep->add_option("report", report_path, "Report JSON written by simulate")->required()->check(CLI::ExistingFile);
    rep->add_option("--format", rep_formats, "Report formats (json,csv,svg)")->delimiter(',');
    rep->add_option("--out", f.out_dir, "Output directory (default .)");

    std::vector<std::string> argv_store{"ppset"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }
    f.seed_set = seed_opt->count() > 0;
    Logger log(err, f.log_level);

    try {
        if (*cal) return cmd_calibrate(f, records_path, out, log);
        if (*pred) return cmd_predict(f, ast_path, result_path, pred->count("--out") > 0, out, log);
        if (*val) return cmd_validate(f, suite, out);
        if (*sel) return cmd_selective_exec(f, programs_path, executor_cmd, out, log);
        if (*sim) return cmd_simulate(f, sweep, values, n_trials, selective, formats, out, log);
        if (*rep) return cmd_report(f, report_path, rep_formats, out, log);
    } catch (const ExecutorError& e) {
        err << "error: " << e.what() << "\n";
        return kExecutorError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailed;
    }
    return kInputError;
}

}  // namespace ppset::cli
