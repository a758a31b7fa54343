#include "ppset/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ppset/errors.hpp"

namespace ppset {

using nlohmann::json;

namespace {

void require_data(const TrialReport& r) {
    bool any = std::any_of(r.rows.begin(), r.rows.end(), [](const SweepRow& row) { return !row.trials.empty(); });
    if (!any) throw ConfigError("no data: report has no trials");
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

json opt_num(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

}  // namespace

json report_to_json(const TrialReport& report) {
    require_data(report);
    json rows = json::array();
    for (const auto& row : report.rows) {
        json trials = json::array();
        for (const auto& t : row.trials) {
            json jt = {{"seed", t.seed},
                       {"lambda_hat", opt_num(t.lambda_hat)},
                       {"test_risk", t.test_risk},
                       {"removal", t.removal},
                       {"coverage", t.coverage}};
            if (t.fraction_saved) jt["fraction_saved"] = *t.fraction_saved;
            if (t.within_relaxed) jt["within_relaxed"] = *t.within_relaxed;
            trials.push_back(std::move(jt));
        }
        auto cov = row.coverage();
        auto rem = row.removal();
        json jr = {{"value", row.value},
                   {"alpha", row.alpha},
                   {"coverage_mean", cov.mean},
                   {"coverage_sd", cov.sd},
                   {"removal_mean", rem.mean},
                   {"removal_sd", rem.sd},
                   {"abstentions", row.abstentions()},
                   {"trials", std::move(trials)}};
        if (auto s = row.saved()) {
            jr["saved_mean"] = s->mean;
            jr["saved_sd"] = s->sd;
        }
        rows.push_back(std::move(jr));
    }
    return {{"parameter", report.parameter}, {"rows", std::move(rows)}};
}

TrialReport report_from_json(const json& j) {
    TrialReport r;
    try {
        r.parameter = j.at("parameter").get<std::string>();
        for (const auto& jr : j.at("rows")) {
            SweepRow row;
            row.value = jr.at("value").get<double>();
            row.alpha = jr.at("alpha").get<double>();
            for (const auto& jt : jr.at("trials")) {
                TrialResult t;
                t.seed = jt.at("seed").get<std::uint64_t>();
                if (!jt.at("lambda_hat").is_null()) t.lambda_hat = jt.at("lambda_hat").get<double>();
                t.test_risk = jt.at("test_risk").get<double>();
                t.removal = jt.at("removal").get<double>();
                t.coverage = jt.at("coverage").get<int>();
                if (jt.contains("fraction_saved")) t.fraction_saved = jt["fraction_saved"].get<double>();
                if (jt.contains("within_relaxed")) t.within_relaxed = jt["within_relaxed"].get<int>();
                row.trials.push_back(t);
            }
            r.rows.push_back(std::move(row));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
    return r;
}

std::string report_to_csv(const TrialReport& report) {
    require_data(report);
    const bool selective =
        std::any_of(report.rows.begin(), report.rows.end(), [](const SweepRow& r) { return r.saved().has_value(); });
    std::ostringstream out;
    out << report.parameter << ",coverage_mean,coverage_sd,removal_mean,removal_sd";
    if (selective) out << ",saved_mean,saved_sd";
    out << '\n';
    for (const auto& row : report.rows) {
        auto cov = row.coverage();
        auto rem = row.removal();
        out << num(row.value) << ',' << num(cov.mean) << ',' << num(cov.sd) << ',' << num(rem.mean) << ','
            << num(rem.sd);
        if (selective) {
            auto s = row.saved().value_or(Aggregate{});
            out << ',' << num(s.mean) << ',' << num(s.sd);
        }
        out << '\n';
    }
    return out.str();
}

namespace {

struct Panel {
    double top = 0.0;
    double height = 0.0;
    std::string title;
};

constexpr double kWidth = 480.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;

}  // namespace

std::string report_to_svg(const TrialReport& report) {
    require_data(report);
    std::vector<const SweepRow*> rows;
    for (const auto& r : report.rows)
        if (!r.trials.empty()) rows.push_back(&r);
    std::sort(rows.begin(), rows.end(), [](const SweepRow* a, const SweepRow* b) { return a->value < b->value; });

    double xmin = rows.front()->value;
    double xmax = rows.back()->value;
    if (xmax == xmin) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    const double plot_w = kWidth - kLeft - kRight;
    auto xpos = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * plot_w; };

    std::ostringstream svg;
    const Panel panels[2] = {{20.0, 180.0, "coverage"}, {250.0, 180.0, "removal fraction"}};
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"470\" "
        << "font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int p = 0; p < 2; ++p) {
        const Panel& pn = panels[p];
        auto ypos = [&](double y) { return pn.top + (1.0 - std::clamp(y, 0.0, 1.0)) * pn.height; };
        svg << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(pn.top) << "\" width=\"" << num(plot_w)
            << "\" height=\"" << num(pn.height) << "\" fill=\"none\" stroke=\"#444\"/>\n";
        svg << "<text x=\"" << num(kLeft) << "\" y=\"" << num(pn.top - 5) << "\">" << pn.title << "</text>\n";
        for (double tick : {0.0, 0.5, 1.0})
            svg << "<text x=\"" << num(kLeft - 30) << "\" y=\"" << num(ypos(tick) + 4) << "\">" << num(tick)
                << "</text>\n";

        std::vector<std::pair<double, Aggregate>> pts;
        for (const SweepRow* r : rows) pts.emplace_back(r->value, p == 0 ? r->coverage() : r->removal());

        // SD band: upper edge left-to-right, lower edge back.
        svg << "<polygon fill=\"#4c72b0\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
        for (const auto& [x, a] : pts) svg << num(xpos(x)) << ',' << num(ypos(a.mean + a.sd)) << ' ';
        for (auto it = pts.rbegin(); it != pts.rend(); ++it)
            svg << num(xpos(it->first)) << ',' << num(ypos(it->second.mean - it->second.sd)) << ' ';
        svg << "\"/>\n";
        svg << "<polyline fill=\"none\" stroke=\"#4c72b0\" stroke-width=\"2\" points=\"";
        for (const auto& [x, a] : pts) svg << num(xpos(x)) << ',' << num(ypos(a.mean)) << ' ';
        svg << "\"/>\n";

        if (p == 0) {
            // Target 1 - alpha, one segment per point so alpha sweeps draw a sloped target.
            svg << "<polyline fill=\"none\" stroke=\"#c44e52\" stroke-dasharray=\"6,4\" points=\"";
            for (const SweepRow* r : rows) svg << num(xpos(r->value)) << ',' << num(ypos(1.0 - r->alpha)) << ' ';
            svg << "\"/>\n";
        }
    }
    for (const SweepRow* r : rows)
        svg << "<text x=\"" << num(xpos(r->value) - 8) << "\" y=\"455\">" << num(r->value) << "</text>\n";
    svg << "<text x=\"" << num(kLeft + plot_w / 2) << "\" y=\"468\">" << report.parameter << "</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::filesystem::path emit_report(const TrialReport& report, ReportFormat format, const std::filesystem::path& dir,
                                  const std::string& stem) {
    std::string body;
    std::string ext;
    switch (format) {
        case ReportFormat::json:
            body = report_to_json(report).dump(2) + "\n";
            ext = ".json";
            break;
        case ReportFormat::csv:
            body = report_to_csv(report);
            ext = ".csv";
            break;
        case ReportFormat::svg:
            body = report_to_svg(report);
            ext = ".svg";
            break;
    }
    std::filesystem::create_directories(dir);
    auto path = dir / (stem + ext);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << body;
    if (!f) throw std::runtime_error("failed writing " + path.string());
    return path;
}

}  // namespace ppset
