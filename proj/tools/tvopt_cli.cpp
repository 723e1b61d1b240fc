// Command-line front end: scenario configs in; trajectory CSVs, bound reports,
// manifests, and SVG plots out.
//
// Exit codes: 0 all runs completed and all verdicts hold, 1 usage or config
// error, 2 a run or its verification failed (partial record retained),
// 3 verdict failure (downgraded to 0 by --verdict-warn).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tvopt/analysis.hpp"
#include "tvopt/config.hpp"
#include "tvopt/errors.hpp"
#include "tvopt/oracle.hpp"
#include "tvopt/record_io.hpp"
#include "tvopt/running.hpp"
#include "tvopt/svg.hpp"

namespace fs = std::filesystem;
using namespace tvopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRunFailure = 2;
constexpr int kExitVerdict = 3;

struct RunSpec {
    std::string name;
    ScenarioConfig scenario;
    std::string algorithm;  // empty: scenario default
    double lambda = 0.0;    // 0: scenario default
    double bound_radius = 0.0;
    bool check_objective = false;
    Vec x1, z1, p1;
};

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_')
                   ? c
                   : '_';
    return out;
}

double to_num(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw config_error(what + ": bad numeric value '" + s + "'");
}

Vec parse_vec(const std::string& text, const std::string& what) {
    std::vector<double> vals;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        const auto b = tok.find_first_not_of(" \t");
        const auto e = tok.find_last_not_of(" \t");
        if (b == std::string::npos) throw config_error(what + ": empty vector component");
        vals.push_back(to_num(tok.substr(b, e - b + 1), what));
    }
    Vec v(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
    return v;
}

RunSpec base_spec(const ConfigFile& cfg) {
    static const std::vector<std::string> kTopKeys = {
        "scenario", "horizon", "seed",          "name",
        "algorithm", "lambda",  "bound_radius", "check_objective"};
    for (const auto& [key, value] : cfg.values) {
        (void)value;
        if (key.rfind("params.", 0) == 0) continue;
        if (key == "init.x1" || key == "init.z1" || key == "init.p1") continue;
        if (std::find(kTopKeys.begin(), kTopKeys.end(), key) == kTopKeys.end())
            throw config_error("unknown config key '" + key + "'");
    }

    RunSpec spec;
    spec.scenario.family = cfg.get("scenario");
    if (spec.scenario.family.empty()) throw config_error("config needs scenario = <family>");
    spec.scenario.horizon = cfg.get_int("horizon", 200);
    const long seed = cfg.get_int("seed", 1);
    if (seed < 0) throw config_error("seed must be nonnegative");
    spec.scenario.seed = static_cast<std::uint64_t>(seed);
    spec.name = cfg.get("name", spec.scenario.family);
    spec.algorithm = cfg.get("algorithm", "");
    spec.lambda = cfg.get_num("lambda", 0.0);
    spec.bound_radius = cfg.get_num("bound_radius", 0.0);
    const std::string co = cfg.get("check_objective", "0");
    spec.check_objective = co == "1" || co == "true" || co == "yes";
    if (cfg.has("init.x1")) spec.x1 = parse_vec(cfg.get("init.x1"), "init.x1");
    if (cfg.has("init.z1")) spec.z1 = parse_vec(cfg.get("init.z1"), "init.z1");
    if (cfg.has("init.p1")) spec.p1 = parse_vec(cfg.get("init.p1"), "init.p1");
    for (const auto& [key, value] : cfg.values)
        if (key.rfind("params.", 0) == 0)
            spec.scenario.params[key.substr(7)] = to_num(value, key);
    return spec;
}

void apply_sweep_value(RunSpec& spec, const std::string& key, const std::string& value) {
    if (key == "seed") {
        const double v = to_num(value, "sweep seed");
        if (v < 0 || v != std::floor(v)) throw config_error("sweep seed must be a nonnegative integer");
        spec.scenario.seed = static_cast<std::uint64_t>(v);
    } else if (key == "horizon") {
        spec.scenario.horizon = static_cast<long>(to_num(value, "sweep horizon"));
    } else if (key == "lambda") {
        spec.lambda = to_num(value, "sweep lambda");
    } else if (key == "bound_radius") {
        spec.bound_radius = to_num(value, "sweep bound_radius");
    } else {
        spec.scenario.params[key] = to_num(value, "sweep " + key);
    }
}

struct RunOutcome {
    int code = kExitOk;
    std::string message;
};

RunOutcome execute_run(RunSpec spec, std::string outdir, std::string config_text) {
    RunOutcome out;
    std::ostringstream msg;
    const std::string stem = outdir + "/" + sanitize(spec.name);
    const std::string csv_path = stem + ".csv";
    const std::string report_path = stem + ".report.json";
    const std::string manifest_path = stem + ".manifest.json";

    try {
        ProblemStream stream = make_scenario(spec.scenario);
        const std::string algorithm = spec.algorithm.empty() ? stream.algorithm : spec.algorithm;

        AlgorithmParams params;
        params.lambda = spec.lambda;
        params.x1 = spec.x1;
        params.z1 = spec.z1;
        params.p1 = spec.p1;
        if (spec.bound_radius > 0.0) {
            const ProblemInstance probe = sample(stream, 1);
            Eigen::Index dim = probe.f.dimension;
            if (algorithm == "dual_ascent_ineq" && probe.linear_ineq)
                dim = probe.linear_ineq->A.rows();
            else if (algorithm == "dual_ascent_eq" && probe.linear_eq)
                dim = probe.linear_eq->A.rows();
            else if (algorithm == "admm" && probe.admm)
                dim = probe.admm->A.rows();
            params.bounding_set = ConvexSet::ball(Vec::Zero(dim), spec.bound_radius);
        }

        RunRecord rec;
        try {
            rec = run_scenario(stream, algorithm, params);
        } catch (const run_aborted& abort) {
            write_record_csv(csv_path, abort.partial, nullptr, stream.h);
            write_manifest(manifest_path, config_text, stream.seed, stream.scenario, {csv_path},
                           abort.what());
            msg << "[failed] " << spec.name << ": " << abort.what() << " (step "
                << abort.step_index << "); partial record in " << csv_path;
            out.code = kExitRunFailure;
            out.message = msg.str();
            return out;
        }

        BoundReport report;
        try {
            const std::vector<ReferenceSolution> traj = solution_trajectory(stream, algorithm);
            AnalysisOptions opt;
            if (stream.X_bound > 0.0) opt.X = stream.X_bound;
            if (spec.bound_radius > 0.0) opt.X = std::min(opt.X, spec.bound_radius);
            opt.squared_sum_tracking = stream.squared_sum_tracking;
            opt.check_objective = spec.check_objective;
            report = measure_and_verify(rec, traj, stream, opt);
        } catch (const error& e) {
            write_record_csv(csv_path, rec, nullptr, stream.h);
            write_manifest(manifest_path, config_text, stream.seed, stream.scenario, {csv_path},
                           e.what());
            msg << "[failed] " << spec.name << ": verification failed: " << e.what()
                << "; record in " << csv_path;
            out.code = kExitRunFailure;
            out.message = msg.str();
            return out;
        }

        write_record_csv(csv_path, rec, &report, stream.h);
        write_report_json(report_path, rec, report, stream);
        write_manifest(manifest_path, config_text, stream.seed, stream.scenario,
                       {csv_path, report_path});

        std::size_t held = 0;
        for (const auto& v : report.verdicts) held += v.holds ? 1 : 0;
        char head[256];
        std::snprintf(head, sizeof(head), "%s %s: algorithm=%s T=%zu lambda=%g final_tracking=%.6e",
                      report.all_hold ? "[ok]" : "[verdict]", spec.name.c_str(), algorithm.c_str(),
                      rec.residuals.size(), rec.lambda,
                      report.tracking.empty() ? 0.0 : report.tracking.back());
        msg << head << " verdicts=" << held << "/" << report.verdicts.size();
        if (!report.all_hold) {
            msg << " failing:";
            for (const auto& v : report.verdicts)
                if (!v.holds) {
                    char buf[128];
                    std::snprintf(buf, sizeof(buf), " %s(margin %.3e)", v.name.c_str(),
                                  v.worst_margin);
                    msg << buf;
                }
            out.code = kExitVerdict;
        }
    } catch (const error& e) {
        msg << "[error] " << spec.name << ": " << e.what();
        out.code = kExitUsage;
    }
    out.message = msg.str();
    return out;
}

int cmd_run(const std::string& config_path, std::string outdir, const std::string& sweep,
            bool seed_given, std::uint64_t seed_override, bool verdict_warn) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "run: cannot open " << config_path << "\n";
        return kExitUsage;
    }
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string config_text = buf.str();

    std::vector<RunSpec> entries;
    try {
        RunSpec base = base_spec(ConfigFile::parse_string(config_text));
        if (seed_given) base.scenario.seed = seed_override;
        if (sweep.empty()) {
            entries.push_back(base);
        } else {
            const auto eq = sweep.find('=');
            if (eq == std::string::npos || eq == 0)
                throw config_error("--sweep expects key=v1,v2,...");
            const std::string key = sweep.substr(0, eq);
            std::stringstream vals(sweep.substr(eq + 1));
            std::string v;
            while (std::getline(vals, v, ',')) {
                RunSpec entry = base;
                entry.name += "_" + sanitize(key + v);
                apply_sweep_value(entry, key, v);
                entries.push_back(std::move(entry));
            }
            if (entries.empty()) throw config_error("--sweep has no values");
        }
        // Every entry's full key set is validated before any run starts.
        for (const auto& entry : entries) (void)make_scenario(entry.scenario);
    } catch (const error& e) {
        std::cerr << "run: " << e.what() << "\n";
        return kExitUsage;
    }

    if (outdir.empty()) {
        const char* env = std::getenv("TVOPT_OUT_DIR");
        outdir = (env != nullptr && *env != '\0') ? env : ".";
    }
    std::error_code ec;
    fs::create_directories(outdir, ec);
    if (ec) {
        std::cerr << "run: cannot create output directory " << outdir << "\n";
        return kExitUsage;
    }

    // Sweep entries run concurrently; each writes only its own files.
    std::vector<std::future<RunOutcome>> futures;
    futures.reserve(entries.size());
    for (const auto& entry : entries)
        futures.push_back(std::async(std::launch::async, execute_run, entry, outdir, config_text));

    bool any_run_fail = false, any_usage = false, any_verdict = false;
    for (auto& f : futures) {
        const RunOutcome outcome = f.get();
        std::cout << outcome.message << "\n";
        any_run_fail |= outcome.code == kExitRunFailure;
        any_usage |= outcome.code == kExitUsage;
        any_verdict |= outcome.code == kExitVerdict;
    }
    if (any_run_fail) return kExitRunFailure;
    if (any_usage) return kExitUsage;
    if (any_verdict) return verdict_warn ? kExitOk : kExitVerdict;
    return kExitOk;
}

std::string sibling_report_path(const std::string& file) {
    if (file.size() > 4 && file.compare(file.size() - 4, 4, ".csv") == 0)
        return file.substr(0, file.size() - 4) + ".report.json";
    return file;
}

int cmd_report(const std::vector<std::string>& files, bool verdict_warn) {
    bool any_fail = false;
    for (const auto& file : files) {
        const std::string path = sibling_report_path(file);
        std::ifstream in(path);
        if (!in) {
            std::cerr << "report: cannot open " << path << "\n";
            return kExitUsage;
        }
        nlohmann::json j;
        try {
            in >> j;
            char line[256];
            std::snprintf(line, sizeof(line),
                          "%-40s final=%.6e steady(last 20%%)=%.6e verdicts %s",
                          (j.at("scenario").get<std::string>() + " [" +
                           j.at("algorithm").get<std::string>() + "]")
                              .c_str(),
                          j.at("final_tracking").get<double>(),
                          j.at("steady_state_mean").get<double>(),
                          j.at("all_hold").get<bool>() ? "hold" : "FAIL");
            std::cout << line << "\n";
            for (const auto& v : j.at("verdicts")) {
                const double margin =
                    v.at("worst_margin").is_null() ? 0.0 : v.at("worst_margin").get<double>();
                std::snprintf(line, sizeof(line), "    %-24s %-6s margin=%.3e",
                              v.at("name").get<std::string>().c_str(),
                              v.at("holds").get<bool>() ? "holds" : "FAILS", margin);
                std::cout << line << "\n";
            }
            any_fail |= !j.at("all_hold").get<bool>();
        } catch (const nlohmann::json::exception& e) {
            std::cerr << "report: corrupt report " << path << ": " << e.what() << "\n";
            return kExitUsage;
        }
    }
    return (any_fail && !verdict_warn) ? kExitVerdict : kExitOk;
}

// Fig. layout for position streams: one panel per snapshot step, anchors and
// true positions rotated to that step's pose, estimates from the record.
std::string localization_scatter(const std::string& stem, const CsvData& csv,
                                 const nlohmann::json& report) {
    const auto& meta = report.at("meta");
    const long N = static_cast<long>(meta.at("nodes").get<double>());
    const long NA = static_cast<long>(meta.at("anchors").get<double>());
    const double omega = meta.value("omega", 0.0);
    const double h = report.value("sampling_period", 1.0);

    std::vector<ScatterPanel> panels;
    for (long k : {2L, 4L, 6L, 8L, 32L, 64L}) {
        if (k > static_cast<long>(csv.iterates.size())) continue;
        const double ang = omega * h * static_cast<double>(k - 1);
        const double c = std::cos(ang), s = std::sin(ang);
        auto rotate = [&](double x, double y) {
            return std::make_pair(c * x - s * y, s * x + c * y);
        };

        ScatterPanel panel;
        panel.title = "k = " + std::to_string(k);
        ScatterGroup est{"estimate", {}, ScatterGroup::Marker::circle};
        ScatterGroup truth{"true position", {}, ScatterGroup::Marker::cross};
        ScatterGroup anchors{"anchor", {}, ScatterGroup::Marker::square};
        const Vec& row = csv.iterates[static_cast<std::size_t>(k - 1)];
        for (long i = 0; i < N && 2 * i + 1 < row.size(); ++i)
            est.points.emplace_back(row[2 * i], row[2 * i + 1]);
        for (long i = 0; i < N; ++i)
            truth.points.push_back(rotate(meta.at("node" + std::to_string(i) + "_x").get<double>(),
                                          meta.at("node" + std::to_string(i) + "_y").get<double>()));
        for (long j = 0; j < NA; ++j)
            anchors.points.push_back(
                rotate(meta.at("anchor" + std::to_string(j) + "_x").get<double>(),
                       meta.at("anchor" + std::to_string(j) + "_y").get<double>()));
        panel.groups = {est, truth, anchors};
        panels.push_back(std::move(panel));
    }
    if (panels.empty()) return "";
    return render_scatter_grid(stem + " positions", panels, 3);
}

int cmd_plot(const std::vector<std::string>& files, std::string out_path) {
    if (out_path.empty()) {
        const char* env = std::getenv("TVOPT_OUT_DIR");
        out_path = std::string((env != nullptr && *env != '\0') ? env : ".") + "/plot.svg";
    }
    try {
        LogPlotSpec plot;
        plot.title = "Tracking error";
        plot.x_label = "k";
        plot.y_label = "tracking error";

        struct PositionRun {
            std::string stem;
            std::string svg;
        };
        std::vector<PositionRun> position_runs;

        for (const auto& file : files) {
            const CsvData csv = read_record_csv(file);
            const std::string stem = fs::path(file).stem().string();

            CurveSeries curve;
            curve.label = stem;
            for (std::size_t i = 0; i < csv.k.size(); ++i) {
                curve.x.push_back(static_cast<double>(csv.k[i]));
                curve.y.push_back(csv.tracking_error[i]);
            }
            plot.series.push_back(curve);

            bool has_bound = false;
            for (double b : csv.bound_tracking) has_bound |= b > 0.0;
            if (has_bound) {
                CurveSeries bound;
                bound.label = stem + " bound";
                bound.dashed = true;
                for (std::size_t i = 0; i < csv.k.size(); ++i) {
                    bound.x.push_back(static_cast<double>(csv.k[i]));
                    bound.y.push_back(csv.bound_tracking[i]);
                }
                plot.series.push_back(bound);
            }

            std::ifstream rin(sibling_report_path(file));
            if (rin) {
                nlohmann::json report;
                try {
                    rin >> report;
                } catch (const nlohmann::json::exception&) {
                    report = nullptr;
                }
                if (report.is_object() && report.contains("meta") &&
                    report["meta"].contains("nodes")) {
                    const std::string svg = localization_scatter(stem, csv, report);
                    if (!svg.empty()) position_runs.push_back({stem, svg});
                }
            }
        }

        auto write_svg = [](const std::string& path, const std::string& content) {
            std::ofstream out(path);
            if (!out) throw config_error("plot: cannot open " + path);
            out << content;
            if (!out) throw config_error("plot: write failed for " + path);
            std::cout << "wrote " << path << "\n";
        };

        write_svg(out_path, render_log_plot(plot));

        std::string base = out_path;
        if (base.size() > 4 && base.compare(base.size() - 4, 4, ".svg") == 0)
            base = base.substr(0, base.size() - 4);
        for (const auto& pr : position_runs) {
            const std::string suffix =
                position_runs.size() > 1 ? "_" + sanitize(pr.stem) + "_positions.svg"
                                         : "_positions.svg";
            write_svg(base + suffix, pr.svg);
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "plot: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"running averaged-operator methods on time-varying convex problems"};
    app.require_subcommand(1);
    bool verdict_warn = false;
    app.add_flag("--verdict-warn", verdict_warn,
                 "report verdict failures as warnings (exit 0 unless a run fails)");

    std::string config_path, outdir, sweep, out_svg;
    std::uint64_t seed_override = 0;
    std::vector<std::string> report_files, plot_files;

    CLI::App* run = app.add_subcommand("run", "execute a scenario config");
    run->add_option("config", config_path, "config file (key = value lines)")->required();
    run->add_option("-o,--output", outdir, "output directory (default: $TVOPT_OUT_DIR or .)");
    run->add_option("--sweep", sweep, "key=v1,v2,... one concurrent run per value");
    CLI::Option* seed_opt = run->add_option("--seed", seed_override, "override the config seed");
    run->fallthrough();

    CLI::App* report = app.add_subcommand("report", "summarize run reports");
    report->add_option("files", report_files, "report JSON or record CSV files")->required();
    report->fallthrough();

    CLI::App* plot = app.add_subcommand("plot", "render record CSVs to SVG");
    plot->add_option("files", plot_files, "record CSV files")->required();
    plot->add_option("-o,--output", out_svg, "output SVG path");
    plot->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (run->parsed())
        return cmd_run(config_path, outdir, sweep, seed_opt->count() > 0, seed_override,
                       verdict_warn);
    if (report->parsed()) return cmd_report(report_files, verdict_warn);
    return cmd_plot(plot_files, out_svg);
}
