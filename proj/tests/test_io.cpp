#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "nlohmann/json.hpp"
#include "tvopt/analysis.hpp"
#include "tvopt/config.hpp"
#include "tvopt/errors.hpp"
#include "tvopt/oracle.hpp"
#include "tvopt/problems.hpp"
#include "tvopt/record_io.hpp"
#include "tvopt/running.hpp"

using namespace tvopt;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("tvopt_io_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

struct Pipeline {
    ProblemStream stream;
    RunRecord record;
    BoundReport report;
};

Pipeline run_pipeline(long horizon = 30) {
    ScenarioConfig c;
    c.family = "moving_quadratic";
    c.seed = 5;
    c.horizon = horizon;
    c.params["drift"] = 0.01;
    Pipeline p;
    p.stream = make_scenario(c);
    AlgorithmParams params;
    params.lambda = 0.5;
    p.record = run_scenario(p.stream, "projected_gradient", params);
    auto oracle = solution_trajectory(p.stream, "projected_gradient");
    AnalysisOptions opt;
    opt.X = 5.0;
    p.report = measure_and_verify(p.record, oracle, p.stream, opt);
    return p;
}

}  // namespace

TEST_CASE("config parser flattens sections and reports line numbers") {
    ConfigFile cfg = ConfigFile::parse_string(
        "# run setup\n"
        "scenario = moving_quadratic\n"
        "horizon = 200  # trailing comment\n"
        "\n"
        "[params]\n"
        "drift = 0.02\n"
        "n = 3\n");
    CHECK(cfg.get("scenario") == "moving_quadratic");
    CHECK(cfg.get_int("horizon", 0) == 200);
    CHECK(cfg.get_num("params.drift", 0.0) == 0.02);
    CHECK(cfg.get_int("params.n", 0) == 3);
    CHECK(cfg.has("params.drift"));
    CHECK_FALSE(cfg.has("drift"));
    CHECK(cfg.get("missing", "fallback") == "fallback");
    CHECK(cfg.get_num("missing", 1.5) == 1.5);

    using doctest::Contains;
    CHECK_THROWS_WITH_AS(ConfigFile::parse_string("a = 1\nbroken line\n"),
                         Contains("line 2"), config_error);
    CHECK_THROWS_WITH_AS(ConfigFile::parse_string("[sec\nx = 1\n"),
                         Contains("line 1"), config_error);
    CHECK_THROWS_WITH_AS(ConfigFile::parse_string("x = 1\nx = 2\n"),
                         Contains("duplicate"), config_error);
    CHECK_THROWS_WITH_AS(ConfigFile::parse_string("= 3\n"), Contains("empty key"), config_error);

    ConfigFile bad = ConfigFile::parse_string("x = notanumber\ny = 1.5\n");
    CHECK_THROWS_AS(bad.get_num("x", 0.0), config_error);
    CHECK_THROWS_AS(bad.get_int("y", 0), config_error);
    CHECK_THROWS_AS(ConfigFile::parse_file("/nonexistent/config.cfg"), config_error);
}

TEST_CASE("trajectory CSV round-trips every value exactly") {
    TempDir tmp;
    Pipeline p = run_pipeline();
    const std::string path = tmp.file("run.csv");
    write_record_csv(path, p.record, &p.report, p.stream.h);

    CsvData csv = read_record_csv(path);
    const std::size_t rows = p.record.iterates.size();
    REQUIRE(csv.k.size() == rows);
    for (std::size_t i = 0; i < rows; ++i) {
        CHECK(csv.k[i] == static_cast<long>(i) + 1);
        CHECK(csv.t_k[i] == p.stream.h * static_cast<double>(i + 1));
        REQUIRE(csv.iterates[i].size() == p.record.iterates[i].size());
        // %.17g is lossless for doubles: bitwise equality after the round trip.
        CHECK((csv.iterates[i] - p.record.iterates[i]).norm() == 0.0);
        CHECK(csv.tracking_error[i] == p.report.tracking[i]);
    }
    for (std::size_t i = 0; i + 1 < rows; ++i) {
        CHECK(csv.t_residual[i] == p.record.residuals[i].t_residual);
        CHECK(csv.g_residual[i] == p.record.residuals[i].g_residual);
        CHECK(csv.bound_fpr_avg[i] == p.report.bound_fpr_avg[i]);
    }
    // Row T+1 has no step residual: zero-filled by convention.
    CHECK(csv.t_residual.back() == 0.0);
    CHECK(csv.g_residual.back() == 0.0);
    CHECK(csv.bound_fpr_avg.back() == 0.0);

    SUBCASE("a second write is byte-identical") {
        const std::string again = tmp.file("run2.csv");
        write_record_csv(again, p.record, &p.report, p.stream.h);
        CHECK(slurp(path) == slurp(again));
    }

    SUBCASE("an aborted run writes zeroed derived columns") {
        const std::string partial = tmp.file("partial.csv");
        write_record_csv(partial, p.record, nullptr, p.stream.h);
        CsvData pc = read_record_csv(partial);
        REQUIRE(pc.k.size() == rows);
        for (double v : pc.tracking_error) CHECK(v == 0.0);
        for (double v : pc.bound_tracking) CHECK(v == 0.0);
        CHECK((pc.iterates[2] - p.record.iterates[2]).norm() == 0.0);
    }
}

TEST_CASE("corrupt CSV inputs are rejected with located errors") {
    TempDir tmp;
    Pipeline p = run_pipeline(10);
    const std::string path = tmp.file("run.csv");
    write_record_csv(path, p.record, &p.report, p.stream.h);

    using doctest::Contains;
    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_record_csv(tmp.file("absent.csv")), config_error);
    }
    SUBCASE("mangled header") {
        std::string text = slurp(path);
        text.replace(0, 1, "q");
        std::ofstream(path, std::ios::binary) << text;
        CHECK_THROWS_AS(read_record_csv(path), config_error);
    }
    SUBCASE("non-numeric cell") {
        std::string text = slurp(path);
        const auto pos = text.find('\n', text.find('\n') + 1);  // into row 2
        std::string broken = text.substr(0, pos + 1) + "2,oops,0,0,0,0,0,0,0,0\n";
        std::ofstream(path, std::ios::binary) << broken;
        CHECK_THROWS_WITH_AS(read_record_csv(path), Contains("row"), config_error);
    }
    SUBCASE("short row") {
        std::string text = slurp(path);
        std::ofstream(path, std::ios::binary) << text << "11,1\n";
        CHECK_THROWS_AS(read_record_csv(path), config_error);
    }
}

TEST_CASE("the JSON report carries the summary schema") {
    Pipeline p = run_pipeline();
    const std::string text = report_json_string(p.record, p.report, p.stream);
    nlohmann::json j = nlohmann::json::parse(text);

    CHECK(j["tool_version"] == kToolVersion);
    CHECK(j["algorithm"] == "projected_gradient");
    CHECK(j["scenario"] == "moving_quadratic");
    CHECK(j["seed"] == 5);
    CHECK(j["lambda"] == 0.5);
    CHECK(j["horizon"] == 30);
    CHECK(j["variation"]["delta_hat"].get<double>() == doctest::Approx(0.01).epsilon(1e-6));
    CHECK(j["X"] == 5.0);
    CHECK(j["a_bar"].get<double>() > 0.0);
    CHECK(j["final_tracking"].get<double>() == p.report.tracking.back());
    CHECK(j["tracking_asymptote"].get<double>() == p.report.tracking_asymptote);
    REQUIRE(j["verdicts"].is_array());
    CHECK(j["verdicts"].size() == p.report.verdicts.size());
    for (std::size_t i = 0; i < p.report.verdicts.size(); ++i) {
        CHECK(j["verdicts"][i]["name"] == p.report.verdicts[i].name);
        CHECK(j["verdicts"][i]["holds"] == p.report.verdicts[i].holds);
    }
    CHECK(j["all_hold"] == p.report.all_hold);
    CHECK(j["meta"].is_object());

    // steady_state_mean averages the last fifth of the tracking curve.
    const std::size_t K = p.report.tracking.size();
    const std::size_t tail = std::max<std::size_t>(1, K / 5);
    double mean = 0.0;
    for (std::size_t i = K - tail; i < K; ++i) mean += p.report.tracking[i];
    mean /= static_cast<double>(tail);
    CHECK(j["steady_state_mean"].get<double>() == doctest::Approx(mean).epsilon(1e-12));

    SUBCASE("non-finite metrics serialize as null") {
        BoundReport inf_rep = p.report;
        inf_rep.X = std::numeric_limits<double>::infinity();
        inf_rep.tracking_asymptote = std::numeric_limits<double>::quiet_NaN();
        nlohmann::json ji =
            nlohmann::json::parse(report_json_string(p.record, inf_rep, p.stream));
        CHECK(ji["X"].is_null());
        CHECK(ji["tracking_asymptote"].is_null());
    }

    SUBCASE("write_report_json emits the same bytes") {
        TempDir tmp;
        const std::string path = tmp.file("report.json");
        write_report_json(path, p.record, p.report, p.stream);
        CHECK(slurp(path) == text);
    }
}

TEST_CASE("sha256 matches the published test vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("the manifest ties outputs to the config hash") {
    TempDir tmp;
    const std::string cfg_text = "scenario = moving_quadratic\nhorizon = 30\n";
    const std::string path = tmp.file("manifest.json");
    write_manifest(path, cfg_text, 42, "moving_quadratic", {"run.csv", "run.report.json"});
    nlohmann::json j = nlohmann::json::parse(slurp(path));
    CHECK(j["tool_version"] == kToolVersion);
    CHECK(j["config_sha256"] == sha256_hex(cfg_text));
    CHECK(j["seed"] == 42);
    CHECK(j["scenario"] == "moving_quadratic");
    REQUIRE(j["outputs"].is_array());
    CHECK(j["outputs"][0] == "run.csv");
    CHECK(j.count("error") == 0);

    write_manifest(path, cfg_text, 42, "moving_quadratic", {"run.csv"}, "diverged at step 7");
    nlohmann::json je = nlohmann::json::parse(slurp(path));
    CHECK(je["error"] == "diverged at step 7");
}
