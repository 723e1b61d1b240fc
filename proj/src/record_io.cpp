#include "tvopt/record_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tvopt/errors.hpp"

namespace tvopt {
namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// JSON has no inf/nan literals; non-finite summary scalars become null.
nlohmann::json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    return out;
}

double parse_field(const std::string& s, const std::string& path, std::size_t row) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw config_error(path + ": row " + std::to_string(row) + ": bad numeric field '" + s +
                           "'");
    }
}

}  // namespace

void write_record_csv(const std::string& path, const RunRecord& record, const BoundReport* report,
                      double h) {
    if (record.iterates.empty()) throw parameter_error("write_record_csv: record has no iterates");
    std::ofstream out(path);
    if (!out) throw config_error("write_record_csv: cannot open " + path);

    const long n = record.iterates.front().size();
    out << "k,t_k";
    for (long j = 0; j < n; ++j) out << ",x_" << j;
    out << ",t_residual,g_residual,tracking_error,objective_gap,bound_tracking,bound_fpr_avg\n";

    auto at = [](const std::vector<double>& v, std::size_t i) {
        return i < v.size() ? v[i] : 0.0;
    };

    for (std::size_t i = 0; i < record.iterates.size(); ++i) {
        const long k = static_cast<long>(i) + 1;
        out << k << ',' << fmt(h * static_cast<double>(k));
        for (long j = 0; j < n; ++j) out << ',' << fmt(record.iterates[i][j]);
        const double tres = i < record.residuals.size() ? record.residuals[i].t_residual : 0.0;
        const double gres = i < record.residuals.size() ? record.residuals[i].g_residual : 0.0;
        out << ',' << fmt(tres) << ',' << fmt(gres);
        if (report) {
            out << ',' << fmt(at(report->tracking, i)) << ',' << fmt(at(report->objective_gap, i))
                << ',' << fmt(at(report->bound_tracking, i)) << ','
                << fmt(at(report->bound_fpr_avg, i));
        } else {
            out << ",0,0,0,0";
        }
        out << '\n';
    }
    if (!out) throw config_error("write_record_csv: write failed for " + path);
}

CsvData read_record_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("read_record_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw config_error("read_record_csv: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_line(line);
    long n = 0;
    for (const auto& col : header)
        if (col.rfind("x_", 0) == 0) ++n;
    const std::size_t expected = 8 + static_cast<std::size_t>(n);
    if (header.size() != expected || header.empty() || header.front() != "k")
        throw config_error("read_record_csv: unrecognized header in " + path);

    CsvData data;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto fields = split_line(line);
        if (fields.size() != expected)
            throw config_error("read_record_csv: row " + std::to_string(row) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(expected));
        std::size_t c = 0;
        data.k.push_back(static_cast<long>(parse_field(fields[c++], path, row)));
        data.t_k.push_back(parse_field(fields[c++], path, row));
        Vec x(n);
        for (long j = 0; j < n; ++j) x[j] = parse_field(fields[c++], path, row);
        data.iterates.push_back(std::move(x));
        data.t_residual.push_back(parse_field(fields[c++], path, row));
        data.g_residual.push_back(parse_field(fields[c++], path, row));
        data.tracking_error.push_back(parse_field(fields[c++], path, row));
        data.objective_gap.push_back(parse_field(fields[c++], path, row));
        data.bound_tracking.push_back(parse_field(fields[c++], path, row));
        data.bound_fpr_avg.push_back(parse_field(fields[c++], path, row));
    }
    if (data.k.empty()) throw config_error("read_record_csv: no data rows in " + path);
    return data;
}

std::string report_json_string(const RunRecord& record, const BoundReport& report,
                               const ProblemStream& stream) {
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["algorithm"] = record.algorithm;
    j["scenario"] = record.scenario;
    j["seed"] = record.seed;
    j["lambda"] = record.lambda;
    j["horizon"] = record.residuals.size();
    j["sampling_period"] = stream.h;
    j["wall_seconds"] = record.wall_seconds;

    j["variation"] = {{"delta_hat", report.variation.delta_hat},
                      {"d_hat", report.variation.d_hat},
                      {"sigma_hat", report.variation.sigma_hat}};
    j["X"] = finite_or_null(report.X);
    j["init_dist"] = report.init_dist;
    j["a_bar"] = report.a_bar;
    j["tracking_asymptote"] = finite_or_null(report.tracking_asymptote);
    j["fpr_asymptote"] = finite_or_null(report.fpr_asymptote);

    j["final_tracking"] = report.tracking.empty() ? 0.0 : report.tracking.back();
    const std::size_t K = report.tracking.size();
    const std::size_t tail = std::max<std::size_t>(1, K / 5);
    double steady = 0.0;
    if (K > 0) {
        for (std::size_t i = K - tail; i < K; ++i) steady += report.tracking[i];
        steady /= static_cast<double>(tail);
    }
    j["steady_state_mean"] = steady;
    j["final_g_residual"] =
        record.residuals.empty() ? 0.0 : record.residuals.back().g_residual;
    j["final_weighted_fpr_avg"] =
        report.weighted_fpr_avg.empty() ? 0.0 : report.weighted_fpr_avg.back();

    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& v : report.verdicts)
        verdicts.push_back(
            {{"name", v.name}, {"holds", v.holds}, {"worst_margin", finite_or_null(v.worst_margin)}});
    j["verdicts"] = verdicts;
    j["all_hold"] = report.all_hold;

    nlohmann::json meta = nlohmann::json::object();
    for (const auto& [key, value] : stream.meta) meta[key] = finite_or_null(value);
    j["meta"] = meta;
    return j.dump(2) + "\n";
}

void write_report_json(const std::string& path, const RunRecord& record, const BoundReport& report,
                       const ProblemStream& stream) {
    std::ofstream out(path);
    if (!out) throw config_error("write_report_json: cannot open " + path);
    out << report_json_string(record, report, stream);
    if (!out) throw config_error("write_report_json: write failed for " + path);
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw numerical_error("sha256_hex: digest failed");
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        char buf[3];
        std::snprintf(buf, sizeof(buf), "%02x", md[i]);
        hex += buf;
    }
    return hex;
}

void write_manifest(const std::string& path, const std::string& config_text, std::uint64_t seed,
                    const std::string& scenario, const std::vector<std::string>& outputs,
                    const std::string& error) {
    nlohmann::json j;
    j["tool_version"] = kToolVersion;
    j["config_sha256"] = sha256_hex(config_text);
    j["seed"] = seed;
    j["scenario"] = scenario;
    j["outputs"] = outputs;
    if (!error.empty()) j["error"] = error;
    std::ofstream out(path);
    if (!out) throw config_error("write_manifest: cannot open " + path);
    out << j.dump(2) << "\n";
    if (!out) throw config_error("write_manifest: write failed for " + path);
}

}  // namespace tvopt
