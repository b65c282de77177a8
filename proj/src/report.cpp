#include "odefit/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "odefit/io.hpp"

namespace odefit {

namespace {

using nlohmann::ordered_json;

ordered_json number(double v) {
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

ordered_json numbers(const std::vector<double>& v) {
    ordered_json arr = ordered_json::array();
    for (double x : v) arr.push_back(number(x));
    return arr;
}

std::string cell(double v) {
    if (!std::isfinite(v)) return "diverged";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

} // namespace

std::string report_to_json(const BenchmarkReport& report, bool include_wall_time, int indent) {
    ordered_json doc;
    doc["problem"] = report.problem;
    doc["seed"] = report.seed;
    doc["noise_variance"] = report.noise_variance;
    doc["noise_model"] = "additive gaussian on observed states, variance parameterization";
    doc["initial_guess_spread"] = report.initial_guess_spread;
    doc["rng"] = report.rng;
    doc["param_names"] = report.param_names;
    doc["true_params"] = numbers(report.true_params);
    doc["p0"] = numbers(report.p0);

    ordered_json opts = ordered_json::object();
    for (const auto& o : report.outcomes) {
        ordered_json entry;
        entry["params"] = numbers(o.params);
        entry["cost"] = number(o.cost);
        entry["rmse"] = number(o.rmse);
        entry["iterations"] = o.iterations;
        entry["termination"] = std::string(to_string(o.termination));
        if (include_wall_time) entry["wall_ms"] = o.wall_ms;
        if (!o.note.empty()) entry["note"] = o.note;
        opts[std::string(to_string(o.kind))] = std::move(entry);
    }
    doc["optimizers"] = std::move(opts);
    return doc.dump(indent) + "\n";
}

std::string format_table(const BenchmarkReport& report) {
    constexpr int name_w = 10, col_w = 21;
    std::ostringstream os;
    char buf[64];

    os << "Parameter identification: " << report.problem << " (noise variance "
       << format_double(report.noise_variance) << ", seed " << report.seed << ")\n";
    std::snprintf(buf, sizeof(buf), "%-*s%-*s", name_w, "Parameter", col_w, "True Value");
    os << buf;
    for (const auto& o : report.outcomes) {
        std::snprintf(buf, sizeof(buf), "%-*s", col_w, std::string(display_name(o.kind)).c_str());
        os << buf;
    }
    os << '\n';

    for (std::size_t k = 0; k < report.true_params.size(); ++k) {
        const std::string label = k < report.param_names.size() ? report.param_names[k]
                                                                : "p" + std::to_string(k + 1);
        std::snprintf(buf, sizeof(buf), "%-*s%-*s", name_w, label.c_str(), col_w,
                      cell(report.true_params[k]).c_str());
        os << buf;
        for (const auto& o : report.outcomes) {
            std::snprintf(buf, sizeof(buf), "%-*s", col_w, cell(o.params[k]).c_str());
            os << buf;
        }
        os << '\n';
    }

    std::snprintf(buf, sizeof(buf), "%-*s%-*s", name_w, "RMSE", col_w, "-");
    os << buf;
    for (const auto& o : report.outcomes) {
        std::snprintf(buf, sizeof(buf), "%-*s", col_w, cell(o.rmse).c_str());
        os << buf;
    }
    os << '\n';

    os << "Termination";
    for (const auto& o : report.outcomes)
        os << "  " << to_string(o.kind) << '=' << to_string(o.termination) << " ("
           << o.iterations << " it)";
    os << '\n';
    return os.str();
}

ReportFiles write_report_files(const BenchmarkReport& report, const std::filesystem::path& dir) {
    ReportFiles files;
    files.json = dir / "report.json";
    files.table = dir / "table.txt";
    write_file_atomic(files.json, report_to_json(report));
    write_file_atomic(files.table, format_table(report));
    for (const auto& o : report.outcomes) {
        if (!o.trajectory) continue;
        std::ostringstream os;
        write_overlay_csv(os, report.reference, *o.trajectory);
        auto path = dir / ("overlay_" + std::string(to_string(o.kind)) + ".csv");
        write_file_atomic(path, os.str());
        files.overlays.push_back(std::move(path));
    }
    return files;
}

} // namespace odefit
