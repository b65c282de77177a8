#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "odefit/experiments.hpp"

namespace odefit {

/// Report JSON: problem, seed, noise_variance, initial_guess_spread, rng,
/// param_names, true_params, p0 and an `optimizers` object keyed by
/// optimizer name with params, cost, rmse, iterations, termination, wall_ms.
/// Non-finite numbers are written as null.
std::string report_to_json(const BenchmarkReport& report, bool include_wall_time = true,
                           int indent = 2);

/// Fixed-width table: one row per parameter plus an RMSE row; columns are
/// the true value followed by each optimizer in canonical order.
std::string format_table(const BenchmarkReport& report);

/// Files written by write_report_files, relative to its directory.
struct ReportFiles {
    std::filesystem::path json;
    std::filesystem::path table;
    std::vector<std::filesystem::path> overlays;
};

/// Writes report.json, table.txt and overlay_<optimizer>.csv into `dir`.
ReportFiles write_report_files(const BenchmarkReport& report, const std::filesystem::path& dir);

} // namespace odefit
