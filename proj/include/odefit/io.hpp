#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "odefit/estimation.hpp"
#include "odefit/ode.hpp"

namespace odefit {

/// Malformed CSV input. Row and column are 1-based (row 1 is the header);
/// 0 means "not applicable".
class CsvError : public std::runtime_error {
public:
    CsvError(std::size_t row, std::size_t column, const std::string& what);

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

/// Reads `t,x1,...,xd`. With expected_state_dim > 0 the header must have
/// exactly that many state columns. Weights are set to 1.
Dataset read_dataset_csv(std::istream& in, std::size_t expected_state_dim = 0);
/// Throws CsvError (row 0) if the file cannot be opened.
Dataset load_dataset_csv(const std::filesystem::path& path,
                         std::size_t expected_state_dim = 0);

void write_dataset_csv(std::ostream& os, const Dataset& data);
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// `t,true_x1..true_xd,est_x1..est_xd` on the shared time axis.
void write_overlay_csv(std::ostream& os, const Trajectory& reference,
                       const Trajectory& estimate);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Writes to a sibling temporary and renames over `path`, creating parent
/// directories as needed.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

} // namespace odefit
