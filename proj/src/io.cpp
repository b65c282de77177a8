#include "odefit/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <system_error>
#include <vector>

namespace odefit {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::string position(std::size_t row, std::size_t column) {
    return "row " + std::to_string(row) + ", column " + std::to_string(column);
}

void write_row_values(std::ostream& os, double t, std::span<const double> values) {
    os << format_double(t);
    for (double v : values) os << ',' << format_double(v);
    os << '\n';
}

} // namespace

CsvError::CsvError(std::size_t row, std::size_t column, const std::string& what)
    : std::runtime_error(what), row_(row), column_(column) {}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

Dataset read_dataset_csv(std::istream& in, std::size_t expected_state_dim) {
    std::string line;
    if (!std::getline(in, line)) throw CsvError(1, 0, "empty CSV input, expected header t,x1,...");

    const auto header = split(line);
    if (header.empty() || header[0] != "t")
        throw CsvError(1, 1, "header must start with 't'");
    const std::size_t dim = header.size() - 1;
    if (dim == 0) throw CsvError(1, 0, "header has no state columns");
    for (std::size_t i = 1; i < header.size(); ++i) {
        const std::string expected = "x" + std::to_string(i);
        if (header[i] != expected)
            throw CsvError(1, i + 1, position(1, i + 1) + ": expected header '" + expected +
                                         "', found '" + std::string(header[i]) + "'");
    }
    if (expected_state_dim != 0 && dim != expected_state_dim)
        throw CsvError(1, 0, "CSV has " + std::to_string(dim) + " state columns, problem expects " +
                                 std::to_string(expected_state_dim));

    std::vector<double> times;
    std::vector<double> obs;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split(line);
        if (cells.size() != dim + 1)
            throw CsvError(row, 0, "row " + std::to_string(row) + ": expected " +
                                       std::to_string(dim + 1) + " columns, found " +
                                       std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double value = 0.0;
            const auto cell = cells[c];
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() ||
                !std::isfinite(value))
                throw CsvError(row, c + 1, position(row, c + 1) + " ('" + std::string(header[c]) +
                                               "'): '" + std::string(cell) +
                                               "' is not a finite number");
            if (c == 0) {
                if (!times.empty() && !(value > times.back()))
                    throw CsvError(row, 1, position(row, 1) + ": times must be strictly increasing");
                times.push_back(value);
            } else {
                obs.push_back(value);
            }
        }
    }
    if (times.empty()) throw CsvError(row, 0, "CSV contains no data rows");
    return Dataset::with_unit_weights(std::move(times), std::move(obs), dim);
}

Dataset load_dataset_csv(const std::filesystem::path& path, std::size_t expected_state_dim) {
    std::ifstream in(path);
    if (!in) throw CsvError(0, 0, "cannot open " + path.string());
    return read_dataset_csv(in, expected_state_dim);
}

void write_dataset_csv(std::ostream& os, const Dataset& data) {
    os << 't';
    for (std::size_t i = 1; i <= data.state_dim; ++i) os << ",x" << i;
    os << '\n';
    for (std::size_t j = 0; j < data.num_times(); ++j)
        write_row_values(os, data.times[j],
                         std::span<const double>(data.observations).subspan(j * data.state_dim,
                                                                            data.state_dim));
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << 't';
    for (std::size_t i = 1; i <= traj.state_dim(); ++i) os << ",x" << i;
    os << '\n';
    for (std::size_t k = 0; k < traj.num_points(); ++k)
        write_row_values(os, traj.times()[k], traj.row(k));
}

void write_overlay_csv(std::ostream& os, const Trajectory& reference,
                       const Trajectory& estimate) {
    if (reference.num_points() != estimate.num_points() ||
        reference.state_dim() != estimate.state_dim())
        throw std::invalid_argument("overlay trajectories differ in shape");
    const std::size_t d = reference.state_dim();
    os << 't';
    for (std::size_t i = 1; i <= d; ++i) os << ",true_x" << i;
    for (std::size_t i = 1; i <= d; ++i) os << ",est_x" << i;
    os << '\n';
    for (std::size_t k = 0; k < reference.num_points(); ++k) {
        os << format_double(reference.times()[k]);
        for (double v : reference.row(k)) os << ',' << format_double(v);
        for (double v : estimate.row(k)) os << ',' << format_double(v);
        os << '\n';
    }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

} // namespace odefit
