#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dsde/sdde.hpp"
#include "dsde/windows.hpp"

namespace dsde {

// Shortest round-trip decimal form; all CSV output goes through this so
// repeated runs are byte-identical and read-back is value-exact.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, const std::string& text);

// Long path CSV: header path_id,t,x1,...,xd with one row per grid point in
// [-tau, horizon]. write_paths_csv with per_path=true instead writes
// <stem>_NNN.csv files with header t,x1,...,xd.
void write_paths_csv(const std::filesystem::path& file, const PathSet& paths);
void write_paths_csv_per_path(const std::filesystem::path& directory, const std::string& stem,
                              const PathSet& paths);

// Reads either layout (path_id column optional). The grid is inferred from
// the time column: equidistant within 1e-9, memory length = number of
// negative times. Throws NonUniformSampling / MissingColumns.
PathSet read_paths_csv(const std::filesystem::path& file);

// Brownian audit CSV: path_id,k,j,dW.
void write_increments_csv(const std::filesystem::path& file, const PathSet& paths);

// Windowed CSV: t, x<coord>_lag<i> columns (oldest lag first), then target
// columns y<coord> and is_ood.
void write_windows_csv(const std::filesystem::path& file, const WindowSet& set);
WindowSet read_windows_csv(const std::filesystem::path& file);

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<double> values;  // rows x columns
    std::size_t rows = 0;

    double cell(std::size_t r, std::size_t c) const { return values[r * columns.size() + c]; }
    long column_index(const std::string& name) const;  // -1 if absent
};
CsvTable read_csv(const std::filesystem::path& file);

std::uint64_t fnv1a(std::string_view text);

}  // namespace dsde
