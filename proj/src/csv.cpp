#include "dsde/csv.hpp"

#include <charconv>
#include <limits>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dsde {

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string read_text_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + file.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text_file(const std::filesystem::path& file, const std::string& text) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + file.string());
    out << text;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            parts.push_back(line.substr(start));
            break;
        }
        parts.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    if (!parts.empty() && !parts.back().empty() && parts.back().back() == '\r')
        parts.back().pop_back();
    return parts;
}

double parse_double(const std::string& text) {
    if (text.empty()) return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw ConfigError("bad numeric field '" + text + "'");
    return v;
}

std::string path_row(const Path& path, long k) {
    std::string row = format_double(path.grid.time(k));
    for (int j = 0; j < path.dim; ++j) {
        row += ',';
        row += format_double(path.value(k, j));
    }
    return row;
}

}  // namespace

void write_paths_csv(const std::filesystem::path& file, const PathSet& paths) {
    std::string text = "path_id,t";
    for (int j = 1; j <= paths.dim; ++j) text += ",x" + std::to_string(j);
    text += '\n';
    for (std::size_t i = 0; i < paths.paths.size(); ++i) {
        const Path& path = paths.paths[i];
        for (long k = -paths.grid.lag_points; k <= paths.grid.step_count; ++k) {
            text += std::to_string(i);
            text += ',';
            text += path_row(path, k);
            text += '\n';
        }
    }
    write_text_file(file, text);
}

void write_paths_csv_per_path(const std::filesystem::path& directory, const std::string& stem,
                              const PathSet& paths) {
    std::filesystem::create_directories(directory);
    for (std::size_t i = 0; i < paths.paths.size(); ++i) {
        std::string text = "t";
        for (int j = 1; j <= paths.dim; ++j) text += ",x" + std::to_string(j);
        text += '\n';
        const Path& path = paths.paths[i];
        for (long k = -paths.grid.lag_points; k <= paths.grid.step_count; ++k) {
            text += path_row(path, k);
            text += '\n';
        }
        char name[32];
        std::snprintf(name, sizeof(name), "%s_%04zu.csv", stem.c_str(), i);
        write_text_file(directory / name, text);
    }
}

PathSet read_paths_csv(const std::filesystem::path& file) {
    const CsvTable table = read_csv(file);
    const long t_col = table.column_index("t");
    if (t_col < 0) throw MissingColumns("path CSV needs a 't' column");
    const long id_col = table.column_index("path_id");
    std::vector<long> value_cols;
    for (int j = 1;; ++j) {
        const long c = table.column_index("x" + std::to_string(j));
        if (c < 0) break;
        value_cols.push_back(c);
    }
    if (value_cols.empty()) throw MissingColumns("path CSV needs x1,... value columns");
    const int dim = static_cast<int>(value_cols.size());

    // group rows by path id (single path when the column is absent)
    std::vector<std::pair<long, std::size_t>> order;  // (path_id, row)
    for (std::size_t r = 0; r < table.rows; ++r) {
        const long id = id_col >= 0 ? static_cast<long>(table.cell(r, id_col)) : 0;
        order.emplace_back(id, r);
    }
    std::stable_sort(order.begin(), order.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::vector<std::vector<std::size_t>> groups;
    long current = order.empty() ? 0 : order.front().first - 1;
    for (const auto& [id, row] : order) {
        if (groups.empty() || id != current) {
            groups.emplace_back();
            current = id;
        }
        groups.back().push_back(row);
    }
    if (groups.empty()) throw ConfigError("path CSV has no rows");

    // grid inference from the first path's time column
    const auto& first = groups.front();
    if (first.size() < 2) throw NonUniformSampling("need at least two grid points");
    const double dt = table.cell(first[1], t_col) - table.cell(first[0], t_col);
    if (!(dt > 0.0)) throw NonUniformSampling("time column must increase");
    long lag_points = 0;
    for (std::size_t i = 0; i < first.size(); ++i) {
        const double t = table.cell(first[i], t_col);
        if (i > 0) {
            const double diff = t - table.cell(first[i - 1], t_col);
            if (std::abs(diff - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
                throw NonUniformSampling("time column is not equidistant");
        }
        if (t < -1e-12) ++lag_points;
    }
    const long step_count = static_cast<long>(first.size()) - lag_points - 1;
    if (step_count < 1) throw NonUniformSampling("no simulated points after t = 0");

    PathSet set;
    set.grid = make_time_grid(static_cast<double>(lag_points) * dt,
                              static_cast<double>(step_count) * dt, dt);
    set.dim = dim;
    for (const auto& group : groups) {
        if (group.size() != first.size())
            throw NonUniformSampling("paths have differing grid sizes");
        Path path{set.grid, dim, {}};
        path.values.reserve(group.size() * dim);
        for (std::size_t row : group)
            for (long c : value_cols) path.values.push_back(table.cell(row, c));
        set.paths.push_back(std::move(path));
    }
    return set;
}

void write_increments_csv(const std::filesystem::path& file, const PathSet& paths) {
    std::string text = "path_id,k,j,dW\n";
    for (std::size_t i = 0; i < paths.increments.size(); ++i) {
        const BrownianIncrements& inc = paths.increments[i];
        for (long k = 1; k <= inc.steps; ++k)
            for (int j = 0; j < inc.dim; ++j) {
                text += std::to_string(i);
                text += ',';
                text += std::to_string(k);
                text += ',';
                text += std::to_string(j + 1);
                text += ',';
                text += format_double(inc.at(k, j));
                text += '\n';
            }
    }
    write_text_file(file, text);
}

void write_windows_csv(const std::filesystem::path& file, const WindowSet& set) {
    std::string text = "t";
    for (int c = 1; c <= set.dim; ++c)
        for (int l = 1; l <= set.lags; ++l)
            text += ",x" + std::to_string(c) + "_lag" + std::to_string(l);
    for (int c = 1; c <= set.dim; ++c) text += ",y" + std::to_string(c);
    text += ",is_ood\n";
    for (std::size_t r = 0; r < set.rows(); ++r) {
        text += format_double(set.times[r]);
        const auto win = set.window(r);
        for (int c = 0; c < set.dim; ++c)
            for (int l = 0; l < set.lags; ++l) {
                text += ',';
                text += format_double(win[static_cast<std::size_t>(l) * set.dim + c]);
            }
        for (double y : set.target(r)) {
            text += ',';
            text += format_double(y);
        }
        text += ',';
        text += set.ood_mask.empty() ? "0" : std::to_string(static_cast<int>(set.ood_mask[r]));
        text += '\n';
    }
    write_text_file(file, text);
}

WindowSet read_windows_csv(const std::filesystem::path& file) {
    const CsvTable table = read_csv(file);
    WindowSet set;
    int dim = 0, lags = 0;
    while (table.column_index("y" + std::to_string(dim + 1)) >= 0) ++dim;
    while (table.column_index("x1_lag" + std::to_string(lags + 1)) >= 0) ++lags;
    if (dim == 0 || lags == 0 || table.column_index("t") < 0)
        throw MissingColumns("window CSV needs t, x<c>_lag<l> and y<c> columns");
    set.dim = dim;
    set.lags = lags;
    std::vector<double> window(static_cast<std::size_t>(lags) * dim), target(dim);
    const long ood_col = table.column_index("is_ood");
    for (std::size_t r = 0; r < table.rows; ++r) {
        for (int c = 0; c < dim; ++c)
            for (int l = 0; l < lags; ++l)
                window[static_cast<std::size_t>(l) * dim + c] = table.cell(
                    r, table.column_index("x" + std::to_string(c + 1) + "_lag" +
                                          std::to_string(l + 1)));
        for (int c = 0; c < dim; ++c)
            target[c] = table.cell(r, table.column_index("y" + std::to_string(c + 1)));
        set.append(table.cell(r, table.column_index("t")), window, target, 0, 0);
        if (ood_col >= 0)
            set.ood_mask.push_back(table.cell(r, ood_col) != 0.0 ? 1 : 0);
    }
    return set;
}

long CsvTable::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<long>(i);
    return -1;
}

CsvTable read_csv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open " + file.string());
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("empty CSV " + file.string());
    table.columns = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto parts = split_line(line);
        if (parts.size() != table.columns.size())
            throw ConfigError("ragged CSV row in " + file.string());
        for (const auto& part : parts) table.values.push_back(parse_double(part));
        ++table.rows;
    }
    return table;
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

}  // namespace dsde
