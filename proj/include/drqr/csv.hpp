#pragma once

// CSV ingestion of datasets and export of point clouds.
//
// Format: comma separated, header row required, '.' decimal separator.

#include "drqr/core.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace drqr {

/// Parse failure carrying the 1-based row (header = row 1) and column.
class ParseError : public DataError {
public:
    ParseError(const std::string& msg, std::size_t row, std::size_t column)
        : DataError(msg + " (row " + std::to_string(row) + ", column " + std::to_string(column) + ")"),
          row_(row), column_(column) {}
    std::size_t row() const { return row_; }
    std::size_t column() const { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

/// Column selector: header name or 0-based index.
using ColumnRef = std::variant<std::string, std::size_t>;

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
        } else if (c == ',' && !quoted) {
            out.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    out.push_back(cell);
    return out;
}

inline std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

inline bool parse_double(const std::string& text, double& out) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    if (begin != end && *begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

} // namespace detail

/// Raw numeric table with its header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("missing header row", 1, 1);
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3); // UTF-8 BOM
    for (auto& name : detail::split_csv_line(line)) table.header.push_back(detail::trim(name));

    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != table.header.size())
            throw ParseError("ragged row: expected " + std::to_string(table.header.size()) + " cells, found " +
                                 std::to_string(cells.size()),
                             row, std::min(cells.size(), table.header.size()) + 1);
        std::vector<double> values(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto cell = detail::trim(cells[c]);
            if (!detail::parse_double(cell, values[c]))
                throw ParseError("non-numeric cell '" + cell + "'", row, c + 1);
            if (!std::isfinite(values[c])) throw ParseError("non-finite cell '" + cell + "'", row, c + 1);
        }
        table.rows.push_back(std::move(values));
    }
    return table;
}

/// Splits a numeric table into (X, y); the remaining columns keep their order.
inline Dataset dataset_from_table(const CsvTable& table, const ColumnRef& y_column) {
    std::size_t yc = 0;
    if (const auto* name = std::get_if<std::string>(&y_column)) {
        auto it = std::find(table.header.begin(), table.header.end(), *name);
        if (it == table.header.end()) {
            std::string available;
            for (const auto& h : table.header) available += (available.empty() ? "" : ", ") + h;
            throw DataError("response column '" + *name + "' not found; available columns: " + available);
        }
        yc = static_cast<std::size_t>(it - table.header.begin());
    } else {
        yc = std::get<std::size_t>(y_column);
        if (yc >= table.header.size())
            throw DataError("response column index " + std::to_string(yc) + " out of range (" +
                            std::to_string(table.header.size()) + " columns)");
    }
    const auto n = static_cast<Eigen::Index>(table.rows.size());
    const auto d = static_cast<Eigen::Index>(table.header.size()) - 1;
    Dataset data{Matrix(n, d), Vector(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = table.rows[static_cast<std::size_t>(i)];
        Eigen::Index j = 0;
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (c == yc) data.y(i) = r[c];
            else data.X(i, j++) = r[c];
        }
    }
    data.validate();
    return data;
}

inline Dataset load_dataset(std::istream& in, const ColumnRef& y_column) {
    return dataset_from_table(read_csv(in), y_column);
}

inline Dataset load_dataset(const std::string& path, const ColumnRef& y_column) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return load_dataset(in, y_column);
}

/// Shortest round-trippable representation with 17 significant digits.
inline std::string format_exact(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

/// Writes `weight,x_1..x_d,y`, one row per atom.
inline void write_cloud_csv(std::ostream& out, const WeightedPointCloud& cloud) {
    out << "weight";
    for (Eigen::Index j = 0; j < cloud.x.cols(); ++j) out << ",x_" << (j + 1);
    out << ",y\n";
    for (Eigen::Index i = 0; i < cloud.size(); ++i) {
        out << format_exact(cloud.weight(i));
        for (Eigen::Index j = 0; j < cloud.x.cols(); ++j) out << ',' << format_exact(cloud.x(i, j));
        out << ',' << format_exact(cloud.y(i)) << '\n';
    }
}

} // namespace drqr
