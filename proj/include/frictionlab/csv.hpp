#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace frictionlab::csv {

// In-memory table: one header row plus string cells. RFC-4180-style
// quoting on both the read and write paths.
class Table {
  public:
    Table() = default;
    Table(std::vector<std::string> header, std::vector<std::vector<std::string>> rows);

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }
    std::size_t row_count() const { return rows_.size(); }

    // Column index by header name; throws ParameterError when absent.
    std::size_t column(const std::string& name) const;
    std::optional<std::size_t> find_column(const std::string& name) const;

    const std::string& cell(std::size_t row, std::size_t col) const;
    // Parses a cell as double; errors carry the 1-based data row number.
    double number(std::size_t row, std::size_t col) const;
    std::vector<double> numeric_column(const std::string& name) const;

  private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

Table parse(const std::string& text);
Table read_file(const std::string& path);

std::string emit(const Table& table);
void write_file(const Table& table, const std::string& path);

// Shortest decimal text that round-trips the exact double value.
std::string format_double(double value);

}  // namespace frictionlab::csv
