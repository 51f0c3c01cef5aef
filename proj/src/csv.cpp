#include "frictionlab/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "frictionlab/errors.hpp"

namespace frictionlab::csv {

namespace {

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\r\n") != std::string::npos;
}

void append_field(std::string& out, const std::string& field) {
    if (!needs_quoting(field)) {
        out += field;
        return;
    }
    out += '"';
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
}

}  // namespace

Table::Table(std::vector<std::string> header, std::vector<std::vector<std::string>> rows)
    : header_(std::move(header)), rows_(std::move(rows)) {
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].size() != header_.size()) {
            throw ParameterError("csv row " + std::to_string(i + 1) + " has " +
                                 std::to_string(rows_[i].size()) + " fields, expected " +
                                 std::to_string(header_.size()));
        }
    }
}

std::size_t Table::column(const std::string& name) const {
    const auto idx = find_column(name);
    if (!idx) throw ParameterError("csv column not found: " + name);
    return *idx;
}

std::optional<std::size_t> Table::find_column(const std::string& name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) return i;
    }
    return std::nullopt;
}

const std::string& Table::cell(std::size_t row, std::size_t col) const {
    return rows_.at(row).at(col);
}

double Table::number(std::size_t row, std::size_t col) const {
    const std::string& text = cell(row, col);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ParameterError("csv row " + std::to_string(row + 1) + ", column '" +
                             header_.at(col) + "': not a number: '" + text + "'");
    }
    return value;
}

std::vector<double> Table::numeric_column(const std::string& name) const {
    const std::size_t col = column(name);
    std::vector<double> values;
    values.reserve(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) values.push_back(number(i, col));
    return values;
}

Table parse(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool pending = false;  // field content (possibly empty) accumulated on this record

    const auto end_field = [&] {
        record.push_back(field);
        field.clear();
        pending = false;
    };
    const auto end_record = [&] {
        end_field();
        records.push_back(record);
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                pending = true;
                break;
            case ',':
                end_field();
                pending = true;  // a field follows the separator, even if empty
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                break;
            default:
                field += c;
                pending = true;
                break;
        }
    }
    if (in_quotes) throw ParameterError("csv: unterminated quoted field");
    if (pending || !record.empty()) end_record();

    if (records.empty()) throw ParameterError("csv: missing header row");
    std::vector<std::string> header = records.front();
    records.erase(records.begin());
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].size() != header.size()) {
            throw ParameterError("csv row " + std::to_string(i + 1) + " has " +
                                 std::to_string(records[i].size()) + " fields, expected " +
                                 std::to_string(header.size()));
        }
    }
    return Table(std::move(header), std::move(records));
}

Table read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParameterError("cannot open csv file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

std::string emit(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.header().size(); ++i) {
        if (i > 0) out += ',';
        append_field(out, table.header()[i]);
    }
    out += '\n';
    for (const auto& row : table.rows()) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) out += ',';
            append_field(out, row[i]);
        }
        out += '\n';
    }
    return out;
}

void write_file(const Table& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("cannot write csv file: " + path);
    out << emit(table);
}

std::string format_double(double value) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) throw ParameterError("cannot format double");
    return std::string(buf, ptr);
}

}  // namespace frictionlab::csv
