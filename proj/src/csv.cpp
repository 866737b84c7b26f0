#include "pce/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "pce/common.hpp"

namespace pce {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
    const char* b = cell.data();
    const char* e = b + cell.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
    double value = 0.0;
    auto res = std::from_chars(b, e, value);
    if (res.ec != std::errc() || res.ptr != e || b == e) {
        std::ostringstream msg;
        msg << "non-numeric cell '" << cell << "' at data row " << row << ", column '" << column
            << "'";
        throw ParseError(msg.str());
    }
    return value;
}

}  // namespace

CsvTable read_numeric_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file (missing header): " + path);
    table.header = split_line(line);
    if (table.header.empty() || (table.header.size() == 1 && table.header[0].empty()))
        throw ParseError("empty header row: " + path);
    std::size_t row_index = 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != table.header.size()) {
            std::ostringstream msg;
            msg << "row " << row_index << " has " << cells.size() << " cells, expected "
                << table.header.size();
            throw ParseError(msg.str());
        }
        std::vector<double> row(cells.size());
        for (std::size_t j = 0; j < cells.size(); ++j) {
            row[j] = parse_cell(cells[j], row_index, table.header[j]);
        }
        table.rows.push_back(std::move(row));
        ++row_index;
    }
    if (table.rows.empty()) throw ParseError("no data rows: " + path);
    return table;
}

CsvStrings read_csv_strings(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    CsvStrings table;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file (missing header): " + path);
    table.header = split_line(line);
    std::size_t row_index = 1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != table.header.size()) {
            std::ostringstream msg;
            msg << "row " << row_index << " has " << cells.size() << " cells, expected "
                << table.header.size() << " in " << path;
            throw ParseError(msg.str());
        }
        table.rows.push_back(std::move(cells));
        ++row_index;
    }
    return table;
}

std::string join_csv_row(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out.push_back(',');
        out += cells[i];
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << join_csv_row(header) << '\n';
    for (const auto& row : rows) out << join_csv_row(row) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace pce
