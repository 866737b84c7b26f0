#ifndef PCE_CSV_HPP
#define PCE_CSV_HPP

#include <string>
#include <vector>

namespace pce {

// Shortest representation that round-trips the exact double value.
std::string format_double(double v);

// Strict numeric CSV: comma separator, period decimals, UTF-8, one header
// row, no quoting. Parse failures name the offending row and column.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_numeric_csv(const std::string& path);

// Same dialect, cells kept as text (for tables with label columns).
struct CsvStrings {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvStrings read_csv_strings(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::string join_csv_row(const std::vector<std::string>& cells);

}  // namespace pce

#endif
