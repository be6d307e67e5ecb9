// csv.hpp — deterministic CSV emission and parsing for field exports

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ionlrb::io {

// Shortest representation that round-trips a double exactly; parse-then-emit
// of one of these strings is byte-identical.
std::string format_double(double v);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

void write_csv(std::ostream& os, const Table& t);
Table read_csv(std::istream& is);
std::string to_string(const Table& t);

}  // namespace ionlrb::io
