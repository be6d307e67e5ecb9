#include "ionlrb/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace ionlrb::io {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

int Table::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

void write_csv(std::ostream& os, const Table& t) {
    for (size_t i = 0; i < t.header.size(); ++i)
        os << t.header[i] << (i + 1 < t.header.size() ? "," : "");
    os << '\n';
    for (const auto& row : t.rows) {
        for (size_t i = 0; i < row.size(); ++i)
            os << row[i] << (i + 1 < row.size() ? "," : "");
        os << '\n';
    }
}

namespace {
std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}
}  // namespace

Table read_csv(std::istream& is) {
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

std::string to_string(const Table& t) {
    std::ostringstream os;
    write_csv(os, t);
    return os.str();
}

}  // namespace ionlrb::io
