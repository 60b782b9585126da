#include "mnsbs/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace mnsbs {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

}  // namespace

ObservationMatrix read_observations_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw input_error("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw input_error(path + ": empty file, expected a header row");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF && static_cast<unsigned char>(line[1]) == 0xBB &&
        static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
    }
    auto header = split_csv_line(line);
    const int p = static_cast<int>(header.size());
    for (int j = 0; j < p; ++j) {
        const std::string expect = "x" + std::to_string(j + 1);
        if (trim(header[static_cast<std::size_t>(j)]) != expect) {
            throw input_error(path + ": header must be x1..x" + std::to_string(p) + ", column " + std::to_string(j + 1) +
                              " reads '" + trim(header[static_cast<std::size_t>(j)]) + "'");
        }
    }

    ObservationMatrix obs;
    obs.cols = p;
    std::int64_t row_no = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row_no;
        const std::string stripped = trim(line);
        if (stripped.empty()) {
            // A single trailing newline is common; blank lines elsewhere are data errors.
            if (in.peek() == EOF) break;
            throw input_error(path + ": row " + std::to_string(row_no) + " is blank");
        }
        auto cells = split_csv_line(stripped);
        if (static_cast<int>(cells.size()) != p) {
            throw input_error(path + ": row " + std::to_string(row_no) + " has " + std::to_string(cells.size()) +
                              " cells, expected " + std::to_string(p));
        }
        for (int j = 0; j < p; ++j) {
            const std::string cell = trim(cells[static_cast<std::size_t>(j)]);
            if (cell.empty()) {
                throw input_error(path + ": row " + std::to_string(row_no) + " column " + std::to_string(j + 1) +
                                  " is empty");
            }
            errno = 0;
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
                throw input_error(path + ": row " + std::to_string(row_no) + " column " + std::to_string(j + 1) +
                                  " is not a finite number: '" + cell + "'");
            }
            obs.data.push_back(v);
        }
        ++obs.rows;
    }
    if (obs.rows == 0) throw input_error(path + ": no data rows");
    return obs;
}

void write_observations_csv(const std::string& path, const ObservationMatrix& obs) {
    obs.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot write CSV file: " + path);
    for (int j = 0; j < obs.cols; ++j) {
        if (j) out << ',';
        out << 'x' << (j + 1);
    }
    out << '\n';
    char buf[40];
    for (std::int64_t i = 0; i < obs.rows; ++i) {
        for (int j = 0; j < obs.cols; ++j) {
            if (j) out << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", obs(i, j));
            out << buf;
        }
        out << '\n';
    }
    if (!out) throw input_error("write failed: " + path);
}

}  // namespace mnsbs
