#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mtgl/rough.hpp"
#include "mtgl/serialize.hpp"

namespace mtgl {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Parses a comma-separated numeric row; returns false on any non-numeric cell.
bool parse_row(const std::string& line, std::vector<double>& out) {
    out.clear();
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (cell.empty()) return false;
        try {
            std::size_t used = 0;
            double v = std::stod(cell, &used);
            if (used != cell.size()) return false;
            out.push_back(v);
        } catch (const std::exception&) {
            return false;
        }
    }
    return !out.empty();
}

std::vector<std::vector<double>> read_rows(const std::string& path, std::string* interp) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool header_seen = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t[0] == '#') {
            auto pos = t.find("interpolation:");
            if (interp && pos != std::string::npos) *interp = trim(t.substr(pos + 14));
            continue;
        }
        std::vector<double> row;
        if (!parse_row(t, row)) {
            if (rows.empty() && !header_seen) {
                header_seen = true;
                continue;
            }
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": non-numeric row");
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": ragged row");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::size_t grid_index(const std::vector<double>& times, double t) {
    auto it = std::lower_bound(times.begin(), times.end(), t - 1e-12 * std::max(1.0, std::abs(t)));
    if (it == times.end() || std::abs(*it - t) > 1e-12 * std::max(1.0, std::abs(t)))
        throw std::invalid_argument("area row time " + num(t) + " is not a grid time");
    return static_cast<std::size_t>(it - times.begin());
}

}  // namespace

SampledPath read_driver_csv(const std::string& path) {
    std::string interp = "linear";
    auto rows = read_rows(path, &interp);
    if (rows.empty() || rows.front().size() < 2) throw std::invalid_argument(path + ": driver needs t and values");
    std::size_t d = rows.front().size() - 1;
    std::vector<double> t, v;
    for (const auto& r : rows) {
        t.push_back(r[0]);
        v.insert(v.end(), r.begin() + 1, r.end());
    }
    return {std::move(t), std::move(v), d, parse_interp(interp)};
}

void write_driver_csv(const std::string& path, const SampledPath& x) {
    std::ostringstream out;
    out << "# interpolation: " << interp_name(x.interp()) << "\n";
    out << "t";
    for (std::size_t k = 0; k < x.dim(); ++k) out << ",x_" << k + 1;
    out << "\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        out << num(x.time(i));
        for (std::size_t k = 0; k < x.dim(); ++k) out << "," << num(x(i, k));
        out << "\n";
    }
    write_file_atomic(path, out.str());
}

TwoParamField read_area_csv(const std::string& path, const SampledPath& x) {
    auto rows = read_rows(path, nullptr);
    std::size_t d = x.dim();
    TwoParamField xx(x.size(), d * d);
    for (const auto& r : rows) {
        if (r.size() != 2 + d * d) throw std::invalid_argument(path + ": area row needs s, t and d*d entries");
        std::size_t s = grid_index(x.times(), r[0]), t = grid_index(x.times(), r[1]);
        if (s > t) throw std::invalid_argument(path + ": area row has s > t");
        std::copy(r.begin() + 2, r.end(), xx.at(s, t).begin());
    }
    return xx;
}

void write_area_csv(const std::string& path, const RoughPath& x) {
    std::size_t d = x.dim();
    std::ostringstream out;
    out << "s,t";
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) out << ",m_" << a + 1 << b + 1;
    out << "\n";
    for (std::size_t s = 0; s < x.size(); ++s)
        for (std::size_t t = s + 1; t < x.size(); ++t) {
            out << num(x.x().time(s)) << "," << num(x.x().time(t));
            for (double v : x.xx().at(s, t)) out << "," << num(v);
            out << "\n";
        }
    write_file_atomic(path, out.str());
}

}  // namespace mtgl
