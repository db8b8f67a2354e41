#ifndef CARPETFORGE_RENDER_HPP
#define CARPETFORGE_RENDER_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "carpetforge/core.hpp"

namespace carpetforge {

// Binary 16-bit PGM: header "P5\n<nx> <nt>\n65535\n", then nt rows of nx
// big-endian samples, top row = earliest t.  Pixels are round(65535 v/vmax)
// with vmax the grid maximum (an all-zero grid stays all zero).  vmax may be
// overridden for cross-figure comparability.
inline void write_pgm(const DensityGrid& g, const std::string& path, double vmax_override = 0.0) {
    for (double v : g.values)
        if (!std::isfinite(v)) throw IoError("write_pgm: non-finite grid value");
    double vmax = vmax_override > 0.0 ? vmax_override : g.max_value();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_pgm: cannot open " + path);
    out << "P5\n" << g.x_axis.n << " " << g.t_axis.n << "\n65535\n";
    std::vector<unsigned char> row(static_cast<size_t>(g.x_axis.n) * 2);
    for (int it = 0; it < g.t_axis.n; ++it) {
        for (int ix = 0; ix < g.x_axis.n; ++ix) {
            double v = g.at(it, ix);
            unsigned u = 0;
            if (vmax > 0.0) {
                double scaled = 65535.0 * v / vmax;
                if (scaled < 0.0) scaled = 0.0;
                if (scaled > 65535.0) scaled = 65535.0;
                u = static_cast<unsigned>(std::lround(scaled));
            }
            row[2 * ix] = static_cast<unsigned char>((u >> 8) & 0xff);
            row[2 * ix + 1] = static_cast<unsigned char>(u & 0xff);
        }
        out.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
    if (!out) throw IoError("write_pgm: write failed for " + path);
}

namespace detail {
inline std::string fmt15(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}
}  // namespace detail

// CSV rows "x,t,value" in t-major order, 15 significant digits, LF endings.
inline void write_csv(const DensityGrid& g, const std::string& path) {
    for (double v : g.values)
        if (!std::isfinite(v)) throw IoError("write_csv: non-finite grid value");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_csv: cannot open " + path);
    out << "x,t,value\n";
    for (int it = 0; it < g.t_axis.n; ++it)
        for (int ix = 0; ix < g.x_axis.n; ++ix)
            out << detail::fmt15(g.x_axis.at(ix)) << ',' << detail::fmt15(g.t_axis.at(it)) << ','
                << detail::fmt15(g.at(it, ix)) << '\n';
    if (!out) throw IoError("write_csv: write failed for " + path);
}

// Reads back a grid written by write_csv (axes reconstructed from the
// distinct coordinate values in file order).
inline DensityGrid parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("parse_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "x,t,value")
        throw IoError("parse_csv: bad header in " + path);
    std::vector<double> xs, ts, vals;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw IoError("parse_csv: malformed row");
        double x = std::stod(a), t = std::stod(b), v = std::stod(c);
        if (ts.empty() || t != ts.back()) ts.push_back(t);
        if (ts.size() == 1) xs.push_back(x);
        vals.push_back(v);
    }
    if (xs.empty() || ts.empty() || vals.size() != xs.size() * ts.size())
        throw IoError("parse_csv: inconsistent grid shape");
    DensityGrid g;
    g.x_axis = {xs.front(), xs.back(), static_cast<int>(xs.size())};
    g.t_axis = {ts.front(), ts.back(), static_cast<int>(ts.size())};
    g.values = std::move(vals);
    return g;
}

}  // namespace carpetforge

#endif
