#include "attrib/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace attrib::io {

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("write_atomic: cannot open " + tmp);
        f << content;
        if (!f) throw std::runtime_error("write_atomic: short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("write_atomic: rename to " + path + " failed");
}

void write_pgm(const std::string& path, const Vec& values, std::size_t rows,
               std::size_t cols) {
    if (values.size() != rows * cols)
        throw std::invalid_argument("write_pgm: shape mismatch");
    double lo = values[0], hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double range = hi > lo ? hi - lo : 1.0;
    std::ostringstream out;
    out << "P5\n" << cols << " " << rows << "\n255\n";
    for (double v : values)
        out.put(static_cast<char>(static_cast<unsigned char>(
            std::lround((v - lo) / range * 255.0))));
    write_atomic(path, out.str());
}

void write_csv_row(const std::string& path, const Vec& values) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out << ",";
        out << values[i];
    }
    out << "\n";
    write_atomic(path, out.str());
}

std::string csv_line(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ",";
        line += cells[i];
    }
    line += "\n";
    return line;
}

}  // namespace attrib::io
