#pragma once

#include "sspec/fields.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace sspec {

// Shortest exact round-trip formatting; %.17g is stable for identical doubles,
// which is what makes repeated runs byte-identical.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Write-then-rename so readers never observe a partial file.
inline void atomic_write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

// Nodal CSV: header i1,...,in,blade_mask,value with 0-based node indices.
inline std::string grid_function_to_csv(const GridFunction& f) {
    std::ostringstream out;
    const int dim = f.dim();
    for (int k = 0; k < dim; ++k) out << 'i' << (k + 1) << ',';
    out << "blade_mask,value\n";
    for (long node = 0; node < f.nodes(); ++node) {
        const std::vector<int> iv = f.grid().node_multi(node);
        for (BladeMask b = 0; b < f.blades(); ++b) {
            for (int k = 0; k < dim; ++k) out << iv[static_cast<std::size_t>(k)] << ',';
            out << b << ',' << fmt17(f.at(node, b)) << '\n';
        }
    }
    return out.str();
}

inline void write_grid_function_csv(const std::string& path, const GridFunction& f) {
    atomic_write_file(path, grid_function_to_csv(f));
}

inline GridFunction read_grid_function_csv(const Grid& grid, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path);
    GridFunction f(grid);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty CSV " + path);
    const int dim = grid.dim();
    std::vector<int> iv(static_cast<std::size_t>(dim));
    long lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        for (int k = 0; k < dim; ++k) {
            if (!std::getline(ls, tok, ',')) throw std::invalid_argument("short row in " + path);
            iv[static_cast<std::size_t>(k)] = std::stoi(tok);
            if (iv[static_cast<std::size_t>(k)] < 0 || iv[static_cast<std::size_t>(k)] > grid.res[static_cast<std::size_t>(k)])
                throw std::invalid_argument("node index out of range at line " + std::to_string(lineno));
        }
        if (!std::getline(ls, tok, ',')) throw std::invalid_argument("missing blade_mask in " + path);
        const unsigned long blade = std::stoul(tok);
        if (blade >= f.blades())
            throw std::invalid_argument("blade_mask out of range at line " + std::to_string(lineno));
        if (!std::getline(ls, tok, ',')) throw std::invalid_argument("missing value in " + path);
        f.at(grid.node_index(iv), static_cast<BladeMask>(blade)) = std::stod(tok);
    }
    return f;
}

} // namespace sspec
