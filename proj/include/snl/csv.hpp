#ifndef SNL_CSV_HPP
#define SNL_CSV_HPP

#include <Eigen/Dense>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace snl {

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& mat) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path);
    for (Eigen::Index i = 0; i < mat.rows(); ++i) {
        for (Eigen::Index j = 0; j < mat.cols(); ++j) {
            if (j) out << ',';
            out << format_double(mat(i, j));
        }
        out << '\n';
    }
    if (!out) throw io_error("write failed: " + path);
}

inline Eigen::MatrixXd read_csv_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open for reading: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        const char* p = line.c_str();
        char* end = nullptr;
        while (*p) {
            const double v = std::strtod(p, &end);
            if (end == p) throw parse_error("bad number in " + path + ": " + line);
            row.push_back(v);
            p = end;
            if (*p == ',') ++p;
            while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw parse_error("ragged CSV rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw parse_error("empty CSV: " + path);
    Eigen::MatrixXd mat(rows.size(), rows.front().size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j) mat(i, j) = rows[i][j];
    return mat;
}

// simple table writer for experiment outputs: header row, then data rows
inline void write_csv_table(const std::string& path, const std::vector<std::string>& header,
                            const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open for writing: " + path);
    for (size_t j = 0; j < header.size(); ++j) {
        if (j) out << ',';
        out << header[j];
    }
    out << '\n';
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw dimension_mismatch("row width != header width");
        for (size_t j = 0; j < row.size(); ++j) {
            if (j) out << ',';
            out << format_double(row[j]);
        }
        out << '\n';
    }
    if (!out) throw io_error("write failed: " + path);
}

}  // namespace snl

#endif
