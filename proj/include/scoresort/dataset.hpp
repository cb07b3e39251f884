#ifndef SCORESORT_DATASET_HPP
#define SCORESORT_DATASET_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scoresort/common.hpp"

namespace scoresort {

// n x d sample matrix, column j = variable X_j.
struct Dataset {
    Matrix values;
    std::vector<std::string> column_names;

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index d() const { return values.cols(); }
};

inline std::vector<std::string> default_column_names(Eigen::Index d) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j) names.push_back("X" + std::to_string(j));
    return names;
}

inline Dataset make_dataset(Matrix values) {
    if (values.rows() < 1) throw ParameterError("dataset needs at least one row");
    if (!values.allFinite()) throw NumericalError("dataset contains NaN/Inf entries");
    Dataset ds;
    ds.column_names = default_column_names(values.cols());
    ds.values = std::move(values);
    return ds;
}

// Standardize every column to zero mean, unit variance. Constant columns are
// centered only.
inline Dataset standardized(const Dataset& ds) {
    Dataset out = ds;
    for (Eigen::Index j = 0; j < out.d(); ++j) {
        const double mean = out.values.col(j).mean();
        out.values.col(j).array() -= mean;
        const double sd = std::sqrt(sample_variance(out.values.col(j)));
        if (sd > 0) out.values.col(j) /= sd;
    }
    return out;
}

inline std::string format_full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// CSV with a header row; values carry 17 significant digits so a write/read
// round trip is bit exact.
inline void write_csv(const Dataset& ds, std::ostream& os) {
    for (Eigen::Index j = 0; j < ds.d(); ++j) {
        if (j) os << ',';
        os << ds.column_names[static_cast<std::size_t>(j)];
    }
    os << '\n';
    for (Eigen::Index i = 0; i < ds.n(); ++i) {
        for (Eigen::Index j = 0; j < ds.d(); ++j) {
            if (j) os << ',';
            os << format_full_precision(ds.values(i, j));
        }
        os << '\n';
    }
}

inline void write_csv(const Dataset& ds, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot open for writing: " + path);
    write_csv(ds, os);
}

inline Dataset read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw InputError("data CSV is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    Dataset ds;
    {
        std::istringstream hs(line);
        std::string name;
        while (std::getline(hs, name, ',')) ds.column_names.push_back(name);
    }
    const auto d = static_cast<Eigen::Index>(ds.column_names.size());
    if (d == 0) throw InputError("data CSV has an empty header");

    std::vector<double> buf;
    int lineno = 1;
    Eigen::Index rows = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        Eigen::Index got = 0;
        while (std::getline(ls, cell, ',')) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw InputError("data CSV line " + std::to_string(lineno) + ": '" + cell + "' is not numeric");
            }
            if (used != cell.size())
                throw InputError("data CSV line " + std::to_string(lineno) + ": trailing junk in '" + cell + "'");
            buf.push_back(v);
            ++got;
        }
        if (got != d)
            throw InputError("data CSV line " + std::to_string(lineno) + ": expected " + std::to_string(d) +
                             " columns, got " + std::to_string(got));
        ++rows;
    }
    if (rows == 0) throw InputError("data CSV has no rows");
    ds.values.resize(rows, d);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < d; ++j) ds.values(i, j) = buf[static_cast<std::size_t>(i * d + j)];
    if (!ds.values.allFinite()) throw InputError("data CSV contains NaN/Inf entries");
    return ds;
}

inline Dataset read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open: " + path);
    return read_csv(is);
}

}  // namespace scoresort

#endif  // SCORESORT_DATASET_HPP
