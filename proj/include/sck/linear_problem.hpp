#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include "sck/errors.hpp"

namespace sck::estimators {

/// Measurement model y = A x + w. Matrix entries are confined to [-1, 1]
/// so rows can be encoded as stochastic streams directly.
struct LinearProblem {
    Eigen::MatrixXd A;
    Eigen::VectorXd y;
    std::optional<Eigen::VectorXd> x_true;
    double snr_db = std::numeric_limits<double>::infinity();
    int sparsity = 0;

    Eigen::Index rows() const { return A.rows(); }
    Eigen::Index cols() const { return A.cols(); }
};

inline void validate_problem(const LinearProblem& p) {
    if (p.A.rows() < 1 || p.A.cols() < 1)
        throw degenerate_error("LinearProblem: empty system matrix");
    if (p.y.size() != p.A.rows())
        throw structural_error("LinearProblem: measurement count does not match rows");
    if (p.x_true && p.x_true->size() != p.A.cols())
        throw structural_error("LinearProblem: ground truth length does not match columns");
    for (Eigen::Index i = 0; i < p.A.rows(); ++i)
        for (Eigen::Index j = 0; j < p.A.cols(); ++j) {
            const double v = p.A(i, j);
            if (!std::isfinite(v) || std::abs(v) > 1.0)
                throw std::domain_error("LinearProblem: matrix entry outside [-1, 1] at (" +
                                        std::to_string(i) + ", " + std::to_string(j) + ")");
        }
    for (Eigen::Index i = 0; i < p.y.size(); ++i)
        if (!std::isfinite(p.y(i)))
            throw std::domain_error("LinearProblem: non-finite measurement at " +
                                    std::to_string(i));
}

// Text format: comment lines start with '#'; then "m n", m rows of n matrix
// entries, one line of m measurements, and optionally one line of n ground
// truth values. Values are written with 17 significant digits so files
// round-trip losslessly.
inline void write_problem(const std::filesystem::path& path, const LinearProblem& p) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_problem: cannot open " + path.string());
    os << std::setprecision(17);
    os << "# linear problem: m rows of A, then y";
    if (p.x_true) os << ", then x_true";
    os << "\n" << p.A.rows() << ' ' << p.A.cols() << '\n';
    for (Eigen::Index i = 0; i < p.A.rows(); ++i) {
        for (Eigen::Index j = 0; j < p.A.cols(); ++j) os << (j ? " " : "") << p.A(i, j);
        os << '\n';
    }
    for (Eigen::Index i = 0; i < p.y.size(); ++i) os << (i ? " " : "") << p.y(i);
    os << '\n';
    if (p.x_true) {
        for (Eigen::Index j = 0; j < p.x_true->size(); ++j)
            os << (j ? " " : "") << (*p.x_true)(j);
        os << '\n';
    }
    if (!os) throw std::runtime_error("write_problem: write failed");
}

inline LinearProblem read_problem(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_problem: cannot open " + path.string());
    auto next_data_line = [&is](std::string& line) {
        while (std::getline(is, line)) {
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            return true;
        }
        return false;
    };
    std::string line;
    if (!next_data_line(line)) throw std::runtime_error("read_problem: missing header");
    std::istringstream header(line);
    Eigen::Index m = 0, n = 0;
    if (!(header >> m >> n) || m < 1 || n < 1)
        throw std::runtime_error("read_problem: bad dimensions");
    LinearProblem p;
    p.A.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!next_data_line(line)) throw std::runtime_error("read_problem: truncated matrix");
        std::istringstream row(line);
        for (Eigen::Index j = 0; j < n; ++j)
            if (!(row >> p.A(i, j))) throw std::runtime_error("read_problem: short matrix row");
    }
    if (!next_data_line(line)) throw std::runtime_error("read_problem: missing measurements");
    {
        std::istringstream ys(line);
        p.y.resize(m);
        for (Eigen::Index i = 0; i < m; ++i)
            if (!(ys >> p.y(i))) throw std::runtime_error("read_problem: short measurement line");
    }
    if (next_data_line(line)) {
        std::istringstream xs(line);
        Eigen::VectorXd xt(n);
        for (Eigen::Index j = 0; j < n; ++j)
            if (!(xs >> xt(j))) throw std::runtime_error("read_problem: short ground truth line");
        p.x_true = std::move(xt);
    }
    validate_problem(p);
    return p;
}

} // namespace sck::estimators
