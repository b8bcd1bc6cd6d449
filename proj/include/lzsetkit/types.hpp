/**
 * @file types.hpp
 * @brief Dense matrix/vector aliases and small block-assembly helpers shared by
 *        the set, solver, estimation, and diagnosis modules.
 */

#ifndef LZSETKIT_TYPES_HPP
#define LZSETKIT_TYPES_HPP

#include <Eigen/Dense>

#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lzsetkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Default feasibility slack for membership/emptiness LPs.
inline constexpr double kDefaultTol = 1e-9;

/// @brief Componentwise interval [lower, upper]; entries may be +/-infinity.
struct Interval {
    Vector lower;
    Vector upper;

    Index dim() const { return lower.size(); }
    bool bounded() const {
        return lower.allFinite() && upper.allFinite();
    }
};

/// @brief True if every entry of m is finite (no NaN/Inf).
inline bool all_finite(const Matrix& m) { return m.size() == 0 || m.allFinite(); }

/// @brief Throws std::invalid_argument with the given message if cond is false.
inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

/// @brief Horizontal concatenation [a b]; zero-column blocks are allowed.
inline Matrix hcat(const Matrix& a, const Matrix& b) {
    // Only a true 0x0 placeholder adopts the partner's shape; an Nx0 or 0xN
    // block is a meaningful degenerate extent and concatenates normally.
    if (a.rows() == 0 && a.cols() == 0) return b;
    if (b.rows() == 0 && b.cols() == 0) return a;
    require(a.rows() == b.rows(), "hcat: row mismatch");
    Matrix out(a.rows(), a.cols() + b.cols());
    out.leftCols(a.cols()) = a;
    out.rightCols(b.cols()) = b;
    return out;
}

/// @brief Vertical concatenation [a; b]; zero-row blocks are allowed.
inline Matrix vcat(const Matrix& a, const Matrix& b) {
    if (a.rows() == 0 && a.cols() == 0) return b;
    if (b.rows() == 0 && b.cols() == 0) return a;
    require(a.cols() == b.cols(), "vcat: column mismatch");
    Matrix out(a.rows() + b.rows(), a.cols());
    out.topRows(a.rows()) = a;
    out.bottomRows(b.rows()) = b;
    return out;
}

inline Vector vcat(const Vector& a, const Vector& b) {
    Vector out(a.size() + b.size());
    out.head(a.size()) = a;
    out.tail(b.size()) = b;
    return out;
}

/// @brief Block-diagonal stacking; degenerate (0-row or 0-column) blocks keep
///        their zero extent, so e.g. bdiag(0x3, 1x1) is 1x4.
inline Matrix bdiag(const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    if (a.size() > 0) out.topLeftCorner(a.rows(), a.cols()) = a;
    if (b.size() > 0) out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

inline Matrix bdiag(std::initializer_list<Matrix> blocks) {
    Matrix out(0, 0);
    for (const Matrix& blk : blocks) out = bdiag(out, blk);
    return out;
}

inline Matrix bdiag(const std::vector<Matrix>& blocks) {
    Matrix out(0, 0);
    for (const Matrix& blk : blocks) out = bdiag(out, blk);
    return out;
}

/// @brief Builds a matrix from a dense initializer list (row-major literal).
inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    const Index nr = static_cast<Index>(rows.size());
    Index nc = 0;
    for (const auto& r : rows) nc = std::max<Index>(nc, static_cast<Index>(r.size()));
    Matrix out = Matrix::Zero(nr, nc);
    Index i = 0;
    for (const auto& r : rows) {
        Index j = 0;
        for (double v : r) out(i, j++) = v;
        ++i;
    }
    return out;
}

inline Vector vec(std::initializer_list<double> entries) {
    Vector out(static_cast<Index>(entries.size()));
    Index i = 0;
    for (double v : entries) out(i++) = v;
    return out;
}

}  // namespace lzsetkit

#endif  // LZSETKIT_TYPES_HPP
