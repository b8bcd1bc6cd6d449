/**
 * @file support.hpp
 * @brief Shared helpers for the test binaries: seeded random set factories,
 *        LP-backed point sampling, and dense comparison utilities.
 */

#ifndef LZSETKIT_TESTS_SUPPORT_HPP
#define LZSETKIT_TESTS_SUPPORT_HPP

#include <algorithm>
#include <random>
#include <vector>

#include "lzsetkit/line_zonotope.hpp"
#include "lzsetkit/solver.hpp"
#include "lzsetkit/types.hpp"

namespace lzsetkit::testsupport {

using Rng = std::mt19937_64;

inline double runif(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Matrix random_matrix(Rng& rng, Index rows, Index cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = scale * runif(rng, -1.0, 1.0);
    return m;
}

inline Vector random_vector(Rng& rng, Index n, double scale = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = scale * runif(rng, -1.0, 1.0);
    return v;
}

/// Bounded constrained zonotope that is nonempty by construction: the offset b
/// is the image of an interior factor point (inf-norm at most 0.8).
inline LineZonotope random_bounded_cz(Rng& rng, Index n, Index ng, Index nc) {
    Matrix G = random_matrix(rng, n, ng);
    Vector c = random_vector(rng, n);
    Matrix A = random_matrix(rng, nc, ng);
    Vector xi(ng);
    for (Index j = 0; j < ng; ++j) xi(j) = runif(rng, -0.8, 0.8);
    Vector b = A * xi;
    return lz_constrained_zonotope(G, c, A, b);
}

/// Line zonotope with lines and mixed constraints, nonempty by construction.
inline LineZonotope random_lz(Rng& rng, Index n, Index nd, Index ng, Index nc) {
    LineZonotope z;
    z.M = random_matrix(rng, n, nd);
    z.G = random_matrix(rng, n, ng);
    z.c = random_vector(rng, n);
    z.S = random_matrix(rng, nc, nd);
    z.A = random_matrix(rng, nc, ng);
    Vector delta = random_vector(rng, nd, 1.5);
    Vector xi(ng);
    for (Index j = 0; j < ng; ++j) xi(j) = runif(rng, -0.8, 0.8);
    z.b = z.S * delta + z.A * xi;
    z.validate();
    return z;
}

/// A point of Z obtained by optimizing a random direction over the factor
/// polyhedron; distinct directions reach distinct faces of bounded sets.
inline Vector sample_point(const LineZonotope& z, Rng& rng) {
    LpProblem p;
    p.objective = random_vector(rng, z.lines() + z.generators());
    p.equality_lhs = hcat(z.S, z.A);
    p.equality_rhs = z.b;
    p.lower = Vector::Constant(z.lines() + z.generators(), -1.0);
    p.lower.head(z.lines()).setConstant(-kInf);
    p.upper = Vector::Constant(z.lines() + z.generators(), 1.0);
    p.upper.head(z.lines()).setConstant(kInf);
    if (z.constraints() == 0) {
        p.equality_lhs = Matrix(0, p.num_vars());
        p.equality_rhs = Vector(0);
    }
    LpSolution s = solve_lp(p);
    if (s.status != LpStatus::kOptimal) throw std::runtime_error("sample_point: factor LP not optimal");
    return z.c + z.M * s.x.head(z.lines()) + z.G * s.x.tail(z.generators());
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return kInf;
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) return kInf;
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

/// Max entrywise gap over all six blocks of two line zonotopes.
inline double block_gap(const LineZonotope& a, const LineZonotope& b) {
    double g = 0.0;
    g = std::max(g, max_abs_diff(a.M, b.M));
    g = std::max(g, max_abs_diff(a.G, b.G));
    g = std::max(g, max_abs_diff(a.c, b.c));
    g = std::max(g, max_abs_diff(a.S, b.S));
    g = std::max(g, max_abs_diff(a.A, b.A));
    g = std::max(g, max_abs_diff(a.b, b.b));
    return g;
}

}  // namespace lzsetkit::testsupport

#endif  // LZSETKIT_TESTS_SUPPORT_HPP
