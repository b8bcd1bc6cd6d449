/**
 * @file line_zonotope.hpp
 * @brief Line zonotopes in CLG-rep and their exact set operations.
 *
 * A line zonotope is the set
 *
 *   Z = { c + M*delta + G*xi : delta in R^{n_delta}, ||xi||_inf <= 1,
 *                              S*delta + A*xi = b }.
 *
 * Columns of M are unbounded "lines", columns of G are bounded generators, and
 * (S, A, b) couples both factor blocks through linear equality constraints.
 * Constrained zonotopes are the n_delta = 0 special case and plain zonotopes
 * additionally have no constraints, so a single storage layout covers all three.
 * Any of the block sizes may be zero; degenerate blocks are kept explicitly so
 * every operation below is total and block orderings stay reproducible.
 */

#ifndef LZSETKIT_LINE_ZONOTOPE_HPP
#define LZSETKIT_LINE_ZONOTOPE_HPP

#include <nlohmann/json.hpp>

#include <utility>
#include <vector>

#include "lzsetkit/types.hpp"

namespace lzsetkit {

struct LineZonotope {
    Matrix M;  ///< n x n_delta line directions
    Matrix G;  ///< n x n_g generators
    Vector c;  ///< n center
    Matrix S;  ///< n_c x n_delta constraint coefficients on delta
    Matrix A;  ///< n_c x n_g constraint coefficients on xi
    Vector b;  ///< n_c constraint offsets

    LineZonotope() = default;
    LineZonotope(Matrix M_, Matrix G_, Vector c_, Matrix S_, Matrix A_, Vector b_);

    Index dim() const { return c.size(); }
    Index lines() const { return M.cols(); }
    Index generators() const { return G.cols(); }
    Index constraints() const { return b.size(); }

    bool is_zonotope() const { return lines() == 0 && constraints() == 0; }
    bool is_constrained_zonotope() const { return lines() == 0; }

    /// Throws std::invalid_argument on shape inconsistencies or non-finite entries.
    void validate() const;
};

/// @brief Strip {x : |rho'*x - d| <= sigma}; sigma = 0 degenerates to a hyperplane.
struct Strip {
    Vector rho;
    double d = 0.0;
    double sigma = 0.0;
};

// --- constructions -----------------------------------------------------------

/// @brief Zonotope (G, c) as a line zonotope with no lines and no constraints.
LineZonotope lz_zonotope(const Matrix& G, const Vector& c);

/// @brief Constrained zonotope (G, c, A, b) as a line zonotope with no lines.
LineZonotope lz_constrained_zonotope(const Matrix& G, const Vector& c,
                                     const Matrix& A, const Vector& b);

/// @brief The singleton {c}.
LineZonotope lz_singleton(const Vector& c);

/// @brief R^n in CLG-rep: (I_n, _, 0)_LZ.
LineZonotope lz_realspace(Index n);

/// @brief Strip as a line zonotope: (I_n, 0_{n x 1}, 0, rho', -sigma, d)_LZ.
LineZonotope lz_from_strip(const Strip& s);

// --- exact set operations ----------------------------------------------------

/// @brief R*Z = (R M, R G, R c, S, A, b)_LZ.
LineZonotope linear_map(const Matrix& R, const LineZonotope& Z);

/// @brief Minkowski sum: concatenated lines/generators, block-diagonal constraints.
LineZonotope minkowski_sum(const LineZonotope& Z, const LineZonotope& W);

/// @brief Generalized intersection Z \cap_R Y = {z in Z : R z in Y}.
LineZonotope generalized_intersection(const LineZonotope& Z, const LineZonotope& Y,
                                      const Matrix& R);

/// @brief Plain intersection (R = identity).
LineZonotope intersection(const LineZonotope& Z, const LineZonotope& Y);

/// @brief Cartesian product Z x W (full block-diagonal stacking).
LineZonotope cartesian_product(const LineZonotope& Z, const LineZonotope& W);

/// @brief Simultaneous intersection of preimages: {x : R_i x in Z_i for all i},
///        assembled in one closed-form CLG-rep instead of a chain of pairwise
///        intersections.
LineZonotope multi_intersection(const std::vector<LineZonotope>& Zs,
                                const std::vector<Matrix>& Rs);

// --- queries (LP-backed) -----------------------------------------------------

/// @brief True iff x lies in Z within feasibility slack tol.
bool membership(const Vector& x, const LineZonotope& Z, double tol = kDefaultTol);

/// @brief True iff Z contains no point (factor feasibility LP infeasible at tol).
bool is_empty(const LineZonotope& Z, double tol = kDefaultTol);

/// @brief Support value max_{x in Z} dir'*x; +inf if unbounded in that
///        direction, -inf if Z is empty.
double support(const LineZonotope& Z, const Vector& dir);

/// @brief Componentwise min/max of Z via 2n support LPs; +/-inf marks
///        unbounded components. Throws std::runtime_error on an empty set.
Interval interval_hull(const LineZonotope& Z);

/// @brief Half the largest interval-hull edge; +inf if any component is
///        unbounded. Throws std::runtime_error on an empty set.
double radius(const LineZonotope& Z);

// --- serialization -----------------------------------------------------------

/// JSON object with explicit dims and row-major M, G, c, S, A, b arrays;
/// numeric values round-trip bit-exactly for finite doubles.
nlohmann::json to_json(const LineZonotope& Z);
LineZonotope lz_from_json(const nlohmann::json& j);

}  // namespace lzsetkit

#endif  // LZSETKIT_LINE_ZONOTOPE_HPP
