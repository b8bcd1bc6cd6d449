/**
 * @file reduction.hpp
 * @brief Complexity reduction for line zonotopes: exact line elimination,
 *        conservative constraint elimination and generator reduction (both via
 *        the lifted-zonotope route), and line-basis compression.
 */

#ifndef LZSETKIT_REDUCTION_HPP
#define LZSETKIT_REDUCTION_HPP

#include "lzsetkit/line_zonotope.hpp"
#include "lzsetkit/types.hpp"

namespace lzsetkit {

struct ReductionLimits {
    Index max_generators = 0;     ///< keep at most this many generator columns
    Index max_constraints = 0;    ///< keep at most this many constraint rows
    bool minimize_lines = false;  ///< compress M to an orthonormal rank basis
};

/// Relative pivot tolerance for line elimination and effective-rank decisions.
inline constexpr double kPivotTol = 1e-10;

struct ReductionReport {
    Index lines_eliminated = 0;
    Index constraints_eliminated = 0;
    Index generators_removed = 0;
    /// Structural floor hit by generator reduction (lifted dimension), if any.
    Index generator_floor = 0;
    bool generator_limit_clamped = false;
};

/// @brief Eliminates line j using constraint row i (pivot S(i,j) != 0): solves
///        the row for delta_j and substitutes. Exact — the returned set equals
///        the input with one line and one constraint fewer.
LineZonotope eliminate_line(const LineZonotope& Z, Index i, Index j);

/// @brief Repeats eliminate_line with largest-|pivot| selection until no pivot
///        exceeds kPivotTol relative to its row's inf-norm. Exact. The number
///        of eliminations equals the effective rank of S.
LineZonotope eliminate_all_lines(const LineZonotope& Z, ReductionReport* report = nullptr);

/// @brief Removes one constraint and one generator by solving the constraint
///        for a xi variable and substituting (enclosure, not exact). The
///        (constraint, generator) pair minimizes an interval-arithmetic hull
///        growth bound; ties break to the lowest index. Requires rank(S) = 0.
///        When protect_last_generators > 0, that many trailing generator
///        columns are never chosen as the eliminated variable.
LineZonotope eliminate_constraint(const LineZonotope& Z, Index protect_last_generators = 0);

/// @brief Reduces the generator count to at most `target` by lifting the
///        constrained generator block to dimension n + n_c and aggregating the
///        lowest-scored columns (score: 2-norm minus inf-norm, ascending) into
///        a parallelotope aligned with their dominant directions. Enclosure;
///        lines untouched; exactly-zero columns are dropped for free. Trailing
///        protected columns are never aggregated. The structural floor is the
///        lifted dimension; smaller targets are clamped (reported via `report`).
LineZonotope reduce_generators(const LineZonotope& Z, Index target,
                               Index protect_last_generators = 0,
                               ReductionReport* report = nullptr);

/// @brief Replaces M by an orthonormal basis of its column space (exact when
///        rank(S) = 0, since only the span of unconstrained lines matters).
LineZonotope compress_lines(const LineZonotope& Z);

/// @brief Full pipeline: eliminate_all_lines, then constraint elimination down
///        to limits.max_constraints, then reduce_generators down to
///        limits.max_generators, then compress_lines if requested. Output is
///        an enclosure of the input.
LineZonotope reduce(const LineZonotope& Z, const ReductionLimits& limits,
                    Index protect_last_generators = 0,
                    ReductionReport* report = nullptr);

}  // namespace lzsetkit

#endif  // LZSETKIT_REDUCTION_HPP
