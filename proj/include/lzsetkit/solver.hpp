/**
 * @file solver.hpp
 * @brief Dense LP/MILP backend: bounded-variable revised simplex plus a
 *        deterministic branch-and-bound layer over binary variables.
 *
 * Canonical form: min c'*x  s.t.  Aeq*x = beq,  lo <= x <= hi, where any bound
 * may be infinite. Free variables are handled natively (never split into
 * differences), which matters because line factors are genuinely unbounded.
 * Inequalities are expressed by the caller through explicit slack columns.
 */

#ifndef LZSETKIT_SOLVER_HPP
#define LZSETKIT_SOLVER_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lzsetkit/types.hpp"

namespace lzsetkit {

struct LpProblem {
    Vector objective;  ///< n
    Matrix equality_lhs;  ///< m x n
    Vector equality_rhs;  ///< m
    Vector lower;  ///< n, entries may be -inf
    Vector upper;  ///< n, entries may be +inf

    Index num_vars() const { return objective.size(); }
    Index num_rows() const { return equality_rhs.size(); }
    void validate() const;

    /// Appends a fresh variable (default: free, zero cost); returns its index.
    Index add_variable(double cost, double lo, double hi);
    /// Appends the equality row coeffs'*x = rhs (coeffs over all current vars).
    void add_equality(const Vector& coeffs, double rhs);
    /// Appends coeffs'*x <= rhs by adding one slack variable in [0, +inf).
    void add_inequality(const Vector& coeffs, double rhs);
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpSolution {
    LpStatus status = LpStatus::kIterationLimit;
    Vector x;                   ///< present iff optimal
    double objective_value = 0.0;
    double infeasibility = 0.0;  ///< phase-1 residual when infeasible
    int iterations = 0;
};

struct LpOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    int max_iterations = 50000;
};

/// @brief Basis snapshot for warm-started re-solves: one simplex status per
///        column (structural variables first, then one artificial per row) and
///        the basic variable of each row. Opaque outside the solver; reuse is
///        only meaningful across problems that differ in variable bounds.
struct LpBasis {
    std::vector<std::int8_t> status;
    std::vector<Index> rows;
    bool empty() const { return status.empty(); }
};

/// @brief Solves the LP. When `warm` is non-null and non-empty it seeds a
///        dual-simplex re-solve (falling back to a cold solve if the basis is
///        stale or singular); on an optimal exit the final basis is written
///        back through `warm`.
LpSolution solve_lp(const LpProblem& p, const LpOptions& opts = {}, LpBasis* warm = nullptr);

struct MilpProblem {
    LpProblem lp;
    std::vector<Index> binaries;  ///< indices of {0,1} variables
    void validate() const;
};

enum class MilpStatus { kOptimal, kInfeasible, kNodeLimit };

struct MilpSolution {
    MilpStatus status = MilpStatus::kNodeLimit;
    Vector x;
    double objective_value = 0.0;
    long nodes_explored = 0;
};

struct MilpOptions {
    double absolute_gap = 1e-9;
    double integrality_tol = 1e-6;
    long max_nodes = 2000000;
    /// Depth-first until this many nodes or the first incumbent, then
    /// best-bound node selection.
    long depth_first_node_cap = 10000;
    LpOptions lp;
    /// Optional primal heuristic, called on every optimal node relaxation:
    /// given the relaxed solution, attempt a feasible completion; on success
    /// fill (objective, x) and return true. Must be deterministic and must
    /// never report an objective below the true mixed-integer optimum.
    std::function<bool(const Vector& relaxed, double& objective, Vector& x)> heuristic;
};

/// Branch-and-bound over the declared binaries: most-fractional branching with
/// ties by lowest index, deterministic given identical input bytes.
MilpSolution solve_milp(const MilpProblem& p, const MilpOptions& opts = {});

/// Fixed-width textual dump for debugging (not a stable format).
std::string dump_lp(const LpProblem& p);

}  // namespace lzsetkit

#endif  // LZSETKIT_SOLVER_HPP
