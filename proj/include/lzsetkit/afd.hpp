/**
 * @file afd.hpp
 * @brief Tube-based active fault diagnosis for a finite family of descriptor
 *        models: closed-form state/output reachable tubes over a horizon,
 *        pairwise separation certificates via LP, input-dependent complexity
 *        reduction, an equivalent zonotope ("ring") form, and separating-input
 *        design as a mixed-integer linear program.
 *
 * The augmented state is z_k = (T^{-1} x_k, w_k); tubes stack z_0..z_N (or the
 * outputs y_0..y_N) into one set whose center and constraint offsets are affine
 * in the stacked input sequence ubar = (u_0, ..., u_N).
 */

#ifndef LZSETKIT_AFD_HPP
#define LZSETKIT_AFD_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "lzsetkit/estimator.hpp"
#include "lzsetkit/line_zonotope.hpp"
#include "lzsetkit/reduction.hpp"
#include "lzsetkit/solver.hpp"
#include "lzsetkit/types.hpp"

namespace lzsetkit {

struct FaultModelSet {
    std::vector<DescriptorModel> models;
    LineZonotope X0;  ///< shared initial set (line zonotope; may be unbounded)
    LineZonotope W;   ///< disturbance set (CG-rep)
    LineZonotope V;   ///< measurement noise set (CG-rep)
    LineZonotope U;   ///< per-step input set (CG-rep, no lines)
    Vector u0;        ///< pinned first input
    Vector utilde;    ///< stacked reference sequence, (N+1)*n_u
    Matrix Rcost;     ///< diagonal positive cost weight on u entries
    Index N = 0;      ///< horizon
    double eps = 0.0;  ///< minimum separation threshold

    void validate() const;
};

/// Which admissible-set assumption the tubes encode.
enum class AfdMethod {
    kLineZonotope,        ///< static block unrestricted per step (R^{n-nz} x W)
    kConstrainedZonotope  ///< static block restricted by bounded X_A per step
};

/// @brief Per-model transformed data for tube construction.
struct TransformedFaultModel {
    DescriptorModel model;
    SvdTransform tr;
    Matrix Azt;  ///< [At Bwt], nz x (n + n_w)
    Matrix Azc;  ///< [Ac Bwc], (n - nz) x (n + n_w)
    Matrix Bc;   ///< static-row input coupling, (n - nz) x n_u
    Matrix F;    ///< C T L with L = [I_n 0], n_y x (n + n_w)
    LineZonotope Zsigma;   ///< T^{-1} X0 x W (augmented initial, no static row)
    LineZonotope ZAcheck;  ///< per-step set for the static block of z_k, dim
                           ///< n - nz + n_w (lower block-row for the CZ method)
};

/// @brief A tube whose center and constraint offsets are affine in ubar:
///        set(ubar) = (M, G, c0 + Cu*ubar, S, A, b0 + Bu*ubar)_LZ.
struct AffineTube {
    Matrix M, G, S, A;
    Vector c0, b0;
    Matrix Cu, Bu;

    LineZonotope at(const Vector& ubar) const;
};

/// @brief Theorem-style pairwise separation data for models (i, j):
///        the input ubar separates the pair iff [Nq; Omega]*ubar lies outside
///        ([M; S], [G; A], [c0; -b0])_LZ.
struct SeparationProblem {
    int i = 0, j = 0;
    Matrix Nq;     ///< (N+1)n_y x (N+1)n_u input-to-center gap map
    Matrix Omega;  ///< constraint-offset input map, stacked for both models
    Matrix M, G, S, A;
    Vector c0, b0;
};

/// @brief Stacked input set Ubar = U x ... x U with ubar = cu + Gu*xi_u,
///        Au*xi_u = bu, ||xi_u||_inf <= 1.
struct StackedInput {
    Matrix Gu;
    Vector cu;
    Matrix Au;
    Vector bu;
};

/// @brief Input-dependent reduced pair data (own generators reduced, input
///        columns preserved) plus the equivalent zonotope ring form.
struct ReducedSeparation {
    int i = 0, j = 0;
    // Reduced line-zonotope form: 0 in (Mz, [Gz Gu], cz, 0, [Az Au], bz)(xi_u).
    Matrix Mz;  ///< full column rank after line compression
    Matrix Gz, Gu;
    Vector cz;
    Matrix Az, Au;
    Vector bz;
    // Ring form: separation iff  Nring*xi_u  lies outside  (Gring, cring)_Z.
    Matrix Nring, Gring;
    Vector cring;
    double kappa_max = 0.0;  ///< big-M upper bound on the ring LP value
};

std::vector<TransformedFaultModel> transform_fault_models(
    const FaultModelSet& f, AfdMethod method = AfdMethod::kLineZonotope,
    const LineZonotope* XA = nullptr);

/// @brief Closed-form state reachable tube over z_0..z_N as an affine-in-ubar
///        line zonotope (dimension (N+1)(n + n_w)).
AffineTube build_state_tube(const TransformedFaultModel& tm, Index N);

/// @brief Step-recursion reference for the state tube (joint stacking of the
///        per-step recursion). Constraint rows appear in recursion order:
///        initial-set rows + step-0 static row, then per step k >= 1 the
///        admissible-set rows followed by the step-k static row.
LineZonotope build_state_tube_recursive(const TransformedFaultModel& tm, Index N,
                                        const Vector& ubar);

/// @brief Output reachable tube Y = F*tube + D*u + Dv*V per step, stacked.
AffineTube build_output_tube(const TransformedFaultModel& tm, const AffineTube& state,
                             const LineZonotope& V, Index N);

SeparationProblem build_separation_problem(const FaultModelSet& f,
                                           const std::vector<AffineTube>& output_tubes,
                                           int i, int j);

/// @brief Lemma-style LP certificate: minimal kappa with ||xi||_inf <= 1+kappa
///        subject to the pair's equality system at the given input. kappa > 0
///        certifies an empty ORT intersection; +inf when the equality system
///        itself is infeasible (the point misses the affine hull).
double check_separation(const SeparationProblem& sp, const Vector& ubar,
                        const LpOptions& opts = {});

StackedInput build_stacked_input(const LineZonotope& U, Index N);

/// @brief Change of variables ubar = cu + Gu*xi_u followed by complexity
///        reduction that never touches the xi_u-coupled columns; lines are
///        compressed to a full-column-rank basis and the ring form is built.
ReducedSeparation input_dependent_reduce(const SeparationProblem& sp,
                                         const StackedInput& u, const ReductionLimits& limits);

/// @brief Ring-form LP value for a given xi_u (equals the reduced separation
///        certificate; used by tests and the MILP cross-checks).
double ring_kappa(const ReducedSeparation& rs, const Vector& xi_u,
                  const LpOptions& opts = {});

/// @brief Interval-arithmetic upper bound on ring_kappa over the xi_u box;
///        throws std::runtime_error when the bound is unbounded (rank-deficient
///        ring geometry).
double bound_kappa_max(const ReducedSeparation& rs);

struct DesignResult {
    MilpStatus status = MilpStatus::kInfeasible;
    Vector ubar;  ///< present iff optimal
    double cost = 0.0;
    std::vector<double> kappa;  ///< post-hoc unreduced certificates, pair order
    long nodes_explored = 0;
};

struct DesignOptions {
    ReductionLimits limits{0, 2, true};  ///< max_generators 0 = 1.6x dimension
    double generator_cap_factor = 1.6;
    MilpOptions milp;
    int jobs = 1;
};

/// @brief Separating-input design: minimizes ||Rcost*(ubar - utilde)||_1 over
///        Ubar subject to first input = u0 and every pair's ring certificate
///        kappa >= eps, as one MILP. Certificates are re-checked on the
///        unreduced problems before returning.
DesignResult design_input(const FaultModelSet& f, AfdMethod method = AfdMethod::kLineZonotope,
                          const LineZonotope* XA = nullptr, const DesignOptions& opts = {});

struct DiagnosisCheck {
    Eigen::MatrixXi inclusion;        ///< [i][j] = #samples of model i inside ORT j
    std::vector<double> kappa;        ///< per-pair unreduced certificates at ubar
    std::vector<bool> pair_separated; ///< kappa > 0 per pair (i<j order)
};

/// @brief Samples n_samples seeded trajectories per true model under ubar and
///        counts stacked-output inclusions in every model's ORT.
DiagnosisCheck verify_diagnosis(const FaultModelSet& f, const Vector& ubar,
                                int n_samples, std::uint64_t seed,
                                AfdMethod method = AfdMethod::kLineZonotope,
                                const LineZonotope* XA = nullptr, int jobs = 1);

}  // namespace lzsetkit

#endif  // LZSETKIT_AFD_HPP
