/**
 * @file estimator.hpp
 * @brief Set-based state estimation for discrete-time linear descriptor systems
 *
 *   E x_k = A x_{k-1} + B u_{k-1} + Bw w_{k-1},
 *   y_k   = C x_k + D u_k + Dv v_k,
 *
 * with possibly singular E. An SVD of E yields coordinates z = T^{-1} x that
 * split the dynamics into a difference part and a static part; prediction and
 * measurement update are carried out exactly on line zonotopes in z-space.
 */

#ifndef LZSETKIT_ESTIMATOR_HPP
#define LZSETKIT_ESTIMATOR_HPP

#include <cstdint>
#include <vector>

#include "lzsetkit/line_zonotope.hpp"
#include "lzsetkit/reduction.hpp"
#include "lzsetkit/types.hpp"

namespace lzsetkit {

struct DescriptorModel {
    Matrix E;   ///< n x n, may be singular
    Matrix A;   ///< n x n
    Matrix B;   ///< n x n_u
    Matrix Bw;  ///< n x n_w
    Matrix C;   ///< n_y x n
    Matrix D;   ///< n_y x n_u
    Matrix Dv;  ///< n_y x n_v

    Index n() const { return E.rows(); }
    Index nu() const { return B.cols(); }
    Index nw() const { return Bw.cols(); }
    Index ny() const { return C.rows(); }
    Index nv() const { return Dv.cols(); }
    void validate() const;
};

/// @brief SVD-derived change of coordinates and transformed system blocks.
///
/// With E = U Sigma V', T = (V')^{-1} = V and nz = rank(E):
///   z~_k = At z_{k-1} + Bt u_{k-1} + Bwt w_{k-1}   (difference part, nz rows)
///   0    = Ac z_k + Bc u_k + Bwc w_k               (static part, n - nz rows)
///   y_k  = C T z_k + D u_k + Dv v_k.
struct SvdTransform {
    Matrix U;      ///< n x n orthogonal
    Vector sigma;  ///< singular values, descending
    Matrix T;      ///< n x n invertible (equals V)
    Matrix Tinv;   ///< V'
    Index nz = 0;  ///< rank of E

    Matrix At;   ///< nz x n
    Matrix Bt;   ///< nz x n_u
    Matrix Bwt;  ///< nz x n_w
    Matrix Ac;   ///< (n - nz) x n
    Matrix Bc;   ///< (n - nz) x n_u
    Matrix Bwc;  ///< (n - nz) x n_w
};

SvdTransform svd_transform(const DescriptorModel& m, double rank_tol = 1e-10);

/// @brief Initial feasible set Zhat_0 in z-coordinates: X0 refined by the k=0
///        measurement, mapped through T^{-1}, then augmented with w_0 coupling
///        and the k=0 static row.
LineZonotope initial_feasible_set(const DescriptorModel& m, const SvdTransform& t,
                                  const LineZonotope& X0, const LineZonotope& W,
                                  const LineZonotope& V, const Vector& u0,
                                  const Vector& y0);

/// @brief One prediction step: the reachable set Zbar_k in z-coordinates from
///        Zhat_{k-1}, with `zcheck_prior` the set assumed for the static block
///        of z_k (R^{n-nz} for the line-zonotope method; the lower block-row of
///        T^{-1} X_A for the constrained-zonotope baseline).
LineZonotope predict(const SvdTransform& t, const LineZonotope& Zhat_prev,
                     const LineZonotope& W, const Vector& u_prev, const Vector& u_k,
                     const LineZonotope& zcheck_prior);

/// @brief Measurement update: Zbar_k intersected with the output-consistent
///        set under R = C T. An empty result is a valid return value.
LineZonotope update(const SvdTransform& t, const LineZonotope& Zbar,
                    const DescriptorModel& m, const LineZonotope& V,
                    const Vector& u_k, const Vector& y_k);

struct EstimatorState {
    Index k = 0;
    LineZonotope Zhat;  ///< z-coordinates
    LineZonotope Xhat;  ///< x-coordinates, = T * Zhat
    bool empty = false;
    double radius_x = 0.0;  ///< radius of Xhat; +inf when unbounded; NaN if empty
    double reduce_seconds = 0.0;  ///< wall time spent in reduce() this step
};

enum class EstimatorMethod {
    kLineZonotope,        ///< static block of z_k unrestricted (R^{n-nz})
    kConstrainedZonotope  ///< static block restricted by admissible set X_A
};

struct EstimatorConfig {
    EstimatorMethod method = EstimatorMethod::kLineZonotope;
    ReductionLimits limits{30, 5, true};
    LineZonotope XA;  ///< required for the constrained-zonotope baseline
    double tol = kDefaultTol;
    bool stop_on_empty = false;
};

/// @brief Full recursive run over aligned input/output sequences
///        (inputs[k], outputs[k] for k = 0..K). Reduction is applied after each
///        update. Once the set goes empty it stays flagged empty.
std::vector<EstimatorState> estimate_run(const DescriptorModel& m,
                                         const LineZonotope& X0,
                                         const LineZonotope& W, const LineZonotope& V,
                                         const std::vector<Vector>& inputs,
                                         const std::vector<Vector>& outputs,
                                         const EstimatorConfig& cfg);

struct SimulationResult {
    std::vector<Vector> states;   ///< x_0..x_K (static block projected feasible)
    std::vector<Vector> outputs;  ///< y_0..y_K
    std::vector<Vector> w;        ///< w_0..w_K
    std::vector<Vector> v;        ///< v_0..v_K
};

/// @brief Simulates the descriptor dynamics with uniform noise drawn on the
///        generator-box preimages of W and V. The difference part of x0 is
///        honored; the static part of each state (x0 included) is solved from
///        the static row, which requires the corresponding sub-block of Ac to
///        be invertible. When w0 is given it replaces the drawn process noise
///        at step 0, so a consistent (x0, w0) pair starts the trajectory at
///        x0 exactly.
SimulationResult simulate(const DescriptorModel& m, const SvdTransform& t,
                          const LineZonotope& W, const LineZonotope& V,
                          const Vector& x0, const std::vector<Vector>& inputs,
                          std::uint64_t noise_seed, const Vector* w0 = nullptr);

}  // namespace lzsetkit

#endif  // LZSETKIT_ESTIMATOR_HPP
