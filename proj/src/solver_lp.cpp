#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "lzsetkit/solver.hpp"

namespace lzsetkit {

void LpProblem::validate() const {
    const Index n = num_vars();
    require(lower.size() == n && upper.size() == n, "LpProblem: bound length mismatch");
    require(equality_lhs.cols() == n || equality_lhs.size() == 0,
            "LpProblem: equality column mismatch");
    require(equality_lhs.rows() == equality_rhs.size(), "LpProblem: equality row mismatch");
    for (Index i = 0; i < n; ++i)
        require(lower(i) <= upper(i), "LpProblem: lower bound exceeds upper bound");
}

Index LpProblem::add_variable(double cost, double lo, double hi) {
    const Index n = num_vars();
    objective.conservativeResize(n + 1);
    objective(n) = cost;
    lower.conservativeResize(n + 1);
    lower(n) = lo;
    upper.conservativeResize(n + 1);
    upper(n) = hi;
    equality_lhs.conservativeResize(equality_lhs.rows(), n + 1);
    if (equality_lhs.rows() > 0) equality_lhs.col(n).setZero();
    return n;
}

void LpProblem::add_equality(const Vector& coeffs, double rhs) {
    require(coeffs.size() <= num_vars(), "add_equality: too many coefficients");
    const Index m = equality_lhs.rows();
    equality_lhs.conservativeResize(m + 1, num_vars());
    equality_lhs.row(m).setZero();
    equality_lhs.row(m).head(coeffs.size()) = coeffs.transpose();
    equality_rhs.conservativeResize(m + 1);
    equality_rhs(m) = rhs;
}

void LpProblem::add_inequality(const Vector& coeffs, double rhs) {
    require(coeffs.size() <= num_vars(), "add_inequality: too many coefficients");
    const Index slack = add_variable(0.0, 0.0, kInf);
    const Index m = equality_lhs.rows();
    equality_lhs.conservativeResize(m + 1, num_vars());
    equality_lhs.row(m).setZero();
    equality_lhs.row(m).head(coeffs.size()) = coeffs.transpose();
    equality_lhs(m, slack) = 1.0;
    equality_rhs.conservativeResize(m + 1);
    equality_rhs(m) = rhs;
}

namespace {

enum VarStatus : std::int8_t { kAtLower, kAtUpper, kBasic, kFreeNonbasic };

/// Dense bounded-variable revised simplex with a product-form-of-inverse basis
/// representation (LU base factor plus eta updates, periodic refactoring).
/// Free variables are first-class: they enter from value 0 in either direction
/// and never block the ratio test while basic. A cold solve runs the classic
/// two-phase method from a slack/artificial crash basis; a warm solve reuses a
/// caller-supplied basis through the dual simplex, which restores primal
/// feasibility after bound changes while keeping dual feasibility intact.
class Simplex {
  public:
    Simplex(const LpProblem& p, const LpOptions& opts)
        : opts_(opts),
          m_(p.equality_rhs.size()),
          n_(p.num_vars()),
          ntot_(n_ + m_),
          cols_(Matrix::Zero(m_, ntot_)),
          cost_(Vector::Zero(ntot_)),
          lo_(Vector::Zero(ntot_)),
          hi_(Vector::Zero(ntot_)),
          x_(Vector::Zero(ntot_)),
          rhs_(p.equality_rhs),
          stat_(static_cast<std::size_t>(ntot_), kAtLower) {
        cols_.leftCols(n_) = p.equality_lhs;
        lo_.head(n_) = p.lower;
        hi_.head(n_) = p.upper;
        lo_.tail(m_).setZero();
        hi_.tail(m_).setConstant(kInf);
        detect_row_slacks();
    }

    LpSolution run(const Vector& objective) {
        LpSolution out;
        place_nonbasic_at_bounds();
        install_crash_basis();

        // Phase 1: minimize the sum of artificials (their costs are +1 and all
        // start nonnegative, so the phase-1 objective is bounded below by 0).
        cost_.setZero();
        cost_.tail(m_).setOnes();
        if (x_.tail(m_).lpNorm<Eigen::Infinity>() > opts_.feasibility_tol) {
            const LpStatus st = iterate(/*phase1=*/true);
            if (st == LpStatus::kIterationLimit) {
                out.status = st;
                out.iterations = iterations_;
                return out;
            }
            const double resid = phase1_objective();
            if (resid > opts_.feasibility_tol) {
                out.status = LpStatus::kInfeasible;
                out.infeasibility = resid;
                out.iterations = iterations_;
                return out;
            }
        }
        pin_artificials();
        cost_.setZero();
        cost_.head(n_) = objective;
        const LpStatus st = iterate(/*phase1=*/false);
        out.iterations = iterations_;
        out.status = st;
        if (st == LpStatus::kOptimal) {
            out.x = x_.head(n_);
            out.objective_value = objective.dot(out.x);
        }
        return out;
    }

    LpSolution run_warm(const Vector& objective, const LpBasis& warm) {
        if (!install_warm_basis(warm)) return run(objective);
        cost_.setZero();
        cost_.head(n_) = objective;
        LpStatus st = dual_iterate();
        if (st == LpStatus::kIterationLimit) {
            iterations_ = 0;  // give the cold fallback its full budget
            return run(objective);
        }
        LpSolution out;
        if (st == LpStatus::kInfeasible) {
            out.status = st;
            out.infeasibility = max_basic_violation();
            out.iterations = iterations_;
            return out;
        }
        // Primal cleanup pass: certifies optimality (dual feasibility already
        // holds up to tolerance, so this usually takes zero pivots).
        st = iterate(/*phase1=*/false);
        if (st == LpStatus::kIterationLimit) {
            iterations_ = 0;
            return run(objective);
        }
        out.iterations = iterations_;
        out.status = st;
        if (st == LpStatus::kOptimal) {
            out.x = x_.head(n_);
            out.objective_value = objective.dot(out.x);
        }
        return out;
    }

    void snapshot(LpBasis& b) const {
        b.status.assign(stat_.begin(), stat_.end());
        b.rows = basis_;
    }

  private:
    void detect_row_slacks() {
        // A column with a single +1 entry, zero everywhere else, makes a valid
        // crash-basis member for its row whenever the row residual is >= 0;
        // rows produced by add_inequality always have one.
        slack_of_row_.assign(static_cast<std::size_t>(m_), -1);
        for (Index j = 0; j < n_; ++j) {
            if (lo_(j) != 0.0 || hi_(j) != kInf) continue;
            Index row = -1;
            bool clean = true;
            for (Index i = 0; i < m_; ++i) {
                const double v = cols_(i, j);
                if (v == 0.0) continue;
                if (v != 1.0 || row >= 0) {
                    clean = false;
                    break;
                }
                row = i;
            }
            if (clean && row >= 0 && slack_of_row_[static_cast<std::size_t>(row)] < 0)
                slack_of_row_[static_cast<std::size_t>(row)] = j;
        }
    }

    void place_nonbasic_at_bounds() {
        for (Index j = 0; j < n_; ++j) {
            auto& st = stat_[static_cast<std::size_t>(j)];
            if (std::isfinite(lo_(j))) {
                st = kAtLower;
                x_(j) = lo_(j);
            } else if (std::isfinite(hi_(j))) {
                st = kAtUpper;
                x_(j) = hi_(j);
            } else {
                st = kFreeNonbasic;
                x_(j) = 0.0;
            }
        }
    }

    void install_crash_basis() {
        basis_.resize(static_cast<std::size_t>(m_));
        lo_.tail(m_).setZero();  // undo any warm-start pinning
        hi_.tail(m_).setConstant(kInf);
        const Vector r = rhs_ - cols_.leftCols(n_) * x_.head(n_);
        for (Index i = 0; i < m_; ++i) {
            const Index a = n_ + i;
            cols_.col(a).setZero();
            cols_(i, a) = (r(i) >= 0.0) ? 1.0 : -1.0;
            const Index sl = slack_of_row_[static_cast<std::size_t>(i)];
            if (sl >= 0 && r(i) >= 0.0) {
                basis_[static_cast<std::size_t>(i)] = sl;
                stat_[static_cast<std::size_t>(sl)] = kBasic;
                x_(sl) = r(i);
                stat_[static_cast<std::size_t>(a)] = kAtLower;
                x_(a) = 0.0;
            } else {
                basis_[static_cast<std::size_t>(i)] = a;
                stat_[static_cast<std::size_t>(a)] = kBasic;
                x_(a) = std::abs(r(i));
            }
        }
        refactorize();
    }

    bool install_warm_basis(const LpBasis& b) {
        if (static_cast<Index>(b.status.size()) != ntot_ ||
            static_cast<Index>(b.rows.size()) != m_)
            return false;
        Index basic_count = 0;
        for (std::int8_t s : b.status)
            if (s == kBasic) ++basic_count;
        if (basic_count != m_) return false;
        std::vector<char> seen(static_cast<std::size_t>(ntot_), 0);
        for (Index i = 0; i < m_; ++i) {
            const Index v = b.rows[static_cast<std::size_t>(i)];
            if (v < 0 || v >= ntot_ || b.status[static_cast<std::size_t>(v)] != kBasic ||
                seen[static_cast<std::size_t>(v)])
                return false;
            seen[static_cast<std::size_t>(v)] = 1;
        }
        stat_.assign(b.status.begin(), b.status.end());
        basis_ = b.rows;
        // Artificials are pinned at zero with +e_i columns; the warm basis may
        // legally keep some of them basic (at value zero).
        for (Index i = 0; i < m_; ++i) {
            const Index a = n_ + i;
            cols_.col(a).setZero();
            cols_(i, a) = 1.0;
            lo_(a) = 0.0;
            hi_(a) = 0.0;
        }
        for (Index j = 0; j < ntot_; ++j) {
            auto& st = stat_[static_cast<std::size_t>(j)];
            if (st == kBasic) continue;
            if (lo_(j) == hi_(j)) {
                st = kAtLower;
                x_(j) = lo_(j);
            } else if (st == kAtUpper && std::isfinite(hi_(j))) {
                x_(j) = hi_(j);
            } else if (st == kAtLower && std::isfinite(lo_(j))) {
                x_(j) = lo_(j);
            } else if (std::isfinite(lo_(j))) {
                st = kAtLower;
                x_(j) = lo_(j);
            } else if (std::isfinite(hi_(j))) {
                st = kAtUpper;
                x_(j) = hi_(j);
            } else {
                st = kFreeNonbasic;
                x_(j) = 0.0;
            }
        }
        refactorize();
        if (!basis_factor_usable()) return false;
        compute_basic_values();
        return true;
    }

    bool basis_factor_usable() const {
        const auto diag = lu_.matrixLU().diagonal().cwiseAbs();
        const double mx = diag.maxCoeff();
        return mx > 0.0 && diag.minCoeff() > 1e-12 * std::max(1.0, mx);
    }

    void compute_basic_values() {
        for (Index i = 0; i < m_; ++i) x_(basis_[static_cast<std::size_t>(i)]) = 0.0;
        const Vector xb = ftran(rhs_ - cols_ * x_);
        for (Index i = 0; i < m_; ++i) x_(basis_[static_cast<std::size_t>(i)]) = xb(i);
    }

    void pin_artificials() {
        // Basic artificials may linger at value ~0 and get pivoted out by
        // degenerate steps when they interfere.
        for (Index j = n_; j < ntot_; ++j) {
            hi_(j) = 0.0;
            if (stat_[static_cast<std::size_t>(j)] != kBasic) {
                stat_[static_cast<std::size_t>(j)] = kAtLower;
                x_(j) = 0.0;
            }
        }
    }

    double phase1_objective() const {
        double s = 0.0;
        for (Index i = 0; i < m_; ++i) {
            const Index bi = basis_[static_cast<std::size_t>(i)];
            if (bi >= n_) s += std::abs(x_(bi));
        }
        return s;
    }

    double max_basic_violation() const {
        double worst = 0.0;
        for (Index i = 0; i < m_; ++i) {
            const Index bi = basis_[static_cast<std::size_t>(i)];
            worst = std::max(worst, lo_(bi) - x_(bi));
            worst = std::max(worst, x_(bi) - hi_(bi));
        }
        return worst;
    }

    void refactorize() {
        Matrix B(m_, m_);
        for (Index i = 0; i < m_; ++i) B.col(i) = cols_.col(basis_[static_cast<std::size_t>(i)]);
        lu_.compute(B);
        etas_.clear();
    }

    /// Solves B w = v through the base LU and the eta chain.
    Vector ftran(Vector v) const {
        Vector w = lu_.solve(v);
        for (const Eta& e : etas_) {
            const double t = w(e.r) / e.w(e.r);
            w -= e.w * t;
            w(e.r) = t;
        }
        return w;
    }

    /// Solves B' y = v (transpose solve for dual values).
    Vector btran(Vector v) const {
        for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
            const double t = (it->w.dot(v) - v(it->r)) / it->w(it->r);
            v(it->r) -= t;
        }
        return lu_.transpose().solve(v);
    }

    Vector reduced_costs() const {
        Vector cb(m_);
        for (Index i = 0; i < m_; ++i) cb(i) = cost_(basis_[static_cast<std::size_t>(i)]);
        const Vector y = btran(cb);
        return cost_ - cols_.transpose() * y;
    }

    LpStatus iterate(bool phase1) {
        int stall = 0;
        bool bland = false;
        double last_obj = current_objective();
        while (true) {
            if (++iterations_ > opts_.max_iterations) return LpStatus::kIterationLimit;

            const Vector d = reduced_costs();

            // Pricing: Dantzig rule normally, lowest-eligible-index (Bland)
            // after a degenerate stall.
            Index q = -1;
            int dirq = 0;
            double best = 0.0;
            for (Index j = 0; j < ntot_; ++j) {
                if (stat_[static_cast<std::size_t>(j)] == kBasic) continue;
                if (lo_(j) == hi_(j)) continue;  // fixed variable
                const double dj = d(j);
                int dir = 0;
                double viol = 0.0;
                const auto st = stat_[static_cast<std::size_t>(j)];
                if (st == kAtLower && dj < -opts_.optimality_tol) {
                    dir = +1;
                    viol = -dj;
                } else if (st == kAtUpper && dj > opts_.optimality_tol) {
                    dir = -1;
                    viol = dj;
                } else if (st == kFreeNonbasic && std::abs(dj) > opts_.optimality_tol) {
                    dir = dj < 0.0 ? +1 : -1;
                    viol = std::abs(dj);
                }
                if (dir == 0) continue;
                if (bland) {
                    q = j;
                    dirq = dir;
                    break;
                }
                if (viol > best) {
                    best = viol;
                    q = j;
                    dirq = dir;
                }
            }
            if (q < 0) return LpStatus::kOptimal;

            const Vector w = ftran(cols_.col(q));

            // Bounded-variable ratio test; ties go to the lowest variable index
            // for determinism and anti-cycling friendliness.
            double tmax = kInf;
            Index leave_row = -1;
            double leave_to = 0.0;
            {
                const double own = hi_(q) - lo_(q);
                if (std::isfinite(own)) tmax = own;  // bound-to-bound flip
            }
            for (Index i = 0; i < m_; ++i) {
                const double wi = dirq * w(i);
                const Index bi = basis_[static_cast<std::size_t>(i)];
                double t = kInf, to = 0.0;
                if (wi > kPivTol && std::isfinite(lo_(bi))) {
                    t = (x_(bi) - lo_(bi)) / wi;  // decreasing toward lower bound
                    to = lo_(bi);
                } else if (wi < -kPivTol && std::isfinite(hi_(bi))) {
                    t = (hi_(bi) - x_(bi)) / (-wi);  // increasing toward upper bound
                    to = hi_(bi);
                } else {
                    continue;
                }
                t = std::max(t, 0.0);
                const bool strictly_better = t < tmax - kRatioTie;
                const bool tie = !strictly_better && t < tmax + kRatioTie;
                if (strictly_better || (tie && (leave_row < 0 || bi < basis_[static_cast<std::size_t>(leave_row)]))) {
                    if (strictly_better || t < tmax) tmax = t;
                    leave_row = i;
                    leave_to = to;
                }
            }
            if (!std::isfinite(tmax)) {
                // Unreachable in phase 1 (artificial lower bounds block);
                // genuine unbounded ray in phase 2.
                return phase1 ? LpStatus::kIterationLimit : LpStatus::kUnbounded;
            }

            const double step = dirq * tmax;
            for (Index i = 0; i < m_; ++i) x_(basis_[static_cast<std::size_t>(i)]) -= w(i) * step;
            x_(q) += step;

            if (leave_row < 0) {
                stat_[static_cast<std::size_t>(q)] = (dirq > 0) ? kAtUpper : kAtLower;
                x_(q) = (dirq > 0) ? hi_(q) : lo_(q);
            } else {
                const Index leaving = basis_[static_cast<std::size_t>(leave_row)];
                x_(leaving) = leave_to;
                stat_[static_cast<std::size_t>(leaving)] =
                    (leave_to == hi_(leaving) && lo_(leaving) != hi_(leaving)) ? kAtUpper : kAtLower;
                stat_[static_cast<std::size_t>(q)] = kBasic;
                basis_[static_cast<std::size_t>(leave_row)] = q;
                if (std::abs(w(leave_row)) < kEtaPivotMin || etas_.size() >= kMaxEtas) {
                    refactorize();
                } else {
                    etas_.push_back(Eta{leave_row, w});
                }
            }

            const double obj = current_objective();
            if (obj < last_obj - 1e-13 * (1.0 + std::abs(last_obj))) {
                stall = 0;
                bland = false;
                last_obj = obj;
            } else if (++stall > kStallLimit) {
                bland = true;
            }
        }
    }

    /// Dual simplex: drives out-of-bounds basic variables to their violated
    /// bound while the entering choice keeps every reduced cost on its dual
    /// feasible side. Returns kOptimal once primal feasible, kInfeasible on a
    /// certified empty row, kIterationLimit when the caller should fall back
    /// to a cold solve.
    LpStatus dual_iterate() {
        int stall = 0;
        double last_obj = current_objective();
        while (true) {
            if (++iterations_ > opts_.max_iterations) return LpStatus::kIterationLimit;

            Index r = -1;
            double worst = opts_.feasibility_tol;
            int side = 0;       // -1: below lower bound, +1: above upper bound
            double target = 0.0;
            for (Index i = 0; i < m_; ++i) {
                const Index bi = basis_[static_cast<std::size_t>(i)];
                const double below = lo_(bi) - x_(bi);
                const double above = x_(bi) - hi_(bi);
                if (below > worst) {
                    worst = below;
                    r = i;
                    side = -1;
                    target = lo_(bi);
                }
                if (above > worst) {
                    worst = above;
                    r = i;
                    side = +1;
                    target = hi_(bi);
                }
            }
            if (r < 0) return LpStatus::kOptimal;

            Vector er = Vector::Zero(m_);
            er(r) = 1.0;
            const Vector rho = btran(er);
            const Vector alpha = cols_.transpose() * rho;
            const Vector d = reduced_costs();

            // Dual ratio test: smallest loss of dual slack, ties by lowest
            // variable index.
            const double s = static_cast<double>(side);
            Index q = -1;
            double bestt = kInf;
            for (Index j = 0; j < ntot_; ++j) {
                const auto st = stat_[static_cast<std::size_t>(j)];
                if (st == kBasic) continue;
                if (lo_(j) == hi_(j)) continue;
                const double sa = s * alpha(j);
                double t = kInf;
                if (st == kAtLower && sa > kPivTol) {
                    t = d(j) / sa;
                } else if (st == kAtUpper && sa < -kPivTol) {
                    t = d(j) / sa;
                } else if (st == kFreeNonbasic && std::abs(sa) > kPivTol) {
                    t = std::abs(d(j)) / std::abs(sa);
                } else {
                    continue;
                }
                t = std::max(t, 0.0);
                if (t < bestt - kRatioTie || (t < bestt + kRatioTie && (q < 0 || j < q))) {
                    if (t < bestt) bestt = t;
                    q = j;
                }
            }
            if (q < 0) {
                return certify_infeasible_row(r, rho, alpha, side) ? LpStatus::kInfeasible
                                                                   : LpStatus::kIterationLimit;
            }

            Vector w = ftran(cols_.col(q));
            if (std::abs(w(r)) < kEtaPivotMin) {
                refactorize();
                w = ftran(cols_.col(q));
                if (std::abs(w(r)) < kEtaPivotMin) return LpStatus::kIterationLimit;
            }
            const double delta = (x_(basis_[static_cast<std::size_t>(r)]) - target) / w(r);
            for (Index i = 0; i < m_; ++i) x_(basis_[static_cast<std::size_t>(i)]) -= w(i) * delta;
            x_(q) += delta;
            const Index leaving = basis_[static_cast<std::size_t>(r)];
            x_(leaving) = target;
            stat_[static_cast<std::size_t>(leaving)] =
                (side > 0 && lo_(leaving) != hi_(leaving)) ? kAtUpper : kAtLower;
            stat_[static_cast<std::size_t>(q)] = kBasic;
            basis_[static_cast<std::size_t>(r)] = q;
            if (etas_.size() >= kMaxEtas) {
                refactorize();
            } else {
                etas_.push_back(Eta{r, w});
            }

            // The dual objective (= c'x of the working basis) must not
            // decrease; a long stall signals cycling, so punt to cold.
            const double obj = current_objective();
            if (obj > last_obj + 1e-13 * (1.0 + std::abs(last_obj))) {
                stall = 0;
                last_obj = obj;
            } else if (++stall > kStallLimit) {
                return LpStatus::kIterationLimit;
            }
        }
    }

    /// The identity x_B(r) = rho'b - sum_j alpha_j x_j over nonbasic j holds on
    /// the whole feasible set; when the attainable interval provably misses the
    /// violated bound the LP is infeasible. Near-zero alphas contribute slop,
    /// and any unbounded nonbasic direction defeats the certificate, in which
    /// case the caller re-solves cold.
    bool certify_infeasible_row(Index r, const Vector& rho, const Vector& alpha, int side) const {
        const double base = rho.dot(rhs_);
        double reach = base;  // best attainable value toward the violated bound
        double slop = 0.0;
        for (Index j = 0; j < ntot_; ++j) {
            if (stat_[static_cast<std::size_t>(j)] == kBasic) continue;
            const double a = alpha(j);
            if (a == 0.0) continue;
            const double span = std::max(std::abs(lo_(j)), std::abs(hi_(j)));
            if (std::abs(a) <= kPivTol) {
                if (!std::isfinite(span)) return false;
                slop += std::abs(a) * span;
                continue;
            }
            // side < 0 wants x_B(r) as large as possible: subtract min(a*x).
            const double cand1 = a * lo_(j), cand2 = a * hi_(j);
            const double extreme = (side < 0) ? std::min(cand1, cand2) : std::max(cand1, cand2);
            if (!std::isfinite(extreme)) return false;
            reach -= extreme;
        }
        const Index bv = basis_[static_cast<std::size_t>(r)];
        const double margin = 10.0 * opts_.feasibility_tol + slop;
        if (side < 0) return reach < lo_(bv) - margin;
        return reach > hi_(bv) + margin;
    }

    double current_objective() const { return cost_.dot(x_); }

    struct Eta {
        Index r;
        Vector w;
    };

    static constexpr double kPivTol = 1e-10;
    static constexpr double kRatioTie = 1e-10;
    static constexpr double kEtaPivotMin = 1e-8;
    static constexpr std::size_t kMaxEtas = 64;
    static constexpr int kStallLimit = 2000;

    LpOptions opts_;
    Index m_, n_, ntot_;
    Matrix cols_;
    Vector cost_, lo_, hi_, x_;
    Vector rhs_;
    std::vector<std::int8_t> stat_;
    std::vector<Index> basis_;
    std::vector<Index> slack_of_row_;
    Eigen::PartialPivLU<Matrix> lu_;
    std::vector<Eta> etas_;
    int iterations_ = 0;
};

}  // namespace

LpSolution solve_lp(const LpProblem& p, const LpOptions& opts, LpBasis* warm) {
    p.validate();
    if (p.equality_rhs.size() == 0) {
        // Separable box problem: each variable sits at the bound its cost prefers.
        LpSolution out;
        out.status = LpStatus::kOptimal;
        out.x = Vector::Zero(p.num_vars());
        for (Index j = 0; j < p.num_vars(); ++j) {
            const double cj = p.objective(j);
            if (cj > 0.0) {
                if (!std::isfinite(p.lower(j))) return LpSolution{LpStatus::kUnbounded, {}, 0.0, 0.0, 0};
                out.x(j) = p.lower(j);
            } else if (cj < 0.0) {
                if (!std::isfinite(p.upper(j))) return LpSolution{LpStatus::kUnbounded, {}, 0.0, 0.0, 0};
                out.x(j) = p.upper(j);
            } else {
                out.x(j) = std::isfinite(p.lower(j)) ? p.lower(j)
                                                     : (std::isfinite(p.upper(j)) ? p.upper(j) : 0.0);
            }
        }
        out.objective_value = p.objective.dot(out.x);
        return out;
    }
    Simplex s(p, opts);
    const bool use_warm = warm && !warm->empty();
    const LpSolution out = use_warm ? s.run_warm(p.objective, *warm) : s.run(p.objective);
    if (warm && out.status == LpStatus::kOptimal) s.snapshot(*warm);
    return out;
}

std::string dump_lp(const LpProblem& p) {
    std::ostringstream os;
    os << "min c'x, " << p.num_rows() << " rows, " << p.num_vars() << " vars\n";
    os << "c: " << p.objective.transpose() << "\n";
    for (Index i = 0; i < p.num_rows(); ++i)
        os << "row " << i << ": " << p.equality_lhs.row(i) << " = " << p.equality_rhs(i) << "\n";
    os << "lo: " << p.lower.transpose() << "\nhi: " << p.upper.transpose() << "\n";
    return os.str();
}

}  // namespace lzsetkit
