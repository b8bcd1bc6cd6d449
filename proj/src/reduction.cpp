#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "lzsetkit/reduction.hpp"

namespace lzsetkit {

namespace {

Matrix drop_row(const Matrix& m, Index i) {
    Matrix out(m.rows() - 1, m.cols());
    out.topRows(i) = m.topRows(i);
    out.bottomRows(m.rows() - 1 - i) = m.bottomRows(m.rows() - 1 - i);
    return out;
}

Matrix drop_col(const Matrix& m, Index j) {
    Matrix out(m.rows(), m.cols() - 1);
    out.leftCols(j) = m.leftCols(j);
    out.rightCols(m.cols() - 1 - j) = m.rightCols(m.cols() - 1 - j);
    return out;
}

Vector drop_entry(const Vector& v, Index i) {
    Vector out(v.size() - 1);
    out.head(i) = v.head(i);
    out.tail(v.size() - 1 - i) = v.tail(v.size() - 1 - i);
    return out;
}

double constraint_row_scale(const LineZonotope& Z, Index i) {
    double s = std::abs(Z.b(i));
    if (Z.lines() > 0) s = std::max(s, Z.S.row(i).cwiseAbs().maxCoeff());
    if (Z.generators() > 0) s = std::max(s, Z.A.row(i).cwiseAbs().maxCoeff());
    return s;
}

/// True when the S block is numerically zero (lines decoupled from constraints).
bool lines_unconstrained(const LineZonotope& Z) {
    if (Z.lines() == 0 || Z.constraints() == 0 || Z.S.size() == 0) return true;
    for (Index i = 0; i < Z.constraints(); ++i) {
        const double rs = constraint_row_scale(Z, i);
        if (Z.S.row(i).cwiseAbs().maxCoeff() > kPivotTol * std::max(rs, 1.0)) return false;
    }
    return true;
}

LineZonotope snap_lines_free(LineZonotope Z) {
    Z.S.setZero();
    return Z;
}

}  // namespace

LineZonotope eliminate_line(const LineZonotope& Z, Index i, Index j) {
    require(i >= 0 && i < Z.constraints(), "eliminate_line: constraint index out of range");
    require(j >= 0 && j < Z.lines(), "eliminate_line: line index out of range");
    const double piv = Z.S(i, j);
    require(std::abs(piv) > kPivotTol * std::max(constraint_row_scale(Z, i), 1.0),
            "eliminate_line: zero pivot");

    // Solve row i for delta_j and substitute everywhere; exact by construction.
    const Vector lm = Z.M.col(j) / piv;   // state-space substitution direction
    const Vector ls = Z.S.col(j) / piv;   // constraint-space substitution direction
    LineZonotope out;
    out.c = Z.c + lm * Z.b(i);
    out.M = drop_col(Matrix(Z.M - lm * Z.S.row(i)), j);
    out.G = Z.G - lm * Z.A.row(i);
    out.S = drop_col(drop_row(Matrix(Z.S - ls * Z.S.row(i)), i), j);
    out.A = drop_row(Matrix(Z.A - ls * Z.A.row(i)), i);
    out.b = drop_entry(Vector(Z.b - ls * Z.b(i)), i);
    out.validate();
    return out;
}

LineZonotope eliminate_all_lines(const LineZonotope& Z, ReductionReport* report) {
    LineZonotope cur = Z;
    Index count = 0;
    while (cur.lines() > 0 && cur.constraints() > 0) {
        // Largest eligible pivot, relative to its constraint row's scale.
        Index bi = -1, bj = -1;
        double best = 0.0;
        for (Index i = 0; i < cur.constraints(); ++i) {
            const double rs = std::max(constraint_row_scale(cur, i), 1.0);
            for (Index j = 0; j < cur.lines(); ++j) {
                const double a = std::abs(cur.S(i, j));
                if (a > kPivotTol * rs && a > best) {
                    best = a;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi < 0) break;
        cur = eliminate_line(cur, bi, bj);
        ++count;
    }
    if (report != nullptr) report->lines_eliminated += count;
    return cur;
}

LineZonotope eliminate_constraint(const LineZonotope& Z, Index protect_last_generators) {
    require(Z.constraints() >= 1, "eliminate_constraint: no constraints to remove");
    require(lines_unconstrained(Z), "eliminate_constraint: eliminate lines first (S must be zero)");
    require(protect_last_generators >= 0 && protect_last_generators <= Z.generators(),
            "eliminate_constraint: bad protected column count");
    LineZonotope cur = snap_lines_free(Z);
    const Index ng = cur.generators();
    const Index reducible = ng - protect_last_generators;

    // Redundant all-zero row: dropping it is exact and costs no generator.
    for (Index i = 0; i < cur.constraints(); ++i) {
        const bool zero_row = cur.generators() == 0 || cur.A.row(i).cwiseAbs().maxCoeff() <= kPivotTol;
        if (zero_row && std::abs(cur.b(i)) <= kPivotTol) {
            cur.S = drop_row(cur.S, i);
            cur.A = drop_row(cur.A, i);
            cur.b = drop_entry(cur.b, i);
            return cur;
        }
    }

    // Pick the (constraint, generator) pair minimizing an interval-arithmetic
    // bound on hull growth: the row-implied range of xi_j beyond [-1,1],
    // weighted by the column it erases. Ties go to the lowest (i, j).
    Vector gnorm(reducible);
    for (Index j = 0; j < reducible; ++j) gnorm(j) = cur.G.col(j).norm();
    Index bi = -1, bj = -1;
    double best_score = kInf;
    for (Index i = 0; i < cur.constraints(); ++i) {
        const double rs = std::max(constraint_row_scale(cur, i), 1.0);
        const double row_abs_sum = cur.A.row(i).cwiseAbs().sum();
        for (Index j = 0; j < reducible; ++j) {
            const double piv = std::abs(cur.A(i, j));
            if (piv <= 1e-8 * rs) continue;  // unstable pivot
            // Range of xi_j implied by row i alone with the others in [-1,1]:
            // center b_i/A_ij, radius sum_{m != j} |A_im| / |A_ij|.
            const double mid = std::abs(cur.b(i)) / piv;
            const double rad = (row_abs_sum - piv) / piv;
            const double excess = std::max(0.0, mid + rad - 1.0);
            const double score = excess * gnorm(j);
            if (score < best_score - 1e-12) {
                best_score = score;
                bi = i;
                bj = j;
            }
        }
    }
    if (bi < 0) {
        // No usable pivot: fall back to dropping the weakest row outright
        // (still an enclosure; generator count unchanged).
        Index wi = 0;
        double wmin = kInf;
        for (Index i = 0; i < cur.constraints(); ++i) {
            const double w = cur.generators() == 0 ? 0.0 : cur.A.row(i).cwiseAbs().maxCoeff();
            if (w < wmin) {
                wmin = w;
                wi = i;
            }
        }
        cur.S = drop_row(cur.S, wi);
        cur.A = drop_row(cur.A, wi);
        cur.b = drop_entry(cur.b, wi);
        return cur;
    }

    const double piv = cur.A(bi, bj);
    const Vector lg = cur.G.col(bj) / piv;
    const Vector la = cur.A.col(bj) / piv;
    LineZonotope out;
    out.M = cur.M;
    out.c = cur.c + lg * cur.b(bi);
    out.G = drop_col(Matrix(cur.G - lg * cur.A.row(bi)), bj);
    out.S = drop_row(cur.S, bi);
    out.A = drop_col(drop_row(Matrix(cur.A - la * cur.A.row(bi)), bi), bj);
    out.b = drop_entry(Vector(cur.b - la * cur.b(bi)), bi);
    out.validate();
    return out;
}

LineZonotope reduce_generators(const LineZonotope& Z, Index target,
                               Index protect_last_generators, ReductionReport* report) {
    require(lines_unconstrained(Z), "reduce_generators: eliminate lines first (S must be zero)");
    require(protect_last_generators >= 0 && protect_last_generators <= Z.generators(),
            "reduce_generators: bad protected column count");
    const Index ng0 = Z.generators();
    if (ng0 <= target) return Z;
    LineZonotope cur = snap_lines_free(Z);

    const Index n = cur.dim();
    const Index nc = cur.constraints();
    const Index lift_dim = n + nc;

    // Lifted columns [G; A]: all containment reasoning happens up here so the
    // constraint couplings of removed generators are preserved.
    Matrix L0(lift_dim, ng0);
    L0.topRows(n) = cur.G;
    if (nc > 0) L0.bottomRows(nc) = cur.A;

    // Exactly zero columns contribute nothing; dropping them is free tightness.
    const Index reducible0 = ng0 - protect_last_generators;
    std::vector<Index> keep0;
    for (Index j = 0; j < reducible0; ++j)
        if (L0.col(j).norm() > 0.0) keep0.push_back(j);
    const Index reducible = static_cast<Index>(keep0.size());
    const Index ng = reducible + protect_last_generators;
    Matrix L(lift_dim, ng);
    for (Index j = 0; j < reducible; ++j)
        L.col(j) = L0.col(keep0[static_cast<std::size_t>(j)]);
    L.rightCols(protect_last_generators) = L0.rightCols(protect_last_generators);

    auto assemble = [&](const Matrix& cols) {
        LineZonotope out;
        out.M = cur.M;
        out.c = cur.c;
        out.G = cols.topRows(n);
        out.S = Matrix::Zero(nc, cur.lines());
        out.A = nc > 0 ? Matrix(cols.bottomRows(nc)) : Matrix(0, cols.cols());
        out.b = cur.b;
        out.validate();
        if (report != nullptr) report->generators_removed += ng0 - cols.cols();
        return out;
    };
    if (ng <= target) return assemble(L);

    // Aggregating K columns into a lifted box leaves ng - K + (box columns).
    Index k_agg = ng - target + lift_dim;
    bool clamped = false;
    if (k_agg > reducible) {
        k_agg = reducible;
        clamped = true;
    }
    if (report != nullptr) {
        report->generator_floor = lift_dim + protect_last_generators;
        report->generator_limit_clamped = clamped;
    }
    if (k_agg <= 0 || ng - k_agg + lift_dim >= ng) return assemble(L);  // boxing would not shrink

    // Scored by 2-norm minus inf-norm, ascending: the closer a column is to
    // axis-aligned, the cheaper its box enclosure.
    std::vector<Index> order(static_cast<std::size_t>(reducible));
    std::iota(order.begin(), order.end(), Index{0});
    std::vector<double> score(static_cast<std::size_t>(reducible));
    for (Index j = 0; j < reducible; ++j)
        score[static_cast<std::size_t>(j)] = L.col(j).norm() - L.col(j).cwiseAbs().maxCoeff();
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return score[static_cast<std::size_t>(a)] < score[static_cast<std::size_t>(b)]; });

    std::vector<bool> aggregate(static_cast<std::size_t>(ng), false);
    for (Index r = 0; r < k_agg; ++r) aggregate[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = true;

    Matrix agg(lift_dim, k_agg);
    std::vector<Index> kept;
    Index acol = 0;
    for (Index j = 0; j < ng; ++j) {
        if (aggregate[static_cast<std::size_t>(j)]) {
            agg.col(acol++) = L.col(j);
        } else if (j < reducible) {
            kept.push_back(j);
        }
    }
    // Enclose the aggregated sub-zonotope in a parallelotope whose frame U is
    // built from its dominant columns (completed by principal axes when rank
    // deficient): sum xi_j l_j = U (sum xi_j U^+ l_j) lies in
    // U * diag(sum_j |U^+ l_j|), exact containment since U spans the columns.
    std::vector<Index> by_norm(static_cast<std::size_t>(k_agg));
    std::iota(by_norm.begin(), by_norm.end(), Index{0});
    std::stable_sort(by_norm.begin(), by_norm.end(), [&](Index a, Index b) {
        return agg.col(a).norm() > agg.col(b).norm();
    });
    // Greedy dominant columns with a conditioning guard (Gram-Schmidt residual
    // must retain a fixed fraction of the column norm).
    auto greedy_frame = [&](Index max_picks, Matrix& Uout, Matrix& Qout) {
        Index picked = 0;
        for (Index j : by_norm) {
            if (picked == max_picks) break;
            Vector r = agg.col(j);
            for (Index p = 0; p < picked; ++p) r -= Qout.col(p).dot(r) * Qout.col(p);
            if (r.norm() > 0.2 * agg.col(j).norm() && agg.col(j).norm() > 0.0) {
                Uout.col(picked) = agg.col(j) / agg.col(j).norm();
                Qout.col(picked) = r / r.norm();
                ++picked;
            }
        }
        return picked;
    };
    Matrix U(lift_dim, lift_dim);
    Matrix Q(lift_dim, lift_dim);  // orthonormalized picked directions
    const Index picked = greedy_frame(lift_dim, U, Q);
    bool covered = picked == lift_dim;
    if (!covered) {
        // Covered iff every aggregated column lies in the picked span (up to
        // the rank tolerance); only then can the SVD be skipped.
        const double maxcol = agg.col(by_norm.front()).norm();
        double rmax = 0.0;
        for (Index j = 0; j < k_agg; ++j) {
            Vector r = agg.col(j);
            for (Index p = 0; p < picked; ++p) r -= Q.col(p).dot(r) * Q.col(p);
            rmax = std::max(rmax, r.norm());
        }
        covered = rmax <= 1e-12 * maxcol;
    }
    if (covered) {
        U.conservativeResize(lift_dim, picked);
    } else {
        // Principal axes fill whatever directions the chosen columns do not
        // cover; if that still starves, the axes alone become the frame.
        Eigen::JacobiSVD<Matrix> svd(agg, Eigen::ComputeThinU);
        Index rank = 0;
        const double smax = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
        for (Index i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > 1e-12 * smax) ++rank;
        U.resize(lift_dim, rank);
        Q.resize(lift_dim, rank);
        Index p2 = greedy_frame(rank, U, Q);
        for (Index i = 0; p2 < rank && i < rank; ++i) {
            Vector r = svd.matrixU().col(i);
            for (Index p = 0; p < p2; ++p) r -= Q.col(p).dot(r) * Q.col(p);
            if (r.norm() > 0.2) {
                U.col(p2) = svd.matrixU().col(i);
                Q.col(p2) = r / r.norm();
                ++p2;
            }
        }
        if (p2 < rank) U = svd.matrixU().leftCols(rank);
    }
    const Vector box =
        U.cols() == lift_dim
            ? Vector(Eigen::PartialPivLU<Matrix>(U).solve(agg).cwiseAbs().rowwise().sum())
            : Vector((U.completeOrthogonalDecomposition().pseudoInverse() * agg)
                         .cwiseAbs()
                         .rowwise()
                         .sum());
    // Assemble: kept reducible columns, box columns (nonzero only), protected tail.
    std::vector<Index> box_dims;
    for (Index d = 0; d < U.cols(); ++d)
        if (box(d) > 0.0) box_dims.push_back(d);
    const Index out_ng =
        static_cast<Index>(kept.size() + box_dims.size()) + protect_last_generators;
    Matrix Lout = Matrix::Zero(lift_dim, out_ng);
    Index col = 0;
    for (Index j : kept) Lout.col(col++) = L.col(j);
    for (Index d : box_dims) Lout.col(col++) = U.col(d) * box(d);
    for (Index j = reducible; j < ng; ++j) Lout.col(col++) = L.col(j);
    return assemble(Lout);
}

LineZonotope compress_lines(const LineZonotope& Z) {
    require(lines_unconstrained(Z), "compress_lines: eliminate lines first (S must be zero)");
    if (Z.lines() == 0) return Z;
    LineZonotope cur = snap_lines_free(Z);
    Eigen::ColPivHouseholderQR<Matrix> qr(cur.M);
    qr.setThreshold(kPivotTol);
    const Index r = qr.rank();
    Matrix Q = qr.householderQ() * Matrix::Identity(cur.dim(), r);
    LineZonotope out;
    out.M = Q;
    out.G = cur.G;
    out.c = cur.c;
    out.S = Matrix::Zero(cur.constraints(), r);
    out.A = cur.A;
    out.b = cur.b;
    out.validate();
    return out;
}

LineZonotope reduce(const LineZonotope& Z, const ReductionLimits& limits,
                    Index protect_last_generators, ReductionReport* report) {
    LineZonotope cur = eliminate_all_lines(Z, report);
    if (cur.constraints() > 0 && !lines_unconstrained(cur))
        throw std::runtime_error("reduce: line elimination left a coupled S block");
    if (cur.constraints() > 0) cur = snap_lines_free(cur);
    while (cur.constraints() > static_cast<Index>(limits.max_constraints)) {
        const Index before = cur.constraints();
        cur = eliminate_constraint(cur, protect_last_generators);
        if (report != nullptr) ++report->constraints_eliminated;
        if (cur.constraints() >= before) break;  // defensive: no progress
    }
    if (cur.generators() > static_cast<Index>(limits.max_generators))
        cur = reduce_generators(cur, limits.max_generators, protect_last_generators, report);
    if (limits.minimize_lines) cur = compress_lines(cur);
    return cur;
}

}  // namespace lzsetkit
