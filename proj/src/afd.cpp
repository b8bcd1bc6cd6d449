#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "lzsetkit/afd.hpp"
#include "lzsetkit/rng.hpp"

namespace lzsetkit {

void FaultModelSet::validate() const {
    require(!models.empty(), "fault set: no models");
    for (const auto& m : models) m.validate();
    const auto& m0 = models.front();
    for (const auto& m : models)
        require(m.n() == m0.n() && m.nu() == m0.nu() && m.nw() == m0.nw() &&
                    m.ny() == m0.ny(),
                "fault set: models must share all dimensions");
    require(N >= 1, "fault set: horizon must be at least 1");
    require(X0.dim() == m0.n(), "fault set: X0 dimension mismatch");
    require(W.dim() == m0.nw(), "fault set: W dimension mismatch");
    require(V.dim() == m0.nv(), "fault set: V dimension mismatch");
    require(U.dim() == m0.nu() && U.lines() == 0, "fault set: U must be bounded");
    require(u0.size() == m0.nu(), "fault set: u0 size mismatch");
    const Index nseq = (N + 1) * m0.nu();
    require(utilde.size() == nseq, "fault set: utilde must stack N+1 inputs");
    require(Rcost.rows() == nseq && Rcost.cols() == nseq, "fault set: Rcost shape");
    for (Index r = 0; r < nseq; ++r) {
        require(Rcost(r, r) > 0.0, "fault set: Rcost diagonal must be positive");
        for (Index c = 0; c < nseq; ++c)
            require(r == c || Rcost(r, c) == 0.0, "fault set: Rcost must be diagonal");
    }
    require(eps > 0.0, "fault set: separation threshold must be positive");
}

LineZonotope AffineTube::at(const Vector& ubar) const {
    require(ubar.size() == Cu.cols(), "tube: input sequence length mismatch");
    LineZonotope out;
    out.M = M;
    out.G = G;
    out.c = c0 + Cu * ubar;
    out.S = S;
    out.A = A;
    out.b = b0 + Bu * ubar;
    out.validate();
    return out;
}

std::vector<TransformedFaultModel> transform_fault_models(const FaultModelSet& f,
                                                          AfdMethod method,
                                                          const LineZonotope* XA) {
    f.validate();
    if (method == AfdMethod::kConstrainedZonotope)
        require(XA != nullptr && XA->dim() == f.models.front().n(),
                "transform_fault_models: the CZ method needs an admissible set XA");

    std::vector<TransformedFaultModel> out;
    out.reserve(f.models.size());
    for (const auto& m : f.models) {
        TransformedFaultModel tm;
        tm.model = m;
        tm.tr = svd_transform(m);
        const Index n = m.n();
        const Index nw = m.nw();
        const Index ns = n - tm.tr.nz;
        tm.Azt = hcat(tm.tr.At, tm.tr.Bwt);
        tm.Azc = hcat(tm.tr.Ac, tm.tr.Bwc);
        tm.Bc = tm.tr.Bc;
        tm.F = hcat(Matrix(m.C * tm.tr.T), Matrix::Zero(m.ny(), nw));
        tm.Zsigma = cartesian_product(linear_map(tm.tr.Tinv, f.X0), f.W);
        if (method == AfdMethod::kLineZonotope) {
            tm.ZAcheck = ns > 0 ? cartesian_product(lz_realspace(ns), f.W) : f.W;
        } else {
            const LineZonotope full =
                cartesian_product(linear_map(tm.tr.Tinv, *XA), f.W);
            Matrix sel = Matrix::Zero(ns + nw, n + nw);
            sel.rightCols(ns + nw).setIdentity();
            tm.ZAcheck = linear_map(sel, full);
        }
        out.push_back(std::move(tm));
    }
    return out;
}

namespace {

/// Repeats m along the diagonal `count` times (empty-safe).
Matrix bdiag_repeat(const Matrix& m, Index count) {
    Matrix out = Matrix::Zero(m.rows() * count, m.cols() * count);
    for (Index k = 0; k < count; ++k)
        out.block(k * m.rows(), k * m.cols(), m.rows(), m.cols()) = m;
    return out;
}

Vector vcat_repeat(const Vector& v, Index count) {
    Vector out(v.size() * count);
    for (Index k = 0; k < count; ++k) out.segment(k * v.size(), v.size()) = v;
    return out;
}

}  // namespace

AffineTube build_state_tube(const TransformedFaultModel& tm, Index N) {
    require(N >= 1, "build_state_tube: horizon must be at least 1");
    const Index n = tm.model.n();
    const Index nw = tm.model.nw();
    const Index nu = tm.model.nu();
    const Index na = n + nw;
    const Index nz = tm.tr.nz;
    const Index ns = n - nz;
    const LineZonotope& ZA = tm.ZAcheck;
    require(ZA.dim() == ns + nw, "build_state_tube: admissible set dimension mismatch");

    // Lifted one-step maps: z_k = Ahat z_{k-1} + Bhat u_{k-1} + (0, check part).
    Matrix Ahat = Matrix::Zero(na, na);
    Ahat.topRows(nz) = tm.Azt;
    Matrix Bhat = Matrix::Zero(na, nu);
    Bhat.topRows(nz) = tm.tr.Bt;
    const Index ndA = ZA.lines();
    const Index ngA = ZA.generators();
    Matrix EM = Matrix::Zero(na, ndA);
    EM.bottomRows(ns + nw) = ZA.M;
    Matrix EG = Matrix::Zero(na, ngA);
    EG.bottomRows(ns + nw) = ZA.G;
    Vector ec = Vector::Zero(na);
    ec.tail(ns + nw) = ZA.c;

    std::vector<Matrix> Apow(static_cast<std::size_t>(N + 1));
    Apow[0] = Matrix::Identity(na, na);
    for (Index k = 1; k <= N; ++k) Apow[static_cast<std::size_t>(k)] = Ahat * Apow[static_cast<std::size_t>(k - 1)];

    const Index rows = (N + 1) * na;
    Matrix Q(rows, na);
    Vector p = Vector::Zero(rows);
    Matrix H = Matrix::Zero(rows, (N + 1) * nu);
    Vector pk = Vector::Zero(na);
    for (Index k = 0; k <= N; ++k) {
        Q.middleRows(k * na, na) = Apow[static_cast<std::size_t>(k)];
        if (k >= 1) pk = Ahat * pk + ec;
        p.segment(k * na, na) = pk;
        for (Index m = 0; m < k; ++m)
            H.block(k * na, m * nu, na, nu) = Apow[static_cast<std::size_t>(k - 1 - m)] * Bhat;
    }
    Matrix PM = Matrix::Zero(rows, N * ndA);
    Matrix PG = Matrix::Zero(rows, N * ngA);
    for (Index k = 1; k <= N; ++k) {
        for (Index j = 1; j <= k; ++j) {
            PM.block(k * na, (j - 1) * ndA, na, ndA) = Apow[static_cast<std::size_t>(k - j)] * EM;
            PG.block(k * na, (j - 1) * ngA, na, ngA) = Apow[static_cast<std::size_t>(k - j)] * EG;
        }
    }

    AffineTube tube;
    tube.M = hcat(Matrix(Q * tm.Zsigma.M), PM);
    tube.G = hcat(Matrix(Q * tm.Zsigma.G), PG);
    tube.c0 = Q * tm.Zsigma.c + p;
    tube.Cu = H;

    // Constraint rows: initial-set rows, then the per-step static rows, then
    // the per-step admissible-set rows.
    const Index ncs = tm.Zsigma.constraints();
    const Index ncA = ZA.constraints();
    const Index nd = tube.M.cols();
    const Index ng = tube.G.cols();
    const Index nseq = (N + 1) * nu;
    const Index total_c = ncs + (N + 1) * ns + N * ncA;
    Matrix S = Matrix::Zero(total_c, nd);
    Matrix A = Matrix::Zero(total_c, ng);
    Vector b0 = Vector::Zero(total_c);
    Matrix Bu = Matrix::Zero(total_c, nseq);

    S.topLeftCorner(ncs, tm.Zsigma.lines()) = tm.Zsigma.S;
    A.topLeftCorner(ncs, tm.Zsigma.generators()) = tm.Zsigma.A;
    b0.head(ncs) = tm.Zsigma.b;
    for (Index k = 0; k <= N; ++k) {
        const Index r = ncs + k * ns;
        S.middleRows(r, ns) = tm.Azc * tube.M.middleRows(k * na, na);
        A.middleRows(r, ns) = tm.Azc * tube.G.middleRows(k * na, na);
        b0.segment(r, ns) = -tm.Azc * tube.c0.segment(k * na, na);
        Bu.middleRows(r, ns) = -tm.Azc * H.middleRows(k * na, na);
        Bu.block(r, k * nu, ns, nu) -= tm.Bc;
    }
    for (Index j = 1; j <= N; ++j) {
        const Index r = ncs + (N + 1) * ns + (j - 1) * ncA;
        S.block(r, tm.Zsigma.lines() + (j - 1) * ndA, ncA, ndA) = ZA.S;
        A.block(r, tm.Zsigma.generators() + (j - 1) * ngA, ncA, ngA) = ZA.A;
        b0.segment(r, ncA) = ZA.b;
    }
    tube.S = std::move(S);
    tube.A = std::move(A);
    tube.b0 = std::move(b0);
    tube.Bu = std::move(Bu);
    return tube;
}

LineZonotope build_state_tube_recursive(const TransformedFaultModel& tm, Index N,
                                        const Vector& ubar) {
    const Index n = tm.model.n();
    const Index nw = tm.model.nw();
    const Index nu = tm.model.nu();
    const Index na = n + nw;
    require(ubar.size() == (N + 1) * nu, "build_state_tube_recursive: ubar length");
    const LineZonotope& ZA = tm.ZAcheck;
    const Index ndA = ZA.lines();
    const Index ngA = ZA.generators();
    const Index nd_final = tm.Zsigma.lines() + N * ndA;
    const Index ng_final = tm.Zsigma.generators() + N * ngA;

    auto pad = [](const Matrix& m, Index cols) {
        Matrix out = Matrix::Zero(m.rows(), cols);
        out.leftCols(m.cols()) = m;
        return out;
    };

    // Current state block over the cumulative factor columns.
    Matrix curM = tm.Zsigma.M;
    Matrix curG = tm.Zsigma.G;
    Vector curc = tm.Zsigma.c;
    std::vector<Matrix> tubeM{pad(curM, nd_final)};
    std::vector<Matrix> tubeG{pad(curG, ng_final)};
    std::vector<Vector> tubec{curc};

    std::vector<Matrix> consS{pad(tm.Zsigma.S, nd_final), pad(Matrix(tm.Azc * curM), nd_final)};
    std::vector<Matrix> consA{pad(tm.Zsigma.A, ng_final), pad(Matrix(tm.Azc * curG), ng_final)};
    std::vector<Vector> consb{tm.Zsigma.b,
                              Vector(-tm.Azc * curc - tm.Bc * ubar.head(nu))};

    for (Index k = 1; k <= N; ++k) {
        const Matrix prevM = curM, prevG = curG;
        const Vector prevc = curc;
        curM = bdiag(Matrix(tm.Azt * prevM), ZA.M);
        curG = bdiag(Matrix(tm.Azt * prevG), ZA.G);
        curc = vcat(Vector(tm.Azt * prevc + tm.tr.Bt * ubar.segment((k - 1) * nu, nu)), ZA.c);

        // Admissible-set rows for the freshly introduced factors, then the
        // static rows of step k over every factor introduced so far.
        Matrix SA = Matrix::Zero(ZA.constraints(), curM.cols());
        SA.rightCols(ndA) = ZA.S;
        Matrix AA = Matrix::Zero(ZA.constraints(), curG.cols());
        AA.rightCols(ngA) = ZA.A;
        consS.push_back(pad(SA, nd_final));
        consA.push_back(pad(AA, ng_final));
        consb.push_back(ZA.b);
        consS.push_back(pad(Matrix(tm.Azc * curM), nd_final));
        consA.push_back(pad(Matrix(tm.Azc * curG), ng_final));
        consb.push_back(Vector(-tm.Azc * curc - tm.Bc * ubar.segment(k * nu, nu)));

        tubeM.push_back(pad(curM, nd_final));
        tubeG.push_back(pad(curG, ng_final));
        tubec.push_back(curc);
    }

    LineZonotope out;
    out.M = Matrix((N + 1) * na, nd_final);
    out.G = Matrix((N + 1) * na, ng_final);
    out.c = Vector((N + 1) * na);
    for (Index k = 0; k <= N; ++k) {
        out.M.middleRows(k * na, na) = tubeM[static_cast<std::size_t>(k)];
        out.G.middleRows(k * na, na) = tubeG[static_cast<std::size_t>(k)];
        out.c.segment(k * na, na) = tubec[static_cast<std::size_t>(k)];
    }
    Index total_c = 0;
    for (const auto& v : consb) total_c += v.size();
    out.S = Matrix(total_c, nd_final);
    out.A = Matrix(total_c, ng_final);
    out.b = Vector(total_c);
    Index r = 0;
    for (std::size_t i = 0; i < consb.size(); ++i) {
        out.S.middleRows(r, consb[i].size()) = consS[i];
        out.A.middleRows(r, consb[i].size()) = consA[i];
        out.b.segment(r, consb[i].size()) = consb[i];
        r += consb[i].size();
    }
    out.validate();
    return out;
}

AffineTube build_output_tube(const TransformedFaultModel& tm, const AffineTube& state,
                             const LineZonotope& V, Index N) {
    const Index steps = N + 1;
    const Matrix Fbar = bdiag_repeat(tm.F, steps);
    const Matrix Dbar = bdiag_repeat(tm.model.D, steps);
    const Matrix Dvbar = bdiag_repeat(tm.model.Dv, steps);
    const Matrix Mv = bdiag_repeat(V.M, steps);
    const Matrix Gv = bdiag_repeat(V.G, steps);
    const Matrix Sv = bdiag_repeat(V.S, steps);
    const Matrix Av = bdiag_repeat(V.A, steps);
    const Vector cv = vcat_repeat(V.c, steps);
    const Vector bv = vcat_repeat(V.b, steps);

    AffineTube out;
    out.M = hcat(Matrix(Fbar * state.M), Matrix(Dvbar * Mv));
    out.G = hcat(Matrix(Fbar * state.G), Matrix(Dvbar * Gv));
    out.c0 = Fbar * state.c0 + Dvbar * cv;
    out.Cu = Fbar * state.Cu + Dbar;
    out.S = bdiag(state.S, Sv);
    out.A = bdiag(state.A, Av);
    out.b0 = vcat(state.b0, bv);
    out.Bu = vcat(state.Bu, Matrix::Zero(bv.size(), state.Bu.cols()));
    return out;
}

SeparationProblem build_separation_problem(const FaultModelSet& f,
                                           const std::vector<AffineTube>& output_tubes,
                                           int i, int j) {
    require(i >= 0 && j >= 0 && i < j &&
                static_cast<std::size_t>(j) < output_tubes.size(),
            "build_separation_problem: bad pair");
    (void)f;
    const AffineTube& ti = output_tubes[static_cast<std::size_t>(i)];
    const AffineTube& tj = output_tubes[static_cast<std::size_t>(j)];
    SeparationProblem sp;
    sp.i = i;
    sp.j = j;
    sp.Nq = tj.Cu - ti.Cu;
    sp.Omega = vcat(ti.Bu, tj.Bu);
    sp.M = hcat(ti.M, Matrix(-tj.M));
    sp.G = hcat(ti.G, Matrix(-tj.G));
    sp.S = bdiag(ti.S, tj.S);
    sp.A = bdiag(ti.A, tj.A);
    sp.c0 = ti.c0 - tj.c0;
    sp.b0 = vcat(ti.b0, tj.b0);
    return sp;
}

namespace {

/// min kappa s.t. Md + Gx = rhs_top, Sd + Ax = rhs_bot, ||x||_inf <= 1+kappa.
/// Infeasible equalities yield +inf (the point misses the affine hull).
double kappa_lp(const Matrix& M, const Matrix& G, const Matrix& S, const Matrix& A,
                const Vector& rhs_top, const Vector& rhs_bot, const LpOptions& opts) {
    LpProblem lp;
    const Index kv = lp.add_variable(1.0, -1.0, kInf);
    const Index nd = M.cols();
    const Index ng = G.cols();
    std::vector<Index> dv(static_cast<std::size_t>(nd));
    for (Index k = 0; k < nd; ++k) dv[static_cast<std::size_t>(k)] = lp.add_variable(0.0, -kInf, kInf);
    std::vector<Index> xv(static_cast<std::size_t>(ng));
    for (Index k = 0; k < ng; ++k) xv[static_cast<std::size_t>(k)] = lp.add_variable(0.0, -kInf, kInf);

    auto add_rows = [&](const Matrix& Md, const Matrix& Gx, const Vector& rhs) {
        for (Index r = 0; r < rhs.size(); ++r) {
            Vector row = Vector::Zero(lp.num_vars());
            for (Index k = 0; k < nd; ++k) row(dv[static_cast<std::size_t>(k)]) = Md(r, k);
            for (Index k = 0; k < ng; ++k) row(xv[static_cast<std::size_t>(k)]) = Gx(r, k);
            lp.add_equality(row, rhs(r));
        }
    };
    add_rows(M, G, rhs_top);
    add_rows(S, A, rhs_bot);
    for (Index k = 0; k < ng; ++k) {
        Vector row = Vector::Zero(lp.num_vars());
        row(xv[static_cast<std::size_t>(k)]) = 1.0;
        row(kv) = -1.0;
        lp.add_inequality(row, 1.0);
        row(xv[static_cast<std::size_t>(k)]) = -1.0;
        lp.add_inequality(row, 1.0);
    }
    const LpSolution sol = solve_lp(lp, opts);
    if (sol.status == LpStatus::kInfeasible) return kInf;
    if (sol.status != LpStatus::kOptimal)
        throw std::runtime_error("kappa LP did not converge");
    return sol.objective_value;
}

}  // namespace

double check_separation(const SeparationProblem& sp, const Vector& ubar,
                        const LpOptions& opts) {
    require(ubar.size() == sp.Nq.cols(), "check_separation: ubar length mismatch");
    return kappa_lp(sp.M, sp.G, sp.S, sp.A, Vector(sp.Nq * ubar - sp.c0),
                    Vector(sp.b0 + sp.Omega * ubar), opts);
}

StackedInput build_stacked_input(const LineZonotope& U, Index N) {
    require(U.lines() == 0, "build_stacked_input: U must be bounded");
    StackedInput out;
    out.Gu = bdiag_repeat(U.G, N + 1);
    out.cu = vcat_repeat(U.c, N + 1);
    out.Au = bdiag_repeat(U.A, N + 1);
    out.bu = vcat_repeat(U.b, N + 1);
    return out;
}

ReducedSeparation input_dependent_reduce(const SeparationProblem& sp,
                                         const StackedInput& u,
                                         const ReductionLimits& limits) {
    const Index ngu = u.Gu.cols();
    const Index ncu = u.Au.rows();
    require(sp.Nq.cols() == u.Gu.rows(), "input_dependent_reduce: input size mismatch");

    // Substitute ubar = cu + Gu*xi_u; xi_u columns ride along as protected
    // trailing generators so reduction can never break ubar's parameterization.
    LineZonotope Zs;
    Zs.M = sp.M;
    Zs.G = hcat(sp.G, Matrix(-sp.Nq * u.Gu));
    Zs.c = sp.c0 - sp.Nq * u.cu;
    Zs.S = vcat(sp.S, Matrix::Zero(ncu, sp.M.cols()));
    Zs.A = vcat(hcat(sp.A, Matrix(-sp.Omega * u.Gu)),
                hcat(Matrix::Zero(ncu, sp.G.cols()), u.Au));
    Zs.b = vcat(Vector(sp.b0 + sp.Omega * u.cu), u.bu);
    Zs.validate();

    const LineZonotope red = reduce(Zs, limits, ngu);

    ReducedSeparation rs;
    rs.i = sp.i;
    rs.j = sp.j;
    const Index ng_own = red.generators() - ngu;
    require(ng_own >= 0, "input_dependent_reduce: protected columns lost");
    rs.Mz = red.M;
    rs.Gz = red.G.leftCols(ng_own);
    rs.Gu = red.G.rightCols(ngu);
    rs.cz = red.c;
    rs.Az = red.A.leftCols(ng_own);
    rs.Au = red.A.rightCols(ngu);
    rs.bz = red.b;

    // Ring form: eliminate the free lines by solving an invertible row block.
    const Index d = red.dim() + red.constraints();
    const Index r = rs.Mz.cols();
    Matrix Md = vcat(rs.Mz, Matrix::Zero(red.constraints(), r));
    Matrix Gd = vcat(rs.Gz, rs.Az);
    Matrix Nd = -vcat(rs.Gu, rs.Au);
    Vector cd = vcat(rs.cz, Vector(-rs.bz));

    // Deterministic pivot-row selection by Gaussian elimination with partial
    // pivoting; Mz has full column rank after line compression.
    std::vector<Index> plus;
    plus.reserve(static_cast<std::size_t>(r));
    std::vector<bool> taken(static_cast<std::size_t>(d), false);
    Matrix work = Md;
    for (Index col = 0; col < r; ++col) {
        Index pick = -1;
        double best = 0.0;
        for (Index row = 0; row < d; ++row) {
            if (taken[static_cast<std::size_t>(row)]) continue;
            const double a = std::abs(work(row, col));
            if (a > best) {
                best = a;
                pick = row;
            }
        }
        require(pick >= 0 && best > kPivotTol,
                "input_dependent_reduce: line block lost column rank");
        taken[static_cast<std::size_t>(pick)] = true;
        plus.push_back(pick);
        for (Index row = 0; row < d; ++row) {
            if (taken[static_cast<std::size_t>(row)]) continue;
            work.row(row) -= work(row, col) / work(pick, col) * work.row(pick);
        }
    }
    std::vector<Index> minus;
    for (Index row = 0; row < d; ++row)
        if (!taken[static_cast<std::size_t>(row)]) minus.push_back(row);

    auto take_rows = [](const Matrix& m, const std::vector<Index>& rows) {
        Matrix out(static_cast<Index>(rows.size()), m.cols());
        for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = m.row(rows[k]);
        return out;
    };
    auto take_entries = [](const Vector& v, const std::vector<Index>& rows) {
        Vector out(static_cast<Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) out(static_cast<Index>(k)) = v(rows[k]);
        return out;
    };

    if (r == 0) {
        rs.Gring = Gd;
        rs.Nring = Nd;
        rs.cring = cd;
    } else {
        const Matrix Mp = take_rows(Md, plus);
        const Matrix Gp = take_rows(Gd, plus);
        const Matrix Np = take_rows(Nd, plus);
        const Vector cp = take_entries(cd, plus);
        const Matrix Mm = take_rows(Md, minus);
        Eigen::PartialPivLU<Matrix> lu(Mp);
        const Matrix X = Mm * lu.inverse();
        rs.Gring = take_rows(Gd, minus) - X * Gp;
        rs.Nring = take_rows(Nd, minus) - X * Np;
        rs.cring = take_entries(cd, minus) - X * cp;
    }
    rs.kappa_max = bound_kappa_max(rs);
    return rs;
}

double ring_kappa(const ReducedSeparation& rs, const Vector& xi_u,
                  const LpOptions& opts) {
    require(xi_u.size() == rs.Nring.cols(), "ring_kappa: xi_u length mismatch");
    const Matrix empty_m(rs.Gring.rows(), 0);
    return kappa_lp(empty_m, rs.Gring, Matrix(0, 0), Matrix(0, rs.Gring.cols()),
                    Vector(rs.Nring * xi_u - rs.cring), Vector(0), opts);
}

double bound_kappa_max(const ReducedSeparation& rs) {
    const Index rows = rs.Gring.rows();
    if (rows == 0) return -1.0;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(rs.Gring);
    if (cod.rank() < rows)
        throw std::runtime_error(
            "bound_kappa_max: ring generator matrix is row-rank deficient; the "
            "separation LP value is unbounded over the input box");
    const Matrix P = cod.pseudoInverse();
    const Vector per_row =
        (P * rs.Nring).cwiseAbs().rowwise().sum() + (P * rs.cring).cwiseAbs();
    return per_row.maxCoeff() - 1.0;
}

namespace {

struct PairData {
    SeparationProblem sp;
    ReducedSeparation rs;
};

std::vector<AffineTube> all_output_tubes(const FaultModelSet& f,
                                         const std::vector<TransformedFaultModel>& tms) {
    std::vector<AffineTube> tubes;
    tubes.reserve(tms.size());
    for (const auto& tm : tms)
        tubes.push_back(build_output_tube(tm, build_state_tube(tm, f.N), f.V, f.N));
    return tubes;
}

void run_chunked(Index count, int jobs, const std::function<void(Index)>& fn) {
    if (jobs <= 1 || count <= 1) {
        for (Index k = 0; k < count; ++k) fn(k);
        return;
    }
    const int nthreads = static_cast<int>(std::min<Index>(jobs, count));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t]() {
            for (Index k = t; k < count; k += nthreads) fn(k);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

DesignResult design_input(const FaultModelSet& f, AfdMethod method,
                          const LineZonotope* XA, const DesignOptions& opts) {
    const auto tms = transform_fault_models(f, method, XA);
    const auto tubes = all_output_tubes(f, tms);
    const StackedInput u = build_stacked_input(f.U, f.N);
    const Index ngu = u.Gu.cols();
    const Index nu = f.models.front().nu();
    const Index ny = f.models.front().ny();
    const Index nseq = (f.N + 1) * nu;

    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < static_cast<int>(f.models.size()); ++i)
        for (int j = i + 1; j < static_cast<int>(f.models.size()); ++j)
            pairs.emplace_back(i, j);

    const Index own_cap =
        opts.limits.max_generators > 0
            ? static_cast<Index>(opts.limits.max_generators)
            : static_cast<Index>(
                  std::ceil(opts.generator_cap_factor * static_cast<double>((f.N + 1) * ny)));
    ReductionLimits rl;
    rl.max_generators = own_cap + ngu;
    rl.max_constraints = opts.limits.max_constraints;
    rl.minimize_lines = true;

    std::vector<PairData> pd(pairs.size());
    run_chunked(static_cast<Index>(pairs.size()), opts.jobs, [&](Index q) {
        auto& d = pd[static_cast<std::size_t>(q)];
        d.sp = build_separation_problem(f, tubes, pairs[static_cast<std::size_t>(q)].first,
                                        pairs[static_cast<std::size_t>(q)].second);
        d.rs = input_dependent_reduce(d.sp, u, rl);
    });

    // kappa_max bounds the certificate over the whole input box, so a pair
    // whose bound falls short of eps can never be separated.
    for (const auto& d : pd)
        if (d.rs.kappa_max < f.eps) return DesignResult{};

    // The certificate of a pair at xi_u is the gauge of its ring zonotope at
    // the gap point p = Nring*xi_u - cring, minus one, and the gauge of a
    // full-dimensional symmetric zonotope is max_f eta_f'p / h_f over facet
    // normals eta_f with support h_f = sum_j |eta_f' g_j|. "kappa >= eps" is
    // therefore the exact disjunction "some signed facet has eta'p >=
    // (1+eps) h", which the MILP encodes with one indicator per signed facet,
    // interval-tight big-M offsets, and a cover row per pair.
    struct SignedFacet {
        Vector a;     ///< coefficients on xi_u
        double rhs;   ///< a'xi_u >= rhs when the indicator is on
        double bigm;  ///< slack granted while the indicator is off
    };
    std::vector<std::vector<SignedFacet>> facets(pairs.size());
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        const auto& rs = pd[q].rs;
        const Index dq = rs.Gring.rows();
        const Index ngq = rs.Gring.cols();
        std::vector<Vector> normals;
        if (dq == 1) {
            normals.push_back(Vector::Ones(1));
        } else {
            // All (dq-1)-subsets of generators whose span has a 1-d normal.
            std::vector<Index> comb(static_cast<std::size_t>(dq - 1));
            for (Index k = 0; k < dq - 1; ++k) comb[static_cast<std::size_t>(k)] = k;
            while (true) {
                Matrix sub(dq, dq - 1);
                for (Index k = 0; k < dq - 1; ++k)
                    sub.col(k) = rs.Gring.col(comb[static_cast<std::size_t>(k)]);
                Eigen::FullPivLU<Matrix> lu(sub.transpose());
                lu.setThreshold(1e-10);
                if (lu.dimensionOfKernel() == 1) {
                    Vector eta = lu.kernel().col(0);
                    eta /= eta.norm();
                    for (Index r = 0; r < dq; ++r) {
                        if (std::abs(eta(r)) > 1e-9) {
                            if (eta(r) < 0.0) eta = -eta;
                            break;
                        }
                    }
                    bool dup = false;
                    for (const Vector& e : normals)
                        if ((e - eta).lpNorm<Eigen::Infinity>() < 1e-9) {
                            dup = true;
                            break;
                        }
                    if (!dup) normals.push_back(std::move(eta));
                }
                // Next combination in lexicographic order.
                Index k = dq - 2;
                while (k >= 0 && comb[static_cast<std::size_t>(k)] == ngq - (dq - 1) + k) --k;
                if (k < 0) break;
                ++comb[static_cast<std::size_t>(k)];
                for (Index j = k + 1; j < dq - 1; ++j)
                    comb[static_cast<std::size_t>(j)] = comb[static_cast<std::size_t>(j - 1)] + 1;
            }
        }
        auto& fq = facets[q];
        bool always_separated = false;
        for (const Vector& eta : normals) {
            const double h = (eta.transpose() * rs.Gring).cwiseAbs().sum();
            if (h < 1e-12) continue;  // excluded by the full-row-rank ring
            const Vector an = rs.Nring.transpose() * eta;
            const double span = an.cwiseAbs().sum();  // |a'xi_u| <= span on the box
            for (double s : {1.0, -1.0}) {
                const double rhs = (1.0 + f.eps) * h + s * eta.dot(rs.cring);
                if (span < rhs) continue;   // facet can never activate on the box
                if (-span >= rhs) {         // facet holds for every input
                    always_separated = true;
                    break;
                }
                fq.push_back(SignedFacet{s * an, rhs, rhs + span});
            }
            if (always_separated) break;
        }
        if (always_separated) {
            fq.clear();  // no indicator needed for this pair
        } else if (fq.empty()) {
            return DesignResult{};  // no facet reachable: pair inseparable
        }
    }

    MilpProblem mp;
    LpProblem& lp = mp.lp;
    std::vector<Index> xiu(static_cast<std::size_t>(ngu));
    for (Index k = 0; k < ngu; ++k) xiu[static_cast<std::size_t>(k)] = lp.add_variable(0.0, -1.0, 1.0);
    std::vector<Index> tv(static_cast<std::size_t>(nseq));
    for (Index k = 0; k < nseq; ++k) tv[static_cast<std::size_t>(k)] = lp.add_variable(1.0, 0.0, kInf);
    std::vector<std::vector<Index>> yv(pairs.size());
    for (std::size_t q = 0; q < pairs.size(); ++q)
        for (std::size_t fidx = 0; fidx < facets[q].size(); ++fidx) {
            const Index y = lp.add_variable(0.0, 0.0, 1.0);
            yv[q].push_back(y);
            mp.binaries.push_back(y);
        }

    auto row = [&]() { return Vector(Vector::Zero(lp.num_vars())); };

    for (Index r = 0; r < u.Au.rows(); ++r) {
        Vector eq = row();
        for (Index k = 0; k < ngu; ++k) eq(xiu[static_cast<std::size_t>(k)]) = u.Au(r, k);
        lp.add_equality(eq, u.bu(r));
    }
    for (Index r = 0; r < nu; ++r) {
        Vector eq = row();
        for (Index k = 0; k < ngu; ++k) eq(xiu[static_cast<std::size_t>(k)]) = u.Gu(r, k);
        lp.add_equality(eq, f.u0(r) - u.cu(r));
    }
    for (Index r = 0; r < nseq; ++r) {
        const double w = f.Rcost(r, r);
        Vector le = row();
        for (Index k = 0; k < ngu; ++k) le(xiu[static_cast<std::size_t>(k)]) = w * u.Gu(r, k);
        le(tv[static_cast<std::size_t>(r)]) = -1.0;
        lp.add_inequality(le, w * (f.utilde(r) - u.cu(r)));
        Vector le2 = row();
        for (Index k = 0; k < ngu; ++k) le2(xiu[static_cast<std::size_t>(k)]) = -w * u.Gu(r, k);
        le2(tv[static_cast<std::size_t>(r)]) = -1.0;
        lp.add_inequality(le2, w * (u.cu(r) - f.utilde(r)));
    }

    for (std::size_t q = 0; q < pairs.size(); ++q) {
        if (facets[q].empty()) continue;  // pair separated for every input
        for (std::size_t fidx = 0; fidx < facets[q].size(); ++fidx) {
            const SignedFacet& sf = facets[q][fidx];
            // a'xi_u >= rhs - bigm*(1-y), written as -a'xi_u - bigm*y <= -rhs.
            Vector le = row();
            for (Index k = 0; k < ngu; ++k) le(xiu[static_cast<std::size_t>(k)]) = -sf.a(k);
            le(yv[q][fidx]) = sf.bigm;
            lp.add_inequality(le, sf.bigm - sf.rhs);
        }
        Vector cover = row();
        for (Index y : yv[q]) cover(y) = -1.0;
        lp.add_inequality(cover, -1.0);
    }

    // Primal heuristic: any node relaxation yields a candidate input; its ring
    // certificates decide feasibility exactly, so accepted completions carry
    // their true cost and never undercut the mixed-integer optimum.
    MilpOptions mopts = opts.milp;
    mopts.heuristic = [&](const Vector& relaxed, double& objective, Vector& x) {
        Vector xi(ngu);
        for (Index k = 0; k < ngu; ++k)
            xi(k) = std::clamp(relaxed(xiu[static_cast<std::size_t>(k)]), -1.0, 1.0);
        for (std::size_t q = 0; q < pd.size(); ++q) {
            double kap = 0.0;
            try {
                kap = ring_kappa(pd[q].rs, xi, opts.milp.lp);
            } catch (const std::runtime_error&) {
                return false;
            }
            if (!(kap >= f.eps)) return false;
        }
        x = relaxed;
        objective = 0.0;
        const Vector du = u.Gu * xi + u.cu - f.utilde;
        for (Index r = 0; r < nseq; ++r) {
            const double e = std::abs(f.Rcost(r, r) * du(r));
            objective += e;
            x(tv[static_cast<std::size_t>(r)]) = e;
        }
        for (Index k = 0; k < ngu; ++k) x(xiu[static_cast<std::size_t>(k)]) = xi(k);
        // Indicators: turn on every satisfied facet so the completion also
        // satisfies the cover rows.
        for (std::size_t q = 0; q < pairs.size(); ++q)
            for (std::size_t fidx = 0; fidx < facets[q].size(); ++fidx)
                x(yv[q][fidx]) = facets[q][fidx].a.dot(xi) >= facets[q][fidx].rhs ? 1.0 : 0.0;
        return true;
    };

    const MilpSolution sol = solve_milp(mp, mopts);
    DesignResult res;
    res.status = sol.status;
    res.nodes_explored = sol.nodes_explored;
    if (sol.status != MilpStatus::kOptimal) return res;

    Vector xi(ngu);
    for (Index k = 0; k < ngu; ++k) xi(k) = sol.x(xiu[static_cast<std::size_t>(k)]);
    res.ubar = u.cu + u.Gu * xi;
    res.cost = sol.objective_value;
    res.kappa.reserve(pairs.size());
    for (const auto& d : pd) res.kappa.push_back(check_separation(d.sp, res.ubar));
    return res;
}

DiagnosisCheck verify_diagnosis(const FaultModelSet& f, const Vector& ubar,
                                int n_samples, std::uint64_t seed, AfdMethod method,
                                const LineZonotope* XA, int jobs) {
    require(n_samples > 0, "verify_diagnosis: need at least one sample");
    const auto tms = transform_fault_models(f, method, XA);
    const auto tubes = all_output_tubes(f, tms);
    const int nm = static_cast<int>(f.models.size());
    const Index nu = f.models.front().nu();
    require(ubar.size() == (f.N + 1) * nu, "verify_diagnosis: ubar length");

    std::vector<LineZonotope> orts;
    orts.reserve(tubes.size());
    for (const auto& t : tubes) orts.push_back(t.at(ubar));

    std::vector<Vector> inputs;
    inputs.reserve(static_cast<std::size_t>(f.N + 1));
    for (Index k = 0; k <= f.N; ++k) inputs.push_back(ubar.segment(k * nu, nu));

    DiagnosisCheck out;
    out.inclusion = Eigen::MatrixXi::Zero(nm, nm);
    UniformRng base(seed);

    // A valid realization needs (x0, w0) drawn jointly from the subset of
    // X0 x W satisfying the step-0 static row; independent draws would start
    // trajectories outside X0 after the algebraic completion. Samples are
    // produced by 1-norm projection of a random box target onto that subset.
    struct ConsistentSampler {
        bool constrained = false;
        Matrix Aeq;  // over xi = [xi_G0; xi_M0; xi_GW; xi_MW]
        Vector beq;
        Vector fallback;  ///< feasible point, used if a projection LP fails
    };
    const Index g0 = f.X0.generators(), m0 = f.X0.lines();
    const Index gw = f.W.generators(), mw = f.W.lines();
    const Index nxi = g0 + m0 + gw + mw;
    std::vector<ConsistentSampler> samplers(static_cast<std::size_t>(nm));
    for (int i = 0; i < nm; ++i) {
        const SvdTransform& tr = tms[static_cast<std::size_t>(i)].tr;
        const Index ns = f.models.front().n() - tr.nz;
        auto& cs = samplers[static_cast<std::size_t>(i)];
        if (ns == 0) continue;
        cs.constrained = true;
        cs.Aeq.resize(ns, nxi);
        cs.Aeq << tr.Ac * tr.Tinv * f.X0.G, tr.Ac * tr.Tinv * f.X0.M, tr.Bwc * f.W.G,
            tr.Bwc * f.W.M;
        cs.beq = -(tr.Ac * tr.Tinv * f.X0.c + tr.Bc * inputs.front() + tr.Bwc * f.W.c);
        LpProblem feas;
        for (Index v = 0; v < nxi; ++v) {
            const bool line = (v >= g0 && v < g0 + m0) || v >= g0 + gw + m0;
            feas.add_variable(0.0, line ? -kInf : -1.0, line ? kInf : 1.0);
        }
        for (Index r = 0; r < ns; ++r) feas.add_equality(cs.Aeq.row(r), cs.beq(r));
        const LpSolution fs = solve_lp(feas);
        if (fs.status != LpStatus::kOptimal)
            throw std::runtime_error(
                "verify_diagnosis: X0 x W admits no consistent initial condition");
        cs.fallback = fs.x;
    }
    auto project_draw = [&](const ConsistentSampler& cs, UniformRng& rng) {
        Vector target(nxi);
        for (Index v = 0; v < nxi; ++v) target(v) = rng.sym();
        LpProblem lp;
        for (Index v = 0; v < nxi; ++v) {
            const bool line = (v >= g0 && v < g0 + m0) || v >= g0 + gw + m0;
            lp.add_variable(0.0, line ? -kInf : -1.0, line ? kInf : 1.0);
        }
        for (Index v = 0; v < nxi; ++v) lp.add_variable(1.0, 0.0, kInf);
        for (Index r = 0; r < cs.Aeq.rows(); ++r) {
            Vector eq = Vector::Zero(2 * nxi);
            eq.head(nxi) = cs.Aeq.row(r);
            lp.add_equality(eq, cs.beq(r));
        }
        for (Index v = 0; v < nxi; ++v) {
            Vector le = Vector::Zero(2 * nxi);
            le(v) = 1.0;
            le(nxi + v) = -1.0;
            lp.add_inequality(le, target(v));
            Vector ge = Vector::Zero(2 * nxi);
            ge(v) = -1.0;
            ge(nxi + v) = -1.0;
            lp.add_inequality(ge, -target(v));
        }
        const LpSolution ls = solve_lp(lp);
        return ls.status == LpStatus::kOptimal ? Vector(ls.x.head(nxi)) : cs.fallback;
    };

    const Index total = static_cast<Index>(nm) * n_samples;
    std::vector<Eigen::MatrixXi> partial(
        static_cast<std::size_t>(std::max(1, jobs)), Eigen::MatrixXi::Zero(nm, nm));
    run_chunked(total, jobs, [&](Index task) {
        const int i = static_cast<int>(task / n_samples);
        UniformRng draw_rng = base.split(2 * static_cast<std::uint64_t>(task));
        const auto& cs = samplers[static_cast<std::size_t>(i)];
        Vector x0, w0;
        if (cs.constrained) {
            const Vector xi = project_draw(cs, draw_rng);
            x0 = f.X0.c + f.X0.G * xi.head(g0) + f.X0.M * xi.segment(g0, m0);
            w0 = f.W.c + f.W.G * xi.segment(g0 + m0, gw) + f.W.M * xi.tail(mw);
        } else {
            x0 = f.X0.c;
            for (Index g = 0; g < g0; ++g) x0 += f.X0.G.col(g) * draw_rng.sym();
            for (Index l = 0; l < m0; ++l) x0 += f.X0.M.col(l) * draw_rng.sym();
        }
        const SimulationResult sim =
            simulate(f.models[static_cast<std::size_t>(i)], tms[static_cast<std::size_t>(i)].tr, f.W, f.V, x0,
                     inputs, base.split(2 * static_cast<std::uint64_t>(task) + 1).seed(),
                     cs.constrained ? &w0 : nullptr);
        Vector ybar((f.N + 1) * f.models.front().ny());
        for (Index k = 0; k <= f.N; ++k)
            ybar.segment(k * f.models.front().ny(), f.models.front().ny()) =
                sim.outputs[static_cast<std::size_t>(k)];
        const std::size_t slot =
            jobs <= 1 ? 0 : static_cast<std::size_t>(task % std::max(1, jobs));
        for (int j = 0; j < nm; ++j)
            if (membership(ybar, orts[static_cast<std::size_t>(j)], 1e-6))
                partial[slot](i, j) += 1;
    });
    for (const auto& m : partial) out.inclusion += m;

    for (int i = 0; i < nm; ++i) {
        for (int j = i + 1; j < nm; ++j) {
            const SeparationProblem sp = build_separation_problem(f, tubes, i, j);
            const double kappa = check_separation(sp, ubar);
            out.kappa.push_back(kappa);
            out.pair_separated.push_back(kappa > 0.0);
        }
    }
    return out;
}

}  // namespace lzsetkit
