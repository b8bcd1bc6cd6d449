#include "lzsetkit/line_zonotope.hpp"

#include <cmath>
#include <stdexcept>

#include "lzsetkit/solver.hpp"

namespace lzsetkit {

LineZonotope::LineZonotope(Matrix M_, Matrix G_, Vector c_, Matrix S_, Matrix A_, Vector b_)
    : M(std::move(M_)), G(std::move(G_)), c(std::move(c_)),
      S(std::move(S_)), A(std::move(A_)), b(std::move(b_)) {
    validate();
}

void LineZonotope::validate() const {
    const Index n = c.size();
    const Index nc = b.size();
    require(M.rows() == n && G.rows() == n, "LineZonotope: M/G row count must equal dim");
    require(S.rows() == nc && A.rows() == nc, "LineZonotope: S/A row count must equal constraint count");
    require(S.cols() == M.cols(), "LineZonotope: S/M column mismatch");
    require(A.cols() == G.cols(), "LineZonotope: A/G column mismatch");
    require(all_finite(M) && all_finite(G) && all_finite(c.transpose()) &&
                all_finite(S) && all_finite(A) && all_finite(b.transpose()),
            "LineZonotope: entries must be finite");
}

LineZonotope lz_zonotope(const Matrix& G, const Vector& c) {
    require(G.rows() == c.size(), "lz_zonotope: G rows must equal center length");
    const Index n = c.size();
    return LineZonotope(Matrix(n, 0), G, c, Matrix(0, 0), Matrix(0, G.cols()), Vector(0));
}

LineZonotope lz_constrained_zonotope(const Matrix& G, const Vector& c,
                                     const Matrix& A, const Vector& b) {
    require(G.rows() == c.size(), "lz_constrained_zonotope: G rows must equal center length");
    require(A.cols() == G.cols(), "lz_constrained_zonotope: A/G column mismatch");
    require(A.rows() == b.size(), "lz_constrained_zonotope: A/b row mismatch");
    const Index n = c.size();
    return LineZonotope(Matrix(n, 0), G, c, Matrix(b.size(), 0), A, b);
}

LineZonotope lz_singleton(const Vector& c) {
    return lz_zonotope(Matrix(c.size(), 0), c);
}

LineZonotope lz_realspace(Index n) {
    require(n >= 1, "lz_realspace: dimension must be positive");
    return LineZonotope(Matrix::Identity(n, n), Matrix(n, 0), Vector::Zero(n),
                        Matrix(0, n), Matrix(0, 0), Vector(0));
}

LineZonotope lz_from_strip(const Strip& s) {
    const Index n = s.rho.size();
    require(n >= 1, "lz_from_strip: empty normal vector");
    require(s.sigma >= 0.0, "lz_from_strip: sigma must be nonnegative");
    Matrix S(1, n);
    S.row(0) = s.rho.transpose();
    Matrix A(1, 1);
    A(0, 0) = -s.sigma;
    Vector b(1);
    b(0) = s.d;
    return LineZonotope(Matrix::Identity(n, n), Matrix::Zero(n, 1), Vector::Zero(n), S, A, b);
}

LineZonotope linear_map(const Matrix& R, const LineZonotope& Z) {
    require(R.cols() == Z.dim(), "linear_map: R columns must equal set dimension");
    return LineZonotope(R * Z.M, R * Z.G, R * Z.c, Z.S, Z.A, Z.b);
}

LineZonotope minkowski_sum(const LineZonotope& Z, const LineZonotope& W) {
    require(Z.dim() == W.dim(), "minkowski_sum: dimension mismatch");
    return LineZonotope(hcat(Z.M, W.M), hcat(Z.G, W.G), Z.c + W.c,
                        bdiag(Z.S, W.S), bdiag(Z.A, W.A), vcat(Z.b, W.b));
}

LineZonotope generalized_intersection(const LineZonotope& Z, const LineZonotope& Y,
                                      const Matrix& R) {
    require(R.cols() == Z.dim(), "generalized_intersection: R columns must equal Z dimension");
    require(R.rows() == Y.dim(), "generalized_intersection: R rows must equal Y dimension");
    // Lines/generators of Y are carried only through the coupling rows; the
    // ambient blocks gain zero columns of matching width.
    const Matrix Mo = hcat(Z.M, Matrix::Zero(Z.dim(), Y.lines()));
    const Matrix Go = hcat(Z.G, Matrix::Zero(Z.dim(), Y.generators()));
    // Coupling rows R*M_z*delta_z - M_y*delta_y + R*G_z*xi_z - G_y*xi_y = c_y - R*c_z.
    const Matrix Sc = hcat(R * Z.M, -Y.M);
    const Matrix Ac = hcat(R * Z.G, -Y.G);
    const Matrix So = vcat(bdiag(Z.S, Y.S), Sc);
    const Matrix Ao = vcat(bdiag(Z.A, Y.A), Ac);
    const Vector bo = vcat(vcat(Z.b, Y.b), Vector(Y.c - R * Z.c));
    return LineZonotope(Mo, Go, Z.c, So, Ao, bo);
}

LineZonotope intersection(const LineZonotope& Z, const LineZonotope& Y) {
    return generalized_intersection(Z, Y, Matrix::Identity(Z.dim(), Z.dim()));
}

LineZonotope cartesian_product(const LineZonotope& Z, const LineZonotope& W) {
    Vector c = vcat(Z.c, W.c);
    return LineZonotope(bdiag(Z.M, W.M), bdiag(Z.G, W.G), c,
                        bdiag(Z.S, W.S), bdiag(Z.A, W.A), vcat(Z.b, W.b));
}

LineZonotope multi_intersection(const std::vector<LineZonotope>& Zs,
                                const std::vector<Matrix>& Rs) {
    require(!Zs.empty(), "multi_intersection: empty set list");
    require(Zs.size() == Rs.size(), "multi_intersection: list size mismatch");
    const Index n = Rs[0].cols();
    Index nd_t = 0, ng_t = 0, nc_t = 0, rows_t = 0;
    for (std::size_t i = 0; i < Zs.size(); ++i) {
        require(Rs[i].cols() == n, "multi_intersection: inconsistent R column counts");
        require(Rs[i].rows() == Zs[i].dim(), "multi_intersection: R rows must equal set dimension");
        nd_t += Zs[i].lines();
        ng_t += Zs[i].generators();
        nc_t += Zs[i].constraints();
        rows_t += Zs[i].dim();
    }
    // Stacked blocks: R~ = [R_1; ...; R_p], tilded quantities block-diagonal.
    Matrix Rt(rows_t, n), Mt(rows_t, nd_t), Gt(rows_t, ng_t);
    Vector ct(rows_t);
    Matrix St = Matrix::Zero(nc_t, nd_t), At = Matrix::Zero(nc_t, ng_t);
    Vector bt(nc_t);
    Index r0 = 0, d0 = 0, g0 = 0, c0 = 0;
    Mt.setZero();
    Gt.setZero();
    for (std::size_t i = 0; i < Zs.size(); ++i) {
        const LineZonotope& Zi = Zs[i];
        const Index ni = Zi.dim();
        Rt.middleRows(r0, ni) = Rs[i];
        if (Zi.lines() > 0) Mt.block(r0, d0, ni, Zi.lines()) = Zi.M;
        if (Zi.generators() > 0) Gt.block(r0, g0, ni, Zi.generators()) = Zi.G;
        ct.segment(r0, ni) = Zi.c;
        if (Zi.constraints() > 0) {
            if (Zi.lines() > 0) St.block(c0, d0, Zi.constraints(), Zi.lines()) = Zi.S;
            if (Zi.generators() > 0) At.block(c0, g0, Zi.constraints(), Zi.generators()) = Zi.A;
            bt.segment(c0, Zi.constraints()) = Zi.b;
        }
        r0 += ni;
        d0 += Zi.lines();
        g0 += Zi.generators();
        c0 += Zi.constraints();
    }
    // Closed form: lines (x itself plus all delta_i), generators only through
    // the constraint rows; R~ x - M~ delta = c~ + G~ xi, plus carried rows.
    const Matrix Mo = hcat(Matrix::Identity(n, n), Matrix::Zero(n, nd_t));
    const Matrix Go = Matrix::Zero(n, ng_t);
    const Vector co = Vector::Zero(n);
    const Matrix So = vcat(hcat(Matrix::Zero(nc_t, n), St), hcat(Rt, -Mt));
    const Matrix Ao = vcat(At, -Gt);
    const Vector bo = vcat(bt, ct);
    return LineZonotope(Mo, Go, co, So, Ao, bo);
}

namespace {

// Shared LP skeleton over factors (delta, xi): equality rows are the constraint
// block and optionally the pinning of c + M delta + G xi to a target point.
LpProblem factor_lp(const LineZonotope& Z, const Vector* target) {
    const Index nd = Z.lines(), ng = Z.generators();
    const Index nrows = Z.constraints() + (target != nullptr ? Z.dim() : 0);
    LpProblem p;
    p.objective = Vector::Zero(nd + ng);
    p.lower = Vector::Constant(nd + ng, -kInf);
    p.upper = Vector::Constant(nd + ng, kInf);
    p.lower.tail(ng).setConstant(-1.0);
    p.upper.tail(ng).setConstant(1.0);
    p.equality_lhs = Matrix::Zero(nrows, nd + ng);
    p.equality_rhs = Vector::Zero(nrows);
    if (Z.constraints() > 0) {
        p.equality_lhs.topLeftCorner(Z.constraints(), nd) = Z.S;
        p.equality_lhs.topRightCorner(Z.constraints(), ng) = Z.A;
        p.equality_rhs.head(Z.constraints()) = Z.b;
    }
    if (target != nullptr) {
        p.equality_lhs.bottomLeftCorner(Z.dim(), nd) = Z.M;
        p.equality_lhs.bottomRightCorner(Z.dim(), ng) = Z.G;
        p.equality_rhs.tail(Z.dim()) = *target - Z.c;
    }
    return p;
}

}  // namespace

bool membership(const Vector& x, const LineZonotope& Z, double tol) {
    require(x.size() == Z.dim(), "membership: point dimension mismatch");
    // min kappa s.t. factors satisfy the equalities and ||xi||_inf <= 1 + kappa:
    // member iff feasible with kappa <= tol. Infeasible equalities mean the
    // point misses the affine hull entirely.
    const Index nd = Z.lines(), ng = Z.generators();
    Vector target = x;
    LpProblem p = factor_lp(Z, &target);
    const Index kappa = p.add_variable(1.0, -1.0, kInf);
    // Replace fixed xi bounds by kappa-coupled inequalities: xi_j - kappa <= 1,
    // -xi_j - kappa <= 1.
    for (Index j = 0; j < ng; ++j) {
        p.lower(nd + j) = -kInf;
        p.upper(nd + j) = kInf;
        Vector row = Vector::Zero(p.num_vars());
        row(nd + j) = 1.0;
        row(kappa) = -1.0;
        p.add_inequality(row, 1.0);
        row.conservativeResize(p.num_vars());
        row.setZero();
        row(nd + j) = -1.0;
        row(kappa) = -1.0;
        p.add_inequality(row, 1.0);
    }
    LpSolution sol = solve_lp(p);
    if (sol.status == LpStatus::kInfeasible) return false;
    if (sol.status != LpStatus::kOptimal)
        throw std::runtime_error("membership: LP did not converge");
    return sol.objective_value <= tol;
}

bool is_empty(const LineZonotope& Z, double tol) {
    LpProblem p = factor_lp(Z, nullptr);
    LpSolution sol = solve_lp(p);
    if (sol.status == LpStatus::kOptimal) return false;
    if (sol.status == LpStatus::kInfeasible) return sol.infeasibility > tol;
    throw std::runtime_error("is_empty: LP did not converge");
}

double support(const LineZonotope& Z, const Vector& dir) {
    require(dir.size() == Z.dim(), "support: direction dimension mismatch");
    const Index nd = Z.lines(), ng = Z.generators();
    LpProblem p = factor_lp(Z, nullptr);
    // max dir'(c + M delta + G xi)  ==  dir'c - min(-dir'M delta - dir'G xi)
    p.objective.head(nd) = -(dir.transpose() * Z.M).transpose();
    p.objective.tail(ng) = -(dir.transpose() * Z.G).transpose();
    LpSolution sol = solve_lp(p);
    switch (sol.status) {
        case LpStatus::kOptimal:
            return dir.dot(Z.c) - sol.objective_value;
        case LpStatus::kUnbounded:
            return kInf;
        case LpStatus::kInfeasible:
            return -kInf;
        default:
            throw std::runtime_error("support: LP did not converge");
    }
}

Interval interval_hull(const LineZonotope& Z) {
    const Index n = Z.dim();
    Interval box{Vector::Zero(n), Vector::Zero(n)};
    for (Index i = 0; i < n; ++i) {
        Vector e = Vector::Zero(n);
        e(i) = 1.0;
        const double hi = support(Z, e);
        e(i) = -1.0;
        const double lo = -support(Z, e);
        if (hi == -kInf || lo == kInf) throw std::runtime_error("interval_hull: empty set");
        box.lower(i) = lo;
        box.upper(i) = hi;
    }
    return box;
}

double radius(const LineZonotope& Z) {
    const Interval box = interval_hull(Z);
    double r = 0.0;
    for (Index i = 0; i < Z.dim(); ++i) {
        const double edge = box.upper(i) - box.lower(i);
        if (!std::isfinite(edge)) return kInf;
        r = std::max(r, 0.5 * edge);
    }
    return r;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, Index rows, Index cols, const char* name) {
    Matrix m(rows, cols);
    if (static_cast<Index>(j.size()) != rows)
        throw std::invalid_argument(std::string("lz_from_json: bad row count for ") + name);
    for (Index i = 0; i < rows; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (static_cast<Index>(row.size()) != cols)
            throw std::invalid_argument(std::string("lz_from_json: bad column count for ") + name);
        for (Index k = 0; k < cols; ++k) m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
    return m;
}

}  // namespace

nlohmann::json to_json(const LineZonotope& Z) {
    nlohmann::json j;
    j["dim"] = Z.dim();
    j["lines"] = Z.lines();
    j["generators"] = Z.generators();
    j["constraints"] = Z.constraints();
    j["M"] = matrix_to_json(Z.M);
    j["G"] = matrix_to_json(Z.G);
    j["c"] = matrix_to_json(Z.c);
    j["S"] = matrix_to_json(Z.S);
    j["A"] = matrix_to_json(Z.A);
    j["b"] = matrix_to_json(Z.b);
    return j;
}

LineZonotope lz_from_json(const nlohmann::json& j) {
    const Index n = j.at("dim").get<Index>();
    const Index nd = j.at("lines").get<Index>();
    const Index ng = j.at("generators").get<Index>();
    const Index nc = j.at("constraints").get<Index>();
    return LineZonotope(matrix_from_json(j.at("M"), n, nd, "M"),
                        matrix_from_json(j.at("G"), n, ng, "G"),
                        Vector(matrix_from_json(j.at("c"), n, 1, "c")),
                        matrix_from_json(j.at("S"), nc, nd, "S"),
                        matrix_from_json(j.at("A"), nc, ng, "A"),
                        Vector(matrix_from_json(j.at("b"), nc, 1, "b")));
}

}  // namespace lzsetkit
