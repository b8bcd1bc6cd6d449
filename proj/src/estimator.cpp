#include <chrono>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "lzsetkit/estimator.hpp"
#include "lzsetkit/reduction.hpp"
#include "lzsetkit/rng.hpp"

namespace lzsetkit {

void DescriptorModel::validate() const {
    const Index nx = n();
    require(nx > 0, "model: empty state dimension");
    require(E.rows() == nx && E.cols() == nx, "model: E must be square n x n");
    require(A.rows() == nx && A.cols() == nx, "model: A must be n x n");
    require(B.rows() == nx, "model: B row count mismatch");
    require(Bw.rows() == nx, "model: Bw row count mismatch");
    require(C.cols() == nx, "model: C column count mismatch");
    require(D.rows() == C.rows() && D.cols() == B.cols(), "model: D shape mismatch");
    require(Dv.rows() == C.rows(), "model: Dv row count mismatch");
    require(all_finite(E) && all_finite(A) && all_finite(B) && all_finite(Bw) &&
                all_finite(C) && all_finite(D) && all_finite(Dv),
            "model: non-finite entry");
}

SvdTransform svd_transform(const DescriptorModel& m, double rank_tol) {
    m.validate();
    const Index n = m.n();
    Eigen::JacobiSVD<Matrix> svd(m.E, Eigen::ComputeFullU | Eigen::ComputeFullV);
    SvdTransform t;
    t.U = svd.matrixU();
    t.sigma = svd.singularValues();
    t.T = svd.matrixV();
    t.Tinv = t.T.transpose();

    const double smax = t.sigma.size() > 0 ? t.sigma(0) : 0.0;
    Index nz = 0;
    while (nz < t.sigma.size() && t.sigma(nz) > rank_tol * std::max(smax, 1e-300)) ++nz;
    t.nz = nz;
    require(nz > 0, "svd_transform: E has rank zero");

    // P = bdiag(Sigma^-1, I) U^T maps E x_{k+1} = A x_k + ... into the
    // dynamic (top n_z) and static (bottom n - n_z) rows.
    Matrix P = Matrix::Zero(n, n);
    for (Index i = 0; i < nz; ++i) P.row(i) = t.U.col(i).transpose() / t.sigma(i);
    for (Index i = nz; i < n; ++i) P.row(i) = t.U.col(i).transpose();

    const Matrix PA = P * m.A * t.T;
    const Matrix PB = P * m.B;
    const Matrix PBw = P * m.Bw;
    t.At = PA.topRows(nz);
    t.Ac = PA.bottomRows(n - nz);
    t.Bt = PB.topRows(nz);
    t.Bc = PB.bottomRows(n - nz);
    t.Bwt = PBw.topRows(nz);
    t.Bwc = PBw.bottomRows(n - nz);
    return t;
}

namespace {

/// Measurement set (y - D u) + (-Dv) V in output space.
LineZonotope measurement_set(const DescriptorModel& m, const LineZonotope& V,
                             const Vector& u, const Vector& y) {
    LineZonotope mv = linear_map(Matrix(-m.Dv), V);
    mv.c += y - m.D * u;
    return mv;
}

}  // namespace

LineZonotope initial_feasible_set(const DescriptorModel& m, const SvdTransform& t,
                                  const LineZonotope& X0, const LineZonotope& W,
                                  const LineZonotope& V, const Vector& u0,
                                  const Vector& y0) {
    require(u0.size() == m.nu() && y0.size() == m.ny(), "initial_feasible_set: u0/y0 size");
    require(X0.dim() == m.n(), "initial_feasible_set: X0 dimension mismatch");
    const LineZonotope Xhat0 = generalized_intersection(X0, measurement_set(m, V, u0, y0), m.C);
    const LineZonotope Z0 = linear_map(t.Tinv, Xhat0);

    const Index n = m.n();
    LineZonotope out;
    out.M = hcat(Z0.M, Matrix::Zero(n, W.lines()));
    out.G = hcat(Z0.G, Matrix::Zero(n, W.generators()));
    out.c = Z0.c;
    // Carried constraints of Z0 and W, then the static rows tying z_0 to w_0.
    out.S = vcat(bdiag(Z0.S, W.S), hcat(t.Ac * Z0.M, t.Bwc * W.M));
    out.A = vcat(bdiag(Z0.A, W.A), hcat(t.Ac * Z0.G, t.Bwc * W.G));
    out.b = vcat(vcat(Z0.b, W.b), Vector(-t.Ac * Z0.c - t.Bwc * W.c - t.Bc * u0));
    out.validate();
    return out;
}

LineZonotope predict(const SvdTransform& t, const LineZonotope& Zhat_prev,
                     const LineZonotope& W, const Vector& u_prev, const Vector& u_k,
                     const LineZonotope& zcheck_prior) {
    const Index n = t.T.rows();
    const Index nz = t.nz;
    const Index ns = n - nz;
    require(Zhat_prev.dim() == n, "predict: previous set dimension mismatch");
    require(zcheck_prior.dim() == ns, "predict: prior dimension mismatch");

    // Line groups [delta_hat, theta_{k-1}, theta_k, delta_R] and generator
    // groups [xi_hat, phi_{k-1}, phi_k, xi_R]: the dynamic rows propagate
    // (z_{k-1}, w_{k-1}) through (At, Bwt), the algebraic rows come from the
    // prior, and the new static rows couple everything to (u_k, w_k).
    const Index ndh = Zhat_prev.lines();
    const Index ngh = Zhat_prev.generators();
    const Index ndw = W.lines();
    const Index ngw = W.generators();
    const Index ndp = zcheck_prior.lines();
    const Index ngp = zcheck_prior.generators();

    LineZonotope out;
    const Vector top_c = t.At * Zhat_prev.c + t.Bt * u_prev + t.Bwt * W.c;
    out.c = vcat(top_c, zcheck_prior.c);

    out.M = vcat(
        hcat(hcat(Matrix(t.At * Zhat_prev.M), Matrix(t.Bwt * W.M)), Matrix::Zero(nz, ndw + ndp)),
        hcat(Matrix::Zero(ns, ndh + 2 * ndw), zcheck_prior.M));
    out.G = vcat(
        hcat(hcat(Matrix(t.At * Zhat_prev.G), Matrix(t.Bwt * W.G)), Matrix::Zero(nz, ngw + ngp)),
        hcat(Matrix::Zero(ns, ngh + 2 * ngw), zcheck_prior.G));

    // Carried constraints, then the static rows for (z_k, u_k, w_k).
    Matrix Sst = t.Ac * out.M;
    Sst.middleCols(ndh + ndw, ndw) += t.Bwc * W.M;
    Matrix Ast = t.Ac * out.G;
    Ast.middleCols(ngh + ngw, ngw) += t.Bwc * W.G;
    const Vector bst = -t.Ac * out.c - t.Bc * u_k - t.Bwc * W.c;

    out.S = vcat(bdiag({Zhat_prev.S, W.S, W.S, zcheck_prior.S}), Sst);
    out.A = vcat(bdiag({Zhat_prev.A, W.A, W.A, zcheck_prior.A}), Ast);
    out.b = vcat(vcat(vcat(Zhat_prev.b, W.b), vcat(W.b, zcheck_prior.b)), bst);
    out.validate();
    return out;
}

LineZonotope update(const SvdTransform& t, const LineZonotope& Zbar,
                    const DescriptorModel& m, const LineZonotope& V, const Vector& u_k,
                    const Vector& y_k) {
    require(Zbar.dim() == m.n(), "update: predicted set dimension mismatch");
    return generalized_intersection(Zbar, measurement_set(m, V, u_k, y_k),
                                    Matrix(m.C * t.T));
}

std::vector<EstimatorState> estimate_run(const DescriptorModel& m,
                                         const LineZonotope& X0,
                                         const LineZonotope& W, const LineZonotope& V,
                                         const std::vector<Vector>& inputs,
                                         const std::vector<Vector>& outputs,
                                         const EstimatorConfig& cfg) {
    m.validate();
    require(inputs.size() == outputs.size() && !inputs.empty(),
            "estimate_run: inputs/outputs must be equal-length and nonempty");
    const SvdTransform t = svd_transform(m);
    const Index n = m.n();
    const Index ns = n - t.nz;

    LineZonotope prior;  // prior for the algebraic part of z_k
    if (ns > 0) {
        if (cfg.method == EstimatorMethod::kLineZonotope) {
            prior = lz_realspace(ns);
        } else {
            require(cfg.XA.dim() == n, "estimate_run: XA must match the state dimension");
            Matrix sel = Matrix::Zero(ns, n);
            sel.rightCols(ns).setIdentity();
            prior = linear_map(Matrix(sel * t.Tinv), cfg.XA);
        }
    }

    std::vector<EstimatorState> states;
    states.reserve(inputs.size());
    using clock = std::chrono::steady_clock;

    auto record = [&](Index k, const LineZonotope& Zhat, const LineZonotope* Xhat,
                      bool empty, double reduce_seconds) {
        EstimatorState st;
        st.k = k;
        st.empty = empty;
        st.reduce_seconds = reduce_seconds;
        if (!empty) {
            st.Zhat = Zhat;
            st.Xhat = Xhat != nullptr ? *Xhat : linear_map(t.T, Zhat);
            st.radius_x = radius(st.Xhat);
        } else {
            st.radius_x = std::numeric_limits<double>::quiet_NaN();
        }
        states.push_back(std::move(st));
    };

    // k = 0: the reported set is X0 with the measurement only; the carried
    // factor adds the w_0 columns and the static row (which constrains w_0 as
    // well, so it tightens prediction without shrinking the k = 0 estimate).
    const LineZonotope Xhat0 =
        generalized_intersection(X0, measurement_set(m, V, inputs[0], outputs[0]), m.C);
    LineZonotope Zhat = initial_feasible_set(m, t, X0, W, V, inputs[0], outputs[0]);
    bool empty = is_empty(Zhat, cfg.tol);
    double rsec = 0.0;
    if (!empty) {
        const auto t0 = clock::now();
        Zhat = reduce(Zhat, cfg.limits);
        rsec = std::chrono::duration<double>(clock::now() - t0).count();
    }
    record(0, Zhat, &Xhat0, empty, rsec);
    if (empty && cfg.stop_on_empty) return states;

    for (std::size_t k = 1; k < inputs.size(); ++k) {
        if (empty) {
            record(static_cast<Index>(k), Zhat, nullptr, true, 0.0);
            continue;
        }
        LineZonotope Zbar = predict(t, Zhat, W, inputs[k - 1], inputs[k], prior);
        LineZonotope Znew = update(t, Zbar, m, V, inputs[k], outputs[k]);
        empty = is_empty(Znew, cfg.tol);
        rsec = 0.0;
        if (!empty) {
            const auto t0 = clock::now();
            Znew = reduce(Znew, cfg.limits);
            rsec = std::chrono::duration<double>(clock::now() - t0).count();
        }
        Zhat = std::move(Znew);
        record(static_cast<Index>(k), Zhat, nullptr, empty, rsec);
        if (empty && cfg.stop_on_empty) break;
    }
    return states;
}

SimulationResult simulate(const DescriptorModel& m, const SvdTransform& t,
                          const LineZonotope& W, const LineZonotope& V, const Vector& x0,
                          const std::vector<Vector>& inputs, std::uint64_t noise_seed,
                          const Vector* w0) {
    m.validate();
    require(!inputs.empty(), "simulate: need at least one input");
    require(x0.size() == m.n(), "simulate: x0 size mismatch");
    const Index n = m.n();
    const Index nz = t.nz;
    const Index ns = n - nz;

    Matrix Acheck;  // static-row block acting on the algebraic part of z
    Eigen::PartialPivLU<Matrix> lu;
    if (ns > 0) {
        Acheck = t.Ac.rightCols(ns);
        require(std::abs(Acheck.determinant()) > 1e-12,
                "simulate: static rows do not determine the algebraic state");
        lu = Eigen::PartialPivLU<Matrix>(Acheck);
    }

    UniformRng rng(noise_seed);
    auto draw = [&](const LineZonotope& set) {
        Vector x = set.c;
        for (Index j = 0; j < set.generators(); ++j) x += set.G.col(j) * rng.sym();
        for (Index j = 0; j < set.lines(); ++j) x += set.M.col(j) * rng.sym();
        return x;
    };

    SimulationResult out;
    const std::size_t K = inputs.size();
    out.states.reserve(K);
    out.outputs.reserve(K);
    out.w.reserve(K);
    out.v.reserve(K);

    Vector ztil = (t.Tinv * x0).head(nz);
    for (std::size_t k = 0; k < K; ++k) {
        if (k > 0) {
            const Vector zprev = t.Tinv * out.states.back();
            ztil = t.At * zprev + t.Bt * inputs[k - 1] + t.Bwt * out.w.back();
        }
        Vector wk = draw(W);
        if (k == 0 && w0 != nullptr) wk = *w0;
        const Vector vk = draw(V);
        Vector z(n);
        z.head(nz) = ztil;
        if (ns > 0) {
            const Vector rhs = -(t.Ac.leftCols(nz) * ztil + t.Bc * inputs[k] + t.Bwc * wk);
            z.tail(ns) = lu.solve(rhs);
        }
        const Vector xk = t.T * z;
        out.states.push_back(xk);
        out.outputs.push_back(m.C * xk + m.D * inputs[k] + m.Dv * vk);
        out.w.push_back(wk);
        out.v.push_back(vk);
    }
    return out;
}

}  // namespace lzsetkit
