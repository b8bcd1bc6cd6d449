/**
 * @file test_core_sets.cpp
 * @brief Unit tests for line-zonotope constructions, exact set operations, and
 *        LP-backed queries.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lzsetkit/line_zonotope.hpp"
#include "support.hpp"

using namespace lzsetkit;
using namespace lzsetkit::testsupport;

namespace {

/// Reference zonotope-with-strip instance used by several tests below.
LineZonotope demo_zonotope() {
    return lz_zonotope(mat({{0.2812, 0.1968, 0.4235}, {0.0186, -0.2063, -0.2267}}),
                       vec({0.0, 0.0}));
}

}  // namespace

TEST_CASE("validate rejects inconsistent shapes and non-finite entries") {
    LineZonotope z = lz_zonotope(Matrix::Identity(2, 2), Vector::Zero(2));
    CHECK_NOTHROW(z.validate());

    LineZonotope bad = z;
    bad.G = Matrix::Identity(3, 3);
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = z;
    bad.S = Matrix::Zero(1, 4);  // constraint rows without matching b/A shapes
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = z;
    bad.c(0) = std::nan("");
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("basic constructors produce the documented blocks") {
    const Matrix G = mat({{1.0, 0.5}, {0.0, 2.0}});
    const Vector c = vec({1.0, -1.0});

    LineZonotope z = lz_zonotope(G, c);
    CHECK(z.lines() == 0);
    CHECK(z.constraints() == 0);
    CHECK(z.is_zonotope());
    CHECK(max_abs_diff(z.G, G) == 0.0);

    const Matrix A = mat({{1.0, -1.0}});
    const Vector b = vec({0.25});
    LineZonotope cz = lz_constrained_zonotope(G, c, A, b);
    CHECK(cz.is_constrained_zonotope());
    CHECK_FALSE(cz.is_zonotope());
    CHECK(cz.constraints() == 1);

    LineZonotope s = lz_singleton(c);
    CHECK(s.generators() == 0);
    CHECK(s.lines() == 0);
    CHECK(membership(c, s));
    CHECK_FALSE(membership(vec({1.0, -0.9}), s));
}

TEST_CASE("real space and strip constructions match their closed forms") {
    // R^n is represented as (I_n, _, 0)_LZ.
    LineZonotope r3 = lz_realspace(3);
    CHECK(r3.dim() == 3);
    CHECK(r3.generators() == 0);
    CHECK(r3.constraints() == 0);
    CHECK(max_abs_diff(r3.M, Matrix::Identity(3, 3)) == 0.0);
    CHECK(max_abs_diff(r3.c, Vector::Zero(3)) == 0.0);

    // Strip {x : ||-1 1|x - 1| <= 0.5} lowers to (I2, 0, 0, [-1 1], -0.5, 1)_LZ.
    LineZonotope s = lz_from_strip({vec({-1.0, 1.0}), 1.0, 0.5});
    CHECK(max_abs_diff(s.M, Matrix::Identity(2, 2)) == 0.0);
    CHECK(max_abs_diff(s.G, Matrix::Zero(2, 1)) == 0.0);
    CHECK(max_abs_diff(s.c, Vector::Zero(2)) == 0.0);
    CHECK(max_abs_diff(s.S, mat({{-1.0, 1.0}})) == 0.0);
    CHECK(max_abs_diff(s.A, mat({{-0.5}})) == 0.0);
    CHECK(max_abs_diff(s.b, vec({1.0})) == 0.0);
}

TEST_CASE("strip membership agrees with the analytic inequality") {
    const Vector rho = vec({-1.0, 1.0});
    const double d = 1.0, sigma = 0.5;
    LineZonotope s = lz_from_strip({rho, d, sigma});

    Rng rng(42);
    int inside = 0;
    for (int t = 0; t < 1000; ++t) {
        const Vector x = random_vector(rng, 2, 3.0);
        const bool analytic = std::abs(rho.dot(x) - d) <= sigma;
        CHECK(membership(x, s) == analytic);
        inside += analytic ? 1 : 0;
    }
    CHECK(inside > 50);  // the sample actually exercises both outcomes
    CHECK(inside < 950);
}

TEST_CASE("zonotope-with-strip intersection reproduces the reference matrices") {
    LineZonotope z = demo_zonotope();
    LineZonotope s = lz_from_strip({vec({1.0, -1.0}), 1.0, 0.1});
    LineZonotope i = generalized_intersection(z, s, Matrix::Identity(2, 2));

    CHECK(max_abs_diff(i.M, Matrix::Zero(2, 2)) <= 1e-12);
    CHECK(max_abs_diff(i.G, mat({{0.2812, 0.1968, 0.4235, 0.0},
                                 {0.0186, -0.2063, -0.2267, 0.0}})) <= 1e-12);
    CHECK(max_abs_diff(i.c, Vector::Zero(2)) <= 1e-12);
    CHECK(max_abs_diff(i.S, mat({{1.0, -1.0}, {-1.0, 0.0}, {0.0, -1.0}})) <= 1e-12);
    CHECK(max_abs_diff(i.A, mat({{0.0, 0.0, 0.0, -0.1},
                                 {0.2812, 0.1968, 0.4235, 0.0},
                                 {0.0186, -0.2063, -0.2267, 0.0}})) <= 1e-12);
    CHECK(max_abs_diff(i.b, vec({1.0, 0.0, 0.0})) <= 1e-12);

    // The intersection is nonempty and sits inside both operands.
    CHECK_FALSE(is_empty(i));
    Rng rng(7);
    for (int t = 0; t < 20; ++t) {
        const Vector x = sample_point(i, rng);
        CHECK(membership(x, z, 1e-7));
        CHECK(membership(x, s, 1e-7));
    }
}

TEST_CASE("generalized intersection characterizes exactly the constrained points") {
    Rng rng(11);
    LineZonotope z = random_bounded_cz(rng, 3, 5, 1);
    LineZonotope y = random_bounded_cz(rng, 2, 4, 1);
    const Matrix r = random_matrix(rng, 2, 3);
    LineZonotope zi = generalized_intersection(z, y, r);

    int both = 0;
    for (int t = 0; t < 300; ++t) {
        // Half the draws come from Z itself so the "and" branch is exercised.
        const Vector x = (t % 2 == 0) ? random_vector(rng, 3, 2.0) : sample_point(z, rng);
        const bool in_z = membership(x, z, 1e-7);
        const bool in_y = membership(r * x, y, 1e-7);
        CHECK(membership(x, zi, 1e-7) == (in_z && in_y));
        both += (in_z && in_y) ? 1 : 0;
    }
    CHECK(both > 0);
}

TEST_CASE("exact operations satisfy the support-function identities") {
    Rng rng(101);
    for (int inst = 0; inst < 25; ++inst) {
        const Index n = 2 + static_cast<Index>(inst % 3);
        LineZonotope z = random_bounded_cz(rng, n, n + 2, 1);
        LineZonotope w = random_bounded_cz(rng, n, n + 1, 0);
        const Matrix r = random_matrix(rng, 2, n);

        LineZonotope rz = linear_map(r, z);
        LineZonotope sum = minkowski_sum(z, w);
        LineZonotope prod = cartesian_product(z, w);

        for (int t = 0; t < 12; ++t) {
            const Vector d2 = random_vector(rng, 2);
            const Vector dn = random_vector(rng, n);
            const Vector dw = random_vector(rng, n);
            CHECK(std::abs(support(rz, d2) - support(z, r.transpose() * d2)) <= 1e-8);
            CHECK(std::abs(support(sum, dn) - (support(z, dn) + support(w, dn))) <= 1e-8);
            CHECK(std::abs(support(prod, vcat(dn, dw)) - (support(z, dn) + support(w, dw))) <= 1e-8);
        }
    }
}

TEST_CASE("cartesian product stacks all six blocks block-diagonally") {
    Rng rng(5);
    LineZonotope z = random_lz(rng, 2, 1, 3, 1);
    LineZonotope w = random_lz(rng, 3, 2, 2, 1);
    LineZonotope p = cartesian_product(z, w);
    CHECK(p.dim() == 5);
    CHECK(max_abs_diff(p.M, bdiag(z.M, w.M)) == 0.0);
    CHECK(max_abs_diff(p.G, bdiag(z.G, w.G)) == 0.0);
    CHECK(max_abs_diff(p.c, vcat(z.c, w.c)) == 0.0);
    CHECK(max_abs_diff(p.S, bdiag(z.S, w.S)) == 0.0);
    CHECK(max_abs_diff(p.A, bdiag(z.A, w.A)) == 0.0);
    CHECK(max_abs_diff(p.b, vcat(z.b, w.b)) == 0.0);
}

TEST_CASE("intersection of two strips is the unbounded two-constraint set") {
    // Two strips in R^3 whose intersection is a slab around a line: it is
    // neither a strip nor bounded, yet closed under this representation.
    const Vector rho1 = vec({1.0, -1.0, 1.0});
    const Vector rho2 = vec({1.0, 1.0, 1.0});
    const double d = 1.0, sigma = 0.1;
    LineZonotope s1 = lz_from_strip({rho1, d, sigma});
    LineZonotope s2 = lz_from_strip({rho2, d, sigma});
    LineZonotope both = intersection(s1, s2);

    Rng rng(23);
    for (int t = 0; t < 200; ++t) {
        Vector x = random_vector(rng, 3, 2.0);
        if (t % 3 == 0) x = vec({0.0, 0.0, 1.0}) + 0.05 * random_vector(rng, 3);
        const bool analytic = std::abs(rho1.dot(x) - d) <= sigma && std::abs(rho2.dot(x) - d) <= sigma;
        CHECK(membership(x, both, 1e-7) == analytic);
    }

    // (1, 0, -1) annihilates both normals, so the set is unbounded along it.
    CHECK(support(both, vec({1.0, 0.0, -1.0})) == kInf);
    CHECK(support(both, vec({-1.0, 0.0, 1.0})) == kInf);
    CHECK(std::isfinite(support(both, rho1)));
    CHECK(std::isfinite(support(both, rho2)));
}

TEST_CASE("multi intersection matches its closed form and the pairwise chain") {
    Rng rng(31);
    std::vector<LineZonotope> zs{random_bounded_cz(rng, 2, 3, 1), random_bounded_cz(rng, 1, 2, 0),
                                 random_lz(rng, 2, 1, 2, 1)};
    std::vector<Matrix> rs{random_matrix(rng, 2, 3), random_matrix(rng, 1, 3),
                           random_matrix(rng, 2, 3)};
    LineZonotope m = multi_intersection(zs, rs);

    // Closed form: R^n refined through the stacked cartesian product.
    LineZonotope stacked = cartesian_product(cartesian_product(zs[0], zs[1]), zs[2]);
    Matrix rstack = vcat(vcat(rs[0], rs[1]), rs[2]);
    LineZonotope ref = generalized_intersection(lz_realspace(3), stacked, rstack);
    CHECK(block_gap(m, ref) <= 1e-14);

    // Same point set as the pairwise chain.
    LineZonotope chain = lz_realspace(3);
    for (std::size_t i = 0; i < zs.size(); ++i)
        chain = generalized_intersection(chain, zs[i], rs[i]);
    for (int t = 0; t < 100; ++t) {
        const Vector x = random_vector(rng, 3, 2.0);
        CHECK(membership(x, m, 1e-7) == membership(x, chain, 1e-7));
    }
}

TEST_CASE("emptiness detection and the empty-set query errors") {
    // xi is a scalar in [-1, 1]; the constraint xi = 5 is out of reach.
    LineZonotope empty = lz_constrained_zonotope(mat({{1.0}}), vec({0.0}), mat({{1.0}}), vec({5.0}));
    CHECK(is_empty(empty));
    CHECK(support(empty, vec({1.0})) == -kInf);
    CHECK_THROWS_AS(interval_hull(empty), std::runtime_error);
    CHECK_THROWS_AS(radius(empty), std::runtime_error);

    LineZonotope fine = lz_constrained_zonotope(mat({{1.0}}), vec({0.0}), mat({{1.0}}), vec({0.5}));
    CHECK_FALSE(is_empty(fine));
}

TEST_CASE("interval hull of a plain zonotope equals center plus absolute row sums") {
    Rng rng(77);
    for (int t = 0; t < 10; ++t) {
        const Index n = 2 + static_cast<Index>(t % 3);
        const Matrix G = random_matrix(rng, n, n + 3);
        const Vector c = random_vector(rng, n);
        LineZonotope z = lz_zonotope(G, c);
        Interval h = interval_hull(z);
        const Vector width = G.cwiseAbs().rowwise().sum();
        CHECK(max_abs_diff(h.lower, Vector(c - width)) <= 1e-9);
        CHECK(max_abs_diff(h.upper, Vector(c + width)) <= 1e-9);
        CHECK(h.bounded());
        CHECK(radius(z) == doctest::Approx(width.maxCoeff()).epsilon(1e-9));
    }
}

TEST_CASE("unbounded sets report infinite hull entries and infinite radius") {
    LineZonotope s = lz_from_strip({vec({-1.0, 1.0}), 1.0, 0.5});
    Interval h = interval_hull(s);
    CHECK_FALSE(h.bounded());
    CHECK(h.lower(0) == -kInf);
    CHECK(h.upper(0) == kInf);
    CHECK(radius(s) == kInf);
    CHECK(radius(lz_realspace(2)) == kInf);

    // A strip is bounded along its normal: the hull of rho'*x is [d-sigma, d+sigma].
    CHECK(support(s, vec({-1.0, 1.0})) == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(support(s, vec({1.0, -1.0})) == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("json serialization round-trips all blocks bit-exactly") {
    Rng rng(13);
    LineZonotope z = random_lz(rng, 3, 2, 4, 2);
    nlohmann::json j = to_json(z);
    LineZonotope back = lz_from_json(j);
    CHECK(block_gap(z, back) == 0.0);

    nlohmann::json bad = j;
    bad.erase("c");
    CHECK_THROWS_AS(lz_from_json(bad), std::invalid_argument);

    bad = j;
    bad["G"] = nlohmann::json::array({1.0, 2.0});  // wrong element count
    CHECK_THROWS_AS(lz_from_json(bad), std::invalid_argument);
}

TEST_CASE("operation dimension mismatches throw invalid_argument") {
    LineZonotope z2 = lz_zonotope(Matrix::Identity(2, 2), Vector::Zero(2));
    LineZonotope z3 = lz_zonotope(Matrix::Identity(3, 3), Vector::Zero(3));
    CHECK_THROWS_AS(linear_map(Matrix::Identity(2, 3), z2), std::invalid_argument);
    CHECK_THROWS_AS(minkowski_sum(z2, z3), std::invalid_argument);
    CHECK_THROWS_AS(intersection(z2, z3), std::invalid_argument);
    CHECK_THROWS_AS(generalized_intersection(z2, z3, Matrix::Identity(2, 2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(membership(Vector::Zero(3), z2), std::invalid_argument);
    CHECK_THROWS_AS(support(z2, Vector::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(multi_intersection({z2, z3}, {Matrix::Identity(2, 2)}),
                    std::invalid_argument);
}
