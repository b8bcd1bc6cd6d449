/**
 * @file test_reduction.cpp
 * @brief Unit tests for line elimination, constraint elimination, generator
 *        reduction, line compression, and the combined reduce() pipeline.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lzsetkit/line_zonotope.hpp"
#include "lzsetkit/reduction.hpp"
#include "support.hpp"

using namespace lzsetkit;
using namespace lzsetkit::testsupport;

namespace {

/// Max over random directions of support(inner) - support(outer); positive
/// values beyond tolerance witness a containment violation.
double enclosure_gap(const LineZonotope& inner, const LineZonotope& outer, Rng& rng,
                     int dirs = 12) {
    double gap = -kInf;
    for (int t = 0; t < dirs; ++t) {
        const Vector d = random_vector(rng, inner.dim());
        const double si = support(inner, d);
        const double so = support(outer, d);
        if (si == kInf && so == kInf) continue;
        gap = std::max(gap, si - so);
    }
    return gap;
}

/// Symmetric support gap over random directions (0 for equal sets).
double support_gap(const LineZonotope& a, const LineZonotope& b, Rng& rng, int dirs = 12) {
    double gap = 0.0;
    for (int t = 0; t < dirs; ++t) {
        const Vector d = random_vector(rng, a.dim());
        const double sa = support(a, d);
        const double sb = support(b, d);
        if (sa == kInf && sb == kInf) continue;
        gap = std::max(gap, std::abs(sa - sb));
    }
    return gap;
}

/// Membership agreement between two representations on a mix of in-span
/// perturbations and far-off points.
void check_same_points(const LineZonotope& a, const LineZonotope& b, Rng& rng,
                       int samples, double tol = 1e-6) {
    int inside = 0;
    for (int t = 0; t < samples; ++t) {
        Vector x;
        if (t % 2 == 0) {
            const Vector delta = random_vector(rng, a.lines(), 2.0);
            Vector xi = random_vector(rng, a.generators(), 1.3);
            x = a.c + a.M * delta + a.G * xi;
        } else {
            x = a.c + random_vector(rng, a.dim(), 2.0);
        }
        const bool in_a = membership(x, a, tol);
        CHECK(in_a == membership(x, b, tol));
        inside += in_a ? 1 : 0;
    }
    CHECK(inside > 0);
}

}  // namespace

TEST_CASE("single line elimination is exact and shrinks both counts") {
    Rng rng(211);
    LineZonotope z = random_lz(rng, 3, 2, 4, 2);
    REQUIRE(std::abs(z.S(0, 0)) > 1e-6);  // construction makes this generic
    LineZonotope r = eliminate_line(z, 0, 0);
    CHECK(r.lines() == z.lines() - 1);
    CHECK(r.constraints() == z.constraints() - 1);
    CHECK(r.generators() == z.generators());
    CHECK(support_gap(z, r, rng) <= 1e-7);
    check_same_points(z, r, rng, 40);
}

TEST_CASE("line elimination rejects bad indices and zero pivots") {
    Rng rng(212);
    LineZonotope z = random_lz(rng, 2, 2, 2, 1);
    CHECK_THROWS_AS(eliminate_line(z, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(eliminate_line(z, 0, 2), std::invalid_argument);
    z.S(0, 0) = 0.0;
    CHECK_THROWS_AS(eliminate_line(z, 0, 0), std::invalid_argument);
}

TEST_CASE("eliminate_all_lines removes exactly the rank of S") {
    Rng rng(221);
    // S = U * V has rank 2 by construction (3x2 times 2x3 generic factors).
    LineZonotope z;
    z.M = random_matrix(rng, 4, 3);
    z.G = random_matrix(rng, 4, 5);
    z.c = random_vector(rng, 4);
    z.S = random_matrix(rng, 3, 2) * random_matrix(rng, 2, 3);
    z.A = random_matrix(rng, 3, 5);
    Vector xi = random_vector(rng, 5, 0.8);
    z.b = z.S * random_vector(rng, 3) + z.A * xi;
    z.validate();

    ReductionReport rep;
    LineZonotope r = eliminate_all_lines(z, &rep);
    CHECK(rep.lines_eliminated == 2);
    CHECK(r.lines() == 1);
    CHECK(r.constraints() == 1);
    // Remaining constraints no longer touch the lines.
    if (r.S.size() > 0) CHECK(r.S.cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(support_gap(z, r, rng) <= 1e-7);
    check_same_points(z, r, rng, 40);

    // No constraints or no lines: nothing to do.
    LineZonotope plain = random_bounded_cz(rng, 3, 4, 1);
    CHECK(block_gap(plain, eliminate_all_lines(plain)) == 0.0);
}

TEST_CASE("eliminate_all_lines preserves the set on random instances") {
    Rng rng(222);
    for (int t = 0; t < 20; ++t) {
        const Index n = 2 + static_cast<Index>(t % 4);
        LineZonotope z = random_lz(rng, n, 1 + t % 3, n + 1, 1 + t % 2);
        LineZonotope r = eliminate_all_lines(z);
        check_same_points(z, r, rng, 20);
    }
}

TEST_CASE("constraint elimination encloses and drops one row and one generator") {
    Rng rng(231);
    LineZonotope z = random_bounded_cz(rng, 3, 6, 2);
    LineZonotope r = eliminate_constraint(z);
    CHECK(r.constraints() == 1);
    CHECK(r.generators() == 5);
    CHECK(enclosure_gap(z, r, rng) <= 1e-7);
    for (int t = 0; t < 10; ++t) CHECK(membership(sample_point(z, rng), r, 1e-6));
}

TEST_CASE("constraint elimination drops trivial rows for free") {
    Rng rng(232);
    LineZonotope z = random_bounded_cz(rng, 3, 5, 1);
    z.S = Matrix::Zero(2, 0);
    z.A = vcat(z.A, Matrix(Matrix::Zero(1, 5)));
    z.b = vcat(z.b, Vector(Vector::Zero(1)));
    z.validate();
    LineZonotope r = eliminate_constraint(z);
    CHECK(r.constraints() == 1);
    CHECK(r.generators() == 5);  // no generator was spent
    CHECK(support_gap(z, r, rng) <= 1e-7);
}

TEST_CASE("constraint elimination with every generator protected drops a row only") {
    Rng rng(233);
    LineZonotope z = random_bounded_cz(rng, 2, 4, 2);
    LineZonotope r = eliminate_constraint(z, z.generators());
    CHECK(r.constraints() == 1);
    CHECK(r.generators() == 4);
    CHECK(enclosure_gap(z, r, rng) <= 1e-7);
}

TEST_CASE("constraint elimination preconditions") {
    Rng rng(234);
    LineZonotope no_cons = random_bounded_cz(rng, 2, 3, 0);
    CHECK_THROWS_AS(eliminate_constraint(no_cons), std::invalid_argument);
    LineZonotope coupled = random_lz(rng, 2, 2, 3, 1);  // S is generically nonzero
    CHECK_THROWS_AS(eliminate_constraint(coupled), std::invalid_argument);
    LineZonotope ok = random_bounded_cz(rng, 2, 3, 1);
    CHECK_THROWS_AS(eliminate_constraint(ok, 7), std::invalid_argument);
}

TEST_CASE("generator reduction is a no-op at or above the current count") {
    Rng rng(241);
    LineZonotope z = random_bounded_cz(rng, 3, 5, 1);
    CHECK(block_gap(z, reduce_generators(z, 5)) == 0.0);
    CHECK(block_gap(z, reduce_generators(z, 9)) == 0.0);
}

TEST_CASE("generator reduction drops exactly-zero columns at no cost") {
    Rng rng(242);
    LineZonotope z = random_bounded_cz(rng, 3, 4, 1);
    LineZonotope padded = z;
    padded.G = hcat(mat({{0.0}, {0.0}, {0.0}}), z.G);
    padded.A = hcat(mat({{0.0}}), z.A);
    LineZonotope r = reduce_generators(padded, 4);
    CHECK(r.generators() == 4);
    CHECK(support_gap(padded, r, rng) <= 1e-7);
}

TEST_CASE("generator reduction encloses and respects the target") {
    Rng rng(243);
    for (int t = 0; t < 8; ++t) {
        const Index n = 2 + static_cast<Index>(t % 3);
        LineZonotope z = random_bounded_cz(rng, n, 12, 1);
        ReductionReport rep;
        LineZonotope r = reduce_generators(z, 6, 0, &rep);
        CHECK(r.generators() <= std::max<Index>(6, n + 1));
        CHECK(rep.generators_removed == z.generators() - r.generators());
        CHECK(enclosure_gap(z, r, rng) <= 1e-7);
        for (int s = 0; s < 6; ++s) CHECK(membership(sample_point(z, rng), r, 1e-6));
    }
}

TEST_CASE("generator reduction reports the structural floor when clamped") {
    Rng rng(244);
    LineZonotope z = random_bounded_cz(rng, 2, 10, 1);
    ReductionReport rep;
    LineZonotope r = reduce_generators(z, 1, 0, &rep);
    CHECK(rep.generator_limit_clamped);
    CHECK(rep.generator_floor == 3);  // lifted dimension n + n_c
    CHECK(r.generators() <= 3);
    CHECK(enclosure_gap(z, r, rng) <= 1e-7);
}

TEST_CASE("generator reduction keeps protected trailing columns verbatim") {
    Rng rng(245);
    LineZonotope z = random_bounded_cz(rng, 3, 10, 1);
    ReductionReport rep;
    LineZonotope r = reduce_generators(z, 6, 2, &rep);
    CHECK(r.generators() <= std::max<Index>(6, 4 + 2));
    CHECK(max_abs_diff(Matrix(r.G.rightCols(2)), Matrix(z.G.rightCols(2))) == 0.0);
    CHECK(max_abs_diff(Matrix(r.A.rightCols(2)), Matrix(z.A.rightCols(2))) == 0.0);
    CHECK(rep.generator_floor == 4 + 2);
    CHECK(enclosure_gap(z, r, rng) <= 1e-7);
}

TEST_CASE("generator reduction preconditions") {
    Rng rng(246);
    LineZonotope coupled = random_lz(rng, 2, 2, 6, 1);
    CHECK_THROWS_AS(reduce_generators(coupled, 3), std::invalid_argument);
    LineZonotope ok = random_bounded_cz(rng, 2, 6, 1);
    CHECK_THROWS_AS(reduce_generators(ok, 3, 9), std::invalid_argument);
}

TEST_CASE("line compression yields an orthonormal basis of the same span") {
    Rng rng(251);
    LineZonotope z;
    const Vector m1 = random_vector(rng, 3);
    const Vector m2 = random_vector(rng, 3);
    z.M = hcat(hcat(Matrix(m1), Matrix(2.0 * m1)), Matrix(m2));  // rank 2
    z.G = random_matrix(rng, 3, 3);
    z.c = random_vector(rng, 3);
    z.S = Matrix(0, 3);
    z.A = Matrix(0, 3);
    z.b = Vector(0);
    z.validate();

    LineZonotope r = compress_lines(z);
    CHECK(r.lines() == 2);
    CHECK(max_abs_diff(Matrix(r.M.transpose() * r.M), Matrix(Matrix::Identity(2, 2))) <= 1e-12);
    CHECK(support_gap(z, r, rng) <= 1e-7);
    check_same_points(z, r, rng, 30);
}

TEST_CASE("the full pipeline honors limits and outer-approximates") {
    Rng rng(261);
    // Three lines fully pinned by rank-3 constraints; extra rows and many
    // generators exercise every stage.
    LineZonotope z;
    z.M = random_matrix(rng, 3, 3);
    z.G = random_matrix(rng, 3, 14);
    z.c = random_vector(rng, 3);
    z.S = random_matrix(rng, 5, 3);
    z.A = random_matrix(rng, 5, 14);
    z.b = z.S * random_vector(rng, 3) + z.A * random_vector(rng, 14, 0.8);
    z.validate();

    ReductionLimits limits{6, 2, true};
    ReductionReport rep;
    LineZonotope r = reduce(z, limits, 0, &rep);
    CHECK(rep.lines_eliminated == 3);
    CHECK(rep.constraints_eliminated == 0);  // ranks already brought rows to 2
    CHECK(r.constraints() <= 2);
    CHECK(r.generators() <= 6);
    CHECK(enclosure_gap(z, r, rng) <= 1e-7);
    for (int t = 0; t < 10; ++t) CHECK(membership(sample_point(z, rng), r, 1e-6));

    // A tighter generator budget clamps at the structural floor and says so.
    ReductionReport rep2;
    LineZonotope r2 = reduce(z, {1, 2, true}, 0, &rep2);
    CHECK(rep2.generator_limit_clamped);
    CHECK(r2.generators() <= rep2.generator_floor);
}
