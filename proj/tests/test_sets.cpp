#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "tvopt/errors.hpp"
#include "tvopt/sets.hpp"

using namespace tvopt;
using tvtest::rand_mat;
using tvtest::rand_vec;

namespace {

std::vector<ConvexSet> sample_sets(std::mt19937_64& eng) {
    const Eigen::Index n = 4;
    Vec lo = rand_vec(eng, n), hi = lo + rand_vec(eng, n).cwiseAbs() + Vec::Constant(n, 0.1);
    Mat A = rand_mat(eng, 2, n);
    Vec b = rand_vec(eng, 2);
    Vec a = rand_vec(eng, n);
    return {
        ConvexSet::whole(n),
        ConvexSet::make_box(lo, hi),
        ConvexSet::centered_box(n, 1.5),
        ConvexSet::ball(rand_vec(eng, n), 2.0),
        ConvexSet::make_halfspace(a, 0.7),
        ConvexSet::affine(A, b),
        ConvexSet::make_simplex(n),
        ConvexSet::orthant(n),
    };
}

}  // namespace

TEST_CASE("projections are idempotent and land inside the set") {
    std::mt19937_64 eng(201);
    for (ConvexSet& set : sample_sets(eng)) {
        for (int i = 0; i < 300; ++i) {
            Vec x = rand_vec(eng, set.dimension, 3.0);
            Vec p = project(set, x);
            CHECK(contains(set, p, 1e-8));
            CHECK((project(set, p) - p).norm() <= 1e-12);
        }
    }
}

TEST_CASE("projection is the nearest point against sampled members") {
    std::mt19937_64 eng(202);
    for (ConvexSet& set : sample_sets(eng)) {
        for (int i = 0; i < 100; ++i) {
            Vec x = rand_vec(eng, set.dimension, 3.0);
            Vec p = project(set, x);
            Vec y = project(set, rand_vec(eng, set.dimension, 3.0));  // member by idempotence
            CHECK((x - p).norm() <= (x - y).norm() + 1e-9);
        }
    }
}

TEST_CASE("projections are firmly nonexpansive") {
    std::mt19937_64 eng(203);
    for (ConvexSet& set : sample_sets(eng)) {
        for (int i = 0; i < 100; ++i) {
            Vec x = rand_vec(eng, set.dimension, 3.0), y = rand_vec(eng, set.dimension, 3.0);
            Vec px = project(set, x), py = project(set, y);
            CHECK((px - py).squaredNorm() <= (px - py).dot(x - y) + 1e-10);
        }
    }
}

TEST_CASE("members project to themselves") {
    std::mt19937_64 eng(204);
    for (ConvexSet& set : sample_sets(eng)) {
        for (int i = 0; i < 100; ++i) {
            Vec y = project(set, rand_vec(eng, set.dimension, 2.0));
            CHECK((project(set, y) - y).norm() <= 1e-12);
        }
    }
}

TEST_CASE("box projection clips componentwise") {
    Vec lo(2), hi(2);
    lo << -1.0, 0.0;
    hi << 1.0, 2.0;
    ConvexSet box = ConvexSet::make_box(lo, hi);
    Vec x(2);
    x << 3.0, -5.0;
    Vec p = project(box, x);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.0);
    CHECK_THROWS_AS(ConvexSet::make_box(hi, lo), parameter_error);
}

TEST_CASE("simplex projection produces a distribution") {
    std::mt19937_64 eng(205);
    ConvexSet s = ConvexSet::make_simplex(5);
    for (int i = 0; i < 300; ++i) {
        Vec p = project(s, rand_vec(eng, 5, 2.0));
        CHECK(p.minCoeff() >= -1e-12);
        CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("affine projection satisfies the constraint and moves orthogonally to it") {
    std::mt19937_64 eng(206);
    Mat A = rand_mat(eng, 2, 5);
    Vec b = rand_vec(eng, 2);
    ConvexSet s = ConvexSet::affine(A, b);
    for (int i = 0; i < 200; ++i) {
        Vec x = rand_vec(eng, 5, 3.0);
        Vec p = project(s, x);
        CHECK((A * p - b).norm() <= 1e-9);
        // x - p lies in the row space: orthogonal to the null space of A.
        Eigen::FullPivLU<Mat> lu(A);
        Mat null_space = lu.kernel();
        CHECK((null_space.transpose() * (x - p)).norm() <= 1e-8);
    }
}

TEST_CASE("halfspace projection is exact") {
    Vec a(2);
    a << 3.0, 4.0;  // norm 5
    ConvexSet s = ConvexSet::make_halfspace(a, 5.0);
    Vec inside(2);
    inside << 0.0, 0.0;
    CHECK((project(s, inside) - inside).norm() == 0.0);
    Vec outside(2);
    outside << 3.0, 4.0;  // a.x = 25 > 5, violation 20/25
    Vec p = project(s, outside);
    CHECK(a.dot(p) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK((outside - p).norm() == doctest::Approx(20.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("norm bounds are exact for compact kinds and infinite otherwise") {
    Vec lo(2), hi(2);
    lo << -1.0, -2.0;
    hi << 3.0, 1.0;
    CHECK(norm_bound(ConvexSet::make_box(lo, hi)) ==
          doctest::Approx(std::sqrt(9.0 + 4.0)).epsilon(1e-12));
    Vec c(2);
    c << 1.0, 0.0;
    CHECK(norm_bound(ConvexSet::ball(c, 2.0)) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(norm_bound(ConvexSet::make_simplex(4)) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isinf(norm_bound(ConvexSet::whole(3))));
    CHECK(std::isinf(norm_bound(ConvexSet::orthant(3))));
    CHECK(std::isinf(norm_bound(ConvexSet::make_halfspace(Vec::Ones(2), 1.0))));

    CHECK(is_compact(ConvexSet::centered_box(3, 1.0)));
    CHECK_FALSE(is_compact(ConvexSet::whole(3)));
}

TEST_CASE("projection rejects dimension mismatches") {
    ConvexSet s = ConvexSet::centered_box(3, 1.0);
    CHECK_THROWS_AS(project(s, Vec::Zero(2)), parameter_error);
}
