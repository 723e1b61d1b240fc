#pragma once

// Convex set catalog with exact Euclidean projections.
//
// Kinds: whole space, axis box, euclidean ball, halfspace {a.x <= b},
// affine subspace {A x = b}, probability simplex, nonnegative orthant.
// norm_bound(set) = sup_{x in set} ||x|| (infinity for unbounded kinds),
// the X that image-bounded operator analyses consume.

#include <limits>

#include "tvopt/vec.hpp"

namespace tvopt {

enum class SetKind {
    whole_space,
    box,
    euclidean_ball,
    halfspace,
    affine_subspace,
    simplex,
    nonnegative_orthant,
};

struct ConvexSet {
    SetKind kind = SetKind::whole_space;
    Eigen::Index dimension = 0;

    Vec lo, hi;        // box
    Vec center;        // ball
    double radius = 0; // ball
    Vec a;             // halfspace a.x <= b
    double b = 0;      // halfspace offset
    Mat A;             // affine subspace A x = b_eq
    Vec b_eq;

    static ConvexSet whole(Eigen::Index n);
    static ConvexSet make_box(Vec lo, Vec hi);
    // Cube [-r, r]^n.
    static ConvexSet centered_box(Eigen::Index n, double r);
    static ConvexSet ball(Vec center, double radius);
    static ConvexSet make_halfspace(Vec a, double b);
    static ConvexSet affine(Mat A, Vec b);
    static ConvexSet make_simplex(Eigen::Index n);
    static ConvexSet orthant(Eigen::Index n);
};

// Unique Euclidean projection onto the set.
Vec project(const ConvexSet& set, const Vec& x);

// sup ||x|| over the set; +infinity when unbounded.
double norm_bound(const ConvexSet& set);

inline bool is_compact(const ConvexSet& set) {
    return norm_bound(set) < std::numeric_limits<double>::infinity();
}

inline bool contains(const ConvexSet& set, const Vec& x, double tol = 1e-9) {
    return (project(set, x) - x).norm() <= tol;
}

}  // namespace tvopt
