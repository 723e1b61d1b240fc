#pragma once

// Convex function catalog with gradient/prox and curvature metadata.
//
// Catalog: zero, quadratic 1/2 x'Qx + q'x + c0 (Q symmetric PSD; least squares
// 1/2||Ax-b||^2 is constructed in this form), scaled l1 norm, and indicators of
// catalog sets. Each function carries strong convexity m and strong smoothness
// M; M = +infinity is the explicit nonsmooth sentinel and any operation that
// needs smoothness rejects it rather than picking a subgradient.

#include <optional>

#include "tvopt/sets.hpp"
#include "tvopt/vec.hpp"

namespace tvopt {

enum class FunctionKind { zero, quadratic, l1, indicator };

struct ConvexFunction {
    FunctionKind kind = FunctionKind::zero;
    Eigen::Index dimension = 0;
    double m = 0.0;  // strong convexity
    double M = 0.0;  // strong smoothness; +infinity when nonsmooth

    Mat Q;           // quadratic
    Vec q;
    double c0 = 0.0;
    double weight = 1.0;              // l1 scale
    std::optional<ConvexSet> ind_set; // indicator

    static ConvexFunction zero(Eigen::Index n);
    static ConvexFunction quadratic(Mat Q, Vec q, double c0 = 0.0);
    // 1/2 (x-center)'Q(x-center): minimum value exactly 0 at center.
    static ConvexFunction quadratic_centered(const Mat& Q, const Vec& center);
    // 1/2 ||Ax - b||^2 stored in quadratic form with exact constant term.
    static ConvexFunction least_squares(const Mat& A, const Vec& b);
    static ConvexFunction l1(Eigen::Index n, double weight);
    static ConvexFunction indicator(ConvexSet set);
};

// Finite-part evaluation; indicators return +infinity outside their set.
double eval(const ConvexFunction& f, const Vec& x);

// Gradient; throws unsupported_error when M = +infinity.
Vec eval_gradient(const ConvexFunction& f, const Vec& x);

// argmin_{x in set} f(x) + (1/(2 lambda)) ||x - v||^2.
// Closed forms: zero (projection), l1 over separable sets, quadratic over
// whole space / affine subspace (KKT) / box with diagonal Q; smooth f over
// other sets falls back to an inner projected-gradient loop to 1e-10.
Vec eval_prox(const ConvexFunction& f, const ConvexSet& set, double lambda, const Vec& v);

struct ConjugateConstants {
    double m_star = 0.0;  // strong convexity of f* (= 1/M; needs unconstrained f)
    double M_star = 0.0;  // strong smoothness of f* (= 1/m; needs m > 0)
};

// Curvature of the conjugate; throws unsupported_error when m = 0 and M = inf.
ConjugateConstants conjugate_constants(const ConvexFunction& f);

}  // namespace tvopt
