#include "tvopt/sets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace tvopt {

ConvexSet ConvexSet::whole(Eigen::Index n) {
    ConvexSet s;
    s.kind = SetKind::whole_space;
    s.dimension = n;
    return s;
}

ConvexSet ConvexSet::make_box(Vec lo, Vec hi) {
    if (lo.size() != hi.size() || lo.size() == 0)
        throw parameter_error("box: bound dimensions mismatch or empty");
    if ((hi - lo).minCoeff() < 0.0) throw parameter_error("box: lo > hi on some coordinate");
    ConvexSet s;
    s.kind = SetKind::box;
    s.dimension = lo.size();
    s.lo = std::move(lo);
    s.hi = std::move(hi);
    return s;
}

ConvexSet ConvexSet::centered_box(Eigen::Index n, double r) {
    if (r < 0.0) throw parameter_error("box: negative radius");
    return make_box(Vec::Constant(n, -r), Vec::Constant(n, r));
}

ConvexSet ConvexSet::ball(Vec center, double radius) {
    if (radius < 0.0) throw parameter_error("ball: negative radius");
    ConvexSet s;
    s.kind = SetKind::euclidean_ball;
    s.dimension = center.size();
    s.center = std::move(center);
    s.radius = radius;
    return s;
}

ConvexSet ConvexSet::make_halfspace(Vec a, double b) {
    if (a.norm() == 0.0) throw parameter_error("halfspace: zero normal");
    ConvexSet s;
    s.kind = SetKind::halfspace;
    s.dimension = a.size();
    s.a = std::move(a);
    s.b = b;
    return s;
}

ConvexSet ConvexSet::affine(Mat A, Vec b) {
    if (A.rows() != b.size() || A.rows() == 0)
        throw parameter_error("affine subspace: A rows != b size or empty");
    // Consistency: b must lie in the range of A for the set to be nonempty.
    Vec x0 = A.colPivHouseholderQr().solve(b);
    if ((A * x0 - b).norm() > 1e-8 * (1.0 + b.norm()))
        throw parameter_error("affine subspace: A x = b has no solution");
    ConvexSet s;
    s.kind = SetKind::affine_subspace;
    s.dimension = A.cols();
    s.A = std::move(A);
    s.b_eq = std::move(b);
    return s;
}

ConvexSet ConvexSet::make_simplex(Eigen::Index n) {
    if (n <= 0) throw parameter_error("simplex: dimension must be positive");
    ConvexSet s;
    s.kind = SetKind::simplex;
    s.dimension = n;
    return s;
}

ConvexSet ConvexSet::orthant(Eigen::Index n) {
    ConvexSet s;
    s.kind = SetKind::nonnegative_orthant;
    s.dimension = n;
    return s;
}

namespace {

// Sort-based simplex projection; threshold rule is deterministic under ties.
Vec project_simplex(const Vec& x) {
    const Eigen::Index n = x.size();
    std::vector<double> u(x.data(), x.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumsum = 0.0, theta = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        cumsum += u[static_cast<std::size_t>(i)];
        const double candidate = (cumsum - 1.0) / static_cast<double>(i + 1);
        if (u[static_cast<std::size_t>(i)] - candidate > 0.0) theta = candidate;
    }
    return x.unaryExpr([theta](double v) { return std::max(v - theta, 0.0); });
}

}  // namespace

Vec project(const ConvexSet& set, const Vec& x) {
    require_dim(x, set.dimension, "project");
    switch (set.kind) {
        case SetKind::whole_space:
            return x;
        case SetKind::box:
            return x.cwiseMax(set.lo).cwiseMin(set.hi);
        case SetKind::euclidean_ball: {
            const Vec d = x - set.center;
            const double n = d.norm();
            if (n <= set.radius) return x;
            return set.center + (set.radius / n) * d;
        }
        case SetKind::halfspace: {
            const double viol = set.a.dot(x) - set.b;
            if (viol <= 0.0) return x;
            return x - (viol / set.a.squaredNorm()) * set.a;
        }
        case SetKind::affine_subspace: {
            // x - A^+ (A x - b); least-norm correction handles rank deficiency.
            Vec corr = set.A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
                           .solve(set.A * x - set.b_eq);
            return x - corr;
        }
        case SetKind::simplex:
            return project_simplex(x);
        case SetKind::nonnegative_orthant:
            return x.cwiseMax(0.0);
    }
    throw parameter_error("project: unknown set kind");
}

double norm_bound(const ConvexSet& set) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    switch (set.kind) {
        case SetKind::box: {
            // Farthest corner: per-coordinate max of |lo|, |hi|.
            return set.lo.cwiseAbs().cwiseMax(set.hi.cwiseAbs()).norm();
        }
        case SetKind::euclidean_ball:
            return set.center.norm() + set.radius;
        case SetKind::simplex:
            return 1.0;  // attained at the vertices
        case SetKind::whole_space:
        case SetKind::halfspace:
        case SetKind::affine_subspace:
        case SetKind::nonnegative_orthant:
            return inf;
    }
    return inf;
}

}  // namespace tvopt
