#include "tvopt/operators.hpp"

#include <cmath>
#include <string>

namespace tvopt {

namespace {

void require_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw parameter_error("alpha must lie strictly in (0,1), got " + std::to_string(alpha));
}

}  // namespace

AveragedOperator relax(std::function<Vec(const Vec&)> g, double alpha, Eigen::Index dimension) {
    require_alpha(alpha);
    if (dimension <= 0) throw parameter_error("relax: dimension must be positive");
    AveragedOperator t;
    t.alpha = alpha;
    t.dimension = dimension;
    t.eval = [g = std::move(g), alpha, dimension](const Vec& x) -> Vec {
        require_dim(x, dimension, "relax.eval");
        Vec gx = g(x);
        require_dim(gx, dimension, "relax.eval: inner map");
        return (1.0 - alpha) * x + alpha * gx;
    };
    return t;
}

AveragedOperator compose_averaged(const AveragedOperator& t1, const AveragedOperator& t2) {
    if (t1.dimension != t2.dimension)
        throw parameter_error("compose_averaged: dimension mismatch " +
                              std::to_string(t1.dimension) + " vs " + std::to_string(t2.dimension));
    require_alpha(t1.alpha);
    require_alpha(t2.alpha);
    const double a1 = t1.alpha, a2 = t2.alpha;
    const double alpha = (a1 + a2 - 2.0 * a1 * a2) / (1.0 - a1 * a2);
    // alpha < 1 is automatic for a1, a2 in (0,1): 1 - alpha = (1-a1)(1-a2)/(1-a1a2) > 0.
    AveragedOperator t;
    t.alpha = alpha;
    t.dimension = t1.dimension;
    t.eval = [e1 = t1.eval, e2 = t2.eval](const Vec& x) { return e1(e2(x)); };
    if (t1.contraction || t2.contraction)
        t.contraction = t1.contraction.value_or(1.0) * t2.contraction.value_or(1.0);
    t.image_bound = t1.image_bound;
    return t;
}

Vec apply(const AveragedOperator& t, const Vec& x) {
    require_dim(x, t.dimension, "apply");
    Vec y = t.eval(x);
    require_finite(y, "apply");
    if (t.image_bound && y.norm() > *t.image_bound + 1e-9)
        throw contract_error("apply: image bound " + std::to_string(*t.image_bound) +
                             " violated, ||T(x)|| = " + std::to_string(y.norm()));
    return y;
}

ResidualPair fixed_point_residual(const AveragedOperator& t, const Vec& x) {
    const double tr = (apply(t, x) - x).norm();
    return ResidualPair{tr / t.alpha, tr};
}

std::function<Vec(const Vec&)> cayley_of_resolvent(std::function<Vec(const Vec&)> r) {
    return [r = std::move(r)](const Vec& x) -> Vec { return 2.0 * r(x) - x; };
}

AveragedCheck check_averaged(const std::function<Vec(const Vec&)>& t, double alpha,
                             const std::vector<std::pair<Vec, Vec>>& sample_pairs) {
    require_alpha(alpha);
    if (sample_pairs.empty()) throw parameter_error("check_averaged: empty sample set");
    constexpr double slack = 1e-9;
    const double coeff = (1.0 - alpha) / alpha;
    AveragedCheck result;
    result.ok = true;
    result.worst_margin = -std::numeric_limits<double>::infinity();
    for (const auto& [x, y] : sample_pairs) {
        const Vec tx = t(x), ty = t(y);
        const double lhs = (tx - ty).squaredNorm();
        const double rhs = (x - y).squaredNorm() - coeff * ((x - tx) - (y - ty)).squaredNorm();
        const double margin = lhs - rhs;
        if (margin > result.worst_margin) result.worst_margin = margin;
        if (margin > slack) result.ok = false;
    }
    return result;
}

}  // namespace tvopt
