#pragma once

// Algebra of averaged operators on R^n.
//
// T is alpha-averaged when T = (1-alpha) I + alpha G with G nonexpansive and
// alpha in (0,1); then fix T = fix G and T is nonexpansive. A contraction tag
// L in (0,1) and an image bound X are carried as optional metadata: both are
// declared properties, audited by sampling (check_averaged) or at apply time
// (image bound), never proven symbolically.

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "tvopt/vec.hpp"

namespace tvopt {

struct AveragedOperator {
    std::function<Vec(const Vec&)> eval;  // must be pure; shared across runs
    double alpha = 0.5;                   // in (0,1)
    std::optional<double> contraction;    // L in (0,1) when known
    std::optional<double> image_bound;    // X with ||eval(x)|| <= X for all probes
    Eigen::Index dimension = 0;
};

struct ResidualPair {
    double g_residual = 0.0;  // ||G(x) - x|| = ||T(x) - x|| / alpha
    double t_residual = 0.0;  // ||T(x) - x||
};

// T = (1-alpha) x + alpha g(x). fix T = fix g.
AveragedOperator relax(std::function<Vec(const Vec&)> g, double alpha, Eigen::Index dimension);

// T1 o T2 with the composition constant alpha = (a1 + a2 - 2 a1 a2)/(1 - a1 a2).
// Contraction combines as the product of declared factors (a factor without a
// declared L contributes 1, i.e. plain nonexpansiveness). The image bound of
// the outer operator survives, since it is applied last.
AveragedOperator compose_averaged(const AveragedOperator& t1, const AveragedOperator& t2);

// Evaluate T(x); checks finiteness and, when declared, the image bound.
Vec apply(const AveragedOperator& t, const Vec& x);

// Residuals of T at x. t_residual = alpha * g_residual exactly.
ResidualPair fixed_point_residual(const AveragedOperator& t, const Vec& x);

// C = 2 r - I; nonexpansive whenever r is a resolvent (1/2-averaged).
std::function<Vec(const Vec&)> cayley_of_resolvent(std::function<Vec(const Vec&)> r);

struct AveragedCheck {
    bool ok = false;
    double worst_margin = 0.0;  // max over pairs of lhs - rhs; > slack means violated
};

// Sample-based audit of alpha-averagedness via
//   ||Tx - Ty||^2 <= ||x - y||^2 - ((1-alpha)/alpha) ||(I-T)x - (I-T)y||^2,
// within 1e-9 absolute slack on every pair.
AveragedCheck check_averaged(const std::function<Vec(const Vec&)>& t, double alpha,
                             const std::vector<std::pair<Vec, Vec>>& sample_pairs);

}  // namespace tvopt
