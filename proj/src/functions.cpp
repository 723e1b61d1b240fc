#include "tvopt/functions.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "tvopt/errors.hpp"

namespace tvopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void spectrum_bounds(const Mat& Q, double& m, double& M) {
    Eigen::SelfAdjointEigenSolver<Mat> es(Q, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (lo < -1e-8 * std::max(1.0, std::abs(hi)))
        throw parameter_error("quadratic matrix is not positive semidefinite");
    m = std::max(lo, 0.0);
    M = std::max(hi, 0.0);
}

bool is_diagonal(const Mat& Q) {
    for (Eigen::Index i = 0; i < Q.rows(); ++i)
        for (Eigen::Index j = 0; j < Q.cols(); ++j)
            if (i != j && Q(i, j) != 0.0) return false;
    return true;
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

// Fallback for smooth f over a projectable set: projected gradient on
// phi(x) = f(x) + (1/(2 lambda)) ||x - v||^2, which is (m + 1/lambda)-strongly
// convex and (M + 1/lambda)-smooth, run to fixed-point residual 1e-10.
Vec prox_inner_loop(const ConvexFunction& f, const ConvexSet& set, double lambda, const Vec& v) {
    const double m_phi = f.m + 1.0 / lambda;
    const double M_phi = f.M + 1.0 / lambda;
    const double step = 2.0 / (m_phi + M_phi);
    Vec x = project(set, v);
    for (long it = 0; it < 100000; ++it) {
        Vec grad = eval_gradient(f, x) + (x - v) / lambda;
        Vec next = project(set, x - step * grad);
        if ((next - x).norm() <= 1e-10) return next;
        x = next;
    }
    throw numerical_error("prox inner loop failed to reach tolerance 1e-10");
}

}  // namespace

ConvexFunction ConvexFunction::zero(Eigen::Index n) {
    if (n <= 0) throw parameter_error("zero: dimension must be positive");
    ConvexFunction f;
    f.kind = FunctionKind::zero;
    f.dimension = n;
    f.m = 0.0;
    f.M = 0.0;
    return f;
}

ConvexFunction ConvexFunction::quadratic(Mat Q, Vec q, double c0) {
    if (Q.rows() == 0 || Q.rows() != Q.cols())
        throw parameter_error("quadratic: Q must be square and nonempty");
    if (q.size() != Q.rows()) throw parameter_error("quadratic: q dimension mismatch");
    if (!Q.isApprox(Q.transpose(), 1e-12))
        throw parameter_error("quadratic: Q must be symmetric");
    ConvexFunction f;
    f.kind = FunctionKind::quadratic;
    f.dimension = Q.rows();
    f.Q = std::move(Q);
    f.q = std::move(q);
    f.c0 = c0;
    spectrum_bounds(f.Q, f.m, f.M);
    return f;
}

ConvexFunction ConvexFunction::quadratic_centered(const Mat& Q, const Vec& center) {
    if (center.size() != Q.rows()) throw parameter_error("quadratic_centered: center dimension mismatch");
    Vec q = -(Q * center);
    const double c0 = 0.5 * center.dot(Q * center);
    return quadratic(Q, std::move(q), c0);
}

ConvexFunction ConvexFunction::least_squares(const Mat& A, const Vec& b) {
    if (A.rows() == 0 || A.cols() == 0) throw parameter_error("least_squares: empty matrix");
    if (b.size() != A.rows()) throw parameter_error("least_squares: rhs dimension mismatch");
    Mat Q = A.transpose() * A;
    Q = 0.5 * (Q + Q.transpose().eval());  // enforce exact symmetry
    return quadratic(std::move(Q), -(A.transpose() * b), 0.5 * b.squaredNorm());
}

ConvexFunction ConvexFunction::l1(Eigen::Index n, double weight) {
    if (n <= 0) throw parameter_error("l1: dimension must be positive");
    if (!(weight > 0.0) || !std::isfinite(weight))
        throw parameter_error("l1: weight must be positive and finite");
    ConvexFunction f;
    f.kind = FunctionKind::l1;
    f.dimension = n;
    f.weight = weight;
    f.m = 0.0;
    f.M = kInf;
    return f;
}

ConvexFunction ConvexFunction::indicator(ConvexSet set) {
    ConvexFunction f;
    f.kind = FunctionKind::indicator;
    f.dimension = set.dimension;
    f.ind_set = std::move(set);
    f.m = 0.0;
    f.M = kInf;
    return f;
}

double eval(const ConvexFunction& f, const Vec& x) {
    require_dim(x, f.dimension, "eval input");
    switch (f.kind) {
        case FunctionKind::zero:
            return 0.0;
        case FunctionKind::quadratic:
            return 0.5 * x.dot(f.Q * x) + f.q.dot(x) + f.c0;
        case FunctionKind::l1:
            return f.weight * x.lpNorm<1>();
        case FunctionKind::indicator:
            return contains(*f.ind_set, x) ? 0.0 : kInf;
    }
    throw contract_error("eval: unknown function kind");
}

Vec eval_gradient(const ConvexFunction& f, const Vec& x) {
    require_dim(x, f.dimension, "gradient input");
    if (!std::isfinite(f.M))
        throw unsupported_error("gradient requested for a nonsmooth function");
    switch (f.kind) {
        case FunctionKind::zero:
            return Vec::Zero(f.dimension);
        case FunctionKind::quadratic:
            return f.Q * x + f.q;
        default:
            throw unsupported_error("gradient requested for a nonsmooth function");
    }
}

Vec eval_prox(const ConvexFunction& f, const ConvexSet& set, double lambda, const Vec& v) {
    require_dim(v, f.dimension, "prox input");
    if (set.dimension != f.dimension) throw parameter_error("prox: set dimension mismatch");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw parameter_error("prox: lambda must be positive and finite");
    require_finite(v, "prox input");

    switch (f.kind) {
        case FunctionKind::zero:
            return project(set, v);

        case FunctionKind::l1: {
            const double t = lambda * f.weight;
            Vec out(f.dimension);
            switch (set.kind) {
                case SetKind::whole_space:
                    for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = soft_threshold(v[i], t);
                    return out;
                case SetKind::box:
                    // Separable scalar problems: clip of the unconstrained minimizer.
                    for (Eigen::Index i = 0; i < v.size(); ++i)
                        out[i] = std::min(set.hi[i], std::max(set.lo[i], soft_threshold(v[i], t)));
                    return out;
                case SetKind::nonnegative_orthant:
                    for (Eigen::Index i = 0; i < v.size(); ++i)
                        out[i] = std::max(0.0, soft_threshold(v[i], t));
                    return out;
                default:
                    throw unsupported_error("l1 prox is only available over separable sets");
            }
        }

        case FunctionKind::quadratic: {
            switch (set.kind) {
                case SetKind::whole_space: {
                    // (Q + I/lambda) x = v/lambda - q
                    Mat H = f.Q;
                    H.diagonal().array() += 1.0 / lambda;
                    return Eigen::LDLT<Mat>(H).solve(v / lambda - f.q);
                }
                case SetKind::affine_subspace: {
                    // Stationarity with multiplier: [H A'; A 0] [x; mu] = [v/lambda - q; b]
                    const Eigen::Index n = f.dimension;
                    const Eigen::Index r = set.A.rows();
                    Mat K = Mat::Zero(n + r, n + r);
                    K.topLeftCorner(n, n) = f.Q;
                    K.topLeftCorner(n, n).diagonal().array() += 1.0 / lambda;
                    K.topRightCorner(n, r) = set.A.transpose();
                    K.bottomLeftCorner(r, n) = set.A;
                    Vec rhs(n + r);
                    rhs.head(n) = v / lambda - f.q;
                    rhs.tail(r) = set.b_eq;
                    Vec sol = Eigen::FullPivLU<Mat>(K).solve(rhs);
                    return sol.head(n);
                }
                case SetKind::box: {
                    if (is_diagonal(f.Q)) {
                        Vec out(f.dimension);
                        for (Eigen::Index i = 0; i < v.size(); ++i) {
                            const double xi = (v[i] / lambda - f.q[i]) / (f.Q(i, i) + 1.0 / lambda);
                            out[i] = std::min(set.hi[i], std::max(set.lo[i], xi));
                        }
                        return out;
                    }
                    return prox_inner_loop(f, set, lambda, v);
                }
                default:
                    return prox_inner_loop(f, set, lambda, v);
            }
        }

        case FunctionKind::indicator: {
            const ConvexSet& S = *f.ind_set;
            if (set.kind == SetKind::whole_space) return project(S, v);
            if (S.kind == SetKind::whole_space) return project(set, v);
            if (S.kind == SetKind::box && set.kind == SetKind::box) {
                Vec lo = S.lo.cwiseMax(set.lo);
                Vec hi = S.hi.cwiseMin(set.hi);
                if ((lo.array() > hi.array()).any())
                    throw parameter_error("indicator prox: empty box intersection");
                return v.cwiseMax(lo).cwiseMin(hi);
            }
            throw unsupported_error("indicator prox over a nontrivial intersection");
        }
    }
    throw contract_error("prox: unknown function kind");
}

ConjugateConstants conjugate_constants(const ConvexFunction& f) {
    if (f.m == 0.0 && !std::isfinite(f.M))
        throw unsupported_error("conjugate curvature needs m > 0 or M < infinity");
    ConjugateConstants c;
    c.m_star = 1.0 / f.M;  // strong smoothness M transfers to strong convexity 1/M
    c.M_star = 1.0 / f.m;  // strong convexity m transfers to strong smoothness 1/m
    return c;
}

}  // namespace tvopt
