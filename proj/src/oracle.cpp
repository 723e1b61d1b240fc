#include "tvopt/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "tvopt/errors.hpp"

namespace tvopt {

namespace {

constexpr long kIterCap = 1000000;

bool is_zero_fn(const ConvexFunction& f) { return f.kind == FunctionKind::zero; }

double objective_at(const ProblemInstance& inst, const Vec& x) {
    double v = eval(inst.f, x);
    if (inst.g) v += eval(*inst.g, x);
    return v;
}

// Iterate the family's static averaged map until the step length drops below
// tol; valid as the fixed points coincide with the minimizers.
ReferenceSolution iterate_composite(const ProblemInstance& inst, double tol, const Vec& start) {
    const bool smooth_f = std::isfinite(inst.f.M) && !is_zero_fn(inst.f);
    const double lambda = smooth_f ? 1.0 / std::max(inst.f.M, 1e-12) : 1.0;
    Vec x = project(inst.feasible_set, start);
    ReferenceSolution sol;
    for (long it = 1; it <= kIterCap; ++it) {
        Vec next;
        if (smooth_f) {
            Vec forward = x - lambda * eval_gradient(inst.f, x);
            next = inst.g ? eval_prox(*inst.g, inst.feasible_set, lambda, forward)
                          : project(inst.feasible_set, forward);
        } else {
            // Nonsmooth or zero f: proximal step on f, then on g if present.
            next = eval_prox(inst.f, inst.feasible_set, lambda, x);
            if (inst.g) next = eval_prox(*inst.g, inst.feasible_set, lambda, next);
        }
        const double step = (next - x).norm();
        x = next;
        if (step <= tol) {
            sol.x_star = x;
            sol.residual = step;
            sol.iterations = it;
            sol.objective = objective_at(inst, x);
            return sol;
        }
    }
    throw oracle_error("oracle iteration cap reached without meeting tolerance");
}

ReferenceSolution solve_primal(const ProblemInstance& inst, double tol, const ReferenceSolution* warm) {
    const ConvexSet& X = inst.feasible_set;
    ReferenceSolution sol;

    const bool g_empty = !inst.g || is_zero_fn(*inst.g);
    if (inst.f.kind == FunctionKind::quadratic && g_empty) {
        if (X.kind == SetKind::whole_space) {
            sol.x_star = Eigen::LDLT<Mat>(inst.f.Q).solve(-inst.f.q);
            sol.residual = (inst.f.Q * sol.x_star + inst.f.q).norm();
            sol.objective = objective_at(inst, sol.x_star);
            return sol;
        }
        if (X.kind == SetKind::affine_subspace) {
            const Eigen::Index n = inst.f.dimension;
            const Eigen::Index r = X.A.rows();
            Mat K = Mat::Zero(n + r, n + r);
            K.topLeftCorner(n, n) = inst.f.Q;
            K.topRightCorner(n, r) = X.A.transpose();
            K.bottomLeftCorner(r, n) = X.A;
            Vec rhs(n + r);
            rhs.head(n) = -inst.f.q;
            rhs.tail(r) = X.b_eq;
            Vec s = Eigen::CompleteOrthogonalDecomposition<Mat>(K).solve(rhs);
            sol.x_star = s.head(n);
            sol.residual = (X.A * sol.x_star - X.b_eq).norm();
            sol.objective = objective_at(inst, sol.x_star);
            return sol;
        }
        if (X.kind == SetKind::box) {
            bool diag = true;
            for (Eigen::Index i = 0; i < inst.f.Q.rows() && diag; ++i)
                for (Eigen::Index j = 0; j < inst.f.Q.cols(); ++j)
                    if (i != j && inst.f.Q(i, j) != 0.0) {
                        diag = false;
                        break;
                    }
            if (diag) {
                sol.x_star = Vec(inst.f.dimension);
                for (Eigen::Index i = 0; i < inst.f.dimension; ++i) {
                    const double xi = inst.f.Q(i, i) > 0.0 ? -inst.f.q[i] / inst.f.Q(i, i) : 0.0;
                    sol.x_star[i] = std::min(X.hi[i], std::max(X.lo[i], xi));
                }
                sol.objective = objective_at(inst, sol.x_star);
                return sol;
            }
        }
    }
    if (inst.f.kind == FunctionKind::quadratic && inst.g &&
        inst.g->kind == FunctionKind::quadratic && X.kind == SetKind::whole_space) {
        Mat Q = inst.f.Q + inst.g->Q;
        sol.x_star = Eigen::LDLT<Mat>(Q).solve(-(inst.f.q + inst.g->q));
        sol.residual = (Q * sol.x_star + inst.f.q + inst.g->q).norm();
        sol.objective = objective_at(inst, sol.x_star);
        return sol;
    }

    Vec start = warm ? warm->x_star : Vec(Vec::Zero(inst.f.dimension));
    return iterate_composite(inst, tol, start);
}

// Inequality-constrained QP by active-set enumeration; returns primal and the
// full multiplier vector. Feasible for the small catalog sizes only.
ReferenceSolution solve_ineq_qp(const ProblemInstance& inst) {
    if (!inst.linear_ineq) throw parameter_error("oracle: instance lacks inequality data");
    if (inst.f.kind != FunctionKind::quadratic)
        throw unsupported_error("oracle: inequality mode needs a quadratic objective");
    const Mat& A = inst.linear_ineq->A;
    const Vec& b = inst.linear_ineq->b;
    const Eigen::Index mc = A.rows();
    if (mc > 16) throw unsupported_error("oracle: too many inequality constraints to enumerate");
    const Eigen::Index n = inst.f.dimension;

    for (unsigned long mask = 0; mask < (1UL << mc); ++mask) {
        std::vector<Eigen::Index> act;
        for (Eigen::Index i = 0; i < mc; ++i)
            if (mask & (1UL << i)) act.push_back(i);
        const Eigen::Index na = static_cast<Eigen::Index>(act.size());
        Mat K = Mat::Zero(n + na, n + na);
        K.topLeftCorner(n, n) = inst.f.Q;
        Vec rhs(n + na);
        rhs.head(n) = -inst.f.q;
        for (Eigen::Index s = 0; s < na; ++s) {
            K.block(0, n + s, n, 1) = A.row(act[s]).transpose();
            K.block(n + s, 0, 1, n) = A.row(act[s]);
            rhs[n + s] = b[act[s]];
        }
        Vec sv = Eigen::FullPivLU<Mat>(K).solve(rhs);
        if ((K * sv - rhs).norm() > 1e-9 * (1.0 + rhs.norm())) continue;
        Vec x = sv.head(n);
        Vec p = Vec::Zero(mc);
        bool ok = true;
        for (Eigen::Index s = 0; s < na; ++s) {
            p[act[s]] = sv[n + s];
            if (sv[n + s] < -1e-10) ok = false;
        }
        if (!ok) continue;
        Vec slack = b - A * x;
        if (slack.minCoeff() < -1e-9) continue;
        ReferenceSolution sol;
        sol.x_star = x;
        sol.p_star = p;
        sol.residual = (inst.f.Q * x + inst.f.q + A.transpose() * p).norm();
        sol.objective = objective_at(inst, x);
        return sol;
    }
    throw oracle_error("inequality QP: no KKT-consistent active set found");
}

ReferenceSolution solve_eq_qp(const ProblemInstance& inst) {
    if (!inst.linear_eq) throw parameter_error("oracle: instance lacks equality data");
    if (inst.f.kind != FunctionKind::quadratic)
        throw unsupported_error("oracle: equality mode needs a quadratic objective");
    const Mat& A = inst.linear_eq->A;
    const Vec& b = inst.linear_eq->b;
    const Eigen::Index n = inst.f.dimension;
    const Eigen::Index r = A.rows();
    Mat K = Mat::Zero(n + r, n + r);
    K.topLeftCorner(n, n) = inst.f.Q;
    K.topRightCorner(n, r) = A.transpose();
    K.bottomLeftCorner(r, n) = A;
    Vec rhs(n + r);
    rhs.head(n) = -inst.f.q;
    rhs.tail(r) = b;
    // Minimum-norm solve keeps the dual unique under rank deficiency.
    Vec s = Eigen::CompleteOrthogonalDecomposition<Mat>(K).solve(rhs);
    ReferenceSolution sol;
    sol.x_star = s.head(n);
    sol.p_star = s.tail(r);
    sol.residual = (K * s - rhs).norm();
    if (sol.residual > 1e-8 * (1.0 + rhs.norm()))
        throw oracle_error("equality QP: inconsistent KKT system");
    sol.objective = objective_at(inst, sol.x_star);
    return sol;
}

ReferenceSolution solve_admm_kkt(const ProblemInstance& inst) {
    if (!inst.admm) throw parameter_error("oracle: instance lacks an ADMM triple");
    if (inst.f.kind != FunctionKind::quadratic || !inst.g ||
        inst.g->kind != FunctionKind::quadratic)
        throw unsupported_error("oracle: ADMM reference needs quadratic f and g");
    const Mat& A = inst.admm->A;
    const Mat& B = inst.admm->B;
    const Vec& c = inst.admm->c;
    const Eigen::Index nx = inst.f.dimension;
    const Eigen::Index nz = inst.g->dimension;
    const Eigen::Index r = A.rows();
    Mat K = Mat::Zero(nx + nz + r, nx + nz + r);
    K.topLeftCorner(nx, nx) = inst.f.Q;
    K.block(nx, nx, nz, nz) = inst.g->Q;
    K.block(0, nx + nz, nx, r) = A.transpose();
    K.block(nx, nx + nz, nz, r) = B.transpose();
    K.block(nx + nz, 0, r, nx) = A;
    K.block(nx + nz, nx, r, nz) = B;
    Vec rhs(nx + nz + r);
    rhs.head(nx) = -inst.f.q;
    rhs.segment(nx, nz) = -inst.g->q;
    rhs.tail(r) = c;
    Vec s = Eigen::CompleteOrthogonalDecomposition<Mat>(K).solve(rhs);
    if ((K * s - rhs).norm() > 1e-8 * (1.0 + rhs.norm()))
        throw oracle_error("ADMM reference: inconsistent KKT system");
    ReferenceSolution sol;
    sol.x_star = s.head(nx);
    sol.z_star = Vec(s.segment(nx, nz));
    sol.p_star = Vec(s.tail(r));
    sol.objective = eval(inst.f, sol.x_star) + eval(*inst.g, *sol.z_star);
    sol.residual = (A * sol.x_star + B * *sol.z_star - c).norm();
    return sol;
}

}  // namespace

ReferenceSolution solve_instance(const ProblemInstance& instance, const std::string& family,
                                 double tol, const ReferenceSolution* warm) {
    if (!(tol > 0.0)) throw parameter_error("oracle: tolerance must be positive");

    if (family == "dual_ascent_ineq") return solve_ineq_qp(instance);
    if (family == "dual_ascent_eq") return solve_eq_qp(instance);
    if (family == "admm") return solve_admm_kkt(instance);

    if (family == "projected_gradient" || family == "proximal_point" ||
        family == "forward_backward" || family == "douglas_rachford")
        // The splitting's z* is step-size dependent; callers that need it
        // derive z* = x* - lambda grad f(x*) from their own lambda.
        return solve_primal(instance, tol, warm);
    throw parameter_error("oracle: unknown algorithm family '" + family + "'");
}

std::vector<ReferenceSolution> solution_trajectory(const ProblemStream& stream,
                                                   const std::string& family, double tol) {
    std::vector<ReferenceSolution> traj;
    traj.reserve(static_cast<std::size_t>(stream.horizon) + 1);
    for (long k = 1; k <= stream.horizon + 1; ++k) {
        ProblemInstance inst = sample(stream, k);
        const ReferenceSolution* warm = traj.empty() ? nullptr : &traj.back();
        traj.push_back(solve_instance(inst, family, tol, warm));
    }
    return traj;
}

std::vector<Vec> primal_trajectory(const std::vector<ReferenceSolution>& traj) {
    std::vector<Vec> xs;
    xs.reserve(traj.size());
    for (const auto& r : traj) xs.push_back(r.x_star);
    return xs;
}

}  // namespace tvopt
