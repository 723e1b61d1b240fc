#include "tvopt/running.hpp"

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <limits>

#include "tvopt/errors.hpp"

namespace tvopt {

namespace {

constexpr double kDivergenceGuard = 1e12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void guard(const Vec& v, long k, const char* what) {
    if (!is_finite(v) || v.norm() > kDivergenceGuard)
        throw numerical_error(std::string(what) + " diverged", k);
}

// Contraction entries are meaningful only when present at every step.
void finalize_Ls(RunRecord& rec) {
    if (rec.Ls.size() != rec.residuals.size()) rec.Ls.clear();
}

// Runs the stepping loop; numerical breakdown escapes with the partial record
// attached instead of discarding it.
template <typename Loop>
void step_or_abort(RunRecord& rec, Clock::time_point t0, Loop&& loop) {
    try {
        loop();
    } catch (const numerical_error& e) {
        finalize_Ls(rec);
        rec.wall_seconds = seconds_since(t0);
        throw run_aborted(e, std::move(rec));
    }
}

struct DualStepConstants {
    double sigma_max = 0.0;
    double sigma_eff = 0.0;  // sigma_min, or the first nonzero one when A is rank deficient
};

DualStepConstants dual_sigmas(const Mat& A) {
    Eigen::JacobiSVD<Mat> svd(A);
    const Vec& s = svd.singularValues();
    DualStepConstants c;
    c.sigma_max = s(0);
    if (c.sigma_max <= 0.0) throw parameter_error("dual ascent: constraint matrix is zero");
    c.sigma_eff = s(s.size() - 1);
    if (c.sigma_eff <= 1e-10 * c.sigma_max) {
        for (Eigen::Index i = s.size() - 1; i >= 0; --i)
            if (s(i) > 1e-10 * c.sigma_max) {
                c.sigma_eff = s(i);
                break;
            }
    }
    return c;
}

// argmin_u fn(u) + v'(M u) + (lambda/2) ||M u - w||^2.
Vec solve_subproblem(const ConvexFunction& fn, const Mat& M, double lambda, const Vec& v,
                     const Vec& w, long k) {
    if (fn.kind == FunctionKind::quadratic) {
        Mat H = fn.Q + lambda * (M.transpose() * M);
        Vec rhs = -fn.q - M.transpose() * v + lambda * (M.transpose() * w);
        Vec u = Eigen::LDLT<Mat>(H).solve(rhs);
        if (!is_finite(u)) throw numerical_error("ADMM subproblem solve failed", k);
        return u;
    }
    // Identity (up to sign) coupling reduces to a prox with step 1/lambda.
    for (double s : {1.0, -1.0}) {
        if (M.rows() == M.cols() &&
            (M - s * Mat::Identity(M.rows(), M.cols())).cwiseAbs().maxCoeff() == 0.0)
            return eval_prox(fn, ConvexSet::whole(fn.dimension), 1.0 / lambda, s * (w - v / lambda));
    }
    throw unsupported_error("ADMM subproblem needs a quadratic or an identity coupling");
}

}  // namespace

RunRecord run_mk(const OperatorStream& ops, const Vec& x1, long T) {
    if (T < 1) throw parameter_error("run: horizon must be at least 1");
    require_finite(x1, "initial point");
    const auto t0 = Clock::now();

    RunRecord rec;
    rec.algorithm = "mk";
    rec.iterates.reserve(static_cast<std::size_t>(T) + 1);
    rec.iterates.push_back(x1);
    step_or_abort(rec, t0, [&] {
        Vec x = x1;
        for (long k = 1; k <= T; ++k) {
            AveragedOperator op = ops(k);
            if (op.dimension != x.size())
                throw parameter_error("run: operator dimension mismatch at step " +
                                      std::to_string(k));
            Vec tx = apply(op, x);
            guard(tx, k, "iterate");
            const double tres = (tx - x).norm();
            rec.residuals.push_back(ResidualPair{tres / op.alpha, tres});
            rec.alphas.push_back(op.alpha);
            if (op.contraction) rec.Ls.push_back(*op.contraction);
            x = std::move(tx);
            rec.iterates.push_back(x);
        }
    });
    finalize_Ls(rec);
    rec.wall_seconds = seconds_since(t0);
    return rec;
}

RunRecord run_bounded_mk(const OperatorStream& ops, const Vec& x1, long T, const ConvexSet& B) {
    if (B.kind == SetKind::whole_space) return run_mk(ops, x1, T);
    if (T < 1) throw parameter_error("run: horizon must be at least 1");
    require_finite(x1, "initial point");
    const auto t0 = Clock::now();

    RunRecord rec;
    rec.algorithm = "bounded_mk";
    rec.iterates.reserve(static_cast<std::size_t>(T) + 1);
    rec.iterates.push_back(x1);
    step_or_abort(rec, t0, [&] {
        Vec x = x1;
        for (long k = 1; k <= T; ++k) {
            AveragedOperator op = ops(k);
            if (op.dimension != x.size())
                throw parameter_error("run: operator dimension mismatch at step " +
                                      std::to_string(k));
            Vec px = project(B, apply(op, x));
            guard(px, k, "iterate");
            // Projection is 1/2-averaged; the composition constant follows.
            const double alpha_eff = 1.0 / (2.0 - op.alpha);
            const double tres = (px - x).norm();
            rec.residuals.push_back(ResidualPair{tres / alpha_eff, tres});
            rec.alphas.push_back(alpha_eff);
            if (op.contraction) rec.Ls.push_back(*op.contraction);
            x = std::move(px);
            rec.iterates.push_back(x);
        }
    });
    finalize_Ls(rec);
    rec.wall_seconds = seconds_since(t0);
    return rec;
}

AveragedOperator build_forward_backward(const ProblemInstance& instance, double lambda) {
    const ConvexFunction& f = instance.f;
    if (!std::isfinite(f.M)) throw unsupported_error("forward step needs a smooth objective");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw parameter_error("lambda must be positive and finite");
    if (f.M > 0.0 && !(lambda < 2.0 / f.M))
        throw parameter_error("lambda must lie in (0, 2/M)");

    ConvexFunction g = instance.g ? *instance.g : ConvexFunction::zero(f.dimension);
    ConvexSet X = instance.feasible_set;
    if (X.dimension != f.dimension || g.dimension != f.dimension)
        throw parameter_error("instance dimensions disagree");

    AveragedOperator op;
    op.dimension = f.dimension;
    // M = 0 degenerates to the pure backward step's 1/2.
    op.alpha = 1.0 / (2.0 - lambda * f.M / 2.0);
    if (f.m > 0.0)
        op.contraction = std::max(std::abs(1.0 - lambda * f.m), std::abs(1.0 - lambda * f.M));
    if (std::isfinite(norm_bound(X)))
        op.image_bound = norm_bound(X);
    else if (g.kind == FunctionKind::indicator && std::isfinite(norm_bound(*g.ind_set)))
        op.image_bound = norm_bound(*g.ind_set);
    ConvexFunction fc = f;
    op.eval = [fc, g, X, lambda](const Vec& x) {
        return eval_prox(g, X, lambda, x - lambda * eval_gradient(fc, x));
    };
    return op;
}

AveragedOperator build_projected_gradient(const ProblemInstance& instance, double lambda) {
    if (instance.g && instance.g->kind != FunctionKind::zero)
        throw parameter_error("projected gradient takes no composite term");
    ProblemInstance plain = instance;
    plain.g = ConvexFunction::zero(instance.f.dimension);
    return build_forward_backward(plain, lambda);
}

AveragedOperator build_proximal_point(const ProblemInstance& instance, double lambda) {
    if (instance.g && instance.g->kind != FunctionKind::zero)
        throw parameter_error("proximal point takes no composite term");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw parameter_error("lambda must be positive and finite");
    const ConvexFunction& f = instance.f;
    ConvexSet X = instance.feasible_set;
    if (X.dimension != f.dimension) throw parameter_error("instance dimensions disagree");

    AveragedOperator op;
    op.dimension = f.dimension;
    op.alpha = 0.5;  // resolvents are firmly nonexpansive
    if (f.m > 0.0) op.contraction = 1.0 / (1.0 + f.m * lambda);
    if (std::isfinite(norm_bound(X))) op.image_bound = norm_bound(X);
    ConvexFunction fc = f;
    op.eval = [fc, X, lambda](const Vec& x) { return eval_prox(fc, X, lambda, x); };
    return op;
}

RunRecord run_dual_ascent(const ProblemStream& stream, double lambda, const Vec& p1, DualMode mode,
                          const std::optional<ConvexSet>& B) {
    const long T = stream.horizon;
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw parameter_error("lambda must be positive and finite");
    require_finite(p1, "initial dual");
    const auto t0 = Clock::now();

    RunRecord rec;
    rec.algorithm = mode == DualMode::inequality ? "dual_ascent_ineq" : "dual_ascent_eq";
    rec.lambda = lambda;
    rec.scenario = stream.scenario;
    rec.seed = stream.seed;
    Vec p = p1;
    rec.duals.push_back(p);

    step_or_abort(rec, t0, [&] {
        for (long k = 1; k <= T + 1; ++k) {
            ProblemInstance inst = sample(stream, k);
            const ConvexFunction& f = inst.f;
            if (f.kind != FunctionKind::quadratic || f.m <= 0.0)
                throw unsupported_error("dual ascent needs a strongly convex quadratic objective");
            const LinearConstraint* con =
                mode == DualMode::inequality ? (inst.linear_ineq ? &*inst.linear_ineq : nullptr)
                                             : (inst.linear_eq ? &*inst.linear_eq : nullptr);
            if (con == nullptr)
                throw config_error("dual ascent: instance lacks its constraint data");
            const Mat& A = con->A;
            const Vec& b = con->b;
            if (p.size() != A.rows()) throw parameter_error("dual dimension mismatch");

            Eigen::LDLT<Mat> Qf(f.Q);
            // Lagrangian minimizer for the current multiplier: the recovered primal.
            Vec x_cur = Qf.solve(-f.q - A.transpose() * p);
            guard(x_cur, k, "recovered primal");
            rec.iterates.push_back(x_cur);
            if (k == T + 1) break;  // final recovery only

            const DualStepConstants sig = dual_sigmas(A);
            const double M_dual = sig.sigma_max * sig.sigma_max / f.m;
            const double alpha_pure = lambda * M_dual / 2.0;
            if (!(alpha_pure < 1.0))
                throw parameter_error("lambda must lie in (0, 2 m / sigma_max^2)");

            Vec p_next = p + lambda * (A * x_cur - b);
            bool projected = false;
            if (mode == DualMode::inequality) {
                if (!inst.slater_point) throw config_error("inequality mode needs a Slater point");
                const Vec& xbar = *inst.slater_point;
                const double gamma = (b - A * xbar).minCoeff();
                if (!(gamma > 0.0)) throw config_error("Slater point is not strictly feasible");
                // Ball radius from the duality gap at the Slater point, with the
                // zero multiplier as the dual probe.
                const double q_at_zero = eval(f, Vec(Qf.solve(-f.q)));
                const double radius = (eval(f, xbar) - q_at_zero) / gamma;
                p_next = p_next.cwiseMax(0.0);  // orthant first, then the radial clip: exact for a cone
                const double norm = p_next.norm();
                if (norm > radius) p_next *= radius / norm;
                projected = true;
            } else if (B && B->kind != SetKind::whole_space) {
                p_next = project(*B, p_next);
                projected = true;
            }
            guard(p_next, k, "dual iterate");

            const double alpha = projected ? 1.0 / (2.0 - alpha_pure) : alpha_pure;
            const double tres = (p_next - p).norm();
            rec.residuals.push_back(ResidualPair{tres / alpha, tres});
            rec.alphas.push_back(alpha);
            if (mode == DualMode::equality && std::isfinite(f.M)) {
                const double lo = sig.sigma_eff * sig.sigma_eff / f.M;
                const double hi = sig.sigma_max * sig.sigma_max / f.m;
                rec.Ls.push_back(
                    std::max(std::abs(1.0 - lambda * lo), std::abs(1.0 - lambda * hi)));
            }
            p = std::move(p_next);
            rec.duals.push_back(p);
        }
    });
    finalize_Ls(rec);
    rec.wall_seconds = seconds_since(t0);
    return rec;
}

RunRecord run_douglas_rachford(const ProblemStream& stream, double lambda, const Vec& z1,
                               const std::optional<ConvexSet>& B) {
    const long T = stream.horizon;
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw parameter_error("lambda must be positive and finite");
    require_finite(z1, "initial point");
    const bool bounded = B && B->kind != SetKind::whole_space;
    const auto t0 = Clock::now();

    RunRecord rec;
    rec.algorithm = "douglas_rachford";
    rec.lambda = lambda;
    rec.scenario = stream.scenario;
    rec.seed = stream.seed;
    Vec z = z1;
    rec.aux.push_back(z);

    step_or_abort(rec, t0, [&] {
        for (long k = 1; k <= T + 1; ++k) {
            ProblemInstance inst = sample(stream, k);
            ConvexFunction g = inst.g ? *inst.g : ConvexFunction::zero(inst.f.dimension);
            Vec x = eval_prox(g, inst.feasible_set, lambda, z);
            guard(x, k, "iterate");
            rec.iterates.push_back(x);
            if (k == T + 1) break;

            Vec w = eval_prox(inst.f, inst.feasible_set, lambda, 2.0 * x - z);
            Vec z_next = z + w - x;
            if (bounded) z_next = project(*B, z_next);
            guard(z_next, k, "splitting state");

            const double alpha = bounded ? 2.0 / 3.0 : 0.5;
            const double tres = (z_next - z).norm();
            rec.residuals.push_back(ResidualPair{tres / alpha, tres});
            rec.alphas.push_back(alpha);
            if (inst.f.m > 0.0 && std::isfinite(inst.f.M) &&
                inst.feasible_set.kind == SetKind::whole_space) {
                const double lM = lambda * inst.f.M;
                const double lm = lambda * inst.f.m;
                rec.Ls.push_back(
                    0.5 * (1.0 + std::max((lM - 1.0) / (lM + 1.0), (1.0 - lm) / (1.0 + lm))));
            }
            z = std::move(z_next);
            rec.aux.push_back(z);
        }
    });
    finalize_Ls(rec);
    rec.wall_seconds = seconds_since(t0);
    return rec;
}

RunRecord run_admm(const ProblemStream& stream, double lambda, const AdmmInitials& initials,
                   const std::optional<ConvexSet>& B) {
    const long T = stream.horizon;
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw parameter_error("lambda must be positive and finite");
    const bool bounded = B && B->kind != SetKind::whole_space;
    const auto t0 = Clock::now();

    RunRecord rec;
    rec.algorithm = "admm";

    ProblemInstance first = sample(stream, 1);
    if (!first.admm || !first.g) throw config_error("ADMM needs the coupling triple and both terms");
    const Eigen::Index nx = first.f.dimension;
    const Eigen::Index nz = first.g->dimension;
    const Eigen::Index nr = first.admm->A.rows();

    Vec z = initials.z1.size() ? initials.z1 : Vec(Vec::Zero(nz));
    Vec p = initials.p1.size() ? initials.p1 : Vec(Vec::Zero(nr));
    require_finite(z, "initial splitting state");
    require_finite(p, "initial dual");
    rec.aux.push_back(z);
    rec.duals.push_back(p);
    rec.nu.push_back(p);

    auto record_constants = [&](const ProblemInstance& inst) {
        if (inst.f.m > 0.0 && std::isfinite(inst.f.M)) {
            Eigen::JacobiSVD<Mat> svd(inst.admm->A);
            const double smax = svd.singularValues()(0);
            const double smin = svd.singularValues()(svd.singularValues().size() - 1);
            const double hi = lambda * smax * smax / inst.f.m;
            const double lo = lambda * smin * smin / inst.f.M;
            rec.Ls.push_back(0.5 * (1.0 + std::max((hi - 1.0) / (hi + 1.0), (1.0 - lo) / (1.0 + lo))));
        }
    };

    rec.lambda = lambda;
    rec.scenario = stream.scenario;
    rec.seed = stream.seed;
    step_or_abort(rec, t0, [&] {
        if (!bounded) {
            Vec x_rec = initials.x1.size() ? initials.x1 : Vec(Vec::Zero(nx));
            rec.iterates.push_back(x_rec);
            for (long k = 1; k <= T; ++k) {
                ProblemInstance inst = sample(stream, k);
                const Mat& A = inst.admm->A;
                const Mat& Bm = inst.admm->B;
                const Vec& c = inst.admm->c;
                Vec x_next = solve_subproblem(inst.f, A, lambda, p, c - Bm * z, k);
                Vec z_next = solve_subproblem(*inst.g, Bm, lambda, p, c - A * x_next, k);
                Vec p_next = p + lambda * (A * x_next + Bm * z_next - c);
                guard(x_next, k, "iterate");
                guard(p_next, k, "dual iterate");

                const double tres =
                    std::sqrt((z_next - z).squaredNorm() + (p_next - p).squaredNorm());
                rec.residuals.push_back(ResidualPair{tres / 0.5, tres});
                rec.alphas.push_back(0.5);
                record_constants(inst);

                z = std::move(z_next);
                p = std::move(p_next);
                rec.iterates.push_back(x_next);
                rec.aux.push_back(z);
                rec.duals.push_back(p);
                rec.nu.push_back(p);  // standard form keeps nu = p
            }
        } else {
            // The bounded recursion's x-state runs one sample ahead of the
            // standard method; seeding it with one standard x-update makes the
            // recorded sequences line up index-for-index.
            Vec x_state = solve_subproblem(first.f, first.admm->A, lambda, p,
                                           first.admm->c - first.admm->B * z, 0);
            rec.iterates.push_back(initials.x1.size() ? initials.x1 : Vec(Vec::Zero(nx)));
            if (T >= 1) rec.iterates.push_back(x_state);
            for (long k = 1; k <= T; ++k) {
                ProblemInstance inst = sample(stream, k);
                const Mat& A = inst.admm->A;
                const Mat& Bm = inst.admm->B;
                const Vec& c = inst.admm->c;
                Vec z_next = solve_subproblem(*inst.g, Bm, lambda, p, c - A * x_state, k);
                Vec nu_next = p + lambda * (A * x_state + Bm * z_next - c);
                Vec x_next = solve_subproblem(inst.f, A, lambda, p,
                                              2.0 * c - A * x_state - 2.0 * Bm * z_next, k);
                Vec p_next =
                    project(*B, p + lambda * (A * x_next + A * x_state + Bm * z_next - 2.0 * c)) -
                    lambda * (A * x_next - c);
                guard(x_next, k, "iterate");
                guard(p_next, k, "dual iterate");

                const double tres =
                    std::sqrt((z_next - z).squaredNorm() + (p_next - p).squaredNorm());
                const double alpha = 2.0 / 3.0;
                rec.residuals.push_back(ResidualPair{tres / alpha, tres});
                rec.alphas.push_back(alpha);
                record_constants(inst);

                z = std::move(z_next);
                p = std::move(p_next);
                if (k < T) rec.iterates.push_back(x_next);
                x_state = std::move(x_next);
                rec.aux.push_back(z);
                rec.duals.push_back(p);
                rec.nu.push_back(nu_next);
            }
        }
    });
    finalize_Ls(rec);
    rec.wall_seconds = seconds_since(t0);
    return rec;
}

RunRecord run_scenario(const ProblemStream& stream, const std::string& family,
                       const AlgorithmParams& params) {
    const double lambda = params.lambda > 0.0 ? params.lambda : stream.lambda_default;
    Vec x1 = params.x1.size() ? params.x1 : stream.x1;
    Vec p1 = params.p1.size() ? params.p1 : stream.p1;

    auto dispatch = [&]() -> RunRecord {
        if (family == "projected_gradient" || family == "proximal_point" ||
            family == "forward_backward") {
            if (x1.size() == 0) throw parameter_error("run: no initial point available");
            OperatorStream ops = [stream, family, lambda](long k) {
                ProblemInstance inst = sample(stream, k);
                if (family == "projected_gradient") return build_projected_gradient(inst, lambda);
                if (family == "proximal_point") return build_proximal_point(inst, lambda);
                return build_forward_backward(inst, lambda);
            };
            return params.bounding_set
                       ? run_bounded_mk(ops, x1, stream.horizon, *params.bounding_set)
                       : run_mk(ops, x1, stream.horizon);
        }
        if (family == "dual_ascent_ineq" || family == "dual_ascent_eq") {
            if (p1.size() == 0) throw parameter_error("run: no initial dual available");
            const DualMode mode =
                family == "dual_ascent_ineq" ? DualMode::inequality : DualMode::equality;
            return run_dual_ascent(stream, lambda, p1, mode, params.bounding_set);
        }
        if (family == "douglas_rachford") {
            Vec z1 = params.z1.size() ? params.z1 : x1;
            if (z1.size() == 0) throw parameter_error("run: no initial point available");
            return run_douglas_rachford(stream, lambda, z1, params.bounding_set);
        }
        if (family == "admm") {
            AdmmInitials init;
            init.x1 = x1;
            init.z1 = params.z1;
            init.p1 = p1;
            return run_admm(stream, lambda, init, params.bounding_set);
        }
        throw parameter_error("unknown algorithm family '" + family + "'");
    };

    RunRecord rec;
    try {
        rec = dispatch();
    } catch (run_aborted& e) {
        // The generic drivers cannot stamp stream metadata; do it here so the
        // partial record is as complete as a finished one.
        e.partial.algorithm = family;
        e.partial.lambda = lambda;
        e.partial.scenario = stream.scenario;
        e.partial.seed = stream.seed;
        throw;
    }
    rec.algorithm = family;
    rec.lambda = lambda;
    rec.scenario = stream.scenario;
    rec.seed = stream.seed;
    return rec;
}

}  // namespace tvopt
