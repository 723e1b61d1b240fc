#include "tvopt/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "tvopt/errors.hpp"

namespace tvopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_nonneg(double v, const char* what) {
    if (std::isnan(v) || v < 0.0) throw parameter_error(std::string(what) + " must be nonnegative");
}

// delta (4X + delta) with the 0 * inf corner pinned to 0.
double drift_term(double delta, double X) {
    return delta == 0.0 ? 0.0 : delta * (4.0 * X + delta);
}

double min_weight_ratio(const std::vector<double>& alpha_seq, long T) {
    double a_bar = kInf;
    for (long k = 0; k < T; ++k) {
        const double a = alpha_seq[static_cast<std::size_t>(k)];
        if (!(a > 0.0 && a < 1.0)) throw parameter_error("alpha entries must lie in (0,1)");
        a_bar = std::min(a_bar, (1.0 - a) / a);
    }
    return a_bar;
}

struct Verifier {
    double slack_abs;
    double slack_rel;
    std::vector<VerdictEntry>& out;
    bool& all_hold;

    void check(const std::string& name, const std::vector<double>& measured,
               const std::vector<double>& bound, std::size_t count) {
        VerdictEntry v;
        v.name = name;
        v.holds = true;
        v.worst_margin = -kInf;
        for (std::size_t i = 0; i < count; ++i) {
            if (!std::isfinite(bound[i])) continue;
            const double margin = measured[i] - bound[i];
            v.worst_margin = std::max(v.worst_margin, margin);
            if (margin > slack_abs + slack_rel * std::max(1.0, std::abs(bound[i]))) v.holds = false;
        }
        if (v.worst_margin == -kInf) v.worst_margin = 0.0;
        out.push_back(v);
        all_hold = all_hold && v.holds;
    }
};

}  // namespace

FprBound bound_fpr_thm1a(const std::vector<double>& alpha_seq, double X, double delta,
                         double init_dist, long T) {
    if (T < 1 || static_cast<long>(alpha_seq.size()) < T)
        throw parameter_error("fpr bound: need alpha entries for every step");
    require_nonneg(X, "X");
    require_nonneg(delta, "delta");
    require_nonneg(init_dist, "initial distance");

    FprBound b;
    const double drift = drift_term(delta, X);
    b.averaged_curve.reserve(static_cast<std::size_t>(T));
    for (long t = 1; t <= T; ++t)
        b.averaged_curve.push_back(init_dist * init_dist / static_cast<double>(t) + drift);
    b.final_value = b.averaged_curve.back();
    b.asymptote_unweighted = drift / min_weight_ratio(alpha_seq, T);
    return b;
}

TrackingBound bound_tracking_thm1b(const std::vector<double>& L_seq, double delta, double init_dist,
                                   long K) {
    if (K < 1 || static_cast<long>(L_seq.size()) < K - 1)
        throw parameter_error("tracking bound: need contraction entries for every step");
    require_nonneg(delta, "delta");
    require_nonneg(init_dist, "initial distance");
    for (long i = 0; i < K - 1; ++i)
        if (!(L_seq[static_cast<std::size_t>(i)] > 0.0 && L_seq[static_cast<std::size_t>(i)] < 1.0))
            throw parameter_error("contraction factors must lie in (0,1)");

    TrackingBound b;
    b.curve.reserve(static_cast<std::size_t>(K));
    double prod = 1.0;
    double Lbar = 0.0;
    for (long k = 1; k <= K; ++k) {
        if (k > 1) {
            const double L = L_seq[static_cast<std::size_t>(k - 2)];
            prod *= L;
            Lbar = std::max(Lbar, L);
        }
        const double geo =
            k == 1 ? 0.0 : (1.0 - std::pow(Lbar, static_cast<double>(k - 1))) / (1.0 - Lbar);
        b.curve.push_back(prod * init_dist + geo * delta);
    }
    b.asymptote = Lbar > 0.0 ? delta / (1.0 - Lbar) : delta;
    return b;
}

FprBound bound_fpr_thm3(const std::vector<double>& alpha_seq, double d, double init_dist, long T) {
    if (T < 1 || static_cast<long>(alpha_seq.size()) < T)
        throw parameter_error("fpr bound: need alpha entries for every step");
    require_nonneg(d, "d");
    require_nonneg(init_dist, "initial distance");

    FprBound b;
    b.averaged_curve.reserve(static_cast<std::size_t>(T));
    for (long t = 1; t <= T; ++t)
        b.averaged_curve.push_back(init_dist * init_dist / static_cast<double>(t) + d * d);
    b.final_value = b.averaged_curve.back();
    b.asymptote_unweighted = d * d / min_weight_ratio(alpha_seq, T);
    return b;
}

VanishingVerdict bound_vanishing(const std::vector<double>& delta_seq, double tail_tol) {
    VanishingVerdict v;
    if (delta_seq.empty()) {
        v.summable = true;
        return v;
    }
    for (double d : delta_seq) require_nonneg(d, "delta entries");
    const std::size_t n = delta_seq.size();
    const std::size_t tail_start = n - (n + 3) / 4;
    for (std::size_t i = 0; i < n; ++i) {
        v.total_sum += delta_seq[i];
        if (i >= tail_start) v.tail_sum += delta_seq[i];
    }
    v.summable = v.tail_sum <= tail_tol;
    return v;
}

std::vector<double> bound_objective_prop(const ObjectiveBoundParams& p) {
    if (p.T < 1) throw parameter_error("objective bound: T must be at least 1");
    if (p.M_seq.empty()) throw parameter_error("objective bound: need smoothness entries");
    if (!(p.lambda > 0.0)) throw parameter_error("objective bound: lambda must be positive");
    require_nonneg(p.X, "X");
    require_nonneg(p.delta, "delta");
    require_nonneg(p.sigma, "sigma");
    require_nonneg(p.init_dist, "initial distance");
    if (!(p.a_bar > 0.0)) throw parameter_error("objective bound: a_bar must be positive");
    double Mmax = 0.0;
    for (double M : p.M_seq) {
        if (!std::isfinite(M) || M < 0.0)
            throw parameter_error("objective bound: smoothness entries must be finite");
        Mmax = std::max(Mmax, M);
    }
    if (Mmax > 0.0 && !(p.lambda < 2.0 / Mmax))
        throw parameter_error("objective bound: lambda must lie in (0, 2/M)");

    // Scale factor appears only when lambda exceeds 1/M_max; the proximal-point
    // specialization (M = 0) always takes the first branch.
    const double C =
        (Mmax == 0.0 || p.lambda <= 1.0 / Mmax) ? 1.0 : 1.0 + (p.lambda * Mmax - 1.0) / p.a_bar;
    const double drift = drift_term(p.delta, p.X) / (2.0 * p.lambda);
    std::vector<double> curve;
    curve.reserve(static_cast<std::size_t>(p.T));
    for (long t = 1; t <= p.T; ++t)
        curve.push_back(
            C * (p.init_dist * p.init_dist / (2.0 * p.lambda * static_cast<double>(t)) + drift) +
            p.sigma);
    return curve;
}

DualConstants dual_constants(const Mat& A, double m, double M) {
    if (A.rows() == 0 || A.cols() == 0 || A.cwiseAbs().maxCoeff() == 0.0)
        throw parameter_error("dual constants: matrix must be nonzero");
    if (!(m > 0.0)) throw parameter_error("dual constants: m must be positive");
    Eigen::JacobiSVD<Mat> svd(A);
    const Vec& s = svd.singularValues();
    DualConstants c;
    c.sigma_max = s(0);
    c.sigma_min = s(s.size() - 1);
    c.sigma_0 = c.sigma_min;
    if (c.sigma_0 <= 1e-10 * c.sigma_max) {
        for (Eigen::Index i = s.size() - 1; i >= 0; --i)
            if (s(i) > 1e-10 * c.sigma_max) {
                c.sigma_0 = s(i);
                break;
            }
    }
    c.dual_smoothness = c.sigma_max * c.sigma_max / m;
    if (std::isfinite(M) && M > 0.0) {
        const double se = c.sigma_min > 1e-10 * c.sigma_max ? c.sigma_min : c.sigma_0;
        c.dual_strong_convexity = se * se / M;
    }
    return c;
}

BoundReport measure_and_verify(const RunRecord& record,
                               const std::vector<ReferenceSolution>& oracle_traj,
                               const ProblemStream& stream, const AnalysisOptions& opt) {
    const long T = static_cast<long>(record.residuals.size());
    if (T < 1) throw parameter_error("measure: empty run record");
    if (static_cast<long>(record.iterates.size()) != T + 1)
        throw parameter_error("measure: record must hold exactly T+1 primal entries");
    if (static_cast<long>(oracle_traj.size()) < T + 1)
        throw parameter_error("measure: oracle trajectory shorter than the run");

    const bool dual_run = record.algorithm.rfind("dual_ascent", 0) == 0;
    const bool dr_run = record.algorithm == "douglas_rachford";
    const bool admm_run = record.algorithm == "admm";

    BoundReport rep;
    rep.alpha_seq = record.alphas;
    rep.L_seq = record.Ls;
    rep.a_bar = min_weight_ratio(record.alphas, T);

    // Primal tracking error against the oracle optimizers.
    rep.tracking.reserve(static_cast<std::size_t>(T) + 1);
    for (long k = 0; k <= T; ++k) {
        const Vec err = record.iterates[static_cast<std::size_t>(k)] -
                        oracle_traj[static_cast<std::size_t>(k)].x_star;
        rep.tracking.push_back(opt.squared_sum_tracking ? err.squaredNorm() : err.norm());
    }

    // One pass over the sampled instances: objective gaps, smoothness
    // constants, feasible-set stability, the dual image bound, and the
    // step-size-dependent shadow fixed points.
    std::vector<double> M_seq;
    std::vector<Vec> op_star;
    std::vector<double> recovery_factor;
    double X_dual = 0.0;
    bool set_static = true;
    SetKind first_kind = SetKind::whole_space;
    rep.objective_gap.reserve(static_cast<std::size_t>(T) + 1);
    for (long k = 1; k <= T + 1; ++k) {
        ProblemInstance inst = sample(stream, k);
        const Vec& x = record.iterates[static_cast<std::size_t>(k - 1)];
        double F = eval(inst.f, x);
        if (inst.g) F += eval(*inst.g, x);
        rep.objective_gap.push_back(F - oracle_traj[static_cast<std::size_t>(k - 1)].objective);
        M_seq.push_back(inst.f.M);
        if (k == 1)
            first_kind = inst.feasible_set.kind;
        else if (inst.feasible_set.kind != first_kind)
            set_static = false;

        if (dual_run) {
            const LinearConstraint* con = record.algorithm == "dual_ascent_ineq"
                                              ? (inst.linear_ineq ? &*inst.linear_ineq : nullptr)
                                              : (inst.linear_eq ? &*inst.linear_eq : nullptr);
            if (con != nullptr && inst.f.m > 0.0) {
                Eigen::JacobiSVD<Mat> svd(con->A);
                recovery_factor.push_back(svd.singularValues()(0) / inst.f.m);
                if (record.algorithm == "dual_ascent_ineq" && inst.slater_point) {
                    const Vec& xbar = *inst.slater_point;
                    const double gamma = (con->b - con->A * xbar).minCoeff();
                    const double q0 =
                        eval(inst.f, Vec(Eigen::LDLT<Mat>(inst.f.Q).solve(-inst.f.q)));
                    if (gamma > 0.0) X_dual = std::max(X_dual, (eval(inst.f, xbar) - q0) / gamma);
                }
            }
        }
        if (dr_run && std::isfinite(inst.f.M))
            op_star.push_back(oracle_traj[static_cast<std::size_t>(k - 1)].x_star -
                              record.lambda *
                                  eval_gradient(inst.f, oracle_traj[static_cast<std::size_t>(k - 1)].x_star));
    }

    // The sequence the theorems govern: duals for dual ascent, the splitting
    // shadow for Douglas-Rachford, the primal iterates otherwise.
    const std::vector<Vec>* op_seq = &record.iterates;
    bool have_op_star = true;
    if (dual_run) {
        op_seq = &record.duals;
        op_star.clear();
        for (long k = 0; k <= T; ++k) {
            const auto& p = oracle_traj[static_cast<std::size_t>(k)].p_star;
            if (!p) {
                have_op_star = false;
                break;
            }
            op_star.push_back(*p);
        }
    } else if (dr_run) {
        op_seq = &record.aux;
        have_op_star = static_cast<long>(op_star.size()) == T + 1;
    } else if (admm_run) {
        have_op_star = false;  // the governed variable is not recorded directly
    } else {
        op_star.clear();
        for (long k = 0; k <= T; ++k) op_star.push_back(oracle_traj[static_cast<std::size_t>(k)].x_star);
    }
    if (have_op_star && static_cast<long>(op_seq->size()) >= T + 1) {
        rep.tracking_operator.reserve(static_cast<std::size_t>(T) + 1);
        for (long k = 0; k <= T; ++k)
            rep.tracking_operator.push_back(
                ((*op_seq)[static_cast<std::size_t>(k)] - op_star[static_cast<std::size_t>(k)]).norm());
    }

    // Variation constants of the governed sequence feed the bounds; sigma
    // comes from sampled objective differences.
    std::vector<Vec> x_star_traj = primal_trajectory(oracle_traj);
    x_star_traj.resize(static_cast<std::size_t>(T) + 1);
    VariationEstimate var = estimate_variation(stream, x_star_traj, &record.iterates);
    if (have_op_star && !rep.tracking_operator.empty() && (dual_run || dr_run)) {
        var.delta_steps.clear();
        var.delta_hat = 0.0;
        for (long t = 1; t <= T; ++t) {
            var.delta_steps.push_back(
                (op_star[static_cast<std::size_t>(t)] - op_star[static_cast<std::size_t>(t - 1)]).norm());
            var.delta_hat = std::max(var.delta_hat, var.delta_steps.back());
        }
        var.d_sq_steps.clear();
        var.d_hat = 0.0;
        for (long t = 0; t < T; ++t) {
            const Vec& next = (*op_seq)[static_cast<std::size_t>(t + 1)];
            const double gap = (next - op_star[static_cast<std::size_t>(t + 1)]).squaredNorm() -
                               (next - op_star[static_cast<std::size_t>(t)]).squaredNorm();
            var.d_sq_steps.push_back(std::max(0.0, gap));
            var.d_hat = std::max(var.d_hat, var.d_sq_steps.back());
        }
        var.d_hat = std::sqrt(var.d_hat);
    }
    rep.variation = var;
    rep.init_dist = rep.tracking_operator.empty() ? rep.tracking.front() : rep.tracking_operator.front();
    if (opt.squared_sum_tracking && rep.tracking_operator.empty())
        rep.init_dist = std::sqrt(rep.tracking.front());

    // Measured weighted FPR running averages, with exactly the recorded weights.
    rep.weighted_fpr_avg.reserve(static_cast<std::size_t>(T));
    double acc = 0.0;
    for (long k = 0; k < T; ++k) {
        const double a = record.alphas[static_cast<std::size_t>(k)];
        const double g = record.residuals[static_cast<std::size_t>(k)].g_residual;
        acc += a * (1.0 - a) * g * g;
        rep.weighted_fpr_avg.push_back(acc / static_cast<double>(k + 1));
    }

    Verifier verify{opt.slack_abs, opt.slack_rel, rep.verdicts, rep.all_hold};

    // Contraction tracking bound on the governed sequence.
    if (!record.Ls.empty() && have_op_star && !rep.tracking_operator.empty()) {
        bool valid = true;
        for (double L : record.Ls) valid = valid && L > 0.0 && L < 1.0;
        if (valid) {
            TrackingBound tb = bound_tracking_thm1b(record.Ls, var.delta_hat, rep.init_dist, T + 1);
            rep.bound_tracking = tb.curve;
            rep.tracking_asymptote = tb.asymptote;
            verify.check("tracking_thm1b", rep.tracking_operator, tb.curve,
                         static_cast<std::size_t>(T) + 1);
        }
    }

    // Averaged FPR bound; the image bound comes from the caller or, for
    // inequality dual ascent, from the largest multiplier ball.
    double X_eff = opt.X;
    if (record.algorithm == "dual_ascent_ineq" && X_dual > 0.0) X_eff = std::min(X_eff, X_dual);
    rep.X = X_eff;
    if (std::isfinite(X_eff) || var.delta_hat == 0.0) {
        FprBound fb = bound_fpr_thm1a(record.alphas, X_eff, var.delta_hat, rep.init_dist, T);
        if (dr_run)
            for (double& v : fb.averaged_curve) v *= 2.0;  // shadow-to-primal transfer doubles both terms
        rep.bound_fpr_avg = fb.averaged_curve;
        rep.fpr_asymptote = fb.asymptote_unweighted;
        if (!admm_run)
            verify.check("fpr_thm1a", rep.weighted_fpr_avg, fb.averaged_curve,
                         static_cast<std::size_t>(T));
    }

    // Practical squared-variation bound.
    if (!admm_run && !dr_run && have_op_star) {
        FprBound fb3 = bound_fpr_thm3(record.alphas, var.d_hat, rep.init_dist, T);
        verify.check("fpr_thm3", rep.weighted_fpr_avg, fb3.averaged_curve,
                     static_cast<std::size_t>(T));
    }

    // Vanishing-variation check: summable drift must drive the residual down.
    {
        VanishingVerdict van = bound_vanishing(var.delta_steps);
        if (van.summable && T >= 10) {
            VerdictEntry v;
            v.name = "vanishing_fpr";
            const double final_res = record.residuals.back().g_residual;
            v.worst_margin = final_res - 1e-3;
            v.holds = final_res <= 1e-3;
            rep.verdicts.push_back(v);
            rep.all_hold = rep.all_hold && v.holds;
        }
    }

    // Objective-gap bound needs a static feasible set.
    if (opt.check_objective) {
        if (!set_static) throw unsupported_error("objective bound needs a static feasible set");
        ObjectiveBoundParams op_params;
        op_params.lambda = record.lambda;
        op_params.M_seq = M_seq;
        op_params.X = X_eff;
        op_params.delta = var.delta_hat;
        op_params.sigma = var.sigma_hat;
        op_params.a_bar = rep.a_bar;
        op_params.init_dist = rep.init_dist;
        op_params.T = T;
        std::vector<double> curve = bound_objective_prop(op_params);
        std::vector<double> gap_avg;
        double g_acc = 0.0;
        for (long t = 1; t <= T; ++t) {
            g_acc += rep.objective_gap[static_cast<std::size_t>(t)];
            gap_avg.push_back(g_acc / static_cast<double>(t));
        }
        verify.check("objective_prop", gap_avg, curve, static_cast<std::size_t>(T));
    }

    // Primal recovery for dual ascent: strong convexity converts dual error
    // into primal error.
    if (dual_run && have_op_star && static_cast<long>(recovery_factor.size()) == T + 1) {
        std::vector<double> allowed;
        for (long k = 0; k <= T; ++k)
            allowed.push_back(recovery_factor[static_cast<std::size_t>(k)] *
                              rep.tracking_operator[static_cast<std::size_t>(k)]);
        verify.check("primal_recovery", rep.tracking, allowed, static_cast<std::size_t>(T) + 1);
    }

    return rep;
}

}  // namespace tvopt
