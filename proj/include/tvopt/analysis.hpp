#pragma once

// Theoretical bound curves from problem constants, empirical metrics from run
// records, and verdicts comparing the two. Every bound here is a theorem for
// its hypotheses, so a violated verdict on a shipped scenario indicates an
// implementation bug, not an unlucky draw.

#include <optional>
#include <string>
#include <vector>

#include "tvopt/oracle.hpp"
#include "tvopt/problems.hpp"
#include "tvopt/running.hpp"
#include "tvopt/vec.hpp"

namespace tvopt {

struct FprBound {
    std::vector<double> averaged_curve;  // RHS per prefix length 1..T
    double final_value = 0.0;
    double asymptote_unweighted = 0.0;  // delta (4X + delta) / a_bar
};

struct TrackingBound {
    std::vector<double> curve;  // per k = 1..K
    double asymptote = 0.0;     // delta / (1 - Lbar)
};

struct VanishingVerdict {
    bool summable = false;
    double tail_sum = 0.0;
    double total_sum = 0.0;
};

struct DualConstants {
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    double sigma_0 = 0.0;  // first singular value above 1e-10 sigma_max
    double dual_smoothness = 0.0;        // sigma_max^2 / m
    double dual_strong_convexity = 0.0;  // sigma_min^2 / M, or sigma_0^2 / M when rank deficient
};

struct VerdictEntry {
    std::string name;
    bool holds = false;
    double worst_margin = 0.0;  // max over indices of measured - bound
};

struct BoundReport {
    VariationEstimate variation;
    double X = 0.0;
    double init_dist = 0.0;
    double a_bar = 0.0;  // min_k (1 - alpha_k) / alpha_k
    std::vector<double> alpha_seq;
    std::vector<double> L_seq;

    std::vector<double> tracking;           // per k = 1..T+1, primal
    std::vector<double> tracking_operator;  // the sequence the theorems govern (dual/shadow runs)
    std::vector<double> weighted_fpr_avg;   // per prefix
    std::vector<double> objective_gap;      // per k = 1..T+1

    std::vector<double> bound_tracking;  // per k (operator sequence)
    std::vector<double> bound_fpr_avg;   // per prefix
    double tracking_asymptote = 0.0;
    double fpr_asymptote = 0.0;

    std::vector<VerdictEntry> verdicts;
    bool all_hold = true;
};

// Averaged fixed-point-residual bound: per-prefix RHS init^2/T' + delta(4X+delta).
FprBound bound_fpr_thm1a(const std::vector<double>& alpha_seq, double X, double delta,
                         double init_dist, long T);

// Per-step tracking bound from the contraction factors; running products and
// running maxima, curve entry k uses steps 1..k-1.
TrackingBound bound_tracking_thm1b(const std::vector<double>& L_seq, double delta, double init_dist,
                                   long K);

// Practical squared-variation form: init^2/T' + d^2 per prefix.
FprBound bound_fpr_thm3(const std::vector<double>& alpha_seq, double d, double init_dist, long T);

// Finite-horizon summability surrogate: tail sum of the last quarter below tol.
VanishingVerdict bound_vanishing(const std::vector<double>& delta_seq, double tail_tol = 1e-3);

struct ObjectiveBoundParams {
    double lambda = 0.0;
    std::vector<double> M_seq;
    double X = 0.0;
    double delta = 0.0;
    double sigma = 0.0;
    double a_bar = 0.0;
    double init_dist = 0.0;
    long T = 0;
};

// Averaged objective-gap bound; first branch for lambda <= 1/M_max, otherwise
// the same terms scaled by C = 1 + (lambda M_max - 1)/a_bar; sigma enters
// additively in both.
std::vector<double> bound_objective_prop(const ObjectiveBoundParams& p);

DualConstants dual_constants(const Mat& A, double m, double M);

struct AnalysisOptions {
    double X = std::numeric_limits<double>::infinity();  // image bound for the FPR bound
    bool squared_sum_tracking = false;
    bool check_objective = false;  // objective-gap bound (needs a static feasible set)
    double slack_abs = 1e-6;
    double slack_rel = 1e-6;
};

BoundReport measure_and_verify(const RunRecord& record,
                               const std::vector<ReferenceSolution>& oracle_traj,
                               const ProblemStream& stream, const AnalysisOptions& opt = {});

}  // namespace tvopt
