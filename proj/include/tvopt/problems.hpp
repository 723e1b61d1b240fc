#pragma once

// Time-varying problem model: a stream is a deterministic map k -> sampled
// convex problem instance. Scenario generators build streams whose instances
// satisfy the hypotheses of the algorithm family they feed; the variation
// estimator measures the drift constants (delta, d, sigma) that the tracking
// bounds consume.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tvopt/functions.hpp"
#include "tvopt/sets.hpp"
#include "tvopt/vec.hpp"

namespace tvopt {

struct LinearConstraint {  // A x <= b or A x = b depending on slot
    Mat A;
    Vec b;
};

struct AdmmTriple {  // A x + B z = c
    Mat A;
    Mat B;
    Vec c;
};

struct ProblemInstance {
    ConvexFunction f;
    std::optional<ConvexFunction> g;   // composite term
    ConvexSet feasible_set;            // X_k
    std::optional<LinearConstraint> linear_ineq;
    std::optional<LinearConstraint> linear_eq;
    std::optional<AdmmTriple> admm;
    std::optional<Vec> slater_point;   // strictly feasible for linear_ineq
    double t_k = 0.0;
};

struct ProblemStream {
    std::function<ProblemInstance(long)> sampler;  // pure in (k, seed)
    long horizon = 0;                              // T
    double h = 1.0;                                // sampling period
    std::uint64_t seed = 0;

    std::string scenario;       // family tag
    std::string algorithm;      // suggested algorithm family
    double lambda_default = 1.0;
    Vec x1;                     // suggested primal start
    Vec p1;                     // suggested dual start (empty when unused)
    double X_bound = 0.0;       // iterate-norm bound when the family gives one; inf otherwise
    bool squared_sum_tracking = false;  // sum of squared per-node errors
    std::map<std::string, double> meta;
};

struct ScenarioConfig {
    std::string family;
    std::uint64_t seed = 1;
    long horizon = 200;
    std::map<std::string, double> params;  // family-specific numeric knobs
};

struct VariationEstimate {
    double delta_hat = 0.0;  // max consecutive optimizer distance
    double d_hat = 0.0;      // squared-variation constant from a run
    double sigma_hat = 0.0;  // max sampled objective change
    std::vector<double> delta_steps;    // per tau: ||x*_tau - x*_{tau-1}||
    std::vector<double> d_sq_steps;     // per tau: the squared-distance gap, clipped at 0
    std::vector<double> sigma_steps;    // per tau: max sampled |F_{tau+1} - F_tau|
};

// k ranges over 1..horizon+1: step k consumes instance k, and the final
// iterate x_{T+1} is scored against instance T+1.
ProblemInstance sample(const ProblemStream& stream, long k);

// Families: static_quadratic, moving_quadratic, tv_lasso, tv_inequality_qp,
// tv_equality_qp, tv_admm_consensus, localization_lite.
ProblemStream make_scenario(const ScenarioConfig& config);

// delta from the oracle trajectory (entries for k = 1..K), sigma from sampled
// objective differences at the optimizers and (optionally) the run iterates,
// d per the squared-variation assumption given the run iterates.
VariationEstimate estimate_variation(const ProblemStream& stream,
                                     const std::vector<Vec>& oracle_traj,
                                     const std::vector<Vec>* run_iterates = nullptr);

}  // namespace tvopt
