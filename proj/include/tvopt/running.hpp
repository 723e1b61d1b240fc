#pragma once

// Running fixed-point iterations: one application of a per-sample averaged
// operator per sampled instance. The meta-iteration and its projected variant
// are generic; the builders and specialized drivers realize the algorithm
// families (projected gradient, proximal point, forward-backward, dual ascent
// over inequalities/equalities, Douglas-Rachford, ADMM standard/bounded).

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tvopt/errors.hpp"
#include "tvopt/operators.hpp"
#include "tvopt/problems.hpp"
#include "tvopt/vec.hpp"

namespace tvopt {

struct AlgorithmParams {
    double lambda = 0.0;  // 0: use the stream's default
    std::optional<ConvexSet> bounding_set;
    Vec x1;  // empty: stream default
    Vec z1;  // splitting state start (DR shadow / ADMM z); empty: zeros
    Vec p1;  // dual start; empty: stream default or zeros
};

struct RunRecord {
    std::string algorithm;
    std::string scenario;
    std::uint64_t seed = 0;
    double lambda = 0.0;

    std::vector<Vec> iterates;  // primal x_1..x_{T+1}
    std::vector<Vec> duals;     // p_1..p_{T+1} (dual ascent, ADMM p)
    std::vector<Vec> aux;       // z_1..z_{T+1} (DR shadow, ADMM z)
    std::vector<Vec> nu;        // ADMM multiplier estimate nu_1..nu_{T+1}
    std::vector<ResidualPair> residuals;  // length T, residual of step k at k
    std::vector<double> alphas;           // length T
    std::vector<double> Ls;               // length T; empty if no contraction
    double wall_seconds = 0.0;
};

// Divergence mid-run keeps what was recorded so far, so a caller can still
// persist the truncated trajectory.
struct run_aborted : numerical_error {
    RunRecord partial;
    run_aborted(const numerical_error& cause, RunRecord rec)
        : numerical_error(cause.what(), cause.step_index), partial(std::move(rec)) {}
};

using OperatorStream = std::function<AveragedOperator(long)>;  // k = 1..T

RunRecord run_mk(const OperatorStream& ops, const Vec& x1, long T);

// Projects every output onto B; records the composed averagedness constant
// 1/(2 - alpha_k). B = whole space falls back to run_mk exactly.
RunRecord run_bounded_mk(const OperatorStream& ops, const Vec& x1, long T, const ConvexSet& B);

AveragedOperator build_projected_gradient(const ProblemInstance& instance, double lambda);
AveragedOperator build_proximal_point(const ProblemInstance& instance, double lambda);
AveragedOperator build_forward_backward(const ProblemInstance& instance, double lambda);

enum class DualMode { inequality, equality };

RunRecord run_dual_ascent(const ProblemStream& stream, double lambda, const Vec& p1, DualMode mode,
                          const std::optional<ConvexSet>& B = std::nullopt);

RunRecord run_douglas_rachford(const ProblemStream& stream, double lambda, const Vec& z1,
                               const std::optional<ConvexSet>& B = std::nullopt);

struct AdmmInitials {
    Vec x1;  // recorded initial primal (standard path); state seed is derived
    Vec z1;
    Vec p1;
};

RunRecord run_admm(const ProblemStream& stream, double lambda, const AdmmInitials& initials,
                   const std::optional<ConvexSet>& B = std::nullopt);

// Dispatch on the family tag; fills defaults from the stream.
RunRecord run_scenario(const ProblemStream& stream, const std::string& family,
                       const AlgorithmParams& params);

}  // namespace tvopt
