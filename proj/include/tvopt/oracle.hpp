#pragma once

// Per-sample reference solutions. Each sampled instance is time-invariant, so
// the oracle either solves its KKT system in closed form (quadratic cases) or
// iterates the family's own static operator far below every verification
// tolerance. Trajectories are warm-started: for non-unique solution sets this
// realizes a nearest-continuation selection.

#include <optional>
#include <string>
#include <vector>

#include "tvopt/problems.hpp"
#include "tvopt/vec.hpp"

namespace tvopt {

struct ReferenceSolution {
    Vec x_star;
    std::optional<Vec> p_star;  // dual, when the family has one
    std::optional<Vec> z_star;  // splitting partner (ADMM z block)
    double objective = 0.0;
    double residual = 0.0;      // termination residual
    long iterations = 0;        // 0 for closed forms
};

// family: projected_gradient, proximal_point, forward_backward,
// dual_ascent_ineq, dual_ascent_eq, douglas_rachford, admm.
ReferenceSolution solve_instance(const ProblemInstance& instance, const std::string& family,
                                 double tol = 1e-10, const ReferenceSolution* warm = nullptr);

std::vector<ReferenceSolution> solution_trajectory(const ProblemStream& stream,
                                                   const std::string& family, double tol = 1e-10);

// Convenience: the primal optimizer path x*_k, k = 1..horizon+1.
std::vector<Vec> primal_trajectory(const std::vector<ReferenceSolution>& traj);

}  // namespace tvopt
