#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"
#include "tvopt/errors.hpp"
#include "tvopt/oracle.hpp"
#include "tvopt/problems.hpp"

using namespace tvopt;
using tvtest::rand_vec;

namespace {

ScenarioConfig cfg(const std::string& family, std::uint64_t seed = 7, long horizon = 20) {
    ScenarioConfig c;
    c.family = family;
    c.seed = seed;
    c.horizon = horizon;
    return c;
}

double objective_at(const ProblemInstance& inst, const Vec& x) {
    double v = eval(inst.f, x);
    if (inst.g) v += eval(*inst.g, x);
    return v;
}

}  // namespace

TEST_CASE("quadratic minimizers are recovered in closed form") {
    ProblemStream s = make_scenario(cfg("static_quadratic", 3));
    ProblemInstance inst = sample(s, 1);
    ReferenceSolution sol = solve_instance(inst, "projected_gradient");
    Vec center = Eigen::LDLT<Mat>(inst.f.Q).solve(-inst.f.q);
    CHECK((sol.x_star - center).norm() <= 1e-10);
    CHECK(sol.objective == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    CHECK(sol.iterations == 0);
    CHECK(sol.residual <= 1e-10);
}

TEST_CASE("composite solver satisfies its own fixed-point equation") {
    ProblemStream s = make_scenario(cfg("tv_lasso", 5));
    ProblemInstance inst = sample(s, 3);
    ReferenceSolution sol = solve_instance(inst, "forward_backward", 1e-12);
    CHECK(sol.iterations > 0);
    CHECK(sol.residual <= 1e-12);
    const double lambda = s.lambda_default;
    Vec forward = sol.x_star - lambda * eval_gradient(inst.f, sol.x_star);
    Vec back = eval_prox(*inst.g, inst.feasible_set, lambda, forward);
    CHECK((back - sol.x_star).norm() <= 1e-9);

    SUBCASE("the minimizer does not depend on the splitting family") {
        ReferenceSolution dr = solve_instance(inst, "douglas_rachford", 1e-12);
        CHECK((dr.x_star - sol.x_star).norm() <= 1e-8);
    }

    SUBCASE("it beats sampled feasible points") {
        std::mt19937_64 eng(42);
        for (int i = 0; i < 200; ++i) {
            Vec y = project(inst.feasible_set, rand_vec(eng, inst.f.dimension, 2.0));
            CHECK(objective_at(inst, y) >= sol.objective - 1e-9);
        }
    }
}

TEST_CASE("warm and cold starts agree on strongly convex instances") {
    ProblemStream s = make_scenario(cfg("tv_lasso", 9));
    ProblemInstance a = sample(s, 1), b = sample(s, 2);
    ReferenceSolution cold_a = solve_instance(a, "forward_backward", 1e-11);
    ReferenceSolution warm_b = solve_instance(b, "forward_backward", 1e-11, &cold_a);
    ReferenceSolution cold_b = solve_instance(b, "forward_backward", 1e-11);
    CHECK((warm_b.x_star - cold_b.x_star).norm() <= 1e-9);
}

TEST_CASE("inequality oracle returns a full KKT point") {
    ProblemStream s = make_scenario(cfg("tv_inequality_qp", 11));
    for (long k : {1L, 7L, 21L}) {
        ProblemInstance inst = sample(s, k);
        ReferenceSolution sol = solve_instance(inst, "dual_ascent_ineq");
        REQUIRE(sol.p_star);
        const Mat& A = inst.linear_ineq->A;
        const Vec& b = inst.linear_ineq->b;
        Vec slack = b - A * sol.x_star;
        CHECK(slack.minCoeff() >= -1e-9);                       // primal feasible
        CHECK(sol.p_star->minCoeff() >= -1e-10);                // dual feasible
        for (Eigen::Index i = 0; i < slack.size(); ++i)         // complementary
            CHECK(std::abs((*sol.p_star)[i] * slack[i]) <= 1e-8);
        Vec grad = inst.f.Q * sol.x_star + inst.f.q + A.transpose() * *sol.p_star;
        CHECK(grad.norm() <= 1e-8);                             // stationary
        // The drifting center is built to keep the first constraint active.
        CHECK((*sol.p_star)[0] > 1e-3);
    }
}

TEST_CASE("equality oracle is feasible, stationary, and minimum-norm in the dual") {
    ScenarioConfig c = cfg("tv_equality_qp", 13);
    ProblemStream s = make_scenario(c);
    ProblemInstance inst = sample(s, 4);
    ReferenceSolution sol = solve_instance(inst, "dual_ascent_eq");
    REQUIRE(sol.p_star);
    const Mat& A = inst.linear_eq->A;
    CHECK((A * sol.x_star - inst.linear_eq->b).norm() <= 1e-9);
    CHECK((inst.f.Q * sol.x_star + inst.f.q + A.transpose() * *sol.p_star).norm() <= 1e-8);

    // Duplicated constraint rows: the minimum-norm multiplier splits evenly.
    ScenarioConfig cd = c;
    cd.params["rank_deficient"] = 1;
    ProblemInstance dinst = sample(make_scenario(cd), 1);
    ReferenceSolution dsol = solve_instance(dinst, "dual_ascent_eq");
    REQUIRE(dsol.p_star);
    CHECK((*dsol.p_star)[0] == doctest::Approx((*dsol.p_star)[1]).epsilon(1e-8));
    CHECK((dinst.linear_eq->A * dsol.x_star - dinst.linear_eq->b).norm() <= 1e-9);
}

TEST_CASE("consensus oracle solves the coupled stationarity system") {
    for (const char* family : {"tv_admm_consensus", "localization_lite"}) {
        ProblemStream s = make_scenario(cfg(family, 17));
        ProblemInstance inst = sample(s, 2);
        ReferenceSolution sol = solve_instance(inst, "admm");
        REQUIRE(sol.z_star);
        REQUIRE(sol.p_star);
        const Mat& A = inst.admm->A;
        const Mat& B = inst.admm->B;
        CHECK((A * sol.x_star + B * *sol.z_star - inst.admm->c).norm() <= 1e-8);
        CHECK((inst.f.Q * sol.x_star + inst.f.q + A.transpose() * *sol.p_star).norm() <= 1e-7);
        CHECK((inst.g->Q * *sol.z_star + inst.g->q + B.transpose() * *sol.p_star).norm() <= 1e-7);
        // x = z consensus and the matched objective split.
        CHECK((sol.x_star - *sol.z_star).norm() <= 1e-8);
        CHECK(sol.objective ==
              doctest::Approx(eval(inst.f, sol.x_star) + eval(*inst.g, *sol.z_star)).epsilon(1e-12));
    }
}

TEST_CASE("solution trajectories are deterministic and expose the primal path") {
    ProblemStream s = make_scenario(cfg("moving_quadratic", 19, 15));
    auto t1 = solution_trajectory(s, "projected_gradient");
    auto t2 = solution_trajectory(s, "projected_gradient");
    REQUIRE(t1.size() == 16);
    REQUIRE(t2.size() == 16);
    for (std::size_t i = 0; i < t1.size(); ++i)
        CHECK((t1[i].x_star - t2[i].x_star).norm() == 0.0);
    auto path = primal_trajectory(t1);
    REQUIRE(path.size() == 16);
    for (std::size_t i = 0; i < t1.size(); ++i) CHECK((path[i] - t1[i].x_star).norm() == 0.0);
}

TEST_CASE("oracle rejects unknown families and bad tolerances") {
    ProblemStream s = make_scenario(cfg("static_quadratic", 1));
    ProblemInstance inst = sample(s, 1);
    CHECK_THROWS_AS(solve_instance(inst, "gradient_descent"), parameter_error);
    CHECK_THROWS_AS(solve_instance(inst, "projected_gradient", 0.0), parameter_error);
    CHECK_THROWS_AS(solve_instance(inst, "dual_ascent_ineq"), parameter_error);
    CHECK_THROWS_AS(solve_instance(inst, "admm"), parameter_error);
}
