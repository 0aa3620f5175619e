/*
 * Copyright 2026 The truckctl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_util.hpp"
#include "truckctl/errors.hpp"
#include "truckctl/nmpc_planner.hpp"

namespace truckctl {
namespace {

// Weights used by the robustness scenario; the engine-power exponent stays
// below the clamp over the operating range.
NmpcConfig ScenarioWeights() {
  NmpcConfig cfg;
  cfg.v_ref = 5.556;
  cfg.v_lim = 6.944;
  cfg.w5 = 0.01;
  return cfg;
}

TEST(TractionLimitTest, Examples) {
  EXPECT_NEAR(TractionLimit(0.3, 20000.0, 20000.0), 2.943, 1e-12);
  EXPECT_EQ(TractionLimit(0.0, 20000.0, 30000.0), 0.0);
  const PathMap path = testing::StraightPath(100.0);
  NmpcProblem prob;
  prob.path = &path;
  EXPECT_EQ(prob.effective_u_max(), 4.5);
  prob.cfg.m_ta = prob.vehicle.effective_mass();
  EXPECT_NEAR(prob.effective_u_max(), 0.3 * kGravity, 1e-12);
}

TEST(ConstraintResidualTest, Examples) {
  EXPECT_EQ(ConstraintResidual(0.0, 4.5, 4.5), 0.0);
  EXPECT_EQ(ConstraintResidual(4.5, 0.0, 4.5), 0.0);
  EXPECT_DOUBLE_EQ(ConstraintResidual(3.0, 0.0, 4.5), -5.625);
}

TEST(StageCostTest, ZeroErrorAndUnitExponentials) {
  const PathMap path = oracles::SmoothTestPath();
  NmpcProblem prob;
  prob.path = &path;
  prob.cfg.stop_distance = 0.0;
  const double s = 100.0;
  const double beta = path.SlopeAt(s, prob.cfg.delta_s);
  const CostBreakdown c = StageCost(prob, {s, prob.cfg.v_ref},
                                    -kGravity * std::sin(beta), 1.0);
  EXPECT_NEAR(c.j1, 0.0, 1e-20);
  EXPECT_EQ(c.j2, 0.0);
  EXPECT_DOUBLE_EQ(c.j_slk, prob.cfg.w_slk);

  const double kappa = path.CurvatureAt(s);
  const double v_lat = std::sqrt(prob.cfg.a_lat_max / kappa);
  EXPECT_NEAR(StageCost(prob, {s, v_lat}, 0.0, 0.0).j3, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(StageCost(prob, {s, prob.cfg.v_lim}, 0.0, 0.0).j4, 1.0);
}

TEST(StageCostTest, ExponentClamp) {
  const PathMap path = testing::StraightPath(100.0);
  NmpcProblem prob;
  prob.path = &path;
  prob.cfg.w4 = 100.0;
  EXPECT_EQ(StageCost(prob, {10.0, 30.0}, 0.0, 0.0).j4,
            std::exp(prob.cfg.exp_clamp));
}

TEST(HamiltonianGradientTest, HandExamples) {
  const PathMap path = testing::StraightPath(200.0);
  NmpcProblem prob;
  prob.path = &path;
  const HamiltonianGradient a =
      HamiltonianGradients(prob, {10.0, 3.0}, Eigen::Vector2d::Zero(), 1.0, 0.5,
                           0.5);
  EXPECT_DOUBLE_EQ(a.h_uslk, 0.0);

  prob.cfg.w1 = prob.cfg.w2 = prob.cfg.w3 = prob.cfg.w4 = prob.cfg.w5 = 0.0;
  const HamiltonianGradient b = HamiltonianGradients(
      prob, {10.0, 3.0}, Eigen::Vector2d(0.0, 1.0), 0.7, 2.0, 0.0);
  EXPECT_DOUBLE_EQ(b.h_u, 1.0);
}

TEST(HamiltonianGradientTest, FiniteDifferenceAgreement) {
  for (double w5 : {0.01, 0.1}) {
    NmpcConfig cfg = ScenarioWeights();
    cfg.w5 = w5;
    const oracles::GradientCheck r =
        oracles::CheckHamiltonianGradients(cfg, 1000, 17);
    EXPECT_EQ(r.evaluated, 1000);
    EXPECT_LE(r.worst_relative, 1e-6) << "w5 = " << w5;
  }
}

TEST(OptimalityResidualTest, SingleStageHandSolution) {
  const PathMap path = testing::StraightPath(200.0);
  NmpcProblem prob;
  prob.path = &path;
  prob.cfg.steps = 1;
  prob.cfg.w1 = prob.cfg.w2 = prob.cfg.w3 = prob.cfg.w4 = prob.cfg.w5 = 0.0;
  const Eigen::VectorXd F =
      OptimalityResidual(prob, InitialGuess(prob), {20.0, 4.0});
  EXPECT_EQ(F.norm(), 0.0);
  EXPECT_THROW(OptimalityResidual(prob, Eigen::VectorXd::Zero(2), {0.0, 0.0}),
               Error);
}

TEST(OptimalityResidualTest, LqToyOracleIsStationary) {
  const oracles::LqToy toy;
  const Eigen::VectorXd F =
      OptimalityResidual(toy.problem, toy.OracleSolution(), toy.x);
  EXPECT_LE(F.norm(), 1e-6);
  EXPECT_NEAR(toy.OracleInputs().front(), toy.OracleFirstInput(), 1e-12);
}

TEST(OptimalityResidualTest, ResidualGrowsLinearlyNearOracle) {
  const oracles::LqToy toy;
  const Eigen::VectorXd U = toy.OracleSolution();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d(0.0, 1.0);
  Eigen::VectorXd delta(U.size());
  for (int i = 0; i < delta.size(); ++i) delta(i) = d(rng);
  delta.normalize();
  auto r = [&](double t) {
    return OptimalityResidual(toy.problem, U + t * delta, toy.x).norm();
  };
  const double ratio_a = r(1e-3) / r(1e-4);
  const double ratio_b = r(1e-4) / r(1e-5);
  EXPECT_NEAR(ratio_a, 10.0, 0.1);
  EXPECT_NEAR(ratio_b, 10.0, 0.1);
}

TEST(CgmresStepTest, StaysAtLqOracle) {
  const oracles::LqToy toy;
  NmpcSolverState solver;
  solver.U = toy.OracleSolution();
  for (int k = 0; k < 100; ++k) {
    CgmresStep(toy.problem, solver, toy.x, Eigen::Vector2d::Zero(), 0.1);
    ASSERT_LE(solver.residual_norm, 1e-5) << "step " << k;
  }
}

TEST(CgmresStepTest, ConvergesToLqOracle) {
  const oracles::LqToy toy;
  NmpcSolverState solver;
  solver.U = InitialGuess(toy.problem);
  for (int k = 0; k < 30; ++k) {
    CgmresStep(toy.problem, solver, toy.x, Eigen::Vector2d::Zero(), 0.1);
  }
  EXPECT_NEAR(solver.U(0), toy.OracleFirstInput(), 1e-3);
  RefineSolution(toy.problem, solver, toy.x, 50, 60);
  EXPECT_NEAR(solver.U(0), toy.OracleFirstInput(), 1e-6);
}

TEST(CgmresStepTest, FrozenDecayRate) {
  const oracles::LqToy toy;
  const oracles::DecayProbe a =
      oracles::FrozenDecay(toy.problem, toy.x, 1.0, 0.1);
  EXPECT_GE(a.rate, 0.5 * toy.problem.cfg.zeta);

  const PathMap path = testing::StraightPath(1000.0, 0.03);
  NmpcProblem prob;
  prob.cfg = ScenarioWeights();
  prob.path = &path;
  prob.gear = 6;
  const oracles::DecayProbe b = oracles::FrozenDecay(prob, {100.0, 5.0}, 1.0, 0.1);
  EXPECT_GE(b.rate, 0.5 * prob.cfg.zeta);
}

TEST(CgmresStepTest, FrozenResidualFallsToDifferencingFloor) {
  const PathMap path = testing::StraightPath(1000.0);
  NmpcProblem prob;
  prob.cfg = ScenarioWeights();
  prob.path = &path;
  prob.gear = 6;
  const LongitudinalState x{100.0, 4.0};
  NmpcSolverState solver;
  solver.U = InitialGuess(prob);
  const double floor = 1e-7;
  double previous = OptimalityResidual(prob, solver.U, x).norm();
  for (int k = 0; k < 20; ++k) {
    CgmresStep(prob, solver, x, Eigen::Vector2d::Zero(), 0.1);
    if (previous > floor) {
      EXPECT_LE(solver.residual_norm, previous) << "step " << k;
    } else {
      EXPECT_LE(solver.residual_norm, floor) << "step " << k;
    }
    previous = solver.residual_norm;
  }
  EXPECT_LE(previous, floor);
}

TEST(CgmresStepTest, ZeroKrylovIsNoOp) {
  const oracles::LqToy toy;
  NmpcProblem prob = toy.problem;
  prob.cfg.kmax = 0;
  NmpcSolverState solver;
  solver.U = InitialGuess(prob);
  const Eigen::VectorXd before = solver.U;
  const double r0 = OptimalityResidual(prob, before, toy.x).norm();
  CgmresStep(prob, solver, toy.x, Eigen::Vector2d(4.0, 0.1), 0.1);
  EXPECT_EQ(solver.U, before);
  EXPECT_EQ(solver.residual_norm, r0);
}

TEST(CgmresStepTest, RejectsNonPositiveStep) {
  const oracles::LqToy toy;
  NmpcSolverState solver;
  solver.U = InitialGuess(toy.problem);
  EXPECT_THROW(CgmresStep(toy.problem, solver, toy.x, Eigen::Vector2d::Zero(), 0.0),
               Error);
}

TEST(CgmresStepTest, NonFiniteResidualIsReported) {
  const oracles::LqToy toy;
  NmpcSolverState solver;
  solver.U = InitialGuess(toy.problem);
  solver.U(0) = std::nan("");
  try {
    CgmresStep(toy.problem, solver, toy.x, Eigen::Vector2d::Zero(), 0.1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteResidual);
  }
}

// Runs the planner against its own horizon model.
std::vector<PlanOutput> RunPlanner(NmpcPlanner& planner, LongitudinalState x,
                                   int steps) {
  std::vector<PlanOutput> out;
  const double dt = 0.1;
  for (int k = 0; k < steps; ++k) {
    const PlanOutput plan = planner.Plan(x, 6, dt, k * dt);
    out.push_back(plan);
    const StateRate f = PlannerDynamics(planner.problem(), x, plan.u_cmd);
    x.s += dt * f.s_dot;
    x.v = std::max(0.0, x.v + dt * f.v_dot);
  }
  return out;
}

TEST(NmpcPlannerTest, SteadyStateForceBalance) {
  const PathMap path = testing::StraightPath(3000.0);
  NmpcPlanner planner(ScenarioWeights(), LongitudinalParams(), path);
  const double v_ref = planner.problem().cfg.v_ref;
  const std::vector<PlanOutput> plans = RunPlanner(planner, {50.0, v_ref}, 600);
  const PlanOutput& last = plans.back();
  const LongitudinalParams p;
  const double m = p.effective_mass();
  const double balance = ComputeResistance(p, m, v_ref, 0.0).total / m;
  EXPECT_LE(std::abs(last.u_cmd), balance + 0.05);
}

TEST(NmpcPlannerTest, DeceleratesNearGoal) {
  const PathMap path = testing::StraightPath(200.0);
  NmpcPlanner planner(ScenarioWeights(), LongitudinalParams(), path);
  const std::vector<PlanOutput> plans = RunPlanner(planner, {190.0, 4.0}, 20);
  for (std::size_t k = 1; k < plans.size(); ++k) {
    EXPECT_LT(plans[k].v_next_ref, plans[k - 1].v_next_ref) << "call " << k;
  }
}

TEST(NmpcPlannerTest, OutputIsClamped) {
  const PathMap path = testing::StraightPath(500.0);
  NmpcConfig cfg = ScenarioWeights();
  cfg.kmax = 0;
  NmpcPlanner planner(cfg, LongitudinalParams(), path);
  for (double u : {6.0, -7.5}) {
    NmpcSolverState state;
    state.U = InitialGuess(planner.problem());
    state.U(0) = u;
    planner.RestoreSolver(state);
    const PlanOutput plan = planner.Plan({10.0, 3.0}, 6, 0.1, 0.0);
    EXPECT_EQ(plan.u_cmd, std::copysign(4.5, u));
  }
}

TEST(NmpcPlannerTest, ConstraintHoldsWhenConverged) {
  const PathMap path = testing::StraightPath(1000.0, 0.04);
  NmpcPlanner planner(ScenarioWeights(), LongitudinalParams(), path);
  const std::vector<PlanOutput> plans = RunPlanner(planner, {100.0, 2.0}, 300);
  int checked = 0;
  for (const PlanOutput& p : plans) {
    if (p.residual_norm > 1e-4) continue;
    ++checked;
    EXPECT_LE(p.constraint_violation, 1e-3 * 4.5 * 4.5);
  }
  EXPECT_GT(checked, 0);
}

TEST(NmpcConfigTest, Validation) {
  NmpcConfig cfg;
  EXPECT_NO_THROW(cfg.Validate());
  cfg.w_slk = 0.0;
  EXPECT_THROW(cfg.Validate(), Error);
  cfg = NmpcConfig();
  cfg.steps = 0;
  EXPECT_THROW(cfg.Validate(), Error);
}

}  // namespace
}  // namespace truckctl
