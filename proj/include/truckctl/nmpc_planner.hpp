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

#pragma once

#include <vector>

#include <Eigen/Core>

#include "truckctl/longitudinal_model.hpp"
#include "truckctl/path_map.hpp"

namespace truckctl {

struct NmpcConfig {
  double horizon = 10.0;  // s
  int steps = 20;         // N
  int kmax = 10;          // GMRES iterations per step
  double zeta = 10.0;     // 1/s
  double h_fd = 1e-6;
  double u_max = 4.5;      // N/kg
  double a_lat_max = 0.5;  // m/s^2
  double v_ref = 11.11;    // m/s
  double v_lim = 13.89;    // m/s
  double gamma = 0.3;      // road adhesion
  double m_ta = 0.0;       // kg, propulsive-axle mass; 0 keeps u_max as given
  double delta_s = 20.0;   // m
  double w1 = 30.0;
  double w2 = 2.5;
  double w3 = 1.0;
  double w4 = 1.0;
  double w5 = 2.5;
  double w_slk = 0.25;
  // The speed reference ramps linearly to zero over the last stop_distance
  // metres of the path. Zero disables the ramp.
  double stop_distance = 40.0;  // m
  double exp_clamp = 50.0;
  int warm_start_iterations = 50;

  void Validate() const;
  double step() const { return horizon / steps; }
  int unknowns() const { return 3 * steps; }
};

/// u_max = gamma M_ta g / m_total.
double TractionLimit(double gamma, double m_ta, double m_total,
                     double gravity = kGravity);

/// (u^2 + u_slk^2 - u_max^2) / 2.
double ConstraintResidual(double u, double u_slk, double u_max);

struct CostBreakdown {
  double j1 = 0.0;
  double j2 = 0.0;
  double j3 = 0.0;
  double j4 = 0.0;
  double j5 = 0.0;
  double j_slk = 0.0;

  double total() const { return j1 + j2 + j3 + j4 + j5 - j_slk; }
};

/// Everything the horizon model needs besides the decision variables. The
/// path is borrowed and must outlive the problem.
struct NmpcProblem {
  NmpcConfig cfg;
  LongitudinalParams vehicle;  // controller model
  const PathMap* path = nullptr;
  int gear = 12;

  double effective_u_max() const;
  /// Speed reference at arc length s, including the end-of-path ramp.
  double VelocityReference(double s) const;
  double VelocityReferenceSlope(double s) const;
};

struct StateRate {
  double s_dot = 0.0;
  double v_dot = 0.0;
};

/// Horizon model: s_dot = v, v_dot = u - k_d v^2 - g sin(beta) - Crr g cos(beta).
StateRate PlannerDynamics(const NmpcProblem& prob, const LongitudinalState& x,
                          double u);

/// Stage cost for acceleration `a` (the model v_dot) and slack `u_slk`.
CostBreakdown StageCost(const NmpcProblem& prob, const LongitudinalState& x,
                        double a, double u_slk);

/// Stage Hamiltonian H = J + lambda' f + mu C.
double Hamiltonian(const NmpcProblem& prob, const LongitudinalState& x,
                   const Eigen::Vector2d& lambda, double u, double u_slk,
                   double mu);

struct HamiltonianGradient {
  double h_u = 0.0;
  double h_uslk = 0.0;
  double h_s = 0.0;
  double h_v = 0.0;
};

/// Analytic partial derivatives of Hamiltonian(). Derivatives of slope and
/// curvature along s are central differences with step delta_s / 2.
HamiltonianGradient HamiltonianGradients(const NmpcProblem& prob,
                                         const LongitudinalState& x,
                                         const Eigen::Vector2d& lambda,
                                         double u, double u_slk, double mu);

struct NmpcSolverState {
  Eigen::VectorXd U;      // [u, u_slk, mu] per stage
  Eigen::VectorXd U_dot;  // last solution of the continuation equation
  double last_solve_time = 0.0;
  double residual_norm = 0.0;
};

/// Stacked optimality conditions [H_u, H_uslk, C] per stage, horizon states
/// by explicit Euler, costates backward from lambda_N = 0.
Eigen::VectorXd OptimalityResidual(const NmpcProblem& prob,
                                   const Eigen::VectorXd& U,
                                   const LongitudinalState& x);

/// Predicted horizon states x_0 .. x_N for the inputs in U.
std::vector<LongitudinalState> PredictHorizon(const NmpcProblem& prob,
                                              const Eigen::VectorXd& U,
                                              const LongitudinalState& x);

/// One continuation update U += U_dot dt, where U_dot solves
/// F_U U_dot = -zeta F - F_x x_dot by forward-difference GMRES. `x_dot` is
/// the measured state rate. residual_norm is ||F|| of the updated U at the
/// state x + x_dot dt it was advanced to. Throws Error{kNonFiniteResidual}.
void CgmresStep(const NmpcProblem& prob, NmpcSolverState& solver,
                const LongitudinalState& x, const Eigen::Vector2d& x_dot,
                double dt);

/// Initial guess u = 0, u_slk = u_max, mu = w_slk / u_max per stage.
Eigen::VectorXd InitialGuess(const NmpcProblem& prob);

/// Damped Newton-GMRES iterations on F(U, x) = 0 with backtracking.
void RefineSolution(const NmpcProblem& prob, NmpcSolverState& solver,
                    const LongitudinalState& x, int iterations, int krylov);

struct PlanOutput {
  double u_cmd = 0.0;       // N/kg, clamped to +-u_max
  double v_next_ref = 0.0;  // m/s, first predicted horizon speed
  double u_slk = 0.0;
  double mu = 0.0;
  double residual_norm = 0.0;
  double constraint_violation = 0.0;  // max_i |u^2 + u_slk^2 - u_max^2|
  CostBreakdown cost;                 // first stage
};

class NmpcPlanner {
 public:
  NmpcPlanner(NmpcConfig cfg, LongitudinalParams vehicle, const PathMap& path);

  /// Warm start at the initial state.
  void Initialize(const LongitudinalState& x, int gear);
  bool initialized() const { return initialized_; }
  /// Replaces the solver state, for example to resume a saved run. Throws
  /// Error{kInvalidArgument} when U does not have 3 N entries.
  void RestoreSolver(NmpcSolverState state);

  /// One continuation step of length dt at time t.
  PlanOutput Plan(const LongitudinalState& x, int gear, double dt, double t);

  const NmpcSolverState& solver() const { return solver_; }
  const NmpcProblem& problem() const { return problem_; }

 private:
  NmpcProblem problem_;
  NmpcSolverState solver_;
  bool initialized_ = false;
};

}  // namespace truckctl
