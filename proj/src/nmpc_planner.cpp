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

#include "truckctl/nmpc_planner.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "truckctl/errors.hpp"
#include "truckctl/gmres.hpp"

namespace truckctl {
namespace {

struct ClampedExp {
  double value = 0.0;
  bool active = true;  // false when the exponent was clamped
};

ClampedExp Exp(double arg, double clamp) {
  if (arg > clamp) return {std::exp(clamp), false};
  return {std::exp(arg), true};
}

struct PathLocal {
  double beta = 0.0;
  double dbeta = 0.0;
  double kappa = 0.0;
  double dkappa = 0.0;
};

PathLocal LocalGeometry(const NmpcProblem& prob, double s, bool derivatives) {
  const PathMap& path = *prob.path;
  const double ds = prob.cfg.delta_s;
  PathLocal out;
  out.beta = path.SlopeAt(s, ds);
  out.kappa = path.CurvatureAt(s);
  if (derivatives) {
    const double h = 0.5 * ds;
    out.dbeta = (path.SlopeAt(s + h, ds) - path.SlopeAt(s - h, ds)) / (2.0 * h);
    out.dkappa = (path.CurvatureAt(s + h) - path.CurvatureAt(s - h)) / (2.0 * h);
  }
  return out;
}

// Intermediate quantities shared by the cost, the Hamiltonian and its
// gradient. All forces are per unit effective mass.
struct StageTerms {
  double m = 0.0;
  double k_d = 0.0;
  double crr = 0.0;
  double dcrr = 0.0;
  double cosb = 0.0;
  double sinb = 0.0;
  double resistance = 0.0;  // k_d v^2 + Crr g cos(beta) + g sin(beta)
  double e1 = 0.0;          // a + g sin(beta)
  double xi_factor = 0.0;
  double power_scale = 0.0;  // m / (3600 eta)
  double power = 0.0;
};

StageTerms Terms(const NmpcProblem& prob, double v, double a,
                 const PathLocal& geo) {
  const LongitudinalParams& p = prob.vehicle;
  StageTerms t;
  t.m = p.effective_mass();
  t.k_d = p.drag_factor() / t.m;
  t.crr = RollingCoefficient(v);
  t.dcrr = 0.01 * (v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0)) / 576.0;
  t.cosb = std::cos(geo.beta);
  t.sinb = std::sin(geo.beta);
  t.resistance = t.k_d * v * v + t.crr * p.gravity * t.cosb + p.gravity * t.sinb;
  t.e1 = a + p.gravity * t.sinb;
  t.xi_factor = RotatingMassFactor(GearRatio(p, prob.gear));
  t.power_scale = t.m / (3600.0 * p.driveline_efficiency);
  t.power = t.power_scale * v * (t.resistance + t.xi_factor * a);
  return t;
}

CostBreakdown CostFromTerms(const NmpcProblem& prob, double v, double u_slk,
                            double s, const PathLocal& geo,
                            const StageTerms& t) {
  const NmpcConfig& c = prob.cfg;
  CostBreakdown cost;
  cost.j1 = c.w1 * 0.5 * t.e1 * t.e1;
  const double dv = v - prob.VelocityReference(s);
  cost.j2 = c.w2 * 0.5 * dv * dv;
  cost.j3 = Exp(c.w3 * (v * v * geo.kappa - c.a_lat_max), c.exp_clamp).value;
  cost.j4 = Exp(c.w4 * (v - c.v_lim), c.exp_clamp).value;
  cost.j5 = Exp(c.w5 * t.power, c.exp_clamp).value;
  cost.j_slk = c.w_slk * u_slk;
  return cost;
}

void ResidualCheck(const Eigen::VectorXd& F) {
  if (!F.allFinite()) {
    throw Error(ErrorCode::kNonFiniteResidual,
                "optimality residual is not finite");
  }
}

}  // namespace

void NmpcConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
  };
  require(horizon > 0.0, "nmpc horizon must be positive");
  require(steps > 0, "nmpc steps must be positive");
  require(kmax >= 0, "nmpc kmax must be non-negative");
  require(zeta > 0.0, "nmpc zeta must be positive");
  require(h_fd > 0.0, "nmpc h_fd must be positive");
  require(u_max > 0.0, "nmpc u_max must be positive");
  require(a_lat_max > 0.0, "nmpc a_lat_max must be positive");
  require(v_ref >= 0.0 && v_lim > 0.0, "nmpc speeds must be positive");
  require(gamma >= 0.0 && m_ta >= 0.0, "nmpc traction inputs must be >= 0");
  require(delta_s > 0.0, "nmpc delta_s must be positive");
  require(w1 >= 0.0 && w2 >= 0.0 && w3 >= 0.0 && w4 >= 0.0 && w5 >= 0.0,
          "nmpc weights must be non-negative");
  require(w_slk > 0.0, "nmpc w_slk must be positive");
  require(stop_distance >= 0.0, "nmpc stop_distance must be non-negative");
  require(exp_clamp > 0.0, "nmpc exp_clamp must be positive");
  require(warm_start_iterations >= 0, "nmpc warm-start count must be >= 0");
}

double TractionLimit(double gamma, double m_ta, double m_total,
                     double gravity) {
  if (!(m_total > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "total mass must be positive");
  }
  return gamma * m_ta * gravity / m_total;
}

double ConstraintResidual(double u, double u_slk, double u_max) {
  return 0.5 * (u * u + u_slk * u_slk - u_max * u_max);
}

double NmpcProblem::effective_u_max() const {
  if (cfg.m_ta > 0.0) {
    return TractionLimit(cfg.gamma, cfg.m_ta, vehicle.effective_mass(),
                         vehicle.gravity);
  }
  return cfg.u_max;
}

double NmpcProblem::VelocityReference(double s) const {
  if (cfg.stop_distance <= 0.0) return cfg.v_ref;
  const double remaining = path->total_length() - s;
  return cfg.v_ref * std::clamp(remaining / cfg.stop_distance, 0.0, 1.0);
}

double NmpcProblem::VelocityReferenceSlope(double s) const {
  if (cfg.stop_distance <= 0.0) return 0.0;
  const double remaining = path->total_length() - s;
  if (remaining <= 0.0 || remaining >= cfg.stop_distance) return 0.0;
  return -cfg.v_ref / cfg.stop_distance;
}

StateRate PlannerDynamics(const NmpcProblem& prob, const LongitudinalState& x,
                          double u) {
  const PathLocal geo = LocalGeometry(prob, x.s, false);
  const StageTerms t = Terms(prob, x.v, 0.0, geo);
  return {x.v, u - t.resistance};
}

CostBreakdown StageCost(const NmpcProblem& prob, const LongitudinalState& x,
                        double a, double u_slk) {
  const PathLocal geo = LocalGeometry(prob, x.s, false);
  const StageTerms t = Terms(prob, x.v, a, geo);
  return CostFromTerms(prob, x.v, u_slk, x.s, geo, t);
}

double Hamiltonian(const NmpcProblem& prob, const LongitudinalState& x,
                   const Eigen::Vector2d& lambda, double u, double u_slk,
                   double mu) {
  const PathLocal geo = LocalGeometry(prob, x.s, false);
  const StageTerms t0 = Terms(prob, x.v, 0.0, geo);
  const double a = u - t0.resistance;
  const StageTerms t = Terms(prob, x.v, a, geo);
  const CostBreakdown cost = CostFromTerms(prob, x.v, u_slk, x.s, geo, t);
  return cost.total() + lambda(0) * x.v + lambda(1) * a +
         mu * ConstraintResidual(u, u_slk, prob.effective_u_max());
}

HamiltonianGradient HamiltonianGradients(const NmpcProblem& prob,
                                         const LongitudinalState& x,
                                         const Eigen::Vector2d& lambda,
                                         double u, double u_slk, double mu) {
  const NmpcConfig& c = prob.cfg;
  const double g = prob.vehicle.gravity;
  const double v = x.v;
  const PathLocal geo = LocalGeometry(prob, x.s, true);
  const StageTerms t0 = Terms(prob, v, 0.0, geo);
  const double a = u - t0.resistance;
  const StageTerms t = Terms(prob, v, a, geo);

  // Partial derivatives of the specific resistance R(s, v).
  const double dR_dv = 2.0 * t.k_d * v + t.dcrr * g * t.cosb;
  const double dR_ds = (g * t.cosb - t.crr * g * t.sinb) * geo.dbeta;

  const ClampedExp j3 = Exp(c.w3 * (v * v * geo.kappa - c.a_lat_max), c.exp_clamp);
  const ClampedExp j4 = Exp(c.w4 * (v - c.v_lim), c.exp_clamp);
  const ClampedExp j5 = Exp(c.w5 * t.power, c.exp_clamp);
  const double g3 = j3.active ? j3.value * c.w3 : 0.0;
  const double g4 = j4.active ? j4.value * c.w4 : 0.0;
  const double g5 = j5.active ? j5.value * c.w5 : 0.0;

  // P = ps v (k u + (1 - k) R) with ps = m / (3600 eta), k = xi factor.
  const double k = t.xi_factor;
  const double dP_du = t.power_scale * v * k;
  const double dP_dv =
      t.power_scale * (k * u + (1.0 - k) * t.resistance + v * (1.0 - k) * dR_dv);
  const double dP_ds = t.power_scale * v * (1.0 - k) * dR_ds;

  // e1 = u - k_d v^2 - Crr g cos(beta).
  const double de1_dv = -2.0 * t.k_d * v - t.dcrr * g * t.cosb;
  const double de1_ds = t.crr * g * t.sinb * geo.dbeta;

  const double v_ref = prob.VelocityReference(x.s);
  const double dv_ref = prob.VelocityReferenceSlope(x.s);

  HamiltonianGradient out;
  out.h_u = c.w1 * t.e1 + g5 * dP_du + lambda(1) + mu * u;
  out.h_uslk = -c.w_slk + mu * u_slk;
  out.h_v = c.w1 * t.e1 * de1_dv + c.w2 * (v - v_ref) +
            g3 * 2.0 * v * geo.kappa + g4 + g5 * dP_dv + lambda(0) -
            lambda(1) * dR_dv;
  out.h_s = c.w1 * t.e1 * de1_ds - c.w2 * (v - v_ref) * dv_ref +
            g3 * v * v * geo.dkappa + g5 * dP_ds - lambda(1) * dR_ds;
  return out;
}

std::vector<LongitudinalState> PredictHorizon(const NmpcProblem& prob,
                                              const Eigen::VectorXd& U,
                                              const LongitudinalState& x) {
  const int N = prob.cfg.steps;
  const double dt = prob.cfg.step();
  std::vector<LongitudinalState> xs(static_cast<std::size_t>(N) + 1);
  xs[0] = x;
  for (int i = 0; i < N; ++i) {
    const StateRate f = PlannerDynamics(prob, xs[i], U(3 * i));
    xs[i + 1] = {xs[i].s + f.s_dot * dt, xs[i].v + f.v_dot * dt};
  }
  return xs;
}

Eigen::VectorXd OptimalityResidual(const NmpcProblem& prob,
                                   const Eigen::VectorXd& U,
                                   const LongitudinalState& x) {
  const int N = prob.cfg.steps;
  if (U.size() != 3 * N) {
    throw Error(ErrorCode::kInvalidArgument, "U must have length 3 N");
  }
  const double dt = prob.cfg.step();
  const double u_max = prob.effective_u_max();
  const std::vector<LongitudinalState> xs = PredictHorizon(prob, U, x);

  Eigen::VectorXd F(3 * N);
  Eigen::Vector2d lambda = Eigen::Vector2d::Zero();
  for (int i = N - 1; i >= 0; --i) {
    const double u = U(3 * i);
    const double u_slk = U(3 * i + 1);
    const double mu = U(3 * i + 2);
    const HamiltonianGradient grad =
        HamiltonianGradients(prob, xs[i], lambda, u, u_slk, mu);
    F(3 * i) = grad.h_u;
    F(3 * i + 1) = grad.h_uslk;
    F(3 * i + 2) = ConstraintResidual(u, u_slk, u_max);
    lambda += Eigen::Vector2d(grad.h_s, grad.h_v) * dt;
  }
  return F;
}

void CgmresStep(const NmpcProblem& prob, NmpcSolverState& solver,
                const LongitudinalState& x, const Eigen::Vector2d& x_dot,
                double dt) {
  if (!(dt > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "continuation step must be > 0");
  }
  const NmpcConfig& c = prob.cfg;
  const Eigen::VectorXd F0 = OptimalityResidual(prob, solver.U, x);
  ResidualCheck(F0);
  if (solver.U_dot.size() != solver.U.size()) {
    solver.U_dot = Eigen::VectorXd::Zero(solver.U.size());
  }
  if (c.kmax == 0) {
    solver.residual_norm = F0.norm();
    return;
  }

  const double h = c.h_fd;
  const LongitudinalState x_h{x.s + h * x_dot(0), x.v + h * x_dot(1)};
  const Eigen::VectorXd Fx = OptimalityResidual(prob, solver.U, x_h);
  const Eigen::VectorXd b = -c.zeta * F0 - (Fx - F0) / h;
  const LinearOperator apply = [&](const Eigen::VectorXd& w) {
    const Eigen::VectorXd Uw = solver.U + h * w;
    return Eigen::VectorXd((OptimalityResidual(prob, Uw, x_h) - Fx) / h);
  };
  const GmresResult sol = SolveGmres(apply, b, solver.U_dot, c.kmax);
  if (!sol.x.allFinite()) {
    throw Error(ErrorCode::kNonFiniteResidual, "GMRES update is not finite");
  }
  solver.U_dot = sol.x;
  solver.U += solver.U_dot * dt;
  const LongitudinalState x_next{x.s + dt * x_dot(0), x.v + dt * x_dot(1)};
  const Eigen::VectorXd F1 = OptimalityResidual(prob, solver.U, x_next);
  ResidualCheck(F1);
  solver.residual_norm = F1.norm();
}

Eigen::VectorXd InitialGuess(const NmpcProblem& prob) {
  const int N = prob.cfg.steps;
  const double u_max = prob.effective_u_max();
  Eigen::VectorXd U(3 * N);
  for (int i = 0; i < N; ++i) {
    U(3 * i) = 0.0;
    U(3 * i + 1) = u_max;
    U(3 * i + 2) = prob.cfg.w_slk / u_max;
  }
  return U;
}

void RefineSolution(const NmpcProblem& prob, NmpcSolverState& solver,
                    const LongitudinalState& x, int iterations, int krylov) {
  const double h = prob.cfg.h_fd;
  Eigen::VectorXd F = OptimalityResidual(prob, solver.U, x);
  ResidualCheck(F);
  double norm = F.norm();
  for (int it = 0; it < iterations && norm > 1e-12; ++it) {
    const LinearOperator apply = [&](const Eigen::VectorXd& w) {
      return Eigen::VectorXd(
          (OptimalityResidual(prob, solver.U + h * w, x) - F) / h);
    };
    const GmresResult sol =
        SolveGmres(apply, -F, Eigen::VectorXd::Zero(F.size()), krylov);
    if (!sol.x.allFinite()) break;
    double step = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 12; ++ls, step *= 0.5) {
      const Eigen::VectorXd trial = solver.U + step * sol.x;
      const Eigen::VectorXd F_trial = OptimalityResidual(prob, trial, x);
      if (F_trial.allFinite() && F_trial.norm() < norm) {
        solver.U = trial;
        F = F_trial;
        norm = F_trial.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
  }
  solver.residual_norm = norm;
}

NmpcPlanner::NmpcPlanner(NmpcConfig cfg, LongitudinalParams vehicle,
                         const PathMap& path) {
  cfg.Validate();
  vehicle.Validate();
  problem_.cfg = cfg;
  problem_.vehicle = vehicle;
  problem_.path = &path;
}

void NmpcPlanner::Initialize(const LongitudinalState& x, int gear) {
  problem_.gear = gear;
  solver_.U = InitialGuess(problem_);
  solver_.U_dot = Eigen::VectorXd::Zero(solver_.U.size());
  const int krylov = std::min(problem_.cfg.unknowns(), 30);
  RefineSolution(problem_, solver_, x, problem_.cfg.warm_start_iterations,
                 krylov);
  solver_.last_solve_time = 0.0;
  initialized_ = true;
}

void NmpcPlanner::RestoreSolver(NmpcSolverState state) {
  if (state.U.size() != problem_.cfg.unknowns()) {
    throw Error(ErrorCode::kInvalidArgument, "U must have length 3 N");
  }
  if (state.U_dot.size() != state.U.size()) {
    state.U_dot = Eigen::VectorXd::Zero(state.U.size());
  }
  solver_ = std::move(state);
  initialized_ = true;
}

PlanOutput NmpcPlanner::Plan(const LongitudinalState& x, int gear, double dt,
                             double t) {
  if (!initialized_) Initialize(x, gear);
  problem_.gear = gear;
  const StateRate f = PlannerDynamics(problem_, x, solver_.U(0));
  CgmresStep(problem_, solver_, x, Eigen::Vector2d(f.s_dot, f.v_dot), dt);
  solver_.last_solve_time = t;

  const double u_max = problem_.effective_u_max();
  PlanOutput out;
  out.u_cmd = std::clamp(solver_.U(0), -u_max, u_max);
  out.u_slk = solver_.U(1);
  out.mu = solver_.U(2);
  out.residual_norm = solver_.residual_norm;
  const std::vector<LongitudinalState> xs = PredictHorizon(problem_, solver_.U, x);
  out.v_next_ref = xs[1].v;
  for (int i = 0; i < problem_.cfg.steps; ++i) {
    out.constraint_violation =
        std::max(out.constraint_violation,
                 2.0 * std::abs(ConstraintResidual(solver_.U(3 * i),
                                                   solver_.U(3 * i + 1), u_max)));
  }
  const StateRate f1 = PlannerDynamics(problem_, x, solver_.U(0));
  out.cost = StageCost(problem_, x, f1.v_dot, solver_.U(1));
  return out;
}

}  // namespace truckctl
