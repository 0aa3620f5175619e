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

#include "truckctl/sim_harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <utility>

#include "truckctl/errors.hpp"
#include "truckctl/nmpc_planner.hpp"
#include "truckctl/rlqr_controller.hpp"

namespace truckctl {
namespace {

using Column = std::pair<std::string_view, double LogRow::*>;

const std::vector<Column>& ColumnTable() {
  static const std::vector<Column> table = {
      {"t", &LogRow::t},
      {"x", &LogRow::x},
      {"y", &LogRow::y},
      {"heading", &LogRow::heading},
      {"v", &LogRow::v},
      {"y_dot", &LogRow::y_dot},
      {"psi_dot", &LogRow::psi_dot},
      {"s_est", &LogRow::s_est},
      {"gear", &LogRow::gear},
      {"u_cmd", &LogRow::u_cmd},
      {"v_ref_cmd", &LogRow::v_ref_cmd},
      {"throttle", &LogRow::throttle},
      {"brake", &LogRow::brake},
      {"alpha", &LogRow::alpha},
      {"alpha_cmd", &LogRow::alpha_cmd},
      {"rho", &LogRow::rho},
      {"theta", &LogRow::theta},
      {"beta", &LogRow::beta},
      {"f_curv", &LogRow::f_curv},
      {"altitude", &LogRow::altitude},
      {"residual_norm", &LogRow::residual_norm},
      {"c_viol", &LogRow::c_viol},
      {"u_slk", &LogRow::u_slk},
      {"mu", &LogRow::mu},
      {"k1", &LogRow::k1},
      {"k2", &LogRow::k2},
      {"k3", &LogRow::k3},
      {"k4", &LogRow::k4},
      {"robust_residual", &LogRow::robust_residual},
      {"j1", &LogRow::j1},
      {"j2", &LogRow::j2},
      {"j3", &LogRow::j3},
      {"j4", &LogRow::j4},
      {"j5", &LogRow::j5},
      {"j_slk", &LogRow::j_slk},
  };
  return table;
}

PlantState Advance(const PlantState& s, const PlantRate& r, double h) {
  PlantState out = s;
  out.x += h * r.x;
  out.y += h * r.y;
  out.heading += h * r.heading;
  out.v += h * r.v;
  out.y_dot += h * r.y_dot;
  out.psi_dot += h * r.psi_dot;
  out.s_est += h * r.s_est;
  return out;
}

bool Finite(const PlantState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.heading) &&
         std::isfinite(s.v) && std::isfinite(s.y_dot) &&
         std::isfinite(s.psi_dot) && std::isfinite(s.s_est);
}

long long TicksPer(double period, double step, std::string_view key) {
  const double ratio = period / step;
  const long long ticks = std::llround(ratio);
  if (ticks < 1 || std::abs(ratio - static_cast<double>(ticks)) > 1e-6) {
    throw Error(ErrorCode::kConfigError,
                "'" + std::string(key) +
                    "': must be an integer multiple of sim.plant_step");
  }
  return ticks;
}

}  // namespace

PlantParams MakePlantParams(const ScenarioConfig& cfg) {
  PlantParams p;
  p.longitudinal = cfg.longitudinal;
  p.longitudinal.payload = cfg.plant_payload;
  p.lateral = cfg.lateral;
  p.lateral.m1 = cfg.longitudinal.m1;
  p.lateral.gravity = cfg.longitudinal.gravity;
  p.lateral.payload = cfg.plant_payload;
  p.variant = cfg.plant_variant;
  p.slope_window = cfg.nmpc.delta_s;
  p.projection_window = cfg.projection_window;
  return p;
}

PlantRate PlantDerivative(const PlantParams& p, const PlantState& state,
                          double throttle_force, double brake_force,
                          double alpha, const PathMap& path) {
  const PathProjection proj = path.ProjectNear(
      state.pose(), state.s_est, p.projection_window, p.slope_window);

  PlantRate rate;
  const LongitudinalRate lon = LongitudinalDerivative(
      p.longitudinal, {state.s_est, state.v}, throttle_force - brake_force,
      proj.slope);
  rate.v = (state.v <= 0.0 && lon.v_dot < 0.0) ? 0.0 : lon.v_dot;

  const LateralSystem sys = ContinuousMatrices(p.lateral, state.v, p.variant);
  const Eigen::Vector2d lat(state.y_dot, state.psi_dot);
  const Eigen::Vector2d acc =
      sys.F.topLeftCorner<2, 2>() * lat + sys.G.head<2>() * alpha;
  rate.y_dot = acc(0);
  rate.psi_dot = acc(1);

  const double c = std::cos(state.heading);
  const double s = std::sin(state.heading);
  rate.x = state.v * c - state.y_dot * s;
  rate.y = state.v * s + state.y_dot * c;
  rate.heading = state.psi_dot;

  const double denom = std::max(1.0 - proj.curvature * proj.rho, 0.1);
  rate.s_est = (state.v * std::cos(proj.theta) -
                state.y_dot * std::sin(proj.theta)) /
               denom;
  return rate;
}

PlantState PlantStep(const PlantParams& p, const PlantState& state,
                     double throttle_force, double brake_force, double alpha,
                     const PathMap& path, double dt) {
  auto f = [&](const PlantState& s) {
    return PlantDerivative(p, s, throttle_force, brake_force, alpha, path);
  };
  const PlantRate k1 = f(state);
  const PlantRate k2 = f(Advance(state, k1, 0.5 * dt));
  const PlantRate k3 = f(Advance(state, k2, 0.5 * dt));
  const PlantRate k4 = f(Advance(state, k3, dt));
  PlantRate sum;
  sum.x = k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x;
  sum.y = k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y;
  sum.heading = k1.heading + 2.0 * k2.heading + 2.0 * k3.heading + k4.heading;
  sum.v = k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v;
  sum.y_dot = k1.y_dot + 2.0 * k2.y_dot + 2.0 * k3.y_dot + k4.y_dot;
  sum.psi_dot = k1.psi_dot + 2.0 * k2.psi_dot + 2.0 * k3.psi_dot + k4.psi_dot;
  sum.s_est = k1.s_est + 2.0 * k2.s_est + 2.0 * k3.s_est + k4.s_est;
  PlantState out = Advance(state, sum, dt / 6.0);
  out.v = std::max(out.v, 0.0);
  return out;
}

PiOutput PiThrottleBrake(double v_ref, double v, const PiGains& gains,
                         double u_max, double dt, PiState& state,
                         double feedforward) {
  const double e = v_ref - v;
  const double command = feedforward + gains.kp * e + gains.ki * state.integral;
  PiOutput out;
  bool saturated = false;
  if (command >= 0.0) {
    const double raw = 100.0 * command / u_max;
    out.throttle = std::min(raw, 100.0);
    saturated = raw >= 100.0 && e > 0.0;
  } else {
    const double raw = -command * gains.k_b;
    out.brake = std::min(raw, 1.0);
    saturated = raw >= 1.0 && e < 0.0;
  }
  out.throttle_force = out.throttle / 100.0 * u_max;
  out.brake_force = out.brake * u_max;
  if (!saturated) state.integral += e * dt;
  return out;
}

const std::vector<std::string_view>& LogColumns() {
  static const std::vector<std::string_view> names = [] {
    std::vector<std::string_view> out;
    for (const Column& c : ColumnTable()) out.push_back(c.first);
    return out;
  }();
  return names;
}

void WriteSimLog(const std::filesystem::path& file, const SimLog& log) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + file.string());
  const auto& table = ColumnTable();
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i) out << ',';
    out << table[i].first;
  }
  out << '\n';
  char buf[32];
  for (const LogRow& row : log.rows) {
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (i) out << ',';
      const auto res = std::to_chars(buf, buf + sizeof(buf), row.*table[i].second);
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + file.string());
}

std::vector<LogRow> ReadSimLog(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + file.string());
  const auto& table = ColumnTable();
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kIoError, file.string() + " is empty");
  }
  std::string expected;
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i) expected += ',';
    expected += table[i].first;
  }
  if (line != expected) {
    throw Error(ErrorCode::kIoError, file.string() + " has an unexpected header");
  }
  std::vector<LogRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    LogRow row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t i = 0; i < table.size(); ++i) {
      double value = 0.0;
      const auto res = std::from_chars(p, end, value);
      const bool last = i + 1 == table.size();
      if (res.ec != std::errc() || (last ? res.ptr != end : *res.ptr != ',')) {
        throw Error(ErrorCode::kIoError, file.string() + ": bad value on line " +
                                             std::to_string(line_no));
      }
      row.*table[i].second = value;
      p = res.ptr + (last ? 0 : 1);
    }
    rows.push_back(row);
  }
  return rows;
}

SimLog RunScenario(const ScenarioConfig& cfg, const PathMap& path) {
  cfg.Validate();
  const auto wall_start = std::chrono::steady_clock::now();
  const PlantParams plant = MakePlantParams(cfg);
  const double dt = cfg.plant_step;
  const long long nmpc_every = TicksPer(cfg.nmpc_period, dt, "nmpc.period");
  const long long rlqr_every = TicksPer(cfg.rlqr_period, dt, "rlqr.period");
  const long long log_every = TicksPer(cfg.log_period, dt, "sim.log_period");

  NmpcPlanner planner(cfg.nmpc, cfg.longitudinal, path);
  const double u_max = planner.problem().effective_u_max();
  const RlqrConfig rlqr_cfg = cfg.BuildRlqrConfig();
  RlqrController regulator(rlqr_cfg);

  LateralParams model = cfg.lateral;
  model.m1 = cfg.longitudinal.m1;
  model.gravity = cfg.longitudinal.gravity;
  model.payload = cfg.controller_payload;
  UncertaintyModel unc;
  switch (cfg.uncertainty) {
    case UncertaintySource::kFieldExperiment:
      unc = UncertaintyModel::FieldExperiment();
      break;
    case UncertaintySource::kComputed:
      unc = UncertaintyMatrices(model, cfg.uncertainty_payload_min,
                                cfg.uncertainty_payload_max,
                                cfg.uncertainty_speed, cfg.rlqr_period,
                                cfg.controller_variant);
      break;
    case UncertaintySource::kNone:
      unc = UncertaintyModel::None(4, 1);
      break;
  }

  PlantState state;
  {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double offset =
        cfg.initial_offset + cfg.initial_offset_std * normal(rng);
    const Eigen::Vector2d p0 = path.PositionAt(0.0);
    const double h0 = path.HeadingAt(0.0);
    state.x = p0.x() - offset * std::sin(h0);
    state.y = p0.y() + offset * std::cos(h0);
    state.heading = h0;
    state.v = cfg.initial_speed;
    state.gear = cfg.gear;
  }

  SimLog log;
  PiState pi_state;
  PlanOutput plan;
  plan.v_next_ref = state.v;
  double alpha = 0.0;
  double alpha_cmd = 0.0;
  double robust_residual = 0.0;
  const double goal = path.total_length() - cfg.goal_tolerance;

  for (long long k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    const bool at_goal = state.s_est >= goal;
    const bool capped = t >= cfg.duration_cap - 1e-9;
    try {
      if (!at_goal && !capped) {
        if (k % nmpc_every == 0) {
          plan = planner.Plan({state.s_est, state.v}, state.gear,
                              cfg.nmpc_period, t);
        }
        if (k % rlqr_every == 0) {
          const PathProjection proj = path.ProjectNear(
              state.pose(), state.s_est, cfg.projection_window, cfg.nmpc.delta_s);
          const LateralSystem sys = Discretize(
              ContinuousMatrices(model, state.v, cfg.controller_variant),
              cfg.rlqr_period);
          const RlqrGain& gain = regulator.Update(sys.F_d, sys.G_d, unc);
          Eigen::Vector4d x(state.y_dot, state.psi_dot, proj.rho, proj.theta);
          if (cfg.zero_unmeasured) x.head<2>().setZero();
          alpha_cmd = regulator.Control(x);
          robust_residual = (unc.E_F + unc.E_G * gain.K).norm();
        }
        const double max_delta = cfg.steering_rate_limit * dt;
        alpha += std::clamp(alpha_cmd - alpha, -max_delta, max_delta);
        alpha = std::clamp(alpha, -cfg.steering_limit, cfg.steering_limit);
      }

      PiOutput pi;
      if (!at_goal && !capped) {
        pi = PiThrottleBrake(plan.v_next_ref, state.v, cfg.pi, u_max, dt,
                             pi_state, cfg.pi.feedforward ? plan.u_cmd : 0.0);
      }

      if (k % log_every == 0 || at_goal || capped) {
        const PathProjection proj = path.ProjectNear(
            state.pose(), state.s_est, cfg.projection_window, cfg.nmpc.delta_s);
        LogRow row;
        row.t = t;
        row.x = state.x;
        row.y = state.y;
        row.heading = state.heading;
        row.v = state.v;
        row.y_dot = state.y_dot;
        row.psi_dot = state.psi_dot;
        row.s_est = state.s_est;
        row.gear = state.gear;
        row.u_cmd = plan.u_cmd;
        row.v_ref_cmd = plan.v_next_ref;
        row.throttle = pi.throttle;
        row.brake = pi.brake;
        row.alpha = alpha;
        row.alpha_cmd = alpha_cmd;
        row.rho = proj.rho;
        row.theta = proj.theta;
        row.beta = proj.slope;
        row.f_curv = std::abs(proj.curvature);
        row.altitude = path.AltitudeAt(state.s_est);
        row.residual_norm = plan.residual_norm;
        row.c_viol = plan.constraint_violation;
        row.u_slk = plan.u_slk;
        row.mu = plan.mu;
        const Eigen::MatrixXd& K = regulator.gain().K;
        row.k1 = K(0, 0);
        row.k2 = K(0, 1);
        row.k3 = K(0, 2);
        row.k4 = K(0, 3);
        row.robust_residual = robust_residual;
        row.j1 = plan.cost.j1;
        row.j2 = plan.cost.j2;
        row.j3 = plan.cost.j3;
        row.j4 = plan.cost.j4;
        row.j5 = plan.cost.j5;
        row.j_slk = plan.cost.j_slk;
        log.rows.push_back(row);
      }

      if (at_goal) {
        log.completed = true;
        break;
      }
      if (capped) {
        log.abort_reason = "duration cap reached before the goal";
        break;
      }

      state = PlantStep(plant, state, pi.throttle_force, pi.brake_force, alpha,
                        path, dt);
      if (!Finite(state)) {
        throw Error(ErrorCode::kNonFiniteState,
                    "plant state diverged at t = " + std::to_string(t + dt));
      }
    } catch (const Error& err) {
      log.abort_reason = err.what();
      break;
    }
  }
  log.wall_time = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - wall_start)
                      .count();
  return log;
}

}  // namespace truckctl
