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

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "truckctl/lateral_model.hpp"
#include "truckctl/longitudinal_model.hpp"
#include "truckctl/path_map.hpp"
#include "truckctl/scenario_config.hpp"

namespace truckctl {

struct PlantState {
  double x = 0.0;        // m
  double y = 0.0;        // m
  double heading = 0.0;  // rad
  double v = 0.0;        // m/s
  double y_dot = 0.0;    // m/s, body-frame lateral velocity
  double psi_dot = 0.0;  // rad/s
  double s_est = 0.0;    // m
  int gear = 6;

  Pose2 pose() const { return {x, y, heading}; }
};

/// Time derivative of the continuous part of PlantState (gear excluded).
struct PlantRate {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double v = 0.0;
  double y_dot = 0.0;
  double psi_dot = 0.0;
  double s_est = 0.0;
};

struct PlantParams {
  LongitudinalParams longitudinal;  // payload = plant payload
  LateralParams lateral;            // payload = plant payload
  LateralVariant variant = LateralVariant::kAsPrinted;
  double slope_window = 20.0;       // m
  double projection_window = 30.0;  // m
};

PlantParams MakePlantParams(const ScenarioConfig& cfg);

/// Nonlinear plant: longitudinal state equation with traction
/// throttle_force - brake_force, single-track lateral dynamics at the current
/// speed, planar pose kinematics and the Frenet arc-length rate
/// s_dot = (v cos(theta) - y_dot sin(theta)) / (1 - kappa rho).
/// Braking never reverses the vehicle: v_dot is clipped at zero when v <= 0.
PlantRate PlantDerivative(const PlantParams& p, const PlantState& state,
                          double throttle_force, double brake_force,
                          double alpha, const PathMap& path);

/// Classic fourth-order Runge-Kutta step of PlantDerivative with constant
/// inputs.
PlantState PlantStep(const PlantParams& p, const PlantState& state,
                     double throttle_force, double brake_force, double alpha,
                     const PathMap& path, double dt);

struct PiState {
  double integral = 0.0;  // m
};

struct PiOutput {
  double throttle = 0.0;        // percent, 0..100
  double brake = 0.0;           // fraction, 0..1
  double throttle_force = 0.0;  // N/kg
  double brake_force = 0.0;     // N/kg
};

/// Low-level speed loop. The command c = feedforward + kp e + ki int(e) is
/// in N/kg with e = v_ref - v; throttle = clamp(100 c / u_max, 0, 100) when
/// c >= 0, otherwise brake = clamp(-c k_b, 0, 1). Forces are
/// throttle / 100 * u_max and brake * u_max. The integrator is frozen while
/// the active output saturates in the direction of the error.
PiOutput PiThrottleBrake(double v_ref, double v, const PiGains& gains,
                         double u_max, double dt, PiState& state,
                         double feedforward = 0.0);

/// One log row. Controller outputs hold their last tick value.
struct LogRow {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double v = 0.0;
  double y_dot = 0.0;
  double psi_dot = 0.0;
  double s_est = 0.0;
  double gear = 0.0;
  double u_cmd = 0.0;
  double v_ref_cmd = 0.0;
  double throttle = 0.0;
  double brake = 0.0;
  double alpha = 0.0;
  double alpha_cmd = 0.0;
  double rho = 0.0;
  double theta = 0.0;
  double beta = 0.0;
  double f_curv = 0.0;
  double altitude = 0.0;
  double residual_norm = 0.0;
  double c_viol = 0.0;
  double u_slk = 0.0;
  double mu = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
  double k4 = 0.0;
  double robust_residual = 0.0;  // ||E_F + E_G K||
  double j1 = 0.0;
  double j2 = 0.0;
  double j3 = 0.0;
  double j4 = 0.0;
  double j5 = 0.0;
  double j_slk = 0.0;
};

/// Column names in file order.
const std::vector<std::string_view>& LogColumns();

struct SimLog {
  std::vector<LogRow> rows;
  bool completed = false;
  std::string abort_reason;  // empty when completed
  double wall_time = 0.0;    // s, not written to the log file
};

void WriteSimLog(const std::filesystem::path& file, const SimLog& log);
/// Rows only; completion is not stored in the log file.
std::vector<LogRow> ReadSimLog(const std::filesystem::path& file);

/// Runs the closed loop until s_est reaches total_length - goal_tolerance or
/// the duration cap. Rows are logged every log_period and at the terminal
/// step. Controller and state failures end the run with completed = false
/// and the reason recorded; the last row is kept.
SimLog RunScenario(const ScenarioConfig& cfg, const PathMap& path);

}  // namespace truckctl
