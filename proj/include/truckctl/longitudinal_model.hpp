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

namespace truckctl {

inline constexpr double kGravity = 9.81;

/// Longitudinal vehicle constants. Aerodynamic, wheel and engine values are
/// typical heavy-truck defaults; masses and gear ratios are those of a
/// two-axle 6x4 tipper.
struct LongitudinalParams {
  double m1 = 16030.0;      // kg, unladen vehicle
  double payload = 35000.0;  // kg
  double drag_coefficient = 0.8;
  double air_density = 1.225;  // kg/m^3
  double frontal_area = 10.0;  // m^2
  double wheel_radius = 0.5;   // m
  double tire_slip = 0.05;     // fraction
  double omega_idle = 500.0;   // RPM
  double omega_redline = 2100.0;  // RPM
  double driveline_efficiency = 0.85;
  std::array<double, 12> gear_ratios = {11.32, 9.164, 7.194, 5.823,
                                        4.632, 3.750, 3.019, 2.444,
                                        1.918, 1.553, 1.235, 1.000};
  double gravity = kGravity;

  double effective_mass() const { return m1 + payload; }

  /// Drag force per unit speed squared, N/(m/s)^2.
  double drag_factor() const {
    return 0.5 * drag_coefficient * air_density * frontal_area;
  }

  /// Throws Error{kInvalidArgument} on non-positive constants or unordered
  /// gear ratios.
  void Validate() const;
};

struct LongitudinalState {
  double s = 0.0;  // m travelled along the path
  double v = 0.0;  // m/s, forward only
};

struct ResistanceForces {
  double rolling = 0.0;  // N
  double gravity = 0.0;  // N, negative downhill
  double drag = 0.0;     // N
  double total = 0.0;    // N
};

struct LongitudinalRate {
  double s_dot = 0.0;  // m/s
  double v_dot = 0.0;  // m/s^2
};

/// Speed-dependent rolling resistance coefficient 0.01 (1 + |v| / 576).
double RollingCoefficient(double v);

ResistanceForces ComputeResistance(const LongitudinalParams& p,
                                   double effective_mass, double v,
                                   double slope);

/// State equation with `traction` the specific traction force in N/kg
/// (positive throttle, negative brake). The effective mass normalises drag.
LongitudinalRate LongitudinalDerivative(const LongitudinalParams& p,
                                        const LongitudinalState& state,
                                        double traction, double slope);

/// Gear ratio for `gear` in 1..12; throws Error{kInvalidGear} otherwise.
double GearRatio(const LongitudinalParams& p, int gear);

/// Rotating-mass factor 1.04 + 0.0025 xi^2.
double RotatingMassFactor(double gear_ratio);

/// Engine speed in RPM clamped to [omega_idle, omega_redline].
double EngineSpeed(const LongitudinalParams& p, double v, int gear);

/// Engine power in kW needed to overcome `resistance` (N) while accelerating
/// at `accel`, using the effective mass for the inertial term.
double EnginePower(const LongitudinalParams& p, double v, double accel,
                   int gear, double resistance);

}  // namespace truckctl
