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

#include "truckctl/longitudinal_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "truckctl/errors.hpp"

namespace truckctl {

void LongitudinalParams::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, what);
  };
  require(m1 > 0.0, "m1 must be positive");
  require(payload >= 0.0, "payload must be non-negative");
  require(drag_coefficient > 0.0 && air_density > 0.0 && frontal_area > 0.0,
          "aerodynamic constants must be positive");
  require(wheel_radius > 0.0, "wheel radius must be positive");
  require(tire_slip >= 0.0 && tire_slip < 1.0, "tire slip must be in [0, 1)");
  require(omega_idle > 0.0 && omega_redline > omega_idle,
          "engine speed limits must satisfy 0 < idle < redline");
  require(driveline_efficiency > 0.0 && driveline_efficiency <= 1.0,
          "driveline efficiency must be in (0, 1]");
  require(gravity > 0.0, "gravity must be positive");
  for (std::size_t i = 0; i < gear_ratios.size(); ++i) {
    require(gear_ratios[i] > 0.0, "gear ratios must be positive");
    if (i > 0) {
      require(gear_ratios[i] < gear_ratios[i - 1],
              "gear ratios must be strictly decreasing");
    }
  }
}

double RollingCoefficient(double v) { return 0.01 * (1.0 + std::abs(v) / 576.0); }

ResistanceForces ComputeResistance(const LongitudinalParams& p,
                                   double effective_mass, double v,
                                   double slope) {
  ResistanceForces f;
  f.rolling = RollingCoefficient(v) * effective_mass * p.gravity * std::cos(slope);
  f.gravity = effective_mass * p.gravity * std::sin(slope);
  f.drag = p.drag_factor() * v * v;
  f.total = f.rolling + f.gravity + f.drag;
  return f;
}

LongitudinalRate LongitudinalDerivative(const LongitudinalParams& p,
                                        const LongitudinalState& state,
                                        double traction, double slope) {
  const double v = state.v;
  LongitudinalRate rate;
  rate.s_dot = v;
  rate.v_dot = traction - p.drag_factor() * v * v / p.effective_mass() -
               p.gravity * std::sin(slope) -
               RollingCoefficient(v) * p.gravity * std::cos(slope);
  return rate;
}

double GearRatio(const LongitudinalParams& p, int gear) {
  if (gear < 1 || gear > static_cast<int>(p.gear_ratios.size())) {
    throw Error(ErrorCode::kInvalidGear,
                "gear " + std::to_string(gear) + " outside 1..12");
  }
  return p.gear_ratios[static_cast<std::size_t>(gear - 1)];
}

double RotatingMassFactor(double gear_ratio) {
  return 1.04 + 0.0025 * gear_ratio * gear_ratio;
}

double EngineSpeed(const LongitudinalParams& p, double v, int gear) {
  const double xi = GearRatio(p, gear);
  const double raw =
      1000.0 * v * xi / (120.0 * M_PI * p.wheel_radius * (1.0 - p.tire_slip));
  return std::min(std::max(raw, p.omega_idle), p.omega_redline);
}

double EnginePower(const LongitudinalParams& p, double v, double accel,
                   int gear, double resistance) {
  const double factor = RotatingMassFactor(GearRatio(p, gear));
  return (resistance + p.effective_mass() * accel * factor) /
         (3600.0 * p.driveline_efficiency) * v;
}

}  // namespace truckctl
