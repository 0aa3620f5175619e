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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "truckctl/lateral_model.hpp"
#include "truckctl/longitudinal_model.hpp"
#include "truckctl/nmpc_planner.hpp"
#include "truckctl/path_map.hpp"
#include "truckctl/rlqr_controller.hpp"

namespace truckctl {

/// Where the regulator's H, E_F, E_G come from.
enum class UncertaintySource {
  kFieldExperiment,  // the published matrices
  kComputed,         // UncertaintyMatrices() over the configured payload range
  kNone,             // nominal LQR
};

std::string_view UncertaintySourceName(UncertaintySource source);
UncertaintySource ParseUncertaintySource(std::string_view name);

struct PiGains {
  double kp = 0.8;   // (N/kg) per (m/s)
  double ki = 0.2;   // (N/kg) per m
  double k_b = 0.05;  // brake fraction per N/kg of negative command
  bool feedforward = true;  // add the planner traction command
};

struct ScenarioConfig {
  // Path source: exactly one of the two, relative paths resolve against the
  // configuration file's directory.
  std::string path_file;
  std::string path_spec;
  double path_spacing = 1.0;

  double plant_payload = 35000.0;       // kg
  double controller_payload = 12550.0;  // kg
  LateralVariant plant_variant = LateralVariant::kAsPrinted;
  LateralVariant controller_variant = LateralVariant::kAsPrinted;

  double plant_step = 0.01;   // s
  double nmpc_period = 0.1;   // s
  double rlqr_period = 0.1;   // s
  double log_period = 0.1;    // s
  double duration_cap = 1200.0;  // s
  double goal_tolerance = 2.0;   // m
  double steering_rate_limit = 0.6;  // rad/s
  double projection_window = 30.0;   // m
  double initial_speed = 0.0;        // m/s
  double initial_offset = 0.0;       // m, lateral, positive left
  double initial_offset_std = 0.0;   // m, seeded random addition
  std::uint64_t seed = 1;
  int gear = 6;
  PiGains pi;

  NmpcConfig nmpc;
  LongitudinalParams longitudinal;
  LateralParams lateral;

  Eigen::Vector4d q_diag{0.1, 0.1, 100.0, 15.0};
  double r = 10000.0;
  double mu = 1e9;
  double p0 = 1.0;  // P0 = p0 I
  double steering_limit = 0.3491;
  RlqrForm form = RlqrForm::kPenalized;
  UncertaintySource uncertainty = UncertaintySource::kFieldExperiment;
  double uncertainty_payload_min = 0.0;
  double uncertainty_payload_max = 35000.0;
  double uncertainty_speed = 5.56;
  bool zero_unmeasured = true;

  std::filesystem::path base_dir;  // directory of the loaded file

  RlqrConfig BuildRlqrConfig() const;
  /// Throws Error{kConfigError} naming the offending key.
  void Validate() const;
};

/// Parses a flat INI-style document with [section] headers and key = value
/// lines. Unknown sections or keys are errors.
ScenarioConfig ParseScenarioConfig(std::string_view text);
ScenarioConfig LoadScenarioConfig(const std::filesystem::path& file);

/// Applies a single "section.key=value" override.
void ApplyOverride(ScenarioConfig& cfg, std::string_view assignment);

/// Every recognised key as "section.key", in document order.
std::vector<std::string> ScenarioKeys();

/// Fully resolved configuration as "section.key = value" lines.
std::string DumpScenarioConfig(const ScenarioConfig& cfg);

/// Loads or generates the reference path described by the configuration.
/// Throws Error{kConfigError} unless exactly one path source is set.
PathMap LoadScenarioPath(const ScenarioConfig& cfg);

}  // namespace truckctl
