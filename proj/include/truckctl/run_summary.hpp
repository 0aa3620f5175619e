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

#include <filesystem>
#include <span>
#include <string>

#include "truckctl/sim_harness.hpp"

namespace truckctl {

struct RunSummary {
  double max_abs_rho = 0.0;        // m
  double rms_rho = 0.0;            // m
  double max_abs_theta = 0.0;      // rad
  double max_abs_alpha_rate = 0.0;  // rad/s, from consecutive rows
  double max_abs_u = 0.0;          // N/kg
  double max_v = 0.0;              // m/s
  double max_lateral_accel = 0.0;  // m/s^2, v^2 f_curv
  double duration = 0.0;           // s, last row time
  std::size_t rows = 0;
  bool completed = false;
  std::string abort_reason;
  double wall_time = 0.0;  // s
};

/// One pass over the rows. Completion, abort reason and wall time are copied
/// from the arguments because the log does not record them.
RunSummary Summarize(std::span<const LogRow> rows, bool completed,
                     const std::string& abort_reason, double wall_time);
RunSummary Summarize(const SimLog& log);

/// Flat "key = value" text.
std::string FormatSummary(const RunSummary& summary);
void WriteSummary(const std::filesystem::path& file, const RunSummary& summary);

}  // namespace truckctl
