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
#include <vector>

#include "truckctl/sim_harness.hpp"

namespace truckctl {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
};

struct Plot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Standalone SVG line chart with axes, ticks, labels and a legend.
std::string RenderSvg(const Plot& plot);

/// Writes the six run panels (altitude, throttle and brake, velocity,
/// steering, heading error, lateral displacement) into `dir` and returns the
/// file paths.
std::vector<std::filesystem::path> WriteRunPlots(
    const std::filesystem::path& dir, std::span<const LogRow> rows);

}  // namespace truckctl
