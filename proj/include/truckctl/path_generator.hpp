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
#include <string_view>
#include <vector>

#include "truckctl/path_map.hpp"

namespace truckctl {

// Synthetic route made of straights and circular arcs, each with a constant
// grade (rise over run, 0.06 == 6 %).
struct PathSegment {
  enum class Kind { kStraight, kArc };
  Kind kind = Kind::kStraight;
  double length = 0.0;  // straight length, m (straights only)
  double radius = 0.0;  // m (arcs only)
  double angle = 0.0;   // rad, positive turns left (arcs only)
  double grade = 0.0;

  double ArcLength() const;
};

struct PathSpec {
  Waypoint start;
  std::vector<PathSegment> segments;
  double spacing = 1.0;
};

/// Parses a segment list. One directive per line, '#' starts a comment:
///
///   start <x_m> <y_m> <heading_deg> <altitude_m>
///   spacing <m>
///   straight <length_m> [grade]
///   arc <radius_m> <angle_deg> [grade]
///
/// Throws Error{kInvalidSpec} naming the offending line.
PathSpec ParsePathSpec(std::string_view text);
PathSpec ReadPathSpec(const std::filesystem::path& file);

/// Samples the route every `spec.spacing` metres of arc length; the path end
/// is always included.
std::vector<Waypoint> GeneratePath(const PathSpec& spec);

}  // namespace truckctl
