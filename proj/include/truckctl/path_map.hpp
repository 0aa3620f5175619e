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
#include <vector>

#include <Eigen/Core>

namespace truckctl {

/// A recorded route point in the planar east/north frame.
struct Waypoint {
  double x = 0.0;         // m
  double y = 0.0;         // m
  double heading = 0.0;   // rad, (-pi, pi]
  double altitude = 0.0;  // m
};

struct PathSample {
  double s = 0.0;  // arc length, m
  Waypoint point;
  double curvature = 0.0;  // signed, positive for left turns, 1/m
};

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

/// Result of projecting a vehicle pose onto the path.
///
/// `rho` is positive when the vehicle is to the left of the path tangent and
/// `theta` is the vehicle heading minus the path heading, wrapped to (-pi, pi].
struct PathProjection {
  double s = 0.0;
  double rho = 0.0;
  double theta = 0.0;
  double curvature = 0.0;  // signed
  double slope = 0.0;
};

/// Wraps an angle to (-pi, pi].
double WrapAngle(double angle);

/// Arc-length indexed reference path with uniform sample spacing.
///
/// Immutable once built. All lookups clamp `s` to [0, total_length()], and
/// altitude, curvature and heading are linearly interpolated between samples.
class PathMap {
 public:
  /// Resamples `waypoints` at uniform arc length close to `spacing`. The
  /// effective spacing is total_length / (n - 1) so that the last sample sits
  /// exactly on the path end. Input headings are ignored and recomputed from
  /// the tangent; curvature comes from the circle through each sample and its
  /// two neighbours, with the end samples copying their neighbour.
  ///
  /// Throws Error{kTooFewWaypoints} for fewer than 3 waypoints and
  /// Error{kDegenerateSegment} when two consecutive waypoints coincide.
  static PathMap Build(std::span<const Waypoint> waypoints, double spacing);

  /// Wraps already-uniform samples (s_0 = 0, constant spacing). Used for
  /// analytic test paths whose geometry must not be re-estimated.
  static PathMap FromSamples(std::vector<PathSample> samples);

  const std::vector<PathSample>& samples() const { return samples_; }
  double total_length() const { return samples_.back().s; }
  double sample_spacing() const { return spacing_; }
  std::size_t size() const { return samples_.size(); }

  double AltitudeAt(double s) const;

  /// Road slope from a centred altitude difference over +-delta_s.
  double SlopeAt(double s, double delta_s) const;

  /// Absolute curvature |kappa(s)|.
  double CurvatureAt(double s) const;
  double SignedCurvatureAt(double s) const;
  double HeadingAt(double s) const;
  Eigen::Vector2d PositionAt(double s) const;

  /// Global projection: nearest sample over the whole path, refined by a
  /// quadratic fit of the squared distance through the neighbouring samples.
  /// Throws Error{kAmbiguousProjection} when a non-adjacent sample ties with
  /// the nearest one within 1e-6 m.
  PathProjection Project(const Pose2& pose, double slope_window = 20.0) const;

  /// Same refinement, but the search is restricted to samples within
  /// `window` metres of `s_hint`. No ambiguity check is made.
  PathProjection ProjectNear(const Pose2& pose, double s_hint, double window,
                             double slope_window = 20.0) const;

 private:
  PathMap(std::vector<PathSample> samples, double spacing)
      : samples_(std::move(samples)), spacing_(spacing) {}

  // Segment index and fraction for a clamped arc length.
  std::pair<std::size_t, double> Locate(double s) const;
  PathProjection Refine(const Pose2& pose, std::size_t nearest,
                        double slope_window) const;

  std::vector<PathSample> samples_;
  double spacing_ = 1.0;
};

/// Reads `x_m,y_m,heading_rad,altitude_m` rows (header line required).
std::vector<Waypoint> ReadWaypointFile(const std::filesystem::path& file);
void WriteWaypointFile(const std::filesystem::path& file,
                       std::span<const Waypoint> waypoints);

}  // namespace truckctl
