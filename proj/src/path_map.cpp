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

#include "truckctl/path_map.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "truckctl/errors.hpp"

namespace truckctl {
namespace {

constexpr double kTieTolerance = 1e-6;

bool IsFinite(const Waypoint& w) {
  return std::isfinite(w.x) && std::isfinite(w.y) &&
         std::isfinite(w.heading) && std::isfinite(w.altitude);
}

// Signed curvature of the circle through three points.
double CircumscribedCurvature(const Eigen::Vector2d& p0,
                              const Eigen::Vector2d& p1,
                              const Eigen::Vector2d& p2) {
  const Eigen::Vector2d a = p1 - p0;
  const Eigen::Vector2d b = p2 - p1;
  const Eigen::Vector2d c = p2 - p0;
  const double denom = a.norm() * b.norm() * c.norm();
  if (denom <= 0.0) return 0.0;
  const double cross = a.x() * b.y() - a.y() * b.x();
  return 2.0 * cross / denom;
}

double ParseDouble(std::string_view text, std::size_t line_no) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kIoError, "waypoint file line " +
                                         std::to_string(line_no) +
                                         ": cannot parse '" +
                                         std::string(text) + "'");
  }
  return value;
}

}  // namespace

double WrapAngle(double angle) {
  double wrapped = std::remainder(angle, 2.0 * M_PI);
  if (wrapped <= -M_PI) wrapped += 2.0 * M_PI;
  return wrapped;
}

PathMap PathMap::Build(std::span<const Waypoint> waypoints, double spacing) {
  if (waypoints.size() < 3) {
    throw Error(ErrorCode::kTooFewWaypoints,
                "need at least 3 waypoints, got " +
                    std::to_string(waypoints.size()));
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw Error(ErrorCode::kInvalidArgument, "spacing must be positive");
  }

  std::vector<double> cumulative(waypoints.size(), 0.0);
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    if (!IsFinite(waypoints[i])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "waypoint " + std::to_string(i) + " is not finite");
    }
    if (i == 0) continue;
    const double len = std::hypot(waypoints[i].x - waypoints[i - 1].x,
                                  waypoints[i].y - waypoints[i - 1].y);
    if (len <= 1e-9) {
      throw Error(ErrorCode::kDegenerateSegment,
                  "waypoints " + std::to_string(i - 1) + " and " +
                      std::to_string(i) + " coincide");
    }
    cumulative[i] = cumulative[i - 1] + len;
  }

  const double length = cumulative.back();
  const auto count = static_cast<std::size_t>(
      std::max<long long>(3, std::llround(length / spacing) + 1));
  const double step = length / static_cast<double>(count - 1);

  std::vector<PathSample> samples(count);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = (k + 1 == count) ? length : step * static_cast<double>(k);
    while (seg + 2 < waypoints.size() && cumulative[seg + 1] < s) ++seg;
    const double seg_len = cumulative[seg + 1] - cumulative[seg];
    const double t = std::clamp((s - cumulative[seg]) / seg_len, 0.0, 1.0);
    const Waypoint& a = waypoints[seg];
    const Waypoint& b = waypoints[seg + 1];
    samples[k].s = s;
    samples[k].point.x = a.x + t * (b.x - a.x);
    samples[k].point.y = a.y + t * (b.y - a.y);
    samples[k].point.altitude = a.altitude + t * (b.altitude - a.altitude);
  }

  auto pos = [&](std::size_t i) {
    return Eigen::Vector2d(samples[i].point.x, samples[i].point.y);
  };
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t lo = (k == 0) ? 0 : k - 1;
    const std::size_t hi = (k + 1 == count) ? k : k + 1;
    const Eigen::Vector2d d = pos(hi) - pos(lo);
    samples[k].point.heading = WrapAngle(std::atan2(d.y(), d.x()));
  }
  for (std::size_t k = 1; k + 1 < count; ++k) {
    samples[k].curvature =
        CircumscribedCurvature(pos(k - 1), pos(k), pos(k + 1));
  }
  samples.front().curvature = samples[1].curvature;
  samples.back().curvature = samples[count - 2].curvature;

  return PathMap(std::move(samples), step);
}

PathMap PathMap::FromSamples(std::vector<PathSample> samples) {
  if (samples.size() < 3) {
    throw Error(ErrorCode::kTooFewWaypoints, "need at least 3 samples");
  }
  if (samples.front().s != 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "first sample must have s = 0");
  }
  const double step = samples[1].s - samples[0].s;
  if (!(step > 0.0)) {
    throw Error(ErrorCode::kDegenerateSegment, "non-increasing arc length");
  }
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const double expected = step * static_cast<double>(k);
    if (!(samples[k].s > samples[k - 1].s) ||
        std::abs(samples[k].s - expected) > 1e-9 * std::max(1.0, expected)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "samples must be uniformly spaced (index " +
                      std::to_string(k) + ")");
    }
    if (!IsFinite(samples[k].point) || !std::isfinite(samples[k].curvature)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite sample");
    }
  }
  return PathMap(std::move(samples), step);
}

std::pair<std::size_t, double> PathMap::Locate(double s) const {
  const double clamped = std::clamp(s, 0.0, total_length());
  const std::size_t last = samples_.size() - 1;
  auto index = static_cast<std::size_t>(clamped / spacing_);
  if (index >= last) return {last - 1, 1.0};
  const double t = (clamped - samples_[index].s) / spacing_;
  return {index, std::clamp(t, 0.0, 1.0)};
}

double PathMap::AltitudeAt(double s) const {
  const auto [i, t] = Locate(s);
  return samples_[i].point.altitude +
         t * (samples_[i + 1].point.altitude - samples_[i].point.altitude);
}

double PathMap::SlopeAt(double s, double delta_s) const {
  const double rise = AltitudeAt(s + delta_s) - AltitudeAt(s - delta_s);
  return std::atan(rise / (2.0 * delta_s));
}

double PathMap::SignedCurvatureAt(double s) const {
  const auto [i, t] = Locate(s);
  return samples_[i].curvature +
         t * (samples_[i + 1].curvature - samples_[i].curvature);
}

double PathMap::CurvatureAt(double s) const {
  return std::abs(SignedCurvatureAt(s));
}

double PathMap::HeadingAt(double s) const {
  const auto [i, t] = Locate(s);
  const double h0 = samples_[i].point.heading;
  const double dh = WrapAngle(samples_[i + 1].point.heading - h0);
  return WrapAngle(h0 + t * dh);
}

Eigen::Vector2d PathMap::PositionAt(double s) const {
  const auto [i, t] = Locate(s);
  const Waypoint& a = samples_[i].point;
  const Waypoint& b = samples_[i + 1].point;
  return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
}

PathProjection PathMap::Refine(const Pose2& pose, std::size_t nearest,
                               double slope_window) const {
  const std::size_t last = samples_.size() - 1;
  const std::size_t center = std::clamp<std::size_t>(nearest, 1, last - 1);
  auto dist2 = [&](std::size_t i) {
    const double dx = pose.x - samples_[i].point.x;
    const double dy = pose.y - samples_[i].point.y;
    return dx * dx + dy * dy;
  };
  const double dm = dist2(center - 1);
  const double d0 = dist2(center);
  const double dp = dist2(center + 1);
  const double curvature = dm - 2.0 * d0 + dp;
  double offset = 0.0;
  if (d0 == 0.0 && center == nearest) {
    offset = 0.0;
  } else if (curvature > 0.0) {
    offset = std::clamp(0.5 * (dm - dp) / curvature, -1.0, 1.0);
  } else {
    offset = (dm < dp) ? -1.0 : 1.0;
  }
  // A fit centred on an interior sample must not move off the nearest sample
  // by more than one spacing; at the ends the fit centre is shifted inwards.
  double s = samples_[center].s + offset * spacing_;
  if (nearest == 0 || nearest == last) {
    const double s_near = samples_[nearest].s;
    s = std::clamp(s, s_near - spacing_, s_near + spacing_);
  }
  s = std::clamp(s, 0.0, total_length());

  const Eigen::Vector2d foot = PositionAt(s);
  const double path_heading = HeadingAt(s);
  const double dx = pose.x - foot.x();
  const double dy = pose.y - foot.y();

  PathProjection out;
  out.s = s;
  out.rho = std::cos(path_heading) * dy - std::sin(path_heading) * dx;
  out.theta = WrapAngle(pose.heading - path_heading);
  out.curvature = SignedCurvatureAt(s);
  out.slope = SlopeAt(s, slope_window);
  return out;
}

PathProjection PathMap::Project(const Pose2& pose, double slope_window) const {
  if (!std::isfinite(pose.x) || !std::isfinite(pose.y) ||
      !std::isfinite(pose.heading)) {
    throw Error(ErrorCode::kInvalidArgument, "pose is not finite");
  }
  std::vector<double> dist(samples_.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    dist[i] = std::hypot(pose.x - samples_[i].point.x,
                         pose.y - samples_[i].point.y);
    if (dist[i] < dist[best]) best = i;
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const std::size_t gap = (i > best) ? i - best : best - i;
    if (gap >= 2 && dist[i] - dist[best] <= kTieTolerance) {
      throw Error(ErrorCode::kAmbiguousProjection,
                  "samples " + std::to_string(best) + " and " +
                      std::to_string(i) + " are equally close");
    }
  }
  return Refine(pose, best, slope_window);
}

PathProjection PathMap::ProjectNear(const Pose2& pose, double s_hint,
                                    double window, double slope_window) const {
  const auto lo = Locate(s_hint - window).first;
  const auto hi = std::min(samples_.size() - 1, Locate(s_hint + window).first + 1);
  std::size_t best = lo;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = lo; i <= hi; ++i) {
    const double dx = pose.x - samples_[i].point.x;
    const double dy = pose.y - samples_[i].point.y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return Refine(pose, best, slope_window);
}

std::vector<Waypoint> ReadWaypointFile(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open " + file.string());
  }
  std::vector<Waypoint> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!header_seen) {
      header_seen = true;
      if (line.find("x_m") == std::string::npos) {
        throw Error(ErrorCode::kIoError,
                    file.string() + ": missing header line");
      }
      continue;
    }
    std::array<double, 4> values{};
    std::size_t start = 0;
    for (std::size_t c = 0; c < 4; ++c) {
      const std::size_t comma = line.find(',', start);
      if ((c < 3) == (comma == std::string::npos)) {
        throw Error(ErrorCode::kIoError, file.string() + " line " +
                                             std::to_string(line_no) +
                                             ": expected 4 columns");
      }
      const std::size_t end = (c < 3) ? comma : line.size();
      values[c] = ParseDouble(
          std::string_view(line).substr(start, end - start), line_no);
      start = end + 1;
    }
    out.push_back({values[0], values[1], values[2], values[3]});
  }
  return out;
}

void WriteWaypointFile(const std::filesystem::path& file,
                       std::span<const Waypoint> waypoints) {
  std::ofstream out(file);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write " + file.string());
  }
  out.precision(17);
  out << "x_m,y_m,heading_rad,altitude_m\n";
  for (const Waypoint& w : waypoints) {
    out << w.x << ',' << w.y << ',' << w.heading << ',' << w.altitude << '\n';
  }
}

}  // namespace truckctl
