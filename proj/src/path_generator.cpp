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

#include "truckctl/path_generator.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "truckctl/errors.hpp"

namespace truckctl {
namespace {

constexpr double kDegToRad = M_PI / 180.0;

[[noreturn]] void Fail(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::kInvalidSpec,
              "line " + std::to_string(line_no) + ": " + what);
}

// Pose at arc length t into a segment that starts at `start`.
Waypoint Advance(const Waypoint& start, const PathSegment& seg, double t) {
  Waypoint out;
  const double h0 = start.heading;
  if (seg.kind == PathSegment::Kind::kStraight) {
    out.x = start.x + t * std::cos(h0);
    out.y = start.y + t * std::sin(h0);
    out.heading = h0;
  } else {
    const double k = (seg.angle >= 0.0 ? 1.0 : -1.0) / seg.radius;
    const double h = h0 + k * t;
    out.x = start.x + (std::sin(h) - std::sin(h0)) / k;
    out.y = start.y - (std::cos(h) - std::cos(h0)) / k;
    out.heading = h;
  }
  out.altitude = start.altitude + seg.grade * t;
  return out;
}

}  // namespace

double PathSegment::ArcLength() const {
  return kind == Kind::kStraight ? length : radius * std::abs(angle);
}

PathSpec ParsePathSpec(std::string_view text) {
  PathSpec spec;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream words(line);
    std::string directive;
    if (!(words >> directive)) continue;

    std::vector<double> args;
    std::string token;
    while (words >> token) {
      try {
        std::size_t used = 0;
        args.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        Fail(line_no, "not a number: '" + token + "'");
      }
    }

    if (directive == "start") {
      if (args.size() != 4) Fail(line_no, "start needs x y heading_deg altitude");
      spec.start = {args[0], args[1], WrapAngle(args[2] * kDegToRad), args[3]};
    } else if (directive == "spacing") {
      if (args.size() != 1 || !(args[0] > 0.0)) {
        Fail(line_no, "spacing needs one positive value");
      }
      spec.spacing = args[0];
    } else if (directive == "straight") {
      if (args.empty() || args.size() > 2 || !(args[0] > 0.0)) {
        Fail(line_no, "straight needs a positive length and optional grade");
      }
      PathSegment seg;
      seg.kind = PathSegment::Kind::kStraight;
      seg.length = args[0];
      seg.grade = args.size() == 2 ? args[1] : 0.0;
      spec.segments.push_back(seg);
    } else if (directive == "arc") {
      if (args.size() < 2 || args.size() > 3 || !(args[0] > 0.0) ||
          args[1] == 0.0) {
        Fail(line_no, "arc needs a positive radius, non-zero angle, optional grade");
      }
      PathSegment seg;
      seg.kind = PathSegment::Kind::kArc;
      seg.radius = args[0];
      seg.angle = args[1] * kDegToRad;
      seg.grade = args.size() == 3 ? args[2] : 0.0;
      spec.segments.push_back(seg);
    } else {
      Fail(line_no, "unknown directive '" + directive + "'");
    }
    if (!spec.segments.empty() && std::abs(spec.segments.back().grade) >= 1.0) {
      Fail(line_no, "grade must be a fraction in (-1, 1)");
    }
  }
  if (spec.segments.empty()) {
    throw Error(ErrorCode::kInvalidSpec, "no segments");
  }
  return spec;
}

PathSpec ReadPathSpec(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParsePathSpec(buffer.str());
}

std::vector<Waypoint> GeneratePath(const PathSpec& spec) {
  if (spec.segments.empty()) {
    throw Error(ErrorCode::kInvalidSpec, "no segments");
  }
  if (!(spec.spacing > 0.0)) {
    throw Error(ErrorCode::kInvalidSpec, "spacing must be positive");
  }

  std::vector<Waypoint> starts{spec.start};
  std::vector<double> offsets{0.0};
  for (const PathSegment& seg : spec.segments) {
    starts.push_back(Advance(starts.back(), seg, seg.ArcLength()));
    offsets.push_back(offsets.back() + seg.ArcLength());
  }
  const double total = offsets.back();

  std::vector<Waypoint> out;
  std::size_t seg = 0;
  auto emit = [&](double s) {
    while (seg + 1 < spec.segments.size() && offsets[seg + 1] < s) ++seg;
    Waypoint w = Advance(starts[seg], spec.segments[seg], s - offsets[seg]);
    w.heading = WrapAngle(w.heading);
    out.push_back(w);
  };
  const auto whole = static_cast<std::size_t>(std::floor(total / spec.spacing + 1e-9));
  for (std::size_t k = 0; k <= whole; ++k) {
    emit(std::min(total, spec.spacing * static_cast<double>(k)));
  }
  if (total - spec.spacing * static_cast<double>(whole) > 1e-6) emit(total);
  return out;
}

}  // namespace truckctl
