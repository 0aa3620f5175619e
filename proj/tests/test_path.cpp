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


#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "truckctl/errors.hpp"
#include "truckctl/path_generator.hpp"
#include "truckctl/path_map.hpp"

namespace truckctl {
namespace {

using testing::CircleWaypoints;
using testing::StraightPath;

PathMap AltitudeRamp(double rise_per_m) {
  std::vector<PathSample> samples;
  for (int i = 0; i <= 200; ++i) {
    PathSample p;
    p.s = i;
    p.point = {static_cast<double>(i), 0.0, 0.0, rise_per_m * i};
    samples.push_back(p);
  }
  return PathMap::FromSamples(samples);
}

TEST(PathMapBuild, CollinearPointsGiveZeroCurvature) {
  const std::vector<Waypoint> wp = {{0, 0, 0, 0}, {10, 0, 0, 0}, {20, 0, 0, 0}};
  const PathMap path = PathMap::Build(wp, 1.0);
  ASSERT_EQ(path.size(), 21u);
  for (const PathSample& s : path.samples()) EXPECT_EQ(s.curvature, 0.0);
  EXPECT_DOUBLE_EQ(path.total_length(), 20.0);
}

TEST(PathMapBuild, UniformSpacingAndIncreasingArcLength) {
  const PathMap path = PathMap::Build(CircleWaypoints(50.0, M_PI / 2, 40), 1.0);
  const auto& s = path.samples();
  EXPECT_EQ(s.front().s, 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) {
    EXPECT_NEAR(s[i].s - s[i - 1].s, path.sample_spacing(), 1e-9);
  }
  EXPECT_EQ(path.total_length(), s.back().s);
}

TEST(PathMapBuild, CircleCurvatureAndLength) {
  const PathMap path = PathMap::Build(CircleWaypoints(50.0, M_PI / 2, 200), 1.0);
  const auto& s = path.samples();
  for (std::size_t i = 1; i + 1 < s.size(); ++i) {
    EXPECT_NEAR(s[i].curvature, 0.02, 1e-3) << "sample " << i;
  }
  EXPECT_NEAR(path.total_length(), 50.0 * M_PI / 2, 1e-3 * 50.0 * M_PI / 2);
  EXPECT_NEAR(path.CurvatureAt(30.0), 0.02, 1e-3);
  EXPECT_NEAR(path.SignedCurvatureAt(30.0), 0.02, 1e-3);
}

TEST(PathMapBuild, ReversedCircleFlipsSignedCurvature) {
  std::vector<Waypoint> wp = CircleWaypoints(50.0, M_PI / 2, 200);
  std::vector<Waypoint> rev(wp.rbegin(), wp.rend());
  const PathMap path = PathMap::Build(rev, 1.0);
  EXPECT_NEAR(path.SignedCurvatureAt(30.0), -0.02, 1e-3);
  EXPECT_NEAR(path.CurvatureAt(30.0), 0.02, 1e-3);
}

TEST(PathMapBuild, NoisyCircleMeanCurvature) {
  double total = 0.0;
  int count = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.02);
    std::vector<Waypoint> wp = CircleWaypoints(50.0, M_PI, 80);
    for (Waypoint& w : wp) {
      w.x += noise(rng);
      w.y += noise(rng);
    }
    const PathMap path = PathMap::Build(wp, 1.0);
    const auto& s = path.samples();
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
      total += s[i].curvature;
      ++count;
    }
  }
  EXPECT_NEAR(total / count, 0.02, 0.1 * 0.02);
}

TEST(PathMapBuild, Errors) {
  const std::vector<Waypoint> two = {{0, 0, 0, 0}, {1, 0, 0, 0}};
  try {
    PathMap::Build(two, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewWaypoints);
  }
  const std::vector<Waypoint> dup = {{0, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}};
  try {
    PathMap::Build(dup, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateSegment);
  }
}

TEST(PathMapSlope, FlatRoadIsZero) {
  const PathMap path = AltitudeRamp(0.0);
  EXPECT_EQ(path.SlopeAt(100.0, 20.0), 0.0);
}

TEST(PathMapSlope, RampMatchesCentredDifference) {
  const PathMap path = AltitudeRamp(0.1);
  EXPECT_NEAR(path.SlopeAt(100.0, 20.0), std::atan(0.1), 1e-12);
  EXPECT_NEAR(path.SlopeAt(100.0, 20.0), 0.09967, 1e-5);
}

TEST(PathMapSlope, DescentIsExactNegation) {
  const PathMap up = AltitudeRamp(0.1);
  const PathMap down = AltitudeRamp(-0.1);
  for (double s : {5.0, 50.0, 100.0, 195.0}) {
    EXPECT_EQ(down.SlopeAt(s, 20.0), -up.SlopeAt(s, 20.0));
  }
}

TEST(PathMapLookup, ClampsBeyondEnds) {
  const PathMap path = PathMap::Build(CircleWaypoints(50.0, M_PI / 2, 200), 1.0);
  EXPECT_EQ(path.CurvatureAt(path.total_length() + 10.0),
            path.samples().back().curvature);
  EXPECT_EQ(path.CurvatureAt(-5.0), path.samples().front().curvature);
  EXPECT_EQ(StraightPath(100.0).CurvatureAt(50.0), 0.0);
}

TEST(PathMapProject, SignConventions) {
  const PathMap path = StraightPath(100.0);
  PathProjection p = path.Project({10.0, 1.0, 0.0});
  EXPECT_NEAR(p.s, 10.0, 1e-9);
  EXPECT_NEAR(p.rho, 1.0, 1e-9);
  EXPECT_NEAR(p.theta, 0.0, 1e-12);
  p = path.Project({10.0, 0.0, 0.1});
  EXPECT_NEAR(p.theta, 0.1, 1e-12);
  EXPECT_NEAR(p.rho, 0.0, 1e-9);
  p = path.Project({10.0, -2.0, 0.0});
  EXPECT_NEAR(p.rho, -2.0, 1e-9);
}

TEST(PathMapProject, PointsOnPathHaveZeroOffset) {
  const PathMap path = PathMap::Build(CircleWaypoints(50.0, M_PI / 2, 200), 1.0);
  for (const PathSample& s : path.samples()) {
    const PathProjection p =
        path.Project({s.point.x, s.point.y, s.point.heading});
    EXPECT_NEAR(p.rho, 0.0, 1e-6);
    EXPECT_NEAR(p.theta, 0.0, 1e-9);
    EXPECT_NEAR(p.s, s.s, 1e-6);
  }
}

TEST(PathMapProject, NearMatchesGlobal) {
  const PathMap path = PathMap::Build(CircleWaypoints(50.0, M_PI / 2, 200), 1.0);
  const Eigen::Vector2d c = path.PositionAt(40.0);
  const Pose2 pose{c.x() + 0.3, c.y() - 0.2, path.HeadingAt(40.0) + 0.05};
  const PathProjection a = path.Project(pose);
  const PathProjection b = path.ProjectNear(pose, 38.0, 30.0);
  EXPECT_NEAR(a.s, b.s, 1e-12);
  EXPECT_NEAR(a.rho, b.rho, 1e-12);
  EXPECT_NEAR(a.theta, b.theta, 1e-12);
}

TEST(PathMapProject, ClosedLoopIsAmbiguousAtCentre) {
  const PathMap path = PathMap::Build(CircleWaypoints(50.0, 2 * M_PI, 400), 1.0);
  try {
    path.Project({0.0, 50.0, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAmbiguousProjection);
  }
}

TEST(WrapAngleTest, Range) {
  EXPECT_NEAR(WrapAngle(3 * M_PI / 2), -M_PI / 2, 1e-12);
  EXPECT_NEAR(WrapAngle(-M_PI), M_PI, 1e-12);
  EXPECT_NEAR(WrapAngle(M_PI), M_PI, 1e-12);
}

TEST(WaypointFile, RoundTrip) {
  const auto file = std::filesystem::temp_directory_path() / "truckctl_wp.csv";
  const std::vector<Waypoint> wp = CircleWaypoints(30.0, 1.0, 10);
  WriteWaypointFile(file, wp);
  const std::vector<Waypoint> back = ReadWaypointFile(file);
  ASSERT_EQ(back.size(), wp.size());
  for (std::size_t i = 0; i < wp.size(); ++i) {
    EXPECT_EQ(back[i].x, wp[i].x);
    EXPECT_EQ(back[i].y, wp[i].y);
    EXPECT_EQ(back[i].heading, wp[i].heading);
    EXPECT_EQ(back[i].altitude, wp[i].altitude);
  }
  std::filesystem::remove(file);
}

TEST(PathGenerator, StraightHundredMetres) {
  const std::vector<Waypoint> wp = testing::StraightWaypoints(100.0);
  ASSERT_EQ(wp.size(), 101u);
  for (const Waypoint& w : wp) EXPECT_EQ(w.altitude, wp.front().altitude);
}

TEST(PathGenerator, QuarterArcCurvature) {
  const PathSpec spec = ParsePathSpec("arc 50 90\n");
  const PathMap path = PathMap::Build(GeneratePath(spec), 1.0);
  EXPECT_NEAR(path.CurvatureAt(path.total_length() / 2), 0.02, 1e-3);
  EXPECT_NEAR(path.total_length(), 25.0 * M_PI, 0.1);
}

TEST(PathGenerator, GradeRaisesAltitude) {
  const std::vector<Waypoint> wp = testing::StraightWaypoints(200.0, 0.06);
  EXPECT_NEAR(wp.back().altitude - wp.front().altitude, 12.0, 0.1);
}

TEST(PathGenerator, RoundTripGeometry) {
  const PathSpec spec = ParsePathSpec(
      "start 0 0 0 100\nspacing 1\nstraight 100 0.05\narc 60 -45 0\n");
  const PathMap path = PathMap::Build(GeneratePath(spec), 1.0);
  EXPECT_NEAR(path.SlopeAt(50.0, 20.0), std::atan(0.05), 1e-3);
  EXPECT_NEAR(path.SignedCurvatureAt(100.0 + 60.0 * M_PI / 8), -1.0 / 60.0,
              1e-3);
  EXPECT_NEAR(path.total_length(), 100.0 + 60.0 * M_PI / 4, 0.05);
}

TEST(PathGenerator, InvalidSpecNamesLine) {
  try {
    ParsePathSpec("straight 10\nwiggle 3\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidSpec);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
}

}  // namespace
}  // namespace truckctl
