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
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "test_util.hpp"
#include "truckctl/errors.hpp"
#include "truckctl/run_summary.hpp"
#include "truckctl/sim_harness.hpp"

namespace truckctl {
namespace {

ScenarioConfig ShortScenario() {
  ScenarioConfig cfg;
  cfg.nmpc.v_ref = 5.556;
  cfg.nmpc.v_lim = 6.944;
  cfg.nmpc.w5 = 0.01;
  cfg.pi.k_b = 0.2;
  cfg.q_diag(2) = 1000.0;
  cfg.longitudinal.payload = 35000.0;
  cfg.duration_cap = 300.0;
  return cfg;
}

Eigen::Matrix<double, 7, 1> Pack(const PlantState& s) {
  Eigen::Matrix<double, 7, 1> out;
  out << s.x, s.y, s.heading, s.v, s.y_dot, s.psi_dot, s.s_est;
  return out;
}

TEST(PlantDerivativeTest, StraightEquilibrium) {
  const PathMap path = testing::StraightPath(200.0);
  const PlantParams p = MakePlantParams(ScenarioConfig());
  PlantState s;
  s.x = 50.0;
  s.v = 5.0;
  s.s_est = 50.0;
  const PlantRate r = PlantDerivative(p, s, 0.0, 0.0, 0.0, path);
  EXPECT_EQ(r.y_dot, 0.0);
  EXPECT_EQ(r.psi_dot, 0.0);
  EXPECT_EQ(r.heading, 0.0);
  EXPECT_EQ(r.y, 0.0);
  EXPECT_NEAR(r.s_est, 5.0, 1e-12);
}

TEST(PlantDerivativeTest, CoastingDissipates) {
  const PathMap path = testing::StraightPath(200.0);
  const PlantParams p = MakePlantParams(ScenarioConfig());
  PlantState s;
  s.x = 50.0;
  s.v = 10.0;
  s.s_est = 50.0;
  const double m = p.longitudinal.effective_mass();
  const ResistanceForces f = ComputeResistance(p.longitudinal, m, 10.0, 0.0);
  const PlantRate r = PlantDerivative(p, s, 0.0, 0.0, 0.0, path);
  EXPECT_NEAR(r.v, -(f.drag + f.rolling) / m, 1e-12);
  EXPECT_LT(r.v, 0.0);
}

TEST(PlantDerivativeTest, BrakingDoesNotReverse) {
  const PathMap path = testing::StraightPath(200.0);
  const PlantParams p = MakePlantParams(ScenarioConfig());
  PlantState s;
  s.x = 50.0;
  s.s_est = 50.0;
  const PlantState next = PlantStep(p, s, 0.0, 4.5, 0.0, path, 0.01);
  EXPECT_EQ(next.v, 0.0);
}

TEST(PlantStepTest, FourthOrderConvergence) {
  const PathMap path = testing::StraightPath(500.0, 0.02);
  const PlantParams p = MakePlantParams(ScenarioConfig());
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    PlantState s0;
    s0.x = 200.0 + 50.0 * u(rng);
    s0.y = 0.5 * u(rng);
    s0.heading = 0.05 * u(rng);
    s0.v = 6.0 + 3.0 * u(rng);
    s0.y_dot = 0.1 * u(rng);
    s0.psi_dot = 0.05 * u(rng);
    s0.s_est = s0.x;
    const double throttle = 1.0 + u(rng);
    const double alpha = 0.2 * u(rng);
    auto run = [&](double h, int n) {
      PlantState s = s0;
      for (int k = 0; k < n; ++k) s = PlantStep(p, s, throttle, 0.0, alpha, path, h);
      return Pack(s);
    };
    const double T = 0.4;
    const auto a = run(T / 4, 4);
    const auto b = run(T / 8, 8);
    const auto c = run(T / 16, 16);
    const double order = std::log2((a - b).norm() / (b - c).norm());
    EXPECT_GE(order, 3.9) << "trial " << trial;
  }
}

TEST(PlantStepTest, CoastingSpeedNonIncreasing) {
  const PathMap path = testing::StraightPath(2000.0);
  const PlantParams p = MakePlantParams(ScenarioConfig());
  PlantState s;
  s.v = 12.0;
  for (int k = 0; k < 3000; ++k) {
    const PlantState next = PlantStep(p, s, 0.0, 0.0, 0.0, path, 0.01);
    ASSERT_LE(next.v, s.v);
    s = next;
  }
}

TEST(PiTest, Examples) {
  const PiGains gains;
  PiState state;
  PiOutput out = PiThrottleBrake(5.0, 5.0, gains, 4.5, 0.01, state);
  EXPECT_EQ(out.throttle, 0.0);
  EXPECT_EQ(out.brake, 0.0);

  state = {};
  out = PiThrottleBrake(5.0, 4.0, gains, 4.5, 0.01, state);
  EXPECT_NEAR(out.throttle, 100.0 * 0.8 / 4.5, 1e-12);
  EXPECT_EQ(out.brake, 0.0);
  EXPECT_NEAR(out.throttle_force, 0.8, 1e-12);

  state = {};
  out = PiThrottleBrake(4.0, 5.0, gains, 4.5, 0.01, state);
  EXPECT_EQ(out.throttle, 0.0);
  EXPECT_NEAR(out.brake, 0.8 * gains.k_b, 1e-12);
  EXPECT_NEAR(out.brake_force, 0.8 * gains.k_b * 4.5, 1e-12);
}

TEST(PiTest, FeedforwardAddsToCommand) {
  const PiGains gains;
  PiState state;
  const PiOutput out = PiThrottleBrake(5.0, 5.0, gains, 4.5, 0.01, state, 1.5);
  EXPECT_NEAR(out.throttle_force, 1.5, 1e-12);
  state = {};
  const PiOutput brake = PiThrottleBrake(5.0, 5.0, gains, 4.5, 0.01, state, -2.0);
  EXPECT_NEAR(brake.brake, 2.0 * gains.k_b, 1e-12);
}

TEST(PiTest, IntegratorFreezesWhenSaturated) {
  const PiGains gains;
  PiState state;
  PiThrottleBrake(20.0, 0.0, gains, 4.5, 0.01, state);
  EXPECT_EQ(state.integral, 0.0);
  PiThrottleBrake(5.1, 5.0, gains, 4.5, 0.01, state);
  EXPECT_NEAR(state.integral, 0.001, 1e-12);
}

TEST(PiTest, StepResponseSettles) {
  const LongitudinalParams p;
  const PiGains gains;
  PiState pi;
  LongitudinalState x{0.0, 0.0};
  const double v_ref = 5.556;
  const double dt = 0.01;
  double worst_tail = 0.0;
  for (int k = 0; k < 18000; ++k) {
    const PiOutput out = PiThrottleBrake(v_ref, x.v, gains, 4.5, dt, pi);
    const LongitudinalRate r = LongitudinalDerivative(
        p, x, out.throttle_force - out.brake_force, 0.0);
    x.s += dt * r.s_dot;
    x.v = std::max(0.0, x.v + dt * r.v_dot);
    if (k >= 12000) worst_tail = std::max(worst_tail, std::abs(x.v - v_ref));
  }
  EXPECT_LE(worst_tail, 0.02 * v_ref);
  EXPECT_LE(std::abs(x.v - v_ref), 1e-3);
}

TEST(RunScenarioTest, StraightRoadRegression) {
  const PathMap path = testing::StraightPath(500.0);
  const SimLog log = RunScenario(ShortScenario(), path);
  ASSERT_TRUE(log.completed) << log.abort_reason;
  const RunSummary s = Summarize(log);
  EXPECT_LE(s.max_abs_rho, 0.05);
  EXPECT_GE(log.rows.back().s_est, path.total_length() - 2.0);
}

TEST(RunScenarioTest, DurationCapBoundsLog) {
  const PathMap path = testing::StraightPath(500.0);
  ScenarioConfig cfg = ShortScenario();
  cfg.duration_cap = 1.0;
  const SimLog log = RunScenario(cfg, path);
  EXPECT_FALSE(log.completed);
  EXPECT_FALSE(log.abort_reason.empty());
  ASSERT_EQ(log.rows.size(), 11u);
  EXPECT_EQ(log.rows.front().t, 0.0);
  EXPECT_NEAR(log.rows.back().t, 1.0, 1e-12);
  for (std::size_t i = 1; i < log.rows.size(); ++i) {
    EXPECT_NEAR(log.rows[i].t - log.rows[i - 1].t, 0.1, 1e-12);
  }
}

TEST(RunScenarioTest, CurvedRouteInvariants) {
  const PathMap path = PathMap::Build(
      GeneratePath(ParsePathSpec("straight 50 0.03\narc 45 90 0\n"
                                 "straight 40 -0.04\narc 60 -60 0\nstraight 60\n")),
      1.0);
  ScenarioConfig cfg = ShortScenario();
  cfg.initial_offset = 0.4;
  const SimLog log = RunScenario(cfg, path);
  ASSERT_TRUE(log.completed) << log.abort_reason;
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    const LogRow& r = log.rows[i];
    EXPECT_EQ(r.throttle * r.brake, 0.0);
    EXPECT_LE(std::abs(r.alpha), cfg.steering_limit);
    EXPECT_LE(std::abs(r.u_cmd), cfg.nmpc.u_max);
    EXPECT_GE(r.v, 0.0);
  }
  EXPECT_LE(Summarize(log).max_abs_alpha_rate, cfg.steering_rate_limit + 1e-9);
}

TEST(RunScenarioTest, Deterministic) {
  const PathMap path = testing::StraightPath(300.0);
  ScenarioConfig cfg = ShortScenario();
  cfg.initial_offset_std = 0.3;
  cfg.seed = 7;
  const SimLog a = RunScenario(cfg, path);
  const SimLog b = RunScenario(cfg, path);
  const auto dir = std::filesystem::temp_directory_path();
  WriteSimLog(dir / "truckctl_det_a.csv", a);
  WriteSimLog(dir / "truckctl_det_b.csv", b);
  std::ifstream fa(dir / "truckctl_det_a.csv"), fb(dir / "truckctl_det_b.csv");
  const std::string sa((std::istreambuf_iterator<char>(fa)), {});
  const std::string sb((std::istreambuf_iterator<char>(fb)), {});
  EXPECT_EQ(sa, sb);
  EXPECT_FALSE(sa.empty());
  cfg.seed = 8;
  const SimLog c = RunScenario(cfg, path);
  EXPECT_NE(c.rows.front().y, a.rows.front().y);
}

TEST(SimLogTest, RoundTripIsExact) {
  SimLog log;
  for (int i = 0; i < 5; ++i) {
    LogRow r;
    r.t = 0.1 * i;
    r.x = std::sqrt(2.0) * i;
    r.v = 1.0 / 3.0 + i;
    r.j5 = 1e-300 * i;
    r.rho = -0.1234567890123456789 * i;
    log.rows.push_back(r);
  }
  const auto file = std::filesystem::temp_directory_path() / "truckctl_log.csv";
  WriteSimLog(file, log);
  const std::vector<LogRow> back = ReadSimLog(file);
  ASSERT_EQ(back.size(), log.rows.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].t, log.rows[i].t);
    EXPECT_EQ(back[i].x, log.rows[i].x);
    EXPECT_EQ(back[i].v, log.rows[i].v);
    EXPECT_EQ(back[i].j5, log.rows[i].j5);
    EXPECT_EQ(back[i].rho, log.rows[i].rho);
  }
  std::ofstream(file) << "t,x\n0,1\n";
  EXPECT_THROW(ReadSimLog(file), Error);
  std::filesystem::remove(file);
}

}  // namespace
}  // namespace truckctl
