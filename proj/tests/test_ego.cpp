// Copyright 2026 The safetwin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "safetwin/common.hpp"
#include "safetwin/ego.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace safetwin
{
namespace
{

std::vector<Neighbor> leader_at_gap(const EgoState & ego, double gap, double v = 0.0)
{
  return {{"lead", ego.s + gap + 4.5, v, 0.0, 4.5, false}};
}

TEST(SenseLeader, RangeIsClosed)
{
  const auto ego = EgoState::at("ego", 100.0, 10.0);
  const SensorConfig cfg{150.0};
  EXPECT_FALSE(sense_leader(ego, leader_at_gap(ego, 160.0), cfg));
  const auto near = sense_leader(ego, leader_at_gap(ego, 149.9), cfg);
  ASSERT_TRUE(near);
  EXPECT_NEAR(near->gap, 149.9, 1e-12);
  EXPECT_TRUE(sense_leader(ego, leader_at_gap(ego, 150.0), cfg));
}

TEST(SenseLeader, IgnoresVehiclesBehindAndPicksNearest)
{
  const auto ego = EgoState::at("ego", 100.0, 10.0);
  std::vector<Neighbor> n{
    {"behind", 90.0, 10.0, 0.0, 4.5, false},
    {"far", 180.0, 10.0, 0.0, 4.5, false},
    {"stop:h", 150.0, 0.0, 0.0, 0.0, false},
  };
  const auto obs = sense_leader(ego, n, SensorConfig{150.0});
  ASSERT_TRUE(obs);
  EXPECT_EQ(obs->leader_id, "stop:h");
  EXPECT_DOUBLE_EQ(obs->gap, 50.0);
}

TEST(ReferenceSpeed, Cases)
{
  const auto p = IdmParams::with_desired_speed(20.0);
  EXPECT_DOUBLE_EQ(reference_speed(20.0, p, std::nullopt, 0.001), 20.0);
  // v0 = v makes the free term one; gap = s* makes the interaction term one
  auto q = IdmParams::with_desired_speed(10.0);
  const LeaderObservation obs{"l", 17.0, 10.0, 0.0};
  ASSERT_DOUBLE_EQ(idm_accel(10.0, q, obs), -2.0);
  EXPECT_DOUBLE_EQ(reference_speed(10.0, q, obs, 0.001), 10.0 - 0.002);
  EXPECT_DOUBLE_EQ(reference_speed(0.0, p, LeaderObservation{"l", 2.0, 0.0, 0.0}, 0.001), 0.0);
  EXPECT_DOUBLE_EQ(reference_speed(0.0, p, LeaderObservation{"l", 1.0, 0.0, 0.0}, 0.001), 0.0);
}

TEST(PedalController, ZeroErrorAndSaturation)
{
  const DriverParams d;
  PiState s;
  EXPECT_DOUBLE_EQ(pedal_controller(12.0, 12.0, s, d, 0.001), 0.0);
  EXPECT_DOUBLE_EQ(pedal_controller(30.0, 5.0, s, d, 0.001), -1.0);
  EXPECT_DOUBLE_EQ(s.integral, 0.0);  // held while saturated
  EXPECT_DOUBLE_EQ(pedal_controller(5.0, 30.0, s, d, 0.001), 1.0);
}

struct StepMetrics
{
  double overshoot;
  double settling;
};

StepMetrics step_response(const VehicleLimits & lim, const DriverParams & d)
{
  auto ego = EgoState::at("ego", 0.0, 20.0);
  const double target = 15.0, dt = 0.001;
  double v_min = ego.v, settled_at = 0.0;
  for (int k = 1; k <= 8000; ++k) {
    const double pedal = pedal_controller(ego.v, target, ego.pi, d, dt);
    ego = plant_step(ego, pedal, lim, d, dt);
    v_min = std::min(v_min, ego.v);
    if (std::abs(ego.v - target) > 0.02 * 5.0) {
      settled_at = k * dt;
    }
  }
  return {(target - v_min) / 5.0, settled_at};
}

TEST(PedalController, StepResponseWithDefaultGains)
{
  // 20 -> 15 m/s, 2 % settling band, dry road
  const auto m = step_response(VehicleLimits{}, DriverParams{});
  EXPECT_LT(m.overshoot, 0.05);
  EXPECT_LT(m.settling, 2.0);
}

TEST(PlantStep, FullBrakeSettlesAtFrictionLimit)
{
  for (double mu : {0.35, 0.4, 0.7}) {
    VehicleLimits lim;
    lim.mu = mu;
    auto ego = EgoState::at("ego", 0.0, 40.0);
    for (int k = 0; k < 3000; ++k) {
      ego = plant_step(ego, -1.0, lim, DriverParams{}, 0.001);
    }
    EXPECT_NEAR(-ego.a_realized, mu * 9.81, mu * 9.81 * 1e-3);
  }
}

TEST(PlantStep, FirstOrderLagTimeConstant)
{
  const DriverParams d;
  const VehicleLimits lim;
  auto ego = EgoState::at("ego", 0.0, 40.0);
  const double dt = 0.001, steady = lim.brake_authority();
  int crossed = -1;
  for (int k = 1; k <= 2000 && crossed < 0; ++k) {
    ego = plant_step(ego, -1.0, lim, d, dt);
    if (-ego.a_realized >= (1.0 - std::exp(-1.0)) * steady) {
      crossed = k;
    }
  }
  const int expected = static_cast<int>(std::lround(d.tau / dt));
  EXPECT_LE(std::abs(crossed - expected), 1);
}

TEST(PlantStep, RealizedAccelerationWithinFrictionBounds)
{
  for (double mu : {0.35, 0.4, 0.7, 1.0}) {
    VehicleLimits lim;
    lim.mu = mu;
    auto ego = EgoState::at("ego", 0.0, 15.0);
    for (int k = 0; k < 6000; ++k) {
      const double pedal = std::sin(k * 0.01) * 1.5;
      ego = plant_step(ego, pedal, lim, DriverParams{}, 0.001);
      ASSERT_GE(ego.a_realized, -mu * 9.81);
      ASSERT_LE(ego.a_realized, std::min(3.0, mu * 9.81));
      ASSERT_GE(ego.v, 0.0);
    }
  }
}

double stopping_distance(double mu)
{
  VehicleLimits lim;
  lim.mu = mu;
  auto ego = EgoState::at("ego", 0.0, 20.0);
  while (ego.v > 0.0) {
    ego = plant_step(ego, -1.0, lim, DriverParams{}, 0.001);
  }
  return ego.s;
}

TEST(PlantStep, StoppingDistanceFallsWithFriction)
{
  EXPECT_GT(stopping_distance(0.35), stopping_distance(0.4));
  EXPECT_GT(stopping_distance(0.4), stopping_distance(0.7));
}

TEST(PlantStep, ZeroPedalKeepsSpeed)
{
  auto ego = EgoState::at("ego", 0.0, 13.0);
  for (int k = 0; k < 1000; ++k) {
    ego = plant_step(ego, 0.0, VehicleLimits{}, DriverParams{}, 0.001);
  }
  EXPECT_EQ(ego.v, 13.0);
}

TEST(MacroAdvance, StepCountsAndDivisibility)
{
  const EgoConfig cfg;
  const auto ego = EgoState::at("ego", 0.0, 10.0);
  EXPECT_EQ(ego_macro_advance(ego, {}, cfg, 0.0, 0.1, 0.001).trace.size(), 100u);
  EXPECT_THROW(ego_macro_advance(ego, {}, cfg, 0.0, 0.1, 0.003), ConfigError);
  EXPECT_EQ(micro_steps_per_macro(0.1, 0.01), 10);
}

TEST(MacroAdvance, FreeRoadAccelerates)
{
  EgoConfig cfg;
  cfg.idm.desired_speed = 20.0;
  auto ego = EgoState::at("ego", 0.0, 10.0);
  for (int i = 0; i < 3; ++i) {
    ego = ego_macro_advance(ego, {}, cfg, 0.1 * i, 0.1, 0.001).state;
  }
  EXPECT_GT(ego.v, 10.0);
}

TEST(MacroAdvance, DesiredSpeedLeadsActualSpeed)
{
  // braking behind a stopped obstacle: v_ref crosses every level first
  EgoConfig cfg;
  cfg.idm.desired_speed = 15.0;
  auto ego = EgoState::at("ego", 0.0, 15.0);
  const std::vector<Neighbor> stop{{"stop:h", 80.0, 0.0, 0.0, 0.0, false}};
  std::vector<EgoTraceRow> trace;
  for (int i = 0; i < 150; ++i) {
    auto r = ego_macro_advance(ego, stop, cfg, 0.1 * i, 0.1, 0.001);
    ego = r.state;
    trace.insert(trace.end(), r.trace.begin(), r.trace.end());
  }
  EXPECT_LT(ego.s, 80.0);
  for (double level : {14.0, 12.0, 10.0, 6.0, 3.0}) {
    std::size_t ref = trace.size(), act = trace.size();
    for (std::size_t k = 0; k < trace.size(); ++k) {
      if (ref == trace.size() && trace[k].v_ref < level) {
        ref = k;
      }
      if (act == trace.size() && trace[k].v < level) {
        act = k;
      }
    }
    ASSERT_LT(act, trace.size()) << level;
    EXPECT_LT(ref, act) << level;
  }
}

TEST(MacroAdvance, BitIdenticalTraces)
{
  EgoConfig cfg;
  const std::vector<Neighbor> n{{"l", 60.0, 8.0, -1.0, 4.5, false}};
  const auto a = ego_macro_advance(EgoState::at("e", 0.0, 14.0), n, cfg, 0.0, 0.1, 0.001);
  const auto b = ego_macro_advance(EgoState::at("e", 0.0, 14.0), n, cfg, 0.0, 0.1, 0.001);
  EXPECT_EQ(ego_trace_csv(a.trace), ego_trace_csv(b.trace));
}

TEST(Config, Validation)
{
  VehicleLimits lim;
  lim.mu = 1.2;
  EXPECT_THROW(lim.validate(), ConfigError);
  DriverParams d;
  d.tau = 0;
  EXPECT_THROW(d.validate(), ConfigError);
  EXPECT_THROW(SensorConfig{0.0}.validate(), ConfigError);
  EXPECT_NO_THROW(EgoConfig{}.validate());
}

}  // namespace
}  // namespace safetwin
