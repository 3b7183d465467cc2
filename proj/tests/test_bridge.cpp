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

#include "safetwin/bridge.hpp"
#include "safetwin/common.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

namespace safetwin
{
namespace
{

const std::string kData = SAFETWIN_DATA_DIR;
const std::vector<std::string> kMain{"m1", "m2", "m3", "m4"};

std::shared_ptr<const RoadNetwork> corridor()
{
  return std::make_shared<const RoadNetwork>(load_network(read_file(kData + "/corridor.net")));
}

TripSchedule main_line_demand(int n, double headway)
{
  TripSchedule s;
  s.routes.push_back({"main", kMain, 0});
  s.routes.push_back({"side", {"a1", "m2", "m3", "m4"}, 0});
  for (int k = 0; k < n; ++k) {
    s.trips.push_back({"v" + std::to_string(k), k * headway, k % 3 ? "main" : "side", "car"});
  }
  return s;
}

EgoSetup ego_at(double s, double v)
{
  EgoSetup e;
  e.state = EgoState::at("ego", s, v);
  e.route = kMain;
  e.config.idm = IdmParams::with_desired_speed(20.0);
  return e;
}

TrafficWorld busy_world()
{
  TrafficWorld world(corridor());
  world.set_schedule(main_line_demand(40, 2.5));
  VehicleState lead;
  lead.id = "lead";
  lead.route = kMain;
  lead.route_s = 120.0;
  lead.v = 15.0;
  world.add_vehicle(lead);
  return world;
}

TEST(Lockstep, ExactExchangeCount)
{
  auto world = busy_world();
  const auto logs = run_lockstep(world, {ego_at(60.0, 15.0)}, {}, 10.0);
  ASSERT_EQ(logs.ticks.size(), 100u);
  for (std::size_t k = 0; k < logs.ticks.size(); ++k) {
    EXPECT_EQ(logs.ticks[k], static_cast<std::int64_t>(k));
  }
  EXPECT_EQ(world.tick(), 100);
  EXPECT_EQ(world.time(), 100 * 0.1);
  EXPECT_EQ(logs.ego_traces.at("ego").size(), 10000u);
  EXPECT_EQ(logs.ego_traces.at("ego").back().t, 99 * 0.1 + 100 * 0.001);
}

TEST(Lockstep, TrafficLogHoldsDynamicsStateExactly)
{
  auto world = busy_world();
  const auto logs = run_lockstep(world, {ego_at(60.0, 15.0)}, {}, 30.0);
  ASSERT_EQ(logs.boundaries.size(), 300u);
  std::size_t checked = 0;
  for (const auto & b : logs.boundaries) {
    auto it = std::find_if(logs.trajectory.begin(), logs.trajectory.end(),
        [&](const TrajectoryRow & r) { return r.tick == b.tick && r.id == b.id; });
    ASSERT_NE(it, logs.trajectory.end());
    EXPECT_EQ(it->route_s, b.s);
    EXPECT_EQ(it->v, b.v);
    ++checked;
  }
  EXPECT_EQ(checked, 300u);
  // the ego actually moved and interacted
  EXPECT_GT(logs.final_egos.at(0).s, 300.0);
  EXPECT_FALSE(logs.ssm.empty());
}

TEST(Lockstep, ZeroEgosIsPlainTraffic)
{
  auto a = busy_world();
  auto b = busy_world();
  const auto logs = run_lockstep(a, {}, {}, 20.0);
  std::vector<TrajectoryRow> plain;
  for (int k = 0; k < 200; ++k) {
    append_trajectory(b, plain);
    step_traffic(b, 0.1);
  }
  EXPECT_EQ(logs.trajectory, plain);
  EXPECT_TRUE(logs.ssm.empty());
}

TEST(Lockstep, TransportsAgree)
{
  auto a = busy_world();
  auto b = busy_world();
  BridgeConfig stream;
  stream.transport = TransportKind::stream;
  const auto x = run_lockstep(a, {ego_at(60.0, 15.0)}, {}, 20.0);
  const auto y = run_lockstep(b, {ego_at(60.0, 15.0)}, stream, 20.0);
  EXPECT_EQ(x.trajectory, y.trajectory);
  EXPECT_EQ(x.ssm, y.ssm);
  EXPECT_EQ(x.boundaries, y.boundaries);
  EXPECT_EQ(trajectory_csv(x.trajectory), trajectory_csv(y.trajectory));
  EXPECT_EQ(ego_trace_csv(x.ego_traces.at("ego")), ego_trace_csv(y.ego_traces.at("ego")));
}

TEST(Lockstep, CaptureRecordsEveryFrame)
{
  const auto path = (std::filesystem::temp_directory_path() / "safetwin_bridge_cap.bin").string();
  auto world = busy_world();
  BridgeConfig cfg;
  cfg.transport = TransportKind::stream;
  cfg.capture_path = path;
  run_lockstep(world, {ego_at(60.0, 15.0)}, cfg, 1.0);
  const auto bytes = read_file(path);
  std::string_view rest(bytes);
  std::vector<SyncMessage> frames;
  while (!rest.empty()) {
    auto r = decode_message(rest);
    ASSERT_TRUE(r.complete());
    frames.push_back(*r.message);
    rest.remove_prefix(r.consumed);
  }
  ASSERT_EQ(frames.size(), 2u * (1 + 10 + 1));
  EXPECT_EQ(frames[0].kind, MessageKind::init);
  for (int n = 0; n < 10; ++n) {
    EXPECT_EQ(frames[2 + 2 * n].kind, MessageKind::ego_state);
    EXPECT_EQ(frames[2 + 2 * n].tick, n);
    EXPECT_EQ(frames[3 + 2 * n].kind, MessageKind::neighbor_set);
    EXPECT_EQ(frames[3 + 2 * n].tick, n);
  }
  EXPECT_EQ(frames.back().kind, MessageKind::shutdown);
  std::filesystem::remove(path);
}

TEST(Lockstep, Determinism)
{
  auto a = busy_world();
  auto b = busy_world();
  const auto x = run_lockstep(a, {ego_at(60.0, 15.0)}, {}, 15.0);
  const auto y = run_lockstep(b, {ego_at(60.0, 15.0)}, {}, 15.0);
  EXPECT_EQ(trajectory_csv(x.trajectory), trajectory_csv(y.trajectory));
  EXPECT_EQ(ssm_csv(x.ssm), ssm_csv(y.ssm));
}

TEST(Lockstep, RejectsBadDurationsAndSteps)
{
  auto world = busy_world();
  EXPECT_THROW(run_lockstep(world, {}, {}, 1.05), ConfigError);
  BridgeConfig odd;
  odd.micro_dt = 0.003;
  EXPECT_THROW(run_lockstep(world, {}, odd, 1.0), ConfigError);
  BridgeConfig wide;
  wide.macro_dt = 0.2;
  wide.micro_dt = 0.001;
  EXPECT_THROW(run_lockstep(world, {}, wide, 1.0), ConfigError);
  BridgeConfig radius;
  radius.vicinity_radius = 0.0;
  EXPECT_THROW(run_lockstep(world, {}, radius, 1.0), ConfigError);
}

TEST(Lockstep, TickMismatchIsProtocolError)
{
  auto world = busy_world();
  BridgeConfig cfg;
  TrafficSide side(world, cfg);
  side.handle(SyncMessage::init(0, {0.1, 0.001, {}}));
  side.handle(SyncMessage::ego_state(0, {}));
  EXPECT_THROW(side.handle(SyncMessage::ego_state(2, {})), ProtocolError);
  TrafficSide fresh(world, cfg);
  EXPECT_THROW(fresh.handle(SyncMessage::ego_state(0, {})), ProtocolError);
}

TEST(Lockstep, StreamSurfacesTrafficFailures)
{
  auto world = busy_world();
  BridgeConfig cfg;
  cfg.transport = TransportKind::stream;
  // an ego on an unknown link fails on the traffic side during INIT
  auto bad = ego_at(10.0, 10.0);
  bad.route = {"nowhere"};
  EXPECT_THROW(run_lockstep(world, {bad}, cfg, 1.0), ProtocolError);
}

TEST(Lockstep, RearEndCrashFreezesBothVehicles)
{
  TrafficWorld world(corridor());
  VehicleState stopped;
  stopped.id = "stopped";
  stopped.route = kMain;
  stopped.route_s = 130.0;
  stopped.v = 0.0;
  world.add_vehicle(stopped);
  auto ego = ego_at(100.0, 20.0);
  ego.config.sensor.range = 5.0;  // sees the obstacle far too late
  const auto logs = run_lockstep(world, {ego}, {}, 5.0);
  ASSERT_EQ(logs.crashes.size(), 1u);
  EXPECT_EQ(logs.crashes[0].follower, "ego");
  EXPECT_EQ(logs.crashes[0].leader, "stopped");
  EXPECT_TRUE(world.find("ego")->frozen);
  EXPECT_TRUE(world.find("stopped")->frozen);
  EXPECT_EQ(logs.final_egos[0].v, 0.0);
  EXPECT_TRUE(logs.ssm.back().crash);
  const auto eps = detect_episodes(logs.ssm);
  ASSERT_FALSE(eps.empty());
  EXPECT_TRUE(eps.back().crashed);
}

// --- vicinity filter ---------------------------------------------------------

std::shared_ptr<const RoadNetwork> plain_roads()
{
  RoadNetwork net;
  net.nodes = {{"a"}, {"b"}, {"c"}, {"d"}, {"x"}};
  net.links = {{"r1", "a", "b", 400.0, 1, 20.0}, {"r2", "b", "c", 300.0, 2, 20.0},
    {"r3", "c", "d", 500.0, 1, 20.0}, {"side", "x", "b", 200.0, 1, 20.0}};
  return std::make_shared<const RoadNetwork>(std::move(net));
}

VehicleState at(
  const std::string & id, std::vector<std::string> route, double route_s, int lane = 0)
{
  VehicleState v;
  v.id = id;
  v.route = std::move(route);
  v.route_s = route_s;
  v.lane = lane;
  v.v = 10.0;
  return v;
}

TEST(Vicinity, ThresholdIsInclusive)
{
  TrafficWorld world(plain_roads());
  const std::vector<std::string> r{"r1", "r2", "r3"};
  world.add_vehicle(at("ego", r, 100.0));
  EXPECT_TRUE(vicinity_filter(world, "ego", 300.0).empty());
  world.add_vehicle(at("far", r, 401.0));
  world.add_vehicle(at("edge", r, 399.0));
  world.add_vehicle(at("near", r, 150.0));
  const auto n = vicinity_filter(world, "ego", 300.0);
  ASSERT_EQ(n.size(), 2u);
  EXPECT_EQ(n[0].id, "near");
  EXPECT_EQ(n[1].id, "edge");
  EXPECT_THROW(vicinity_filter(world, "ghost", 300.0), ReferenceError);
}

TEST(Vicinity, IncludesBlockingStopLines)
{
  auto net = corridor();
  TrafficWorld world(net);
  world.add_vehicle(at("ego", kMain, 300.0));
  // force h1m red: green ends now, then yellow and all-red elapse
  world.find_controller("c1")->force_yellow(0.1);
  for (int k = 0; k < 3; ++k) {
    step_traffic(world, 0.1);
  }
  ASSERT_EQ(world.head_color("h1m"), SignalColor::red);
  const auto n = vicinity_filter(world, "ego", 300.0);
  ASSERT_FALSE(n.empty());
  EXPECT_EQ(n[0].id, "stop:h1m");
  EXPECT_DOUBLE_EQ(n[0].route_s, 495.0);
  EXPECT_EQ(n[0].v, 0.0);
  EXPECT_TRUE(vicinity_filter(world, "ego", 150.0).empty());
}

TEST(Vicinity, MatchesBruteForceScan)
{
  std::mt19937_64 rng(5);
  const std::vector<std::string> r{"r1", "r2", "r3"};
  const std::vector<double> offset{0.0, 400.0, 700.0};
  std::uniform_real_distribution<double> pos(0.0, 1200.0), side_pos(0.0, 200.0);
  std::uniform_int_distribution<int> coin(0, 5);
  for (int trial = 0; trial < 20; ++trial) {
    TrafficWorld world(plain_roads());
    const double ego_s = pos(rng);
    world.add_vehicle(at("ego", r, ego_s));
    struct Expect
    {
      double d;
      std::string id;
    };
    std::vector<Expect> expected;
    for (int i = 0; i < 50; ++i) {
      const std::string id = "n" + std::to_string(i);
      const int c = coin(rng);
      if (c == 0) {
        world.add_vehicle(at(id, {"side", "r2", "r3"}, side_pos(rng)));
        continue;
      }
      const double s = pos(rng);
      const int lane = c == 1 ? 1 : 0;
      world.add_vehicle(at(id, r, s, lane));
      const auto * v = world.find(id);
      if (v->lane != 0) {
        continue;  // other lane of the two-lane link
      }
      const auto li = static_cast<std::size_t>(std::find(r.begin(), r.end(), v->link) - r.begin());
      const double d = offset[li] + v->s - ego_s;
      if (std::abs(d) <= 300.0) {
        expected.push_back({d, id});
      }
    }
    std::sort(expected.begin(), expected.end(), [](const Expect & a, const Expect & b) {
        return std::abs(a.d) != std::abs(b.d) ? std::abs(a.d) < std::abs(b.d) : a.id < b.id;
      });
    const auto got = vicinity_filter(world, "ego", 300.0);
    ASSERT_EQ(got.size(), expected.size()) << trial;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].id, expected[i].id);
      EXPECT_NEAR(got[i].route_s - ego_s, expected[i].d, 1e-9);
    }
  }
}

}  // namespace
}  // namespace safetwin
