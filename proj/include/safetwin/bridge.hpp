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

#ifndef SAFETWIN__BRIDGE_HPP_
#define SAFETWIN__BRIDGE_HPP_

#include "safetwin/ego.hpp"
#include "safetwin/ssm.hpp"
#include "safetwin/traffic.hpp"
#include "safetwin/transport.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace safetwin
{

enum class TransportKind { in_process, stream };

struct BridgeConfig
{
  double macro_dt = 0.1;    // s, traffic step
  double micro_dt = 0.001;  // s, ego dynamics step
  double vicinity_radius = 300.0;  // m
  TransportKind transport = TransportKind::in_process;
  /// host:port the traffic side listens on; port 0 picks a free port.
  std::string endpoint = "127.0.0.1:0";
  /// When set, every frame is appended verbatim to this file.
  std::optional<std::string> capture_path;
  void validate() const;
};

/// Vehicles on the ego's route and lane within `radius` (front to front,
/// both directions), plus blocking stop lines within `radius` ahead as
/// zero-length standing obstacles. Sorted by |distance|, then id.
std::vector<Neighbor> vicinity_filter(
  const TrafficWorld & world, std::string_view ego_id, double radius);

/// An ego vehicle handed to the lockstep loop.
struct EgoSetup
{
  EgoState state;  // state.s is measured along `route` from its start
  std::vector<std::string> route;
  int lane = 0;
  EgoConfig config;
};

/// Dynamics-layer state at a macro boundary, as sent to the traffic side.
struct EgoBoundary
{
  std::int64_t tick = 0;
  std::string id;
  double s = 0.0;
  double v = 0.0;
  bool operator==(const EgoBoundary &) const = default;
};

struct CrashRecord
{
  std::int64_t tick = 0;
  double t = 0.0;
  std::string follower;
  std::string leader;
  std::string link;
  double s = 0.0;
};

struct RunLogs
{
  /// Traffic-layer state at each macro boundary, after ego injection.
  std::vector<TrajectoryRow> trajectory;
  /// One sample per unfrozen ego with a leader, per macro boundary.
  std::vector<SsmSample> ssm;
  std::vector<CrashRecord> crashes;
  /// Exchange ticks as acknowledged by the traffic side.
  std::vector<std::int64_t> ticks;
  /// Dynamics-layer state at each macro boundary.
  std::vector<EgoBoundary> boundaries;
  std::map<std::string, std::vector<EgoTraceRow>> ego_traces;
  std::vector<EgoState> final_egos;
};

/// Called on the traffic side once per tick, after ego injection and before
/// logging; may modify the world (signals, vehicle parameters).
using TickHook = std::function<void(TrafficWorld &, std::int64_t tick)>;

/// Serving side of the exchange. Owns nothing; the world outlives it.
class TrafficSide : public MessageHandler
{
public:
  TrafficSide(TrafficWorld & world, const BridgeConfig & config, Thresholds thresholds = {});
  void set_hook(TickHook hook) { hook_ = std::move(hook); }
  SyncMessage handle(const SyncMessage & request) override;

  /// Moves the traffic-side logs into `logs`.
  void collect(RunLogs & logs);

private:
  SyncMessage on_init(const SyncMessage & request);
  SyncMessage on_ego_state(const SyncMessage & request);

  TrafficWorld & world_;
  BridgeConfig config_;
  Thresholds thresholds_;
  TickHook hook_;
  std::vector<EgoDescriptor> egos_;
  std::int64_t expected_tick_ = 0;
  std::int64_t start_tick_ = 0;
  bool initialized_ = false;
  std::vector<TrajectoryRow> trajectory_;
  std::vector<SsmSample> ssm_;
  std::vector<CrashRecord> crashes_;
  std::vector<std::int64_t> ticks_;
};

/// Runs `duration` seconds of lockstep co-simulation starting at the
/// world's current tick. Each tick: egos are injected, the traffic world
/// steps one macro step, neighbour sets are filtered, and every ego
/// advances one macro window at the micro rate.
RunLogs run_lockstep(
  TrafficWorld & world, std::vector<EgoSetup> egos, const BridgeConfig & config,
  double duration, const Thresholds & thresholds = {}, TickHook hook = {});

/// Number of macro steps in `duration`; ConfigError unless an integer.
std::int64_t macro_steps(double duration, double macro_dt);

}  // namespace safetwin

#endif  // SAFETWIN__BRIDGE_HPP_
