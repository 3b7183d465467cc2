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

#include <algorithm>
#include <cmath>

namespace safetwin
{

void BridgeConfig::validate() const
{
  micro_steps_per_macro(macro_dt, micro_dt);
  if (!(vicinity_radius > 0.0)) {
    throw ConfigError("vicinity radius must be > 0");
  }
  if (transport == TransportKind::stream) {
    parse_endpoint(endpoint);
  }
}

std::int64_t macro_steps(double duration, double macro_dt)
{
  if (!(duration >= 0.0) || !(macro_dt > 0.0)) {
    throw ConfigError("duration must be >= 0 and macro step > 0");
  }
  const double ratio = duration / macro_dt;
  const auto n = std::llround(ratio);
  if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio)) {
    throw ConfigError("duration is not a multiple of the macro step");
  }
  return n;
}

std::vector<Neighbor> vicinity_filter(
  const TrafficWorld & world, std::string_view ego_id, double radius)
{
  const auto * ego = world.find(ego_id);
  if (!ego) {
    throw ReferenceError("unknown ego '" + std::string(ego_id) + "'", std::string(ego_id));
  }
  struct Entry
  {
    double distance;
    Neighbor n;
  };
  std::vector<Entry> found;
  const auto & net = world.network();
  for (const auto & other : world.vehicles()) {
    if (other.id == ego->id) {
      continue;
    }
    const auto pos = route_position(world, ego->route, other);
    if (!pos) {
      continue;
    }
    const auto * link = net.find_link(other.link);
    if (other.lane != std::clamp(ego->lane, 0, link->lane_count - 1)) {
      continue;
    }
    const double d = *pos - ego->route_s;
    if (std::abs(d) <= radius) {
      found.push_back({d, {other.id, *pos, other.v, other.a, other.length, other.frozen}});
    }
  }
  for (const auto & stop : blocking_stop_lines(world, ego_id)) {
    if (stop.gap <= radius) {
      found.push_back({stop.gap, {stop.leader_id, ego->route_s + stop.gap, 0.0, 0.0, 0.0, false}});
    }
  }
  std::sort(found.begin(), found.end(), [](const Entry & a, const Entry & b) {
      const double da = std::abs(a.distance), db = std::abs(b.distance);
      return da != db ? da < db : a.n.id < b.n.id;
    });
  std::vector<Neighbor> out;
  out.reserve(found.size());
  for (auto & e : found) {
    out.push_back(std::move(e.n));
  }
  return out;
}

TrafficSide::TrafficSide(TrafficWorld & world, const BridgeConfig & config, Thresholds thresholds)
: world_(world), config_(config), thresholds_(thresholds)
{
}

SyncMessage TrafficSide::handle(const SyncMessage & request)
{
  switch (request.kind) {
    case MessageKind::init:
      return on_init(request);
    case MessageKind::ego_state:
      return on_ego_state(request);
    case MessageKind::shutdown:
      return SyncMessage::shutdown(request.tick);
    default:
      throw ProtocolError(std::string("traffic side cannot handle ") + to_string(request.kind));
  }
}

SyncMessage TrafficSide::on_init(const SyncMessage & request)
{
  if (initialized_) {
    throw ProtocolError("duplicate INIT");
  }
  const auto & p = std::get<InitPayload>(request.payload);
  if (std::abs(p.macro_dt - world_.config().dt) > 1e-12) {
    throw ProtocolError("macro step differs between the two layers");
  }
  for (const auto & e : p.egos) {
    VehicleState v;
    v.id = e.id;
    v.route = e.route;
    v.lane = e.lane;
    v.length = e.length;
    v.route_s = e.s;
    v.v = e.v;
    v.external = true;
    world_.add_vehicle(std::move(v));
  }
  egos_ = p.egos;
  start_tick_ = world_.tick();
  expected_tick_ = request.tick;
  initialized_ = true;
  return SyncMessage::init(request.tick, p);
}

SyncMessage TrafficSide::on_ego_state(const SyncMessage & request)
{
  if (!initialized_) {
    throw ProtocolError("EGO_STATE before INIT");
  }
  if (request.tick != expected_tick_) {
    throw ProtocolError(
      "expected tick " + std::to_string(expected_tick_) + ", got " + std::to_string(request.tick));
  }
  const auto & reports = std::get<EgoStatePayload>(request.payload).egos;
  if (reports.size() != egos_.size()) {
    throw ProtocolError("EGO_STATE must report every ego");
  }
  // (1) inject
  for (const auto & r : reports) {
    world_.place_external(r.id, r.s, r.v, r.a);
  }
  if (hook_) {
    hook_(world_, request.tick);
  }
  append_trajectory(world_, trajectory_);

  // Surrogate safety measures on the boundary state.
  const auto & net = world_.network();
  const double t = world_.time();
  for (const auto & e : egos_) {
    const auto * ego = world_.find(e.id);
    if (ego->frozen) {
      continue;
    }
    const auto lead = leader_of(world_, e.id, LeaderScope::vehicles_only);
    if (!lead) {
      continue;
    }
    const auto * l = world_.find(lead->leader_id);
    const double gap = bumper_gap(net, ego->route, ego->link, ego->s, l->link, l->s, l->length);
    auto sample = make_sample(t, ego->id, l->id, gap, ego->v, l->v, ego->link, ego->s, thresholds_);
    if (sample.crash) {
      crashes_.push_back({world_.tick(), t, ego->id, l->id, ego->link, ego->s});
      const std::string follower = ego->id, leader = l->id;
      ssm_.push_back(std::move(sample));
      world_.freeze(follower);
      world_.freeze(leader);
      continue;
    }
    ssm_.push_back(std::move(sample));
  }

  // (2) traffic step
  const double t_step = world_.time();
  const auto tick_step = world_.tick();
  for (const auto & c : step_traffic(world_, config_.macro_dt)) {
    crashes_.push_back({tick_step, t_step, c.follower, c.leader, c.link, c.s});
    world_.freeze(c.follower);
    world_.freeze(c.leader);
  }

  // (3) neighbour sets
  NeighborSetPayload reply;
  for (const auto & e : egos_) {
    reply.sets.push_back(
      {e.id, world_.find(e.id)->frozen, vicinity_filter(world_, e.id, config_.vicinity_radius)});
  }
  ticks_.push_back(request.tick);
  ++expected_tick_;
  return SyncMessage::neighbor_set(request.tick, std::move(reply));
}

void TrafficSide::collect(RunLogs & logs)
{
  logs.trajectory = std::move(trajectory_);
  logs.ssm = std::move(ssm_);
  logs.crashes = std::move(crashes_);
  logs.ticks = std::move(ticks_);
}

namespace
{

SyncMessage expect_reply(const SyncMessage & reply, MessageKind kind, std::int64_t tick)
{
  if (reply.kind == MessageKind::error) {
    throw ProtocolError("traffic side failed: " + std::get<ErrorPayload>(reply.payload).message);
  }
  if (reply.kind != kind || reply.tick != tick) {
    throw ProtocolError(
      std::string("expected ") + to_string(kind) + " for tick " + std::to_string(tick) +
      ", got " + to_string(reply.kind) + " for tick " + std::to_string(reply.tick));
  }
  return reply;
}

// The dynamics side: drives the exchange and owns the ego states.
void drive_dynamics(
  Transport & transport, std::vector<EgoSetup> & egos, const BridgeConfig & config,
  std::int64_t start_tick, std::int64_t steps, RunLogs & logs)
{
  InitPayload init{config.macro_dt, config.micro_dt, {}};
  for (const auto & e : egos) {
    init.egos.push_back({e.state.id, e.lane, e.state.length, e.state.s, e.state.v, e.route});
  }
  expect_reply(transport.exchange(SyncMessage::init(0, init)), MessageKind::init, 0);
  for (std::int64_t n = 0; n < steps; ++n) {
    EgoStatePayload out;
    for (const auto & e : egos) {
      out.egos.push_back({e.state.id, e.state.s, e.state.v, e.state.a_realized});
      logs.boundaries.push_back({n, e.state.id, e.state.s, e.state.v});
    }
    const auto reply = expect_reply(
      transport.exchange(SyncMessage::ego_state(n, std::move(out))), MessageKind::neighbor_set, n);
    const auto & sets = std::get<NeighborSetPayload>(reply.payload).sets;
    const double t0 = static_cast<double>(start_tick + n) * config.macro_dt;
    for (auto & e : egos) {
      auto it = std::find_if(sets.begin(), sets.end(), [&](const EgoNeighbors & s) {
            return s.ego == e.state.id;
          });
      if (it == sets.end()) {
        throw ProtocolError("NEIGHBOR_SET lacks ego '" + e.state.id + "'");
      }
      if (it->frozen && !e.state.frozen) {
        e.state.frozen = true;
        e.state.v = 0.0;
        e.state.v_ref = 0.0;
        e.state.a_actuator = e.state.a_realized = e.state.a_cmd = e.state.pedal = 0.0;
      }
      auto adv = ego_macro_advance(
        e.state, it->neighbors, e.config, t0, config.macro_dt, config.micro_dt);
      e.state = std::move(adv.state);
      auto & trace = logs.ego_traces[e.state.id];
      trace.insert(trace.end(), adv.trace.begin(), adv.trace.end());
    }
  }
  expect_reply(
    transport.exchange(SyncMessage::shutdown(steps)), MessageKind::shutdown, steps);
}

}  // namespace

RunLogs run_lockstep(
  TrafficWorld & world, std::vector<EgoSetup> egos, const BridgeConfig & config,
  double duration, const Thresholds & thresholds, TickHook hook)
{
  config.validate();
  if (std::abs(config.macro_dt - world.config().dt) > 1e-12) {
    throw ConfigError("bridge macro step differs from the traffic step");
  }
  for (const auto & e : egos) {
    e.config.validate();
  }
  const auto steps = macro_steps(duration, config.macro_dt);
  const auto start_tick = world.tick();

  TrafficSide side(world, config, thresholds);
  side.set_hook(std::move(hook));
  std::shared_ptr<FrameCapture> capture;
  if (config.capture_path) {
    capture = std::make_shared<FrameCapture>(*config.capture_path);
  }

  RunLogs logs;
  if (config.transport == TransportKind::in_process) {
    InProcessTransport transport(side);
    transport.set_capture(capture);
    drive_dynamics(transport, egos, config, start_tick, steps, logs);
  } else {
    StreamServer server(side, parse_endpoint(config.endpoint));
    {
      auto transport = StreamTransport::connect(server.endpoint());
      transport->set_capture(capture);
      drive_dynamics(*transport, egos, config, start_tick, steps, logs);
    }
    server.join();
  }
  side.collect(logs);
  for (auto & e : egos) {
    logs.final_egos.push_back(std::move(e.state));
  }
  return logs;
}

}  // namespace safetwin
