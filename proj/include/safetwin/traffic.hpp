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

#ifndef SAFETWIN__TRAFFIC_HPP_
#define SAFETWIN__TRAFFIC_HPP_

#include "safetwin/idm.hpp"
#include "safetwin/net_model.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace safetwin
{

/// Longitudinal state of one vehicle. `s` is the front-bumper position on
/// `link`; `route_s` the same point measured from the start of `route[0]`.
struct VehicleState
{
  std::string id;
  std::string link;
  int lane = 0;
  double s = 0.0;
  double v = 0.0;
  double a = 0.0;
  double length = 4.5;
  std::vector<std::string> route;
  std::size_t route_index = 0;
  double route_s = 0.0;
  /// IDM desired speed; unset means the current link's speed limit.
  std::optional<double> desired_speed;
  /// Positioned by another simulation layer; never stepped here.
  bool external = false;
  /// Involved in a crash; holds position at zero speed.
  bool frozen = false;
};

// ---------------------------------------------------------------------------
// Signal control

enum class SignalColor { green, yellow, red };
enum class SignalInterval { green, yellow, all_red };

const char * to_string(SignalColor color);

/// Runtime state of one controller. Clocks are integer microseconds so that
/// interval boundaries land on exact step counts.
struct SignalController
{
  ControllerPlan plan;
  std::size_t phase = 0;
  SignalInterval interval = SignalInterval::green;
  std::int64_t clock_us = 0;
  /// Actuated mode: time since a detector of the current phase was occupied.
  std::int64_t idle_us = 0;
  /// One-shot yellow duration used by the next yellow interval.
  std::optional<std::int64_t> yellow_override_us;

  explicit SignalController(ControllerPlan p) : plan(std::move(p)) {}

  /// Pure function of phase and interval.
  SignalColor color_of(std::string_view head) const;
  std::map<std::string, SignalColor> colors() const;
  const PhaseSpec & current_phase() const { return plan.phases.at(phase); }
  /// Ends the current green immediately (no-op outside green).
  bool force_yellow(std::optional<double> yellow_duration = std::nullopt);
};

struct SignalStep
{
  SignalController controller;
  std::map<std::string, SignalColor> colors;
};

/// Advances a controller by dt. `occupancy` maps detector id to whether a
/// vehicle covers the zone; ids missing from the map count as free.
SignalStep signal_step(
  SignalController ctrl, const std::map<std::string, bool> & occupancy, double dt);

// ---------------------------------------------------------------------------
// Demand

struct TripRoute
{
  std::string id;
  std::vector<std::string> links;
  int lane = 0;
  bool operator==(const TripRoute &) const = default;
};

struct Trip
{
  std::string id;
  double departure = 0.0;  // s
  std::string route;
  std::string vehicle_type = "car";
  bool operator==(const Trip &) const = default;
};

/// Routes plus trips sorted by departure time.
struct TripSchedule
{
  std::vector<TripRoute> routes;
  std::vector<Trip> trips;
  const TripRoute * find_route(std::string_view id) const;
  bool operator==(const TripSchedule &) const = default;
};

/// Body length of a known vehicle type; throws ConfigError otherwise.
double vehicle_type_length(std::string_view type);

/// Trip file: `route <id> [lane=<i>] <link>...` and
/// `trip <departure_s> <route_id> <vehicle_type>` lines; `#` comments.
TripSchedule parse_trip_file(std::string_view text);
std::string write_trip_file(const TripSchedule & schedule);

/// Throws ReferenceError / ConfigError unless every route is a connected
/// lane-feasible path in `net` and every trip references a known route.
void check_schedule(const TripSchedule & schedule, const RoadNetwork & net);

// ---------------------------------------------------------------------------
// World

struct TrafficConfig
{
  double dt = 0.1;  // s
  /// Template for background drivers; desired_speed is replaced by the link
  /// speed limit unless a vehicle carries its own.
  IdmParams idm;
  double emergency_decel = kEmergencyDecel;
};

struct CrashCandidate
{
  std::string follower;
  std::string leader;
  double gap = 0.0;
  std::string link;
  double s = 0.0;
};

enum class LeaderScope { vehicles_and_signals, vehicles_only };

/// Single mutable microscopic traffic state. Not thread-safe; hand it
/// between threads only at step boundaries.
class TrafficWorld
{
public:
  explicit TrafficWorld(std::shared_ptr<const RoadNetwork> net, TrafficConfig config = {});

  const RoadNetwork & network() const { return *net_; }
  std::shared_ptr<const RoadNetwork> network_ptr() const { return net_; }
  const TrafficConfig & config() const { return config_; }

  std::int64_t tick() const { return tick_; }
  /// tick * dt, never accumulated.
  double time() const { return static_cast<double>(tick_) * config_.dt; }

  const std::vector<VehicleState> & vehicles() const { return vehicles_; }
  const VehicleState * find(std::string_view id) const;
  VehicleState * find(std::string_view id);

  /// Adds a vehicle; fills link/lane/s from route and route_s. Throws on an
  /// unknown route link or a duplicate id.
  void add_vehicle(VehicleState vehicle);
  /// Places an externally controlled vehicle at `route_s` on its route.
  void place_external(std::string_view id, double route_s, double v, double a);
  void freeze(std::string_view id);

  void set_schedule(TripSchedule schedule);
  const TripSchedule & schedule() const { return schedule_; }

  std::vector<SignalController> & controllers() { return controllers_; }
  const std::vector<SignalController> & controllers() const { return controllers_; }
  SignalController * find_controller(std::string_view id);
  SignalColor head_color(std::string_view head_id) const;

  /// Distance from the start of `route` to the start of `route[index]`.
  double route_offset(const std::vector<std::string> & route, std::size_t index) const;

  /// Vehicles that left the network, in exit order.
  const std::vector<std::string> & exited() const { return exited_; }

  /// Decisions taken by drivers facing a yellow: true = stop.
  const std::map<std::pair<std::string, std::string>, bool> & yellow_decisions() const
  {
    return yellow_decisions_;
  }

private:
  friend std::vector<CrashCandidate> step_traffic(TrafficWorld & world, double dt);
  friend std::vector<VehicleState> spawn_vehicles(TrafficWorld & world, double t, double dt);
  friend void update_yellow_decisions(TrafficWorld & world);

  std::shared_ptr<const RoadNetwork> net_;
  TrafficConfig config_;
  std::int64_t tick_ = 0;
  std::vector<VehicleState> vehicles_;
  std::vector<SignalController> controllers_;
  std::map<std::string, SignalColor> colors_;
  TripSchedule schedule_;
  std::size_t next_trip_ = 0;
  std::deque<std::size_t> pending_trips_;
  std::vector<std::string> exited_;
  std::map<std::pair<std::string, std::string>, bool> yellow_decisions_;
};

/// Background IDM parameters for a vehicle at its current position.
IdmParams driver_params(const TrafficWorld & world, const VehicleState & vehicle);

/// Nearest obstacle ahead of `vehicle_id` along its route on its lane.
/// Gap is leader rear minus follower front. Red heads, and yellow heads the
/// driver has decided to stop for, appear as stopped virtual leaders whose
/// id is "stop:<head>".
std::optional<LeaderObservation> leader_of(
  const TrafficWorld & world, std::string_view vehicle_id,
  LeaderScope scope = LeaderScope::vehicles_and_signals);

/// Front position of `other` in the coordinate of `route` (distance from
/// the start of route[0]), or nullopt if it is not on one of its links.
std::optional<double> route_position(
  const TrafficWorld & world, const std::vector<std::string> & route, const VehicleState & other);

/// Red heads, and yellow heads the driver stops for, ahead of a vehicle on
/// its lane; gap is measured from the vehicle front to the stop line.
std::vector<LeaderObservation> blocking_stop_lines(
  const TrafficWorld & world, std::string_view vehicle_id);

/// Records stop/go choices for drivers that newly face a yellow head: stop
/// iff v^2 / (2 d) <= b. Choices persist until the head leaves yellow.
void update_yellow_decisions(TrafficWorld & world);

/// Instantiates trips departing in [t, t + dt) at their first link entrance.
/// Insertion is deferred (FIFO per entrance) while the gap to the last
/// vehicle is below s0 + length.
std::vector<VehicleState> spawn_vehicles(TrafficWorld & world, double t, double dt);

/// Advances all background vehicles and signals by dt (ballistic update,
/// speed clamped at zero). Returns overlapping pairs as crash candidates.
/// dt must equal the world's configured step.
std::vector<CrashCandidate> step_traffic(TrafficWorld & world, double dt);

/// Per-zone occupancy: a vehicle covers a zone when position_s lies within
/// [s - length, s] on the zone's link.
std::map<std::string, bool> detector_occupancy(const TrafficWorld & world);

// ---------------------------------------------------------------------------
// Logs

struct TrajectoryRow
{
  std::int64_t tick = 0;
  double t = 0.0;
  std::string id;
  std::string link;
  int lane = 0;
  double s = 0.0;
  double v = 0.0;
  double a = 0.0;
  double route_s = 0.0;
  bool operator==(const TrajectoryRow &) const = default;
};

void append_trajectory(const TrafficWorld & world, std::vector<TrajectoryRow> & rows);
/// CSV columns: t,id,link,lane,s,v,a
std::string trajectory_csv(const std::vector<TrajectoryRow> & rows);
std::vector<TrajectoryRow> parse_trajectory_csv(std::string_view text);

}  // namespace safetwin

#endif  // SAFETWIN__TRAFFIC_HPP_
