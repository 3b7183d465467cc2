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

#include "safetwin/traffic.hpp"

#include "safetwin/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace safetwin
{

namespace
{

std::int64_t to_us(double seconds) { return std::llround(seconds * 1e6); }

// Lane a vehicle occupies on a link; lanes are kept across links and clamped
// when a link is narrower.
int lane_on(const Link & link, int lane) { return std::clamp(lane, 0, link.lane_count - 1); }

std::optional<double> position_on_route(
  const TrafficWorld & world, const std::vector<std::string> & route, std::size_t from_index,
  const VehicleState & other)
{
  for (std::size_t j = from_index; j < route.size(); ++j) {
    if (route[j] == other.link) {
      return world.route_offset(route, j) + other.s;
    }
  }
  return std::nullopt;
}

struct Obstacle
{
  std::string id;
  double rear = 0.0;  // route coordinate of the obstacle's rear
  double v = 0.0;
  double a = 0.0;
};

// Stop-line obstacles the vehicle must respect, in route coordinates.
std::vector<Obstacle> stop_lines_ahead(const TrafficWorld & world, const VehicleState & f)
{
  std::vector<Obstacle> out;
  const auto & net = world.network();
  for (const auto & head : net.signals) {
    for (std::size_t j = f.route_index; j < f.route.size(); ++j) {
      if (f.route[j] != head.link) {
        continue;
      }
      const auto * link = net.find_link(head.link);
      if (lane_on(*link, f.lane) != head.lane) {
        break;
      }
      const double stop = world.route_offset(f.route, j) + head.stop_line_s;
      if (stop <= f.route_s) {
        break;
      }
      const auto color = world.head_color(head.id);
      bool blocks = color == SignalColor::red;
      if (color == SignalColor::yellow) {
        auto it = world.yellow_decisions().find({f.id, head.id});
        blocks = it != world.yellow_decisions().end() && it->second;
      }
      if (blocks) {
        out.push_back({"stop:" + head.id, stop, 0.0, 0.0});
      }
      break;
    }
  }
  return out;
}

}  // namespace

std::optional<double> route_position(
  const TrafficWorld & world, const std::vector<std::string> & route, const VehicleState & other)
{
  return position_on_route(world, route, 0, other);
}

std::vector<LeaderObservation> blocking_stop_lines(
  const TrafficWorld & world, std::string_view vehicle_id)
{
  const auto * f = world.find(vehicle_id);
  if (!f) {
    throw ReferenceError("unknown vehicle '" + std::string(vehicle_id) + "'", std::string(vehicle_id));
  }
  std::vector<LeaderObservation> out;
  for (const auto & o : stop_lines_ahead(world, *f)) {
    out.push_back({o.id, o.rear - f->route_s, 0.0, 0.0});
  }
  return out;
}

const char * to_string(SignalColor color)
{
  switch (color) {
    case SignalColor::green:
      return "green";
    case SignalColor::yellow:
      return "yellow";
    case SignalColor::red:
      return "red";
  }
  return "red";
}

// ---------------------------------------------------------------------------
// Signals

SignalColor SignalController::color_of(std::string_view head) const
{
  const auto & p = current_phase();
  const bool served = std::find(p.heads.begin(), p.heads.end(), head) != p.heads.end();
  if (!served) {
    return SignalColor::red;
  }
  switch (interval) {
    case SignalInterval::green:
      return SignalColor::green;
    case SignalInterval::yellow:
      return SignalColor::yellow;
    case SignalInterval::all_red:
      return SignalColor::red;
  }
  return SignalColor::red;
}

std::map<std::string, SignalColor> SignalController::colors() const
{
  std::map<std::string, SignalColor> out;
  for (const auto & ph : plan.phases) {
    for (const auto & h : ph.heads) {
      out[h] = color_of(h);
    }
  }
  return out;
}

bool SignalController::force_yellow(std::optional<double> yellow_duration)
{
  if (interval != SignalInterval::green) {
    return false;
  }
  interval = SignalInterval::yellow;
  clock_us = 0;
  if (yellow_duration) {
    yellow_override_us = to_us(*yellow_duration);
  }
  return true;
}

SignalStep signal_step(
  SignalController ctrl, const std::map<std::string, bool> & occupancy, double dt)
{
  if (!(dt > 0.0)) {
    throw DomainError("signal_step: dt must be > 0");
  }
  const auto step = to_us(dt);
  ctrl.clock_us += step;
  // Each interval may end within this step; carry the overflow so that
  // boundaries stay on an exact time grid.
  for (int guard = 0; guard < 64; ++guard) {
    const auto & ph = ctrl.current_phase();
    if (ctrl.interval == SignalInterval::green) {
      if (ctrl.plan.mode == ControlMode::fixed) {
        const auto green = to_us(ph.green);
        if (ctrl.clock_us < green) {
          break;
        }
        ctrl.clock_us -= green;
      } else {
        bool occupied = false;
        for (const auto & d : ph.detectors) {
          auto it = occupancy.find(d);
          occupied = occupied || (it != occupancy.end() && it->second);
        }
        ctrl.idle_us = occupied ? 0 : ctrl.idle_us + step;
        const auto min_green = to_us(ctrl.plan.min_green);
        const auto max_green = to_us(ctrl.plan.max_green);
        if (ctrl.clock_us >= max_green) {
          ctrl.clock_us -= max_green;
        } else if (ctrl.clock_us >= min_green && ctrl.idle_us >= to_us(ctrl.plan.extension_gap)) {
          ctrl.clock_us = 0;
        } else {
          break;
        }
      }
      ctrl.interval = SignalInterval::yellow;
    } else if (ctrl.interval == SignalInterval::yellow) {
      const auto yellow = ctrl.yellow_override_us.value_or(to_us(ph.yellow));
      if (ctrl.clock_us < yellow) {
        break;
      }
      ctrl.clock_us -= yellow;
      ctrl.yellow_override_us.reset();
      ctrl.interval = SignalInterval::all_red;
    } else {
      const auto red = to_us(ph.all_red);
      if (ctrl.clock_us < red) {
        break;
      }
      ctrl.clock_us -= red;
      ctrl.phase = (ctrl.phase + 1) % ctrl.plan.phases.size();
      ctrl.interval = SignalInterval::green;
      ctrl.idle_us = 0;
    }
  }
  SignalStep out{ctrl, {}};
  out.colors = out.controller.colors();
  return out;
}

// ---------------------------------------------------------------------------
// Trips

const TripRoute * TripSchedule::find_route(std::string_view id) const
{
  for (const auto & r : routes) {
    if (r.id == id) {
      return &r;
    }
  }
  return nullptr;
}

double vehicle_type_length(std::string_view type)
{
  if (type == "car") {
    return 4.5;
  }
  throw ConfigError("unknown vehicle type '" + std::string(type) + "'");
}

TripSchedule parse_trip_file(std::string_view text)
{
  TripSchedule out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    ++line_no;
    auto line = text.substr(start, end - start);
    start = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const auto tok = split_ws(line);
    if (tok.empty()) {
      if (end == text.size()) {
        break;
      }
      continue;
    }
    const auto col = [&](std::size_t i) {
        return static_cast<std::size_t>(tok[i].data() - line.data()) + 1;
      };
    if (tok[0] == "route") {
      if (tok.size() < 3) {
        throw ParseError("route needs an id and at least one link", line_no, 1);
      }
      TripRoute r;
      r.id = std::string(tok[1]);
      std::size_t i = 2;
      if (tok[i].substr(0, 5) == "lane=") {
        std::int64_t lane = 0;
        if (!parse_int(tok[i].substr(5), lane) || lane < 0) {
          throw ParseError("invalid lane index", line_no, col(i));
        }
        r.lane = static_cast<int>(lane);
        ++i;
      }
      for (; i < tok.size(); ++i) {
        r.links.emplace_back(tok[i]);
      }
      if (r.links.empty()) {
        throw ParseError("route has no links", line_no, 1);
      }
      if (out.find_route(r.id)) {
        throw ParseError("duplicate route '" + r.id + "'", line_no, col(1));
      }
      out.routes.push_back(std::move(r));
    } else if (tok[0] == "trip") {
      if (tok.size() != 4) {
        throw ParseError("trip needs departure, route and vehicle type", line_no, 1);
      }
      Trip trip;
      if (!parse_double(tok[1], trip.departure) || !std::isfinite(trip.departure) ||
        trip.departure < 0.0)
      {
        throw ParseError("invalid departure time", line_no, col(1));
      }
      trip.route = std::string(tok[2]);
      trip.vehicle_type = std::string(tok[3]);
      trip.id = "v" + std::to_string(out.trips.size());
      out.trips.push_back(std::move(trip));
    } else {
      throw ParseError("unknown record '" + std::string(tok[0]) + "'", line_no, col(0));
    }
    if (end == text.size()) {
      break;
    }
  }
  std::stable_sort(
    out.trips.begin(), out.trips.end(),
    [](const Trip & a, const Trip & b) { return a.departure < b.departure; });
  return out;
}

std::string write_trip_file(const TripSchedule & schedule)
{
  std::ostringstream out;
  for (const auto & r : schedule.routes) {
    out << "route " << r.id;
    if (r.lane != 0) {
      out << " lane=" << r.lane;
    }
    for (const auto & l : r.links) {
      out << ' ' << l;
    }
    out << '\n';
  }
  for (const auto & t : schedule.trips) {
    out << "trip " << format_double(t.departure) << ' ' << t.route << ' ' << t.vehicle_type << '\n';
  }
  return out.str();
}

void check_schedule(const TripSchedule & schedule, const RoadNetwork & net)
{
  for (const auto & r : schedule.routes) {
    const Link * prev = nullptr;
    for (const auto & id : r.links) {
      const auto * l = net.find_link(id);
      if (!l) {
        throw ReferenceError("route " + r.id + " references unknown link '" + id + "'", id);
      }
      if (prev && prev->to_node != l->from_node) {
        throw ConfigError("route " + r.id + " is not connected at link " + id);
      }
      prev = l;
    }
    if (r.lane < 0 || r.lane >= net.find_link(r.links.front())->lane_count) {
      throw ConfigError("route " + r.id + " starts on a lane its first link does not have");
    }
  }
  for (const auto & t : schedule.trips) {
    if (!schedule.find_route(t.route)) {
      throw ReferenceError("trip " + t.id + " references unknown route '" + t.route + "'", t.route);
    }
    vehicle_type_length(t.vehicle_type);
  }
  for (std::size_t i = 1; i < schedule.trips.size(); ++i) {
    if (schedule.trips[i].departure < schedule.trips[i - 1].departure) {
      throw ConfigError("trips are not sorted by departure time");
    }
  }
}

// ---------------------------------------------------------------------------
// World

TrafficWorld::TrafficWorld(std::shared_ptr<const RoadNetwork> net, TrafficConfig config)
: net_(std::move(net)), config_(std::move(config))
{
  if (!net_) {
    throw ConfigError("traffic world needs a network");
  }
  if (!(config_.dt > 0.0)) {
    throw ConfigError("traffic step must be > 0");
  }
  config_.idm.validate();
  for (auto plan : net_->controllers) {
    for (auto & ph : plan.phases) {
      if (!ph.detectors.empty()) {
        continue;
      }
      for (const auto & head : ph.heads) {
        const auto * h = net_->find_signal(head);
        for (const auto & d : net_->detectors) {
          if (h && d.link == h->link &&
            std::find(ph.detectors.begin(), ph.detectors.end(), d.id) == ph.detectors.end())
          {
            ph.detectors.push_back(d.id);
          }
        }
      }
    }
    controllers_.emplace_back(std::move(plan));
  }
  for (const auto & c : controllers_) {
    for (const auto & [head, color] : c.colors()) {
      colors_[head] = color;
    }
  }
}

const VehicleState * TrafficWorld::find(std::string_view id) const
{
  for (const auto & v : vehicles_) {
    if (v.id == id) {
      return &v;
    }
  }
  return nullptr;
}

VehicleState * TrafficWorld::find(std::string_view id)
{
  return const_cast<VehicleState *>(std::as_const(*this).find(id));
}

double TrafficWorld::route_offset(const std::vector<std::string> & route, std::size_t index) const
{
  double offset = 0.0;
  for (std::size_t j = 0; j < index && j < route.size(); ++j) {
    offset += net_->find_link(route[j])->length;
  }
  return offset;
}

void TrafficWorld::add_vehicle(VehicleState vehicle)
{
  if (find(vehicle.id)) {
    throw ConfigError("duplicate vehicle id '" + vehicle.id + "'");
  }
  if (vehicle.route.empty()) {
    throw ConfigError("vehicle '" + vehicle.id + "' has an empty route");
  }
  for (const auto & l : vehicle.route) {
    if (!net_->find_link(l)) {
      throw ReferenceError("vehicle '" + vehicle.id + "' route uses unknown link '" + l + "'", l);
    }
  }
  if (!(vehicle.length > 0.0) || vehicle.v < 0.0) {
    throw ConfigError("vehicle '" + vehicle.id + "' needs length > 0 and v >= 0");
  }
  vehicles_.push_back(std::move(vehicle));
  auto & v = vehicles_.back();
  place_external(v.id, v.route_s, v.v, v.a);
}

void TrafficWorld::place_external(std::string_view id, double route_s, double v, double a)
{
  auto * veh = find(id);
  if (!veh) {
    throw ReferenceError("unknown vehicle '" + std::string(id) + "'", std::string(id));
  }
  double offset = 0.0;
  std::size_t j = 0;
  for (; j + 1 < veh->route.size(); ++j) {
    const double len = net_->find_link(veh->route[j])->length;
    if (route_s <= offset + len) {
      break;
    }
    offset += len;
  }
  const auto * link = net_->find_link(veh->route[j]);
  veh->route_index = j;
  veh->link = link->id;
  veh->lane = lane_on(*link, veh->lane);
  veh->route_s = route_s;
  veh->s = route_s - offset;
  veh->v = v;
  veh->a = a;
}

void TrafficWorld::freeze(std::string_view id)
{
  if (auto * v = find(id)) {
    v->frozen = true;
    v->v = 0.0;
    v->a = 0.0;
  }
}

void TrafficWorld::set_schedule(TripSchedule schedule)
{
  check_schedule(schedule, *net_);
  schedule_ = std::move(schedule);
  next_trip_ = 0;
  pending_trips_.clear();
}

SignalController * TrafficWorld::find_controller(std::string_view id)
{
  for (auto & c : controllers_) {
    if (c.plan.id == id) {
      return &c;
    }
  }
  return nullptr;
}

SignalColor TrafficWorld::head_color(std::string_view head_id) const
{
  for (const auto & c : controllers_) {
    for (const auto & ph : c.plan.phases) {
      if (std::find(ph.heads.begin(), ph.heads.end(), head_id) != ph.heads.end()) {
        return c.color_of(head_id);
      }
    }
  }
  return SignalColor::green;
}

IdmParams driver_params(const TrafficWorld & world, const VehicleState & vehicle)
{
  IdmParams p = world.config().idm;
  p.desired_speed = vehicle.desired_speed.value_or(
    world.network().find_link(vehicle.link)->speed_limit);
  return p;
}

std::optional<LeaderObservation> leader_of(
  const TrafficWorld & world, std::string_view vehicle_id, LeaderScope scope)
{
  const auto * f = world.find(vehicle_id);
  if (!f) {
    throw ReferenceError("unknown vehicle '" + std::string(vehicle_id) + "'", std::string(vehicle_id));
  }
  std::optional<Obstacle> best;
  auto consider = [&](Obstacle o) {
      if (!best || o.rear < best->rear || (o.rear == best->rear && o.id < best->id)) {
        best = std::move(o);
      }
    };
  const auto & net = world.network();
  for (const auto & other : world.vehicles()) {
    if (other.id == f->id) {
      continue;
    }
    const auto pos = position_on_route(world, f->route, f->route_index, other);
    if (!pos) {
      continue;
    }
    const auto * link = net.find_link(other.link);
    if (other.lane != lane_on(*link, f->lane)) {
      continue;
    }
    if (*pos > f->route_s || (*pos == f->route_s && other.id > f->id)) {
      consider({other.id, *pos - other.length, other.v, other.a});
    }
  }
  if (scope == LeaderScope::vehicles_and_signals) {
    for (auto & o : stop_lines_ahead(world, *f)) {
      consider(std::move(o));
    }
  }
  if (!best) {
    return std::nullopt;
  }
  return LeaderObservation{best->id, best->rear - f->route_s, best->v, best->a};
}

void update_yellow_decisions(TrafficWorld & world)
{
  const auto & net = world.network();
  for (auto it = world.yellow_decisions_.begin(); it != world.yellow_decisions_.end();) {
    if (world.head_color(it->first.second) != SignalColor::yellow || !world.find(it->first.first)) {
      it = world.yellow_decisions_.erase(it);
    } else {
      ++it;
    }
  }
  for (const auto & f : world.vehicles_) {
    if (f.frozen) {
      continue;
    }
    for (const auto & head : net.signals) {
      if (world.head_color(head.id) != SignalColor::yellow ||
        world.yellow_decisions_.count({f.id, head.id}))
      {
        continue;
      }
      for (std::size_t j = f.route_index; j < f.route.size(); ++j) {
        if (f.route[j] != head.link) {
          continue;
        }
        if (lane_on(*net.find_link(head.link), f.lane) != head.lane) {
          break;
        }
        const double d = world.route_offset(f.route, j) + head.stop_line_s - f.route_s;
        if (d > 0.0) {
          const double b = driver_params(world, f).comfort_decel;
          world.yellow_decisions_[{f.id, head.id}] = f.v * f.v <= 2.0 * b * d;
        }
        break;
      }
    }
  }
}

std::vector<VehicleState> spawn_vehicles(TrafficWorld & world, double t, double dt)
{
  const auto & trips = world.schedule_.trips;
  while (world.next_trip_ < trips.size() && trips[world.next_trip_].departure < t + dt) {
    world.pending_trips_.push_back(world.next_trip_++);
  }
  std::vector<VehicleState> spawned;
  std::set<std::pair<std::string, int>> blocked;
  std::deque<std::size_t> still_pending;
  for (const auto idx : world.pending_trips_) {
    const auto & trip = trips[idx];
    const auto * route = world.schedule_.find_route(trip.route);
    const auto * link = world.network().find_link(route->links.front());
    const int lane = lane_on(*link, route->lane);
    const std::pair<std::string, int> entrance{link->id, lane};
    const double length = vehicle_type_length(trip.vehicle_type);
    bool ok = !blocked.count(entrance);
    if (ok) {
      double last_rear = std::numeric_limits<double>::infinity();
      for (const auto & v : world.vehicles_) {
        if (v.link == link->id && v.lane == lane) {
          last_rear = std::min(last_rear, v.s - v.length);
        }
      }
      ok = last_rear >= world.config_.idm.min_gap + length;
    }
    if (!ok) {
      blocked.insert(entrance);
      still_pending.push_back(idx);
      continue;
    }
    VehicleState v;
    v.id = trip.id;
    v.route = route->links;
    v.lane = lane;
    v.length = length;
    v.link = link->id;
    v.v = std::min(link->speed_limit, driver_params(world, v).desired_speed);
    world.add_vehicle(v);
    spawned.push_back(*world.find(v.id));
  }
  world.pending_trips_ = std::move(still_pending);
  return spawned;
}

std::map<std::string, bool> detector_occupancy(const TrafficWorld & world)
{
  std::map<std::string, bool> out;
  for (const auto & d : world.network().detectors) {
    bool occupied = false;
    for (const auto & v : world.vehicles()) {
      occupied = occupied ||
        (v.link == d.link && v.s - v.length <= d.position_s && d.position_s <= v.s);
    }
    out[d.id] = occupied;
  }
  return out;
}

std::vector<CrashCandidate> step_traffic(TrafficWorld & world, double dt)
{
  if (!(dt > 0.0)) {
    throw DomainError("step_traffic: dt must be > 0");
  }
  if (std::abs(dt - world.config_.dt) > 1e-12) {
    throw ConfigError("step_traffic: dt differs from the world's configured step");
  }
  const double t = world.time();
  spawn_vehicles(world, t, dt);
  update_yellow_decisions(world);

  // Accelerations from a consistent snapshot, then positions.
  std::vector<double> accel(world.vehicles_.size(), 0.0);
  for (std::size_t i = 0; i < world.vehicles_.size(); ++i) {
    const auto & v = world.vehicles_[i];
    if (v.external || v.frozen) {
      continue;
    }
    accel[i] = idm_accel(
      v.v, driver_params(world, v), leader_of(world, v.id), world.config_.emergency_decel);
  }
  const auto & net = world.network();
  std::vector<VehicleState> kept;
  kept.reserve(world.vehicles_.size());
  for (std::size_t i = 0; i < world.vehicles_.size(); ++i) {
    auto v = std::move(world.vehicles_[i]);
    if (!v.external && !v.frozen) {
      const double a = accel[i];
      double ds = v.v * dt + 0.5 * a * dt * dt;
      double nv = v.v + a * dt;
      if (nv < 0.0) {
        // stops inside the step: travel only the braking distance
        ds = a < 0.0 ? v.v * v.v / (-2.0 * a) : 0.0;
        nv = 0.0;
      }
      v.a = a;
      v.v = nv;
      v.s += ds;
      v.route_s += ds;
      bool gone = false;
      while (v.s > net.find_link(v.link)->length) {
        const double len = net.find_link(v.link)->length;
        if (v.route_index + 1 >= v.route.size()) {
          gone = true;
          break;
        }
        v.s -= len;
        ++v.route_index;
        v.link = v.route[v.route_index];
        v.lane = lane_on(*net.find_link(v.link), v.lane);
      }
      if (gone) {
        world.exited_.push_back(v.id);
        continue;
      }
    }
    kept.push_back(std::move(v));
  }
  world.vehicles_ = std::move(kept);

  std::vector<CrashCandidate> crashes;
  for (const auto & v : world.vehicles_) {
    if (v.frozen) {
      continue;
    }
    if (auto lead = leader_of(world, v.id, LeaderScope::vehicles_only); lead && lead->gap <= 0.0) {
      crashes.push_back({v.id, lead->leader_id, lead->gap, v.link, v.s});
    }
  }

  const auto occupancy = detector_occupancy(world);
  for (auto & c : world.controllers_) {
    c = signal_step(std::move(c), occupancy, dt).controller;
  }
  ++world.tick_;
  return crashes;
}

// ---------------------------------------------------------------------------
// Logs

void append_trajectory(const TrafficWorld & world, std::vector<TrajectoryRow> & rows)
{
  for (const auto & v : world.vehicles()) {
    rows.push_back({world.tick(), world.time(), v.id, v.link, v.lane, v.s, v.v, v.a, v.route_s});
  }
}

std::string trajectory_csv(const std::vector<TrajectoryRow> & rows)
{
  std::ostringstream out;
  out << "t,id,link,lane,s,v,a\n";
  for (const auto & r : rows) {
    out << format_double(r.t) << ',' << r.id << ',' << r.link << ',' << r.lane << ','
        << format_double(r.s) << ',' << format_double(r.v) << ',' << format_double(r.a) << '\n';
  }
  return out.str();
}

std::vector<TrajectoryRow> parse_trajectory_csv(std::string_view text)
{
  std::vector<TrajectoryRow> rows;
  std::size_t line_no = 0;
  for (const auto & raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || (line_no == 1 && line.substr(0, 2) == "t,")) {
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 7) {
      throw ParseError("expected 7 fields", line_no);
    }
    TrajectoryRow r;
    std::int64_t lane = 0;
    if (!parse_double(f[0], r.t) || !parse_int(f[3], lane) || !parse_double(f[4], r.s) ||
      !parse_double(f[5], r.v) || !parse_double(f[6], r.a))
    {
      throw ParseError("malformed trajectory row", line_no);
    }
    r.id = f[1];
    r.link = f[2];
    r.lane = static_cast<int>(lane);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace safetwin
