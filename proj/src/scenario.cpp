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

#include "safetwin/scenario.hpp"

#include "safetwin/common.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <future>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace safetwin
{

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

namespace
{

const std::string kEgoId = "ego";
const std::string kLeaderId = "leader";

// section -> allowed keys
const std::map<std::string, std::set<std::string>> kKnownKeys{
  {"scenario", {"name", "network", "trips", "counts", "mu", "visibility", "seed",
      "replications", "duration", "max_route_links", "workers"}},
  {"ego", {"route", "lane", "speed", "desired_speed", "length", "gap", "kp", "ki", "tau",
      "time_headway", "min_gap", "max_accel", "comfort_decel", "exponent"}},
  {"leader", {"s", "speed", "jitter"}},
  {"trigger", {"controller", "head", "onset_start", "onset_end", "approach_min",
      "approach_max", "yellow"}},
  {"bridge", {"macro_dt", "micro_dt", "vicinity_radius", "transport", "endpoint", "capture"}},
  {"ssm", {"ttc", "drac", "hangover", "ttc_window", "match_radius"}},
};

template<typename T>
void read(const pt::ptree & tree, const std::string & key, T & out)
{
  if (auto v = tree.get_optional<std::string>(key)) {
    std::istringstream in(*v);
    T parsed{};
    in >> parsed;
    if (!in || !(in >> std::ws).eof()) {
      throw ConfigError("config key '" + key + "' has an invalid value '" + *v + "'");
    }
    out = parsed;
  }
}

void read_text(const pt::ptree & tree, const std::string & key, std::string & out)
{
  if (auto v = tree.get_optional<std::string>(key)) {
    out = std::string(trim(*v));
  }
}

std::string resolve(const fs::path & base, const std::string & p)
{
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal().string();
}

std::string format_value(double v)
{
  return format_double(v);
}

}  // namespace

void ScenarioConfig::validate() const
{
  if (!(mu > 0.0 && mu <= 1.0)) {
    throw ConfigError("mu must lie in (0, 1]");
  }
  if (!(visibility > 0.0)) {
    throw ConfigError("visibility must be > 0");
  }
  if (replications < 1) {
    throw ConfigError("replications must be >= 1");
  }
  if (!(duration > 0.0)) {
    throw ConfigError("duration must be > 0");
  }
  if (network_path.empty()) {
    throw ConfigError("scenario needs a network file");
  }
  if (trips_path && counts_path) {
    throw ConfigError("give either a trip file or a count file, not both");
  }
  if (ego.route.empty() || !(ego.length > 0.0) || !(ego.gap > 0.0) || ego.speed < 0.0 ||
    !(ego.desired_speed > 0.0))
  {
    throw ConfigError("ego needs a route, length > 0, gap > 0, speed >= 0, desired speed > 0");
  }
  if (!(leader.jitter >= 0.0) || leader.speed - leader.jitter < 0.0) {
    throw ConfigError("leader speed jitter must be >= 0 and keep the speed non-negative");
  }
  if (!(trigger.onset_start >= 0.0 && trigger.onset_start <= trigger.onset_end &&
    trigger.onset_end <= duration))
  {
    throw ConfigError("trigger onset window must lie inside the simulation horizon");
  }
  if (!(trigger.approach_min >= 0.0 && trigger.approach_min <= trigger.approach_max)) {
    throw ConfigError("trigger approach window is empty");
  }
  if (!(trigger.yellow > 0.0)) {
    throw ConfigError("trigger yellow must be > 0");
  }
  if (!(match_radius > 0.0) || !(episodes.hangover >= 0.0)) {
    throw ConfigError("match radius must be > 0 and hangover >= 0");
  }
  bridge.validate();
  macro_steps(duration, bridge.macro_dt);
  EgoConfig probe;
  probe.idm = ego.idm;
  probe.idm.desired_speed = ego.desired_speed;
  probe.sensor.range = visibility;
  probe.limits.mu = mu;
  probe.driver = ego.driver;
  probe.validate();
}

ScenarioConfig load_scenario_config(const std::string & path)
{
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(path, tree);
  } catch (const pt::ini_parser_error & e) {
    if (e.line() == 0) {
      throw IoError("cannot read scenario config", path);
    }
    throw ParseError(e.message(), e.line());
  }
  for (const auto & [section, body] : tree) {
    auto known = kKnownKeys.find(section);
    if (known == kKnownKeys.end()) {
      throw ConfigError("unknown config section [" + section + "]");
    }
    for (const auto & [key, value] : body) {
      if (!known->second.count(key)) {
        throw ConfigError("unknown config key '" + section + "." + key + "'");
      }
    }
  }
  const auto base = fs::absolute(fs::path(path)).parent_path();
  ScenarioConfig c;
  read_text(tree, "scenario.name", c.name);
  std::string network, trips, counts;
  read_text(tree, "scenario.network", network);
  read_text(tree, "scenario.trips", trips);
  read_text(tree, "scenario.counts", counts);
  if (!network.empty()) {
    c.network_path = resolve(base, network);
  }
  if (!trips.empty()) {
    c.trips_path = resolve(base, trips);
  }
  if (!counts.empty()) {
    c.counts_path = resolve(base, counts);
  }
  read(tree, "scenario.mu", c.mu);
  read(tree, "scenario.visibility", c.visibility);
  read(tree, "scenario.seed", c.seed);
  read(tree, "scenario.replications", c.replications);
  read(tree, "scenario.duration", c.duration);
  read(tree, "scenario.max_route_links", c.max_route_links);
  read(tree, "scenario.workers", c.workers);

  std::string route;
  read_text(tree, "ego.route", route);
  if (!route.empty()) {
    c.ego.route.clear();
    for (const auto & l : split(route, ',')) {
      c.ego.route.emplace_back(trim(l));
    }
  }
  read(tree, "ego.lane", c.ego.lane);
  read(tree, "ego.speed", c.ego.speed);
  read(tree, "ego.desired_speed", c.ego.desired_speed);
  read(tree, "ego.length", c.ego.length);
  read(tree, "ego.gap", c.ego.gap);
  read(tree, "ego.kp", c.ego.driver.kp);
  read(tree, "ego.ki", c.ego.driver.ki);
  read(tree, "ego.tau", c.ego.driver.tau);
  read(tree, "ego.time_headway", c.ego.idm.time_headway);
  read(tree, "ego.min_gap", c.ego.idm.min_gap);
  read(tree, "ego.max_accel", c.ego.idm.max_accel);
  read(tree, "ego.comfort_decel", c.ego.idm.comfort_decel);
  read(tree, "ego.exponent", c.ego.idm.exponent);

  read(tree, "leader.s", c.leader.s);
  read(tree, "leader.speed", c.leader.speed);
  read(tree, "leader.jitter", c.leader.jitter);

  read_text(tree, "trigger.controller", c.trigger.controller);
  read_text(tree, "trigger.head", c.trigger.head);
  read(tree, "trigger.onset_start", c.trigger.onset_start);
  read(tree, "trigger.onset_end", c.trigger.onset_end);
  read(tree, "trigger.approach_min", c.trigger.approach_min);
  read(tree, "trigger.approach_max", c.trigger.approach_max);
  read(tree, "trigger.yellow", c.trigger.yellow);

  read(tree, "bridge.macro_dt", c.bridge.macro_dt);
  read(tree, "bridge.micro_dt", c.bridge.micro_dt);
  read(tree, "bridge.vicinity_radius", c.bridge.vicinity_radius);
  std::string transport;
  read_text(tree, "bridge.transport", transport);
  if (transport == "stream") {
    c.bridge.transport = TransportKind::stream;
  } else if (transport.empty() || transport == "in_process") {
    c.bridge.transport = TransportKind::in_process;
  } else {
    throw ConfigError("bridge.transport must be in_process or stream");
  }
  read_text(tree, "bridge.endpoint", c.bridge.endpoint);
  std::string capture;
  read_text(tree, "bridge.capture", capture);
  if (!capture.empty()) {
    c.bridge.capture_path = resolve(base, capture);
  }

  read(tree, "ssm.ttc", c.episodes.thresholds.ttc);
  read(tree, "ssm.drac", c.episodes.thresholds.drac);
  read(tree, "ssm.hangover", c.episodes.hangover);
  read(tree, "ssm.ttc_window", c.episodes.ttc_window);
  read(tree, "ssm.match_radius", c.match_radius);
  c.validate();
  return c;
}

std::uint64_t replication_seed(std::uint64_t seed, int replication)
{
  return seed ^ static_cast<std::uint64_t>(replication);
}

std::mt19937_64 make_stream(std::uint64_t sub_seed, RandomStream stream)
{
  const auto s = static_cast<std::uint64_t>(stream);
  std::seed_seq seq{
    static_cast<std::uint32_t>(sub_seed), static_cast<std::uint32_t>(sub_seed >> 32),
    static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32)};
  return std::mt19937_64(seq);
}

ScenarioInputs load_inputs(const ScenarioConfig & cfg)
{
  ScenarioInputs in;
  in.network = std::make_shared<const RoadNetwork>(load_network(read_file(cfg.network_path)));
  if (cfg.trips_path) {
    auto s = parse_trip_file(read_file(*cfg.trips_path));
    check_schedule(s, *in.network);
    in.trips = std::move(s);
  }
  if (cfg.counts_path) {
    in.counts = ingest_counts(read_file(*cfg.counts_path), *in.network);
    in.candidates = candidate_routes(*in.network, cfg.max_route_links);
  }
  return in;
}

namespace
{

// Route coordinate of the trigger head's stop line, if it lies on the route.
std::optional<double> stop_line_on_route(
  const TrafficWorld & world, const std::vector<std::string> & route, const SignalHead & head)
{
  for (std::size_t j = 0; j < route.size(); ++j) {
    if (route[j] == head.link) {
      return world.route_offset(route, j) + head.stop_line_s;
    }
  }
  return std::nullopt;
}

}  // namespace

ReplicationResult run_replication(
  const ScenarioConfig & cfg, const ScenarioInputs & inputs, int replication)
{
  const auto & net = *inputs.network;
  const auto * head = net.find_signal(cfg.trigger.head);
  if (!head || head->controller != cfg.trigger.controller) {
    throw ScenarioError(
      "trigger head '" + cfg.trigger.head + "' is not driven by controller '" +
      cfg.trigger.controller + "'");
  }
  if (std::find(cfg.ego.route.begin(), cfg.ego.route.end(), head->link) == cfg.ego.route.end()) {
    throw ScenarioError("no trigger signal on the ego route");
  }

  ReplicationResult out;
  out.replication = replication;
  out.sub_seed = replication_seed(cfg.seed, replication);
  auto jitter_rng = make_stream(out.sub_seed, RandomStream::leader_jitter);
  auto demand_rng = make_stream(out.sub_seed, RandomStream::demand);

  TrafficConfig tcfg;
  tcfg.dt = cfg.bridge.macro_dt;
  TrafficWorld world(inputs.network, tcfg);
  if (inputs.trips) {
    world.set_schedule(*inputs.trips);
  } else if (!inputs.counts.empty()) {
    out.demand = sample_routes(inputs.counts, inputs.candidates, cfg.duration, demand_rng);
    world.set_schedule(to_schedule(*out.demand, inputs.candidates));
  }

  std::uniform_real_distribution<double> jitter(-cfg.leader.jitter, cfg.leader.jitter);
  const double dv = cfg.leader.jitter > 0.0 ? jitter(jitter_rng) : 0.0;
  out.leader_speed = cfg.leader.speed + dv;
  VehicleState leader;
  leader.id = kLeaderId;
  leader.route = cfg.ego.route;
  leader.lane = cfg.ego.lane;
  leader.route_s = cfg.leader.s;
  leader.v = out.leader_speed;
  leader.desired_speed = out.leader_speed;
  world.add_vehicle(leader);

  EgoSetup ego;
  ego.state = EgoState::at(
    kEgoId, cfg.leader.s - leader.length - cfg.ego.gap, cfg.ego.speed, cfg.ego.length);
  if (ego.state.s < 0.0) {
    throw ScenarioError("ego would start before the beginning of its route");
  }
  ego.route = cfg.ego.route;
  ego.lane = cfg.ego.lane;
  ego.config.idm = cfg.ego.idm;
  ego.config.idm.desired_speed = cfg.ego.desired_speed;
  ego.config.sensor.range = cfg.visibility;
  ego.config.limits.mu = cfg.mu;
  ego.config.driver = cfg.ego.driver;

  const auto trigger = cfg.trigger;
  const auto route = cfg.ego.route;
  auto fired = std::make_shared<std::optional<double>>();
  TickHook hook = [trigger, route, head, fired](TrafficWorld & w, std::int64_t) {
      if (*fired) {
        return;
      }
      const double t = w.time();
      if (t < trigger.onset_start - 1e-9 || t > trigger.onset_end + 1e-9) {
        return;
      }
      const auto lead = leader_of(w, kEgoId, LeaderScope::vehicles_only);
      if (!lead) {
        return;
      }
      const auto stop = stop_line_on_route(w, route, *head);
      const auto pos = route_position(w, route, *w.find(lead->leader_id));
      if (!stop || !pos) {
        return;
      }
      const double d = *stop - *pos;
      auto * ctrl = w.find_controller(trigger.controller);
      if (d >= trigger.approach_min && d <= trigger.approach_max &&
        w.head_color(trigger.head) == SignalColor::green && ctrl->force_yellow(trigger.yellow))
      {
        *fired = t;
      }
    };

  out.logs = run_lockstep(world, {ego}, cfg.bridge, cfg.duration, cfg.episodes.thresholds, hook);
  out.trigger_time = *fired;
  out.episodes = detect_episodes_by_ego(out.logs.ssm, cfg.episodes);
  return out;
}

ScenarioResult run_scenario(const ScenarioConfig & cfg)
{
  cfg.validate();
  ScenarioResult result;
  result.config = cfg;
  const auto inputs = load_inputs(cfg);
  result.replications.resize(static_cast<std::size_t>(cfg.replications));

  auto run_one = [&](int r) {
      try {
        result.replications[static_cast<std::size_t>(r)] = run_replication(cfg, inputs, r);
      } catch (const Error & e) {
        throw ScenarioError(
          "replication " + std::to_string(r) + ": " + e.kind() + ": " + e.what());
      }
    };
  unsigned workers = cfg.workers ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  if (cfg.bridge.capture_path) {
    workers = 1;  // a single capture file
  }
  for (int first = 0; first < cfg.replications; first += static_cast<int>(workers)) {
    std::vector<std::future<void>> batch;
    const int last = std::min(cfg.replications, first + static_cast<int>(workers));
    for (int r = first; r < last; ++r) {
      batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred,
          run_one, r));
    }
    for (auto & f : batch) {
      f.get();
    }
  }

  std::vector<ReplicationEpisodes> runs;
  for (const auto & rep : result.replications) {
    if (!rep.trigger_time) {
      result.diagnostics.push_back(
        "scenario-miss: replication " + std::to_string(rep.replication) +
        " never armed the trigger");
    }
    runs.push_back({rep.replication, rep.episodes});
  }
  try {
    result.summary = summarize(cfg.name, runs, cfg.match_radius);
  } catch (const EmptySummaryError & e) {
    result.diagnostics.push_back(e.what());
  }
  return result;
}

void SweepSpec::validate() const
{
  if (values.empty()) {
    throw ConfigError("sweep needs at least one value");
  }
  const bool up = values.size() < 2 || values[1] > values[0];
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (up ? !(values[i] > values[i - 1]) : !(values[i] < values[i - 1])) {
      throw ConfigError("sweep values must be strictly monotone");
    }
  }
  for (double v : values) {
    sweep_point(*this, v).validate();
  }
}

SweepAxis parse_axis(const std::string & text)
{
  if (text == "mu") {
    return SweepAxis::mu;
  }
  if (text == "visibility") {
    return SweepAxis::visibility;
  }
  throw ConfigError("sweep axis must be mu or visibility, got '" + text + "'");
}

const char * to_string(SweepAxis axis)
{
  return axis == SweepAxis::mu ? "mu" : "visibility";
}

ScenarioConfig sweep_point(const SweepSpec & spec, double value)
{
  auto c = spec.base;
  if (spec.axis == SweepAxis::mu) {
    c.mu = value;
  } else {
    c.visibility = value;
  }
  c.name = std::string(to_string(spec.axis)) + "=" + format_value(value);
  return c;
}

std::vector<ScenarioResult> sweep(const SweepSpec & spec)
{
  spec.validate();
  std::vector<ScenarioResult> out;
  for (double v : spec.values) {
    try {
      out.push_back(run_scenario(sweep_point(spec, v)));
    } catch (const Error & e) {
      throw ScenarioError(
        std::string(to_string(spec.axis)) + "=" + format_value(v) + ": " + e.what());
    }
  }
  return out;
}

std::string episode_plot_csv(const std::vector<SsmSample> & ssm, const ConflictEpisode & ep)
{
  std::ostringstream out;
  out << "t,gap,v,v_lead,ttc,drac\n";
  for (const auto & x : ssm) {
    if (x.ego != ep.ego || x.t < ep.start || x.t > ep.end) {
      continue;
    }
    out << format_double(x.t) << ',' << format_double(x.gap) << ',' << format_double(x.v) << ','
        << format_double(x.v_lead) << ',' << format_double(x.ttc) << ','
        << format_double(x.drac) << '\n';
  }
  return out.str();
}

void export_results(
  const std::string & dir, const std::vector<const ScenarioResult *> & results, bool nested)
{
  std::vector<std::pair<std::string, ReplicationEpisodes>> episode_rows;
  std::vector<SsmSummary> summaries;
  for (const auto * res : results) {
    const fs::path root = nested ? fs::path(dir) / res->config.name : fs::path(dir);
    for (const auto & rep : res->replications) {
      const auto run = root / ("run_" + std::to_string(rep.replication));
      write_file((run / "trajectory.csv").string(), trajectory_csv(rep.logs.trajectory));
      write_file((run / "ssm.csv").string(), ssm_csv(rep.logs.ssm));
      for (const auto & [id, trace] : rep.logs.ego_traces) {
        const auto name = rep.logs.ego_traces.size() == 1 ? "ego_trace.csv" :
          "ego_trace_" + id + ".csv";
        write_file((run / name).string(), ego_trace_csv(trace));
      }
      for (std::size_t i = 0; i < rep.episodes.size(); ++i) {
        write_file((run / ("episode_" + std::to_string(i) + ".csv")).string(),
          episode_plot_csv(rep.logs.ssm, rep.episodes[i]));
      }
      episode_rows.push_back({res->config.name, {rep.replication, rep.episodes}});
    }
    if (res->summary) {
      summaries.push_back(*res->summary);
    }
  }
  write_file((fs::path(dir) / "episodes.csv").string(), episodes_csv(episode_rows));
  if (!summaries.empty()) {
    write_file((fs::path(dir) / "summary.csv").string(), summary_csv(summaries));
  }
}

}  // namespace safetwin
