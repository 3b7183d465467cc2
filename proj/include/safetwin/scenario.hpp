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

#ifndef SAFETWIN__SCENARIO_HPP_
#define SAFETWIN__SCENARIO_HPP_

#include "safetwin/bridge.hpp"
#include "safetwin/demand.hpp"
#include "safetwin/ssm.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace safetwin
{

/// Forces a signal to turn red while the ego's leader approaches it.
struct HardBrakeTrigger
{
  std::string controller = "c1";
  std::string head = "h1m";
  double onset_start = 0.0;  // s, earliest firing time
  double onset_end = 10.0;   // s, latest firing time
  double approach_min = 40.0;  // m, leader front to stop line
  double approach_max = 70.0;
  double yellow = 0.1;  // s, shortened yellow before the red
};

struct EgoSpec
{
  std::vector<std::string> route{"m1", "m2", "m3", "m4"};
  int lane = 0;
  double speed = 20.0;          // m/s, initial
  double desired_speed = 20.0;  // m/s
  double length = 4.5;
  /// Initial bumper gap to the leader, m.
  double gap = 54.0;
  DriverParams driver;
  IdmParams idm;  // desired_speed is replaced by `desired_speed`
};

struct LeaderSpec
{
  double s = 300.0;       // m, front position along the ego route at t = 0
  double speed = 20.0;    // m/s, nominal initial and desired speed
  double jitter = 0.5;    // m/s, half-width of the uniform speed jitter
};

struct ScenarioConfig
{
  std::string name = "scenario";
  std::string network_path;
  std::optional<std::string> trips_path;
  std::optional<std::string> counts_path;
  double mu = 0.7;
  double visibility = 150.0;  // m
  std::uint64_t seed = 1;
  int replications = 10;
  double duration = 60.0;  // s
  EgoSpec ego;
  LeaderSpec leader;
  HardBrakeTrigger trigger;
  BridgeConfig bridge;
  EpisodeConfig episodes;
  double match_radius = 50.0;  // m
  std::size_t max_route_links = 8;
  /// Parallel replications; 0 picks the hardware concurrency.
  unsigned workers = 0;

  void validate() const;
};

/// Reads an INI file; relative paths resolve against the file's directory.
ScenarioConfig load_scenario_config(const std::string & path);

/// Seed of replication `r`: seed XOR r.
std::uint64_t replication_seed(std::uint64_t seed, int replication);

/// Independent generator for one randomness source of a replication.
enum class RandomStream : std::uint64_t { leader_jitter = 1, demand = 2 };
std::mt19937_64 make_stream(std::uint64_t sub_seed, RandomStream stream);

/// Network, candidate routes and counts shared by every replication.
struct ScenarioInputs
{
  std::shared_ptr<const RoadNetwork> network;
  std::optional<TripSchedule> trips;
  std::vector<CountConstraint> counts;
  std::vector<CandidateRoute> candidates;
};

ScenarioInputs load_inputs(const ScenarioConfig & cfg);

struct ReplicationResult
{
  int replication = 0;
  std::uint64_t sub_seed = 0;
  double leader_speed = 0.0;
  std::optional<double> trigger_time;
  RunLogs logs;
  std::vector<ConflictEpisode> episodes;
  std::optional<TripSet> demand;
};

/// A single replication: builds the world, runs the lockstep loop and
/// detects conflict episodes. Throws ScenarioError when the trigger signal
/// is not on the ego route.
ReplicationResult run_replication(
  const ScenarioConfig & cfg, const ScenarioInputs & inputs, int replication);

struct ScenarioResult
{
  ScenarioConfig config;
  std::vector<ReplicationResult> replications;
  std::optional<SsmSummary> summary;
  /// Human-readable notes, e.g. replications whose trigger never fired.
  std::vector<std::string> diagnostics;
};

/// Runs every replication. Module errors are rethrown as ScenarioError
/// naming the replication. A missing summary is reported in diagnostics.
ScenarioResult run_scenario(const ScenarioConfig & cfg);

enum class SweepAxis { mu, visibility };

struct SweepSpec
{
  ScenarioConfig base;
  SweepAxis axis = SweepAxis::mu;
  std::vector<double> values;
  void validate() const;
};

SweepAxis parse_axis(const std::string & text);
const char * to_string(SweepAxis axis);

/// Config of one sweep column; only the swept field differs from `base`.
ScenarioConfig sweep_point(const SweepSpec & spec, double value);

std::vector<ScenarioResult> sweep(const SweepSpec & spec);

/// Writes run_<k>/{trajectory,ssm,ego_trace}.csv plus per-episode plot data
/// under `dir`; episodes.csv and summary.csv cover every scenario given.
void export_results(const std::string & dir, const std::vector<const ScenarioResult *> & results,
  bool nested);

/// Episode plot data: t,gap,v,v_lead,ttc,drac for the ego samples inside
/// the episode window.
std::string episode_plot_csv(const std::vector<SsmSample> & ssm, const ConflictEpisode & ep);

}  // namespace safetwin

#endif  // SAFETWIN__SCENARIO_HPP_
