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

#ifndef SAFETWIN__SSM_HPP_
#define SAFETWIN__SSM_HPP_

#include "safetwin/net_model.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace safetwin
{

/// Time to collision S / (v - v_lead); +inf unless closing. Throws
/// DomainError for gap <= 0.
double ttc(double gap, double v, double v_lead);

/// Deceleration rate to avoid a crash (v - v_lead)^2 / (2 S); 0 unless
/// closing. Throws DomainError for gap <= 0.
double drac(double gap, double v, double v_lead);

struct Thresholds
{
  double ttc = 3.0;   // s, conflict iff ttc < this
  double drac = 3.0;  // m/s^2, conflict iff drac > this
};

struct SsmSample
{
  double t = 0.0;
  std::string ego;
  std::string leader;
  double gap = 0.0;
  double v = 0.0;
  double v_lead = 0.0;
  double ttc = 0.0;
  double drac = 0.0;
  bool conflict = false;
  /// gap <= 0: ttc and drac are not defined and are stored as 0 and +inf.
  bool crash = false;
  std::string link;  // follower position
  double s = 0.0;
  bool operator==(const SsmSample &) const = default;
};

bool classify(const SsmSample & sample, const Thresholds & thresholds);

/// Builds a sample, evaluating ttc/drac and the conflict flag; a
/// non-positive gap yields a crash sample.
SsmSample make_sample(
  double t, std::string ego, std::string leader, double gap, double v, double v_lead,
  std::string link, double s, const Thresholds & thresholds);

struct CrashEvent
{
  double t = 0.0;
  std::string link;
  double s = 0.0;
};

std::optional<CrashEvent> detect_crash(double gap, double t = 0.0, std::string link = {}, double s = 0.0);

/// Bumper gap from a follower front at (follower_link, follower_s) to a
/// leader front at (leader_link, leader_s), measured along `route`. Uses
/// link-local positions so that values recomputed from a trajectory log are
/// bit-identical to online values.
double bumper_gap(
  const RoadNetwork & net, const std::vector<std::string> & route,
  std::string_view follower_link, double follower_s, std::string_view leader_link,
  double leader_s, double leader_length);

struct EpisodeConfig
{
  Thresholds thresholds;
  double hangover = 0.5;    // s
  double ttc_window = 5.0;  // extrema consider ttc in [0, ttc_window]
};

struct ConflictEpisode
{
  std::string ego;
  double start = 0.0;
  double end = 0.0;
  double min_ttc = 0.0;   // +inf if no ttc fell inside the window
  double max_drac = 0.0;
  std::string link;       // location of the min-ttc sample
  double s = 0.0;
  bool crashed = false;
  bool operator==(const ConflictEpisode &) const = default;
};

/// Episodes in a time-ordered single-ego stream. An episode opens at a
/// conflicting sample and ends at its last conflicting sample; a conflict
/// or crash more than `hangover` after that starts a new episode. A crash
/// sample closes the open episode (or forms one) and marks it crashed; crash
/// samples do not enter the extrema. Extrema use only samples with ttc in
/// [0, ttc_window]. Throws InputError if time decreases.
std::vector<ConflictEpisode> detect_episodes(
  const std::vector<SsmSample> & samples, const EpisodeConfig & cfg = {});

/// Splits a mixed stream by ego id and concatenates per-ego episodes in ego
/// order of first appearance.
std::vector<ConflictEpisode> detect_episodes_by_ego(
  const std::vector<SsmSample> & samples, const EpisodeConfig & cfg = {});

struct ReplicationEpisodes
{
  int replication = 0;
  std::vector<ConflictEpisode> episodes;
};

struct SsmSummary
{
  std::string scenario;
  int replications = 0;
  /// Per replication: the matched episode, if any.
  std::vector<std::optional<ConflictEpisode>> matched;
  int crashes = 0;
  int missing = 0;
  /// Population statistics over matched, non-crashed replications; NaN when
  /// every matched replication crashed.
  double mean_min_ttc = 0.0;
  double std_min_ttc = 0.0;
  double mean_max_drac = 0.0;
  double std_max_drac = 0.0;
  std::string link;  // location of the matched conflict
  double s = 0.0;
};

/// Picks the conflict location shared by the most replications (same link,
/// within +-match_radius metres) and aggregates each replication's worst
/// episode there. Throws EmptySummaryError if no episode matches.
SsmSummary summarize(
  const std::string & scenario, const std::vector<ReplicationEpisodes> & runs,
  double match_radius = 50.0);

/// Population mean and standard deviation; NaN for an empty input.
std::pair<double, double> mean_and_std(const std::vector<double> & values);

// CSV logs.
/// t,ego,gap,v,v_lead,ttc,drac,conflict,leader,link,s,crash
std::string ssm_csv(const std::vector<SsmSample> & samples);
std::vector<SsmSample> parse_ssm_csv(std::string_view text);

/// scenario,replication,start,end,min_ttc,max_drac,link,s,crashed,ego
std::string episodes_csv(
  const std::vector<std::pair<std::string, ReplicationEpisodes>> & rows);

/// Rows are statistics, one column per scenario.
std::string summary_csv(const std::vector<SsmSummary> & columns);

}  // namespace safetwin

#endif  // SAFETWIN__SSM_HPP_
