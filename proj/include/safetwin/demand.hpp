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

#ifndef SAFETWIN__DEMAND_HPP_
#define SAFETWIN__DEMAND_HPP_

#include "safetwin/net_model.hpp"
#include "safetwin/traffic.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace safetwin
{

/// Observed volume at one detector over [t_start, t_end).
struct CountConstraint
{
  std::string detector;
  double t_start = 0.0;
  double t_end = 0.0;
  std::int64_t count = 0;
  bool operator==(const CountConstraint &) const = default;
};

/// Reads `detector,start,end,count` rows (an optional header row is
/// skipped). Rows with the same detector and interval are summed.
/// ParseError carries the 1-based row number; unknown detectors raise
/// ReferenceError.
std::vector<CountConstraint> ingest_counts(std::string_view text, const RoadNetwork & net);

struct CandidateRoute
{
  std::string id;
  std::vector<std::string> links;
  std::vector<std::string> detectors;  // detectors on the route's links
  bool operator==(const CandidateRoute &) const = default;
};

/// Builds a candidate from a link path; the id joins the link ids with '_'.
CandidateRoute make_candidate(const RoadNetwork & net, std::vector<std::string> links);

/// Every entry-to-exit simple path of at most `max_links` links, sorted by id.
std::vector<CandidateRoute> candidate_routes(const RoadNetwork & net, std::size_t max_links = 8);

struct DemandTrip
{
  std::string route;
  double departure = 0.0;
  bool operator==(const DemandTrip &) const = default;
};

struct TripSet
{
  /// Sorted by departure, then route id.
  std::vector<DemandTrip> trips;
  /// Recounted volume per constraint, in constraint order.
  std::vector<std::int64_t> achieved;
  /// Sum of |achieved - count|.
  std::int64_t deviation = 0;
  /// False only if the search budget ran out before optimality was proven.
  bool optimal = true;
  /// Counted detectors that no candidate route passes.
  std::vector<std::string> unreachable;
  /// Trips per candidate route id, for routes used at least once.
  std::vector<std::pair<std::string, std::int64_t>> multiplicities;
};

struct SampleOptions
{
  /// Throw CoverageError when a counted detector is unreachable; otherwise
  /// report it in TripSet::unreachable.
  bool strict_coverage = true;
  /// Branch-and-bound node budget per independent subproblem.
  std::int64_t node_budget = 20'000'000;
};

/// Integer route multiplicities minimising the L1 count deviation, solved
/// exactly by branch and bound. Ties prefer more trips on routes earlier in
/// id order. Departures are uniform inside each elementary count interval.
TripSet sample_routes(
  const std::vector<CountConstraint> & counts, const std::vector<CandidateRoute> & candidates,
  double horizon, std::mt19937_64 & rng, const SampleOptions & options = {});

/// Volume each constraint sees from `trips`: trips whose route passes the
/// detector and whose departure lies in the interval.
std::vector<std::int64_t> recount(
  const std::vector<DemandTrip> & trips, const std::vector<CandidateRoute> & candidates,
  const std::vector<CountConstraint> & counts);

struct FitConfig
{
  double envelope = 0.15;          // relative deviation allowed
  std::int64_t small_floor = 2;    // absolute deviation allowed for small targets
  std::int64_t small_below = 14;   // targets below this are small
};

struct FitRow
{
  CountConstraint target;
  std::int64_t achieved = 0;
  std::int64_t abs_deviation = 0;
  double rel_deviation = 0.0;
  bool pass = true;
};

struct FitReport
{
  std::vector<FitRow> rows;
  bool pass = true;
};

FitReport evaluate_fit(
  const TripSet & trips, const std::vector<CandidateRoute> & candidates,
  const std::vector<CountConstraint> & counts, const FitConfig & cfg = {});

/// Trip schedule for the traffic layer; vehicles use `vehicle_type`.
TripSchedule to_schedule(
  const TripSet & trips, const std::vector<CandidateRoute> & candidates,
  const std::string & vehicle_type = "car");

}  // namespace safetwin

#endif  // SAFETWIN__DEMAND_HPP_
