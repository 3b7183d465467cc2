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

#ifndef SAFETWIN__NET_MODEL_HPP_
#define SAFETWIN__NET_MODEL_HPP_

#include <string>
#include <string_view>
#include <vector>

namespace safetwin
{

// Road geometry is one-dimensional per lane: every position is an arc length
// `s` measured from the upstream end of a link. SI units throughout.

struct Node
{
  std::string id;
  bool operator==(const Node &) const = default;
};

struct Link
{
  std::string id;
  std::string from_node;
  std::string to_node;
  double length = 0.0;      // m
  int lane_count = 1;
  double speed_limit = 0.0;  // m/s
  bool operator==(const Link &) const = default;
};

struct SignalHead
{
  std::string id;
  std::string link;
  int lane = 0;
  double stop_line_s = 0.0;  // m
  std::string controller;
  bool operator==(const SignalHead &) const = default;
};

struct DetectorZone
{
  std::string id;
  std::string link;
  double position_s = 0.0;  // m
  bool operator==(const DetectorZone &) const = default;
};

enum class ControlMode { fixed, actuated };

struct PhaseSpec
{
  double green = 0.0;    // s, fixed-time green
  double yellow = 0.0;   // s
  double all_red = 0.0;  // s
  std::vector<std::string> heads;
  /// Detectors that extend this phase in actuated mode. Empty means every
  /// detector on the links of `heads`.
  std::vector<std::string> detectors;
  bool operator==(const PhaseSpec &) const = default;
};

/// Signal timing plan shared by both simulation layers.
struct ControllerPlan
{
  std::string id;
  ControlMode mode = ControlMode::fixed;
  double min_green = 0.0;      // actuated only
  double max_green = 0.0;      // actuated only
  double extension_gap = 0.0;  // actuated only
  std::vector<PhaseSpec> phases;
  bool operator==(const ControllerPlan &) const = default;
};

struct RoadNetwork
{
  std::vector<Node> nodes;
  std::vector<Link> links;
  std::vector<SignalHead> signals;
  std::vector<DetectorZone> detectors;
  std::vector<ControllerPlan> controllers;

  const Node * find_node(std::string_view id) const;
  const Link * find_link(std::string_view id) const;
  const SignalHead * find_signal(std::string_view id) const;
  const DetectorZone * find_detector(std::string_view id) const;
  const ControllerPlan * find_controller(std::string_view id) const;

  /// Links leaving `node_id`, in declaration order.
  std::vector<const Link *> outgoing(std::string_view node_id) const;

  bool operator==(const RoadNetwork &) const = default;
};

/// Parses the native text format and validates it.
///
/// Throws ParseError (with line/column) for malformed input, ReferenceError
/// naming the first missing id for dangling references, and ValidationError
/// for any other invariant violation.
RoadNetwork load_network(std::string_view text);

/// Writes the canonical native text. `load_network(export_native(n)) == n`.
std::string export_native(const RoadNetwork & net);

/// Lists every invariant violation, sorted by entity id. Each entry starts
/// with "<kind> <id>:". Empty iff the network is valid.
std::vector<std::string> validate_network(const RoadNetwork & net);

/// Imports a restricted OpenDRIVE document: straight planView geometry,
/// one laneSection with right-hand driving lanes, and road-to-road
/// predecessor/successor linkage. Anything else raises
/// UnsupportedElementError naming the element.
RoadNetwork import_opendrive_subset(std::string_view xml);

/// All simple link paths from entry links (no inbound links at their
/// upstream node) to exit links (no outbound links downstream), with at most
/// `max_links` links each. Deterministic order.
std::vector<std::vector<std::string>> enumerate_simple_paths(
  const RoadNetwork & net, std::size_t max_links);

}  // namespace safetwin

#endif  // SAFETWIN__NET_MODEL_HPP_
