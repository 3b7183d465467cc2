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

#include "safetwin/common.hpp"
#include "safetwin/net_model.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

namespace safetwin
{

namespace
{

namespace pt = boost::property_tree;

constexpr double kDefaultSpeed = 13.89;  // 50 km/h
constexpr double kLengthTolerance = 1e-6;

bool is_meta(const std::string & key) { return key == "<xmlattr>" || key == "<xmlcomment>"; }

std::string attr(const pt::ptree & node, const std::string & name, const std::string & fallback)
{
  return node.get<std::string>("<xmlattr>." + name, fallback);
}

std::string required_attr(const pt::ptree & node, const std::string & element, const std::string & name)
{
  auto v = node.get_optional<std::string>("<xmlattr>." + name);
  if (!v) {
    throw ParseError("<" + element + "> is missing attribute '" + name + "'", 0);
  }
  return *v;
}

double number_attr(const pt::ptree & node, const std::string & element, const std::string & name)
{
  const auto text = required_attr(node, element, name);
  double v = 0.0;
  if (!parse_double(trim(text), v) || !std::isfinite(v)) {
    throw ParseError("<" + element + "> attribute '" + name + "' is not a number", 0);
  }
  return v;
}

struct RoadRecord
{
  std::string id;
  double length = 0.0;
  int driving_lanes = 0;
  double speed = kDefaultSpeed;
  struct Neighbor
  {
    std::string road;
    bool at_start = true;  // contact point on the neighbor
  };
  std::optional<Neighbor> predecessor;
  std::optional<Neighbor> successor;
};

double speed_in_mps(double value, const std::string & unit)
{
  if (unit.empty() || unit == "m/s") {
    return value;
  }
  if (unit == "km/h") {
    return value / 3.6;
  }
  if (unit == "mph") {
    return value * 0.44704;
  }
  throw UnsupportedElementError("speed unit " + unit);
}

RoadRecord::Neighbor read_neighbor(const pt::ptree & node, const std::string & element, bool default_start)
{
  for (const auto & [key, child] : node) {
    if (!is_meta(key)) {
      throw UnsupportedElementError(key);
    }
  }
  const auto type = attr(node, "elementType", "road");
  if (type == "junction") {
    throw UnsupportedElementError("junction");
  }
  if (type != "road") {
    throw UnsupportedElementError("elementType " + type);
  }
  RoadRecord::Neighbor n;
  n.road = required_attr(node, element, "elementId");
  const auto cp = attr(node, "contactPoint", default_start ? "start" : "end");
  if (cp != "start" && cp != "end") {
    throw ParseError("<" + element + "> has invalid contactPoint '" + cp + "'", 0);
  }
  n.at_start = cp == "start";
  return n;
}

int count_driving_lanes(const pt::ptree & section)
{
  int driving = 0;
  for (const auto & [side, group] : section) {
    if (is_meta(side)) {
      continue;
    }
    if (side != "left" && side != "center" && side != "right") {
      throw UnsupportedElementError(side);
    }
    for (const auto & [key, lane] : group) {
      if (is_meta(key)) {
        continue;
      }
      if (key != "lane") {
        throw UnsupportedElementError(key);
      }
      if (attr(lane, "type", "none") != "driving") {
        continue;
      }
      if (side == "left") {
        // links are one-directional; opposing traffic is not represented
        throw UnsupportedElementError("left driving lane");
      }
      if (side == "right") {
        ++driving;
      }
    }
  }
  return driving;
}

RoadRecord read_road(const pt::ptree & road)
{
  RoadRecord r;
  r.id = required_attr(road, "road", "id");
  if (r.id.empty() || r.id.find_first_of(" \t\n=,#") != std::string::npos) {
    throw ParseError("road id '" + r.id + "' cannot be used as a link id", 0);
  }
  const auto junction = attr(road, "junction", "-1");
  if (junction != "-1") {
    throw UnsupportedElementError("junction");
  }
  double geometry_length = 0.0;
  bool saw_lanes = false;
  for (const auto & [key, child] : road) {
    if (is_meta(key)) {
      continue;
    }
    if (key == "link") {
      for (const auto & [lk, lchild] : child) {
        if (is_meta(lk)) {
          continue;
        }
        if (lk == "predecessor") {
          r.predecessor = read_neighbor(lchild, lk, false);
        } else if (lk == "successor") {
          r.successor = read_neighbor(lchild, lk, true);
        } else {
          throw UnsupportedElementError(lk);
        }
      }
    } else if (key == "type") {
      for (const auto & [tk, tchild] : child) {
        if (is_meta(tk)) {
          continue;
        }
        if (tk != "speed") {
          throw UnsupportedElementError(tk);
        }
        r.speed = speed_in_mps(number_attr(tchild, "speed", "max"), attr(tchild, "unit", ""));
      }
    } else if (key == "planView") {
      for (const auto & [gk, geom] : child) {
        if (is_meta(gk)) {
          continue;
        }
        if (gk != "geometry") {
          throw UnsupportedElementError(gk);
        }
        int shapes = 0;
        for (const auto & [shape, unused] : geom) {
          if (is_meta(shape)) {
            continue;
          }
          if (shape != "line") {
            throw UnsupportedElementError(shape);
          }
          ++shapes;
        }
        if (shapes != 1) {
          throw ParseError("<geometry> must contain exactly one <line>", 0);
        }
        const double len = number_attr(geom, "geometry", "length");
        if (!(len > 0.0)) {
          throw ParseError("<geometry> length must be > 0", 0);
        }
        geometry_length += len;
      }
    } else if (key == "lanes") {
      for (const auto & [sk, section] : child) {
        if (is_meta(sk)) {
          continue;
        }
        if (sk != "laneSection") {
          throw UnsupportedElementError(sk);
        }
        if (saw_lanes) {
          throw UnsupportedElementError("laneSection (more than one)");
        }
        saw_lanes = true;
        r.driving_lanes = count_driving_lanes(section);
      }
    } else {
      throw UnsupportedElementError(key);
    }
  }
  if (geometry_length <= 0.0) {
    throw ParseError("road " + r.id + " has no planView geometry", 0);
  }
  r.length = geometry_length;
  if (auto declared = road.get_optional<std::string>("<xmlattr>.length")) {
    double v = 0.0;
    if (!parse_double(trim(*declared), v)) {
      throw ParseError("road " + r.id + " length is not a number", 0);
    }
    if (std::abs(v - geometry_length) > kLengthTolerance) {
      throw ParseError("road " + r.id + " length does not match its geometry", 0);
    }
    r.length = v;
  }
  if (r.driving_lanes < 1) {
    throw ParseError("road " + r.id + " has no right-hand driving lane", 0);
  }
  return r;
}

// Union-find over road endpoints: index 2*i is road i's start, 2*i+1 its end.
class EndpointSets
{
public:
  explicit EndpointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x)
  {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b)
  {
    a = find(a);
    b = find(b);
    if (a != b) {
      parent_[std::max(a, b)] = std::min(a, b);
    }
  }

private:
  std::vector<std::size_t> parent_;
};

}  // namespace

RoadNetwork import_opendrive_subset(std::string_view xml)
{
  pt::ptree doc;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, doc);
  } catch (const pt::xml_parser_error & e) {
    throw ParseError("malformed XML: " + e.message(), e.line());
  }
  const pt::ptree * root = nullptr;
  for (const auto & [key, child] : doc) {
    if (key == "OpenDRIVE") {
      if (root) {
        throw ParseError("more than one <OpenDRIVE> root", 0);
      }
      root = &child;
    } else if (!is_meta(key)) {
      throw UnsupportedElementError(key);
    }
  }
  if (!root) {
    throw ParseError("missing <OpenDRIVE> root element", 0);
  }

  std::vector<RoadRecord> roads;
  for (const auto & [key, child] : *root) {
    if (is_meta(key) || key == "header") {
      continue;
    }
    if (key != "road") {
      throw UnsupportedElementError(key);
    }
    roads.push_back(read_road(child));
  }

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < roads.size(); ++i) {
    if (!index.emplace(roads[i].id, i).second) {
      throw ParseError("duplicate road id '" + roads[i].id + "'", 0);
    }
  }
  EndpointSets sets(2 * roads.size());
  auto endpoint = [&](const RoadRecord::Neighbor & n) {
      auto it = index.find(n.road);
      if (it == index.end()) {
        throw ReferenceError("road link references unknown road '" + n.road + "'", n.road);
      }
      return 2 * it->second + (n.at_start ? 0 : 1);
    };
  for (std::size_t i = 0; i < roads.size(); ++i) {
    if (roads[i].predecessor) {
      sets.unite(2 * i, endpoint(*roads[i].predecessor));
    }
    if (roads[i].successor) {
      sets.unite(2 * i + 1, endpoint(*roads[i].successor));
    }
  }

  RoadNetwork net;
  std::map<std::size_t, std::string> node_names;
  auto node_of = [&](std::size_t ep) {
      const auto root_ep = sets.find(ep);
      auto it = node_names.find(root_ep);
      if (it == node_names.end()) {
        std::string name = "n" + std::to_string(node_names.size());
        net.nodes.push_back({name});
        it = node_names.emplace(root_ep, std::move(name)).first;
      }
      return it->second;
    };
  for (std::size_t i = 0; i < roads.size(); ++i) {
    Link l;
    l.id = roads[i].id;
    l.from_node = node_of(2 * i);
    l.to_node = node_of(2 * i + 1);
    l.length = roads[i].length;
    l.lane_count = roads[i].driving_lanes;
    l.speed_limit = roads[i].speed;
    net.links.push_back(std::move(l));
  }
  if (auto violations = validate_network(net); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }
  return net;
}

}  // namespace safetwin
