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

#include "safetwin/net_model.hpp"

#include "safetwin/common.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace safetwin
{

namespace
{

template <typename T>
const T * find_by_id(const std::vector<T> & items, std::string_view id)
{
  for (const auto & item : items) {
    if (item.id == id) {
      return &item;
    }
  }
  return nullptr;
}

struct Violation
{
  std::string entity_id;
  std::string text;
  std::optional<std::string> missing_id;
};

std::vector<Violation> collect_violations(const RoadNetwork & net)
{
  std::vector<Violation> out;
  auto add = [&out](
               const std::string & kind, const std::string & id, const std::string & msg,
               std::optional<std::string> missing = std::nullopt) {
      out.push_back({id, kind + " " + id + ": " + msg, std::move(missing)});
    };
  auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };

  std::set<std::string> seen;
  for (const auto & n : net.nodes) {
    if (!seen.insert(n.id).second) {
      add("node", n.id, "duplicate node id");
    }
  }
  seen.clear();
  for (const auto & l : net.links) {
    if (!seen.insert(l.id).second) {
      add("link", l.id, "duplicate link id");
    }
    if (!net.find_node(l.from_node)) {
      add("link", l.id, "from_node '" + l.from_node + "' does not exist", l.from_node);
    }
    if (!net.find_node(l.to_node)) {
      add("link", l.id, "to_node '" + l.to_node + "' does not exist", l.to_node);
    }
    if (!positive(l.length)) {
      add("link", l.id, "length must be > 0");
    }
    if (l.lane_count < 1) {
      add("link", l.id, "lane_count must be >= 1");
    }
    if (!positive(l.speed_limit)) {
      add("link", l.id, "speed_limit must be > 0");
    }
  }
  seen.clear();
  for (const auto & h : net.signals) {
    if (!seen.insert(h.id).second) {
      add("signal", h.id, "duplicate signal id");
    }
    const Link * link = net.find_link(h.link);
    if (!link) {
      add("signal", h.id, "link '" + h.link + "' does not exist", h.link);
    } else {
      if (h.lane < 0 || h.lane >= link->lane_count) {
        add("signal", h.id, "lane " + std::to_string(h.lane) + " outside link " + h.link);
      }
      if (!(h.stop_line_s >= 0.0 && h.stop_line_s <= link->length)) {
        add(
          "signal", h.id,
          "stop_line_s " + format_double(h.stop_line_s) + " outside link " + h.link +
          " (length " + format_double(link->length) + ")");
      }
    }
    const ControllerPlan * ctrl = net.find_controller(h.controller);
    if (!ctrl) {
      add("signal", h.id, "controller '" + h.controller + "' does not exist", h.controller);
    } else {
      bool served = false;
      for (const auto & p : ctrl->phases) {
        served = served || std::find(p.heads.begin(), p.heads.end(), h.id) != p.heads.end();
      }
      if (!served) {
        add("signal", h.id, "not served by any phase of controller " + h.controller);
      }
    }
  }
  seen.clear();
  for (const auto & d : net.detectors) {
    if (!seen.insert(d.id).second) {
      add("detector", d.id, "duplicate detector id");
    }
    const Link * link = net.find_link(d.link);
    if (!link) {
      add("detector", d.id, "link '" + d.link + "' does not exist", d.link);
    } else if (!(d.position_s >= 0.0 && d.position_s <= link->length)) {
      add("detector", d.id, "position_s outside link " + d.link);
    }
  }
  seen.clear();
  for (const auto & c : net.controllers) {
    if (!seen.insert(c.id).second) {
      add("controller", c.id, "duplicate controller id");
    }
    if (c.phases.empty()) {
      add("controller", c.id, "phase table is empty");
    }
    if (c.mode == ControlMode::actuated) {
      if (!positive(c.min_green) || !positive(c.max_green) || !positive(c.extension_gap)) {
        add("controller", c.id, "actuated timings must be > 0");
      } else if (c.min_green > c.max_green) {
        add("controller", c.id, "min_green exceeds max_green");
      }
    }
    for (std::size_t i = 0; i < c.phases.size(); ++i) {
      const auto & p = c.phases[i];
      const std::string tag = "phase " + std::to_string(i) + " ";
      if (c.mode == ControlMode::fixed && !positive(p.green)) {
        add("controller", c.id, tag + "green must be > 0");
      }
      if (!positive(p.yellow) || !positive(p.all_red)) {
        add("controller", c.id, tag + "yellow and all-red must be > 0");
      }
      for (const auto & head : p.heads) {
        const SignalHead * h = net.find_signal(head);
        if (!h) {
          add("controller", c.id, tag + "head '" + head + "' does not exist", head);
        } else if (h->controller != c.id) {
          add("controller", c.id, tag + "head '" + head + "' belongs to " + h->controller);
        }
      }
      for (const auto & det : p.detectors) {
        if (!net.find_detector(det)) {
          add("controller", c.id, tag + "detector '" + det + "' does not exist", det);
        }
      }
    }
  }
  std::stable_sort(
    out.begin(), out.end(), [](const Violation & a, const Violation & b) {
      return a.entity_id < b.entity_id;
    });
  return out;
}

// ---------------------------------------------------------------------------
// Native format parser

struct Token
{
  std::string_view text;
  std::size_t column;
};

class LineParser
{
public:
  LineParser(std::string_view line, std::size_t line_no) : line_no_(line_no)
  {
    for (auto tok : split_ws(line)) {
      tokens_.push_back({tok, static_cast<std::size_t>(tok.data() - line.data()) + 1});
    }
  }

  bool empty() const { return tokens_.empty(); }
  const Token & keyword() const { return tokens_.front(); }

  std::string id() const
  {
    if (tokens_.size() < 2) {
      fail("missing id after '" + std::string(tokens_[0].text) + "'", tokens_[0].column);
    }
    const auto & tok = tokens_[1];
    if (tok.text.find('=') != std::string_view::npos) {
      fail("expected an id, got '" + std::string(tok.text) + "'", tok.column);
    }
    return std::string(tok.text);
  }

  /// Splits the remaining key=value tokens; rejects unknown keys.
  void read_fields(std::initializer_list<std::string_view> allowed)
  {
    for (std::size_t i = 2; i < tokens_.size(); ++i) {
      const auto & tok = tokens_[i];
      const auto eq = tok.text.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        fail("expected key=value, got '" + std::string(tok.text) + "'", tok.column);
      }
      const auto key = tok.text.substr(0, eq);
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        fail("unknown key '" + std::string(key) + "'", tok.column);
      }
      if (fields_.count(std::string(key))) {
        fail("duplicate key '" + std::string(key) + "'", tok.column);
      }
      fields_[std::string(key)] = {tok.text.substr(eq + 1), tok.column + eq + 1};
    }
  }

  bool has(const std::string & key) const { return fields_.count(key) > 0; }

  std::string text(const std::string & key) const
  {
    const auto & tok = require(key);
    if (tok.text.empty()) {
      fail("empty value for '" + key + "'", tok.column);
    }
    return std::string(tok.text);
  }

  double number(const std::string & key) const
  {
    const auto & tok = require(key);
    double v = 0.0;
    if (!parse_double(tok.text, v) || !std::isfinite(v)) {
      fail("invalid number '" + std::string(tok.text) + "' for '" + key + "'", tok.column);
    }
    return v;
  }

  int integer(const std::string & key) const
  {
    const auto & tok = require(key);
    std::int64_t v = 0;
    if (!parse_int(tok.text, v) || v < INT32_MIN || v > INT32_MAX) {
      fail("invalid integer '" + std::string(tok.text) + "' for '" + key + "'", tok.column);
    }
    return static_cast<int>(v);
  }

  std::vector<std::string> list(const std::string & key) const
  {
    const auto & tok = require(key);
    std::vector<std::string> out;
    if (tok.text.empty()) {
      return out;
    }
    for (auto & item : split(tok.text, ',')) {
      if (item.empty()) {
        fail("empty list item in '" + key + "'", tok.column);
      }
      out.push_back(std::move(item));
    }
    return out;
  }

  [[noreturn]] void fail(const std::string & msg, std::size_t column) const
  {
    throw ParseError(msg, line_no_, column);
  }

private:
  const Token & require(const std::string & key) const
  {
    auto it = fields_.find(key);
    if (it == fields_.end()) {
      fail("missing key '" + key + "'", tokens_.front().column);
    }
    return it->second;
  }

  std::size_t line_no_;
  std::vector<Token> tokens_;
  std::map<std::string, Token> fields_;
};

RoadNetwork parse_native(std::string_view text)
{
  RoadNetwork net;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    LineParser p(line, line_no);
    if (p.empty()) {
      if (end == text.size()) {
        break;
      }
      continue;
    }
    const auto kw = p.keyword().text;
    if (kw == "node") {
      p.read_fields({});
      net.nodes.push_back({p.id()});
    } else if (kw == "link") {
      p.read_fields({"from", "to", "length", "lanes", "speed"});
      Link l;
      l.id = p.id();
      l.from_node = p.text("from");
      l.to_node = p.text("to");
      l.length = p.number("length");
      l.lane_count = p.integer("lanes");
      l.speed_limit = p.number("speed");
      net.links.push_back(std::move(l));
    } else if (kw == "signal") {
      p.read_fields({"link", "lane", "stop", "controller"});
      SignalHead h;
      h.id = p.id();
      h.link = p.text("link");
      h.lane = p.integer("lane");
      h.stop_line_s = p.number("stop");
      h.controller = p.text("controller");
      net.signals.push_back(std::move(h));
    } else if (kw == "detector") {
      p.read_fields({"link", "pos"});
      DetectorZone d;
      d.id = p.id();
      d.link = p.text("link");
      d.position_s = p.number("pos");
      net.detectors.push_back(std::move(d));
    } else if (kw == "controller") {
      p.read_fields({"mode", "min_green", "max_green", "gap"});
      ControllerPlan c;
      c.id = p.id();
      const auto mode = p.text("mode");
      if (mode == "fixed") {
        c.mode = ControlMode::fixed;
      } else if (mode == "actuated") {
        c.mode = ControlMode::actuated;
        c.min_green = p.number("min_green");
        c.max_green = p.number("max_green");
        c.extension_gap = p.number("gap");
      } else {
        p.fail("unknown controller mode '" + mode + "'", p.keyword().column);
      }
      net.controllers.push_back(std::move(c));
    } else if (kw == "phase") {
      p.read_fields({"green", "yellow", "red", "heads", "detectors"});
      const auto ctrl_id = p.id();
      auto it = std::find_if(
        net.controllers.begin(), net.controllers.end(),
        [&](const ControllerPlan & c) { return c.id == ctrl_id; });
      if (it == net.controllers.end()) {
        throw ReferenceError(
          "line " + std::to_string(line_no) + ": phase references undeclared controller '" +
          ctrl_id + "'",
          ctrl_id);
      }
      PhaseSpec ph;
      ph.green = p.has("green") ? p.number("green") : 0.0;
      ph.yellow = p.number("yellow");
      ph.all_red = p.number("red");
      ph.heads = p.list("heads");
      if (p.has("detectors")) {
        ph.detectors = p.list("detectors");
      }
      it->phases.push_back(std::move(ph));
    } else {
      p.fail("unknown keyword '" + std::string(kw) + "'", p.keyword().column);
    }
    if (end == text.size()) {
      break;
    }
  }
  return net;
}

std::string join(const std::vector<std::string> & items, char sep)
{
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) {
      out += sep;
    }
    out += items[i];
  }
  return out;
}

}  // namespace

const Node * RoadNetwork::find_node(std::string_view id) const { return find_by_id(nodes, id); }
const Link * RoadNetwork::find_link(std::string_view id) const { return find_by_id(links, id); }
const SignalHead * RoadNetwork::find_signal(std::string_view id) const
{
  return find_by_id(signals, id);
}
const DetectorZone * RoadNetwork::find_detector(std::string_view id) const
{
  return find_by_id(detectors, id);
}
const ControllerPlan * RoadNetwork::find_controller(std::string_view id) const
{
  return find_by_id(controllers, id);
}

std::vector<const Link *> RoadNetwork::outgoing(std::string_view node_id) const
{
  std::vector<const Link *> out;
  for (const auto & l : links) {
    if (l.from_node == node_id) {
      out.push_back(&l);
    }
  }
  return out;
}

std::vector<std::string> validate_network(const RoadNetwork & net)
{
  std::vector<std::string> out;
  for (auto & v : collect_violations(net)) {
    out.push_back(std::move(v.text));
  }
  return out;
}

RoadNetwork load_network(std::string_view text)
{
  RoadNetwork net = parse_native(text);
  auto violations = collect_violations(net);
  for (const auto & v : violations) {
    if (v.missing_id) {
      throw ReferenceError(v.text, *v.missing_id);
    }
  }
  if (!violations.empty()) {
    std::vector<std::string> texts;
    for (auto & v : violations) {
      texts.push_back(std::move(v.text));
    }
    throw ValidationError(std::move(texts));
  }
  return net;
}

std::string export_native(const RoadNetwork & net)
{
  std::ostringstream out;
  out << "# safetwin road network (SI units)\n";
  for (const auto & n : net.nodes) {
    out << "node " << n.id << '\n';
  }
  for (const auto & l : net.links) {
    out << "link " << l.id << " from=" << l.from_node << " to=" << l.to_node
        << " length=" << format_double(l.length) << " lanes=" << l.lane_count
        << " speed=" << format_double(l.speed_limit) << '\n';
  }
  for (const auto & h : net.signals) {
    out << "signal " << h.id << " link=" << h.link << " lane=" << h.lane
        << " stop=" << format_double(h.stop_line_s) << " controller=" << h.controller << '\n';
  }
  for (const auto & d : net.detectors) {
    out << "detector " << d.id << " link=" << d.link << " pos=" << format_double(d.position_s)
        << '\n';
  }
  for (const auto & c : net.controllers) {
    out << "controller " << c.id;
    if (c.mode == ControlMode::fixed) {
      out << " mode=fixed\n";
    } else {
      out << " mode=actuated min_green=" << format_double(c.min_green)
          << " max_green=" << format_double(c.max_green)
          << " gap=" << format_double(c.extension_gap) << '\n';
    }
    for (const auto & p : c.phases) {
      out << "phase " << c.id << " green=" << format_double(p.green)
          << " yellow=" << format_double(p.yellow) << " red=" << format_double(p.all_red)
          << " heads=" << join(p.heads, ',');
      if (!p.detectors.empty()) {
        out << " detectors=" << join(p.detectors, ',');
      }
      out << '\n';
    }
  }
  return out.str();
}

std::vector<std::vector<std::string>> enumerate_simple_paths(
  const RoadNetwork & net, std::size_t max_links)
{
  std::set<std::string> has_inbound;
  for (const auto & l : net.links) {
    has_inbound.insert(l.to_node);
  }
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> path;
  std::set<std::string> visited_nodes;

  auto dfs = [&](auto && self, const Link & link) -> void {
      path.push_back(link.id);
      visited_nodes.insert(link.to_node);
      const auto next = net.outgoing(link.to_node);
      if (next.empty()) {
        out.push_back(path);
      } else if (path.size() < max_links) {
        for (const Link * n : next) {
          if (!visited_nodes.count(n->to_node)) {
            self(self, *n);
          }
        }
      }
      visited_nodes.erase(link.to_node);
      path.pop_back();
    };

  for (const auto & l : net.links) {
    if (has_inbound.count(l.from_node) || max_links == 0) {
      continue;
    }
    visited_nodes = {l.from_node};
    dfs(dfs, l);
  }
  return out;
}

}  // namespace safetwin
