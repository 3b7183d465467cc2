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

#include "safetwin/demand.hpp"

#include "safetwin/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace safetwin
{

std::vector<CountConstraint> ingest_counts(std::string_view text, const RoadNetwork & net)
{
  std::vector<CountConstraint> out;
  std::size_t row = 0;
  for (const auto & raw : split(text, '\n')) {
    ++row;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    if (row == 1 && line.substr(0, 8) == "detector") {
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 4) {
      throw ParseError("count row needs detector,start,end,count", row);
    }
    CountConstraint c;
    c.detector = std::string(trim(f[0]));
    if (c.detector.empty() || !parse_double(trim(f[1]), c.t_start) ||
      !parse_double(trim(f[2]), c.t_end) || !parse_int(trim(f[3]), c.count))
    {
      throw ParseError("malformed count row", row);
    }
    if (c.count < 0) {
      throw ParseError("count must be non-negative", row);
    }
    if (!(c.t_start < c.t_end) || c.t_start < 0.0) {
      throw ParseError("interval must satisfy 0 <= start < end", row);
    }
    if (!net.find_detector(c.detector)) {
      throw ReferenceError("unknown detector '" + c.detector + "'", c.detector);
    }
    auto same = std::find_if(out.begin(), out.end(), [&](const CountConstraint & o) {
          return o.detector == c.detector && o.t_start == c.t_start && o.t_end == c.t_end;
        });
    if (same != out.end()) {
      same->count += c.count;
    } else {
      out.push_back(std::move(c));
    }
  }
  return out;
}

CandidateRoute make_candidate(const RoadNetwork & net, std::vector<std::string> links)
{
  CandidateRoute r;
  for (std::size_t i = 0; i < links.size(); ++i) {
    r.id += (i ? "_" : "") + links[i];
  }
  for (const auto & d : net.detectors) {
    if (std::find(links.begin(), links.end(), d.link) != links.end()) {
      r.detectors.push_back(d.id);
    }
  }
  r.links = std::move(links);
  return r;
}

std::vector<CandidateRoute> candidate_routes(const RoadNetwork & net, std::size_t max_links)
{
  std::vector<CandidateRoute> out;
  for (auto & path : enumerate_simple_paths(net, max_links)) {
    out.push_back(make_candidate(net, std::move(path)));
  }
  std::sort(out.begin(), out.end(), [](const auto & a, const auto & b) { return a.id < b.id; });
  return out;
}

std::vector<std::int64_t> recount(
  const std::vector<DemandTrip> & trips, const std::vector<CandidateRoute> & candidates,
  const std::vector<CountConstraint> & counts)
{
  std::map<std::string, const CandidateRoute *> by_id;
  for (const auto & c : candidates) {
    by_id[c.id] = &c;
  }
  std::vector<std::int64_t> out(counts.size(), 0);
  for (const auto & t : trips) {
    auto it = by_id.find(t.route);
    if (it == by_id.end()) {
      throw ReferenceError("trip uses unknown route '" + t.route + "'", t.route);
    }
    const auto & dets = it->second->detectors;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (t.departure >= counts[c].t_start && t.departure < counts[c].t_end &&
        std::find(dets.begin(), dets.end(), counts[c].detector) != dets.end())
      {
        ++out[c];
      }
    }
  }
  return out;
}

namespace
{

// min sum_c |sum_{v in cover(c)} x_v - target_c| over integers 0 <= x_v <= ub_v.
class BranchAndBound
{
public:
  BranchAndBound(
    std::vector<std::vector<std::size_t>> var_cons, std::vector<std::int64_t> target,
    std::int64_t budget)
  : var_cons_(std::move(var_cons)), target_(std::move(target)), budget_(budget)
  {
    const auto n = var_cons_.size();
    ub_.assign(n, 0);
    for (std::size_t v = 0; v < n; ++v) {
      // beyond the largest target it covers, lowering x_v strictly helps
      for (auto c : var_cons_[v]) {
        ub_[v] = std::max(ub_[v], target_[c]);
      }
    }
    total_ = std::accumulate(target_.begin(), target_.end(), std::int64_t{0});
    achieved_.assign(target_.size(), 0);
    capacity_.assign(target_.size(), 0);
    for (std::size_t v = 0; v < n; ++v) {
      for (auto c : var_cons_[v]) {
        capacity_[c] += ub_[v];
      }
    }
    x_.assign(n, 0);
  }

  void solve()
  {
    best_ = std::numeric_limits<std::int64_t>::max();
    search(0, 0);
  }

  const std::vector<std::int64_t> & best_x() const { return best_x_; }
  std::int64_t best_value() const { return best_; }
  bool proven() const { return nodes_ <= budget_; }

private:
  std::int64_t lower_bound() const
  {
    std::int64_t lb = 0;
    for (std::size_t c = 0; c < target_.size(); ++c) {
      const auto gap = target_[c] - achieved_[c];
      lb += gap < 0 ? -gap : std::max<std::int64_t>(0, gap - capacity_[c]);
    }
    return lb;
  }

  void search(std::size_t v, std::int64_t used)
  {
    if (++nodes_ > budget_ && !best_x_.empty()) {
      return;
    }
    // the first leaf reaching a value is lexicographically largest, so
    // equal bounds can be pruned
    if (lower_bound() >= best_) {
      return;
    }
    if (v == x_.size()) {
      best_ = lower_bound();
      best_x_ = x_;
      return;
    }
    for (auto c : var_cons_[v]) {
      capacity_[c] -= ub_[v];
    }
    const auto top = std::min(ub_[v], total_ - used);
    for (auto value = top; value >= 0; --value) {
      x_[v] = value;
      for (auto c : var_cons_[v]) {
        achieved_[c] += value;
      }
      search(v + 1, used + value);
      for (auto c : var_cons_[v]) {
        achieved_[c] -= value;
      }
    }
    x_[v] = 0;
    for (auto c : var_cons_[v]) {
      capacity_[c] += ub_[v];
    }
  }

  std::vector<std::vector<std::size_t>> var_cons_;
  std::vector<std::int64_t> target_;
  std::int64_t budget_;
  std::vector<std::int64_t> ub_;
  std::int64_t total_ = 0;
  std::vector<std::int64_t> achieved_;
  std::vector<std::int64_t> capacity_;
  std::vector<std::int64_t> x_;
  std::vector<std::int64_t> best_x_;
  std::int64_t best_ = 0;
  std::int64_t nodes_ = 0;
};

struct Segment
{
  double start;
  double end;
};

}  // namespace

TripSet sample_routes(
  const std::vector<CountConstraint> & counts, const std::vector<CandidateRoute> & candidates,
  double horizon, std::mt19937_64 & rng, const SampleOptions & options)
{
  TripSet out;
  if (counts.empty()) {
    return out;
  }
  if (candidates.empty()) {
    throw DomainError("sample_routes: the candidate set is empty");
  }
  for (const auto & c : counts) {
    if (c.count < 0 || !(c.t_start < c.t_end)) {
      throw DomainError("invalid count for detector '" + c.detector + "'");
    }
    if (c.t_start < 0.0 || c.t_end > horizon) {
      throw ConfigError("count interval for '" + c.detector + "' exceeds the horizon");
    }
  }
  std::vector<const CandidateRoute *> routes;
  for (const auto & r : candidates) {
    routes.push_back(&r);
  }
  std::sort(routes.begin(), routes.end(), [](auto a, auto b) { return a->id < b->id; });

  std::set<std::string> unreachable;
  for (const auto & c : counts) {
    const bool covered = std::any_of(routes.begin(), routes.end(), [&](auto r) {
          return std::find(r->detectors.begin(), r->detectors.end(), c.detector) !=
          r->detectors.end();
        });
    if (!covered) {
      if (options.strict_coverage) {
        throw CoverageError(c.detector);
      }
      unreachable.insert(c.detector);
    }
  }
  out.unreachable.assign(unreachable.begin(), unreachable.end());

  // Elementary time segments between all interval boundaries.
  std::vector<double> cuts;
  for (const auto & c : counts) {
    cuts.push_back(c.t_start);
    cuts.push_back(c.t_end);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<Segment> segments;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    segments.push_back({cuts[i], cuts[i + 1]});
  }

  // Variables: (route, segment) pairs that some constraint can see.
  struct Var
  {
    std::size_t route;
    std::size_t segment;
    std::vector<std::size_t> cons;
  };
  std::vector<Var> vars;
  for (std::size_t r = 0; r < routes.size(); ++r) {
    for (std::size_t s = 0; s < segments.size(); ++s) {
      Var v{r, s, {}};
      for (std::size_t c = 0; c < counts.size(); ++c) {
        const auto & dets = routes[r]->detectors;
        if (counts[c].t_start <= segments[s].start && segments[s].end <= counts[c].t_end &&
          std::find(dets.begin(), dets.end(), counts[c].detector) != dets.end())
        {
          v.cons.push_back(c);
        }
      }
      if (!v.cons.empty()) {
        vars.push_back(std::move(v));
      }
    }
  }

  // Independent subproblems: constraints linked through shared variables.
  std::vector<std::size_t> parent(counts.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
      while (parent[a] != a) {
        a = parent[a] = parent[parent[a]];
      }
      return a;
    };
  for (const auto & v : vars) {
    for (auto c : v.cons) {
      parent[find(c)] = find(v.cons.front());
    }
  }
  std::vector<std::int64_t> x(vars.size(), 0);
  std::map<std::size_t, std::vector<std::size_t>> groups;  // root -> var indices
  for (std::size_t i = 0; i < vars.size(); ++i) {
    groups[find(vars[i].cons.front())].push_back(i);
  }
  for (const auto & [root, members] : groups) {
    std::map<std::size_t, std::size_t> local;  // constraint -> local index
    std::vector<std::int64_t> target;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (find(c) == root) {
        local[c] = target.size();
        target.push_back(counts[c].count);
      }
    }
    std::vector<std::vector<std::size_t>> var_cons;
    for (auto i : members) {
      std::vector<std::size_t> lc;
      for (auto c : vars[i].cons) {
        lc.push_back(local.at(c));
      }
      var_cons.push_back(std::move(lc));
    }
    BranchAndBound bb(std::move(var_cons), std::move(target), options.node_budget);
    bb.solve();
    out.optimal = out.optimal && bb.proven();
    for (std::size_t k = 0; k < members.size(); ++k) {
      x[members[k]] = bb.best_x()[k];
    }
  }

  // Departures, drawn in variable order.
  std::map<std::string, std::int64_t> mult;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const auto & seg = segments[vars[i].segment];
    std::uniform_real_distribution<double> u(seg.start, seg.end);
    for (std::int64_t k = 0; k < x[i]; ++k) {
      double t = u(rng);
      if (t >= seg.end) {
        t = std::nextafter(seg.end, seg.start);
      }
      out.trips.push_back({routes[vars[i].route]->id, t});
    }
    if (x[i] > 0) {
      mult[routes[vars[i].route]->id] += x[i];
    }
  }
  std::stable_sort(out.trips.begin(), out.trips.end(), [](const auto & a, const auto & b) {
      return a.departure != b.departure ? a.departure < b.departure : a.route < b.route;
    });
  out.multiplicities.assign(mult.begin(), mult.end());
  out.achieved = recount(out.trips, candidates, counts);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    out.deviation += std::abs(out.achieved[c] - counts[c].count);
  }
  return out;
}

FitReport evaluate_fit(
  const TripSet & trips, const std::vector<CandidateRoute> & candidates,
  const std::vector<CountConstraint> & counts, const FitConfig & cfg)
{
  const auto achieved = recount(trips.trips, candidates, counts);
  FitReport report;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    FitRow row{counts[c], achieved[c], std::abs(achieved[c] - counts[c].count), 0.0, true};
    if (counts[c].count > 0) {
      row.rel_deviation =
        static_cast<double>(row.abs_deviation) / static_cast<double>(counts[c].count);
    } else if (row.abs_deviation > 0) {
      row.rel_deviation = std::numeric_limits<double>::infinity();
    }
    row.pass = row.rel_deviation <= cfg.envelope ||
      (counts[c].count < cfg.small_below && row.abs_deviation <= cfg.small_floor);
    report.pass = report.pass && row.pass;
    report.rows.push_back(std::move(row));
  }
  return report;
}

TripSchedule to_schedule(
  const TripSet & trips, const std::vector<CandidateRoute> & candidates,
  const std::string & vehicle_type)
{
  TripSchedule s;
  std::set<std::string> used;
  for (const auto & t : trips.trips) {
    used.insert(t.route);
  }
  for (const auto & c : candidates) {
    if (used.count(c.id)) {
      s.routes.push_back({c.id, c.links, 0});
    }
  }
  std::int64_t k = 0;
  for (const auto & t : trips.trips) {
    s.trips.push_back({"v" + std::to_string(k++), t.departure, t.route, vehicle_type});
  }
  return s;
}

}  // namespace safetwin
