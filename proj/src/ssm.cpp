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

#include "safetwin/ssm.hpp"

#include "safetwin/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace safetwin
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTimeTolerance = 1e-9;

void require_gap(double gap, const char * what)
{
  if (!(gap > 0.0)) {
    throw DomainError(std::string(what) + ": gap must be > 0 (crashes are handled separately)");
  }
}

}  // namespace

double ttc(double gap, double v, double v_lead)
{
  require_gap(gap, "ttc");
  const double closing = v - v_lead;
  return closing > 0.0 ? gap / closing : kInf;
}

double drac(double gap, double v, double v_lead)
{
  require_gap(gap, "drac");
  const double closing = v - v_lead;
  return closing > 0.0 ? closing * closing / (2.0 * gap) : 0.0;
}

bool classify(const SsmSample & s, const Thresholds & th)
{
  return s.ttc < th.ttc || s.drac > th.drac;
}

SsmSample make_sample(
  double t, std::string ego, std::string leader, double gap, double v, double v_lead,
  std::string link, double s, const Thresholds & thresholds)
{
  SsmSample out{t, std::move(ego), std::move(leader), gap, v, v_lead, 0.0, kInf, true, true,
    std::move(link), s};
  if (gap > 0.0) {
    out.ttc = ttc(gap, v, v_lead);
    out.drac = drac(gap, v, v_lead);
    out.crash = false;
    out.conflict = classify(out, thresholds);
  }
  return out;
}

std::optional<CrashEvent> detect_crash(double gap, double t, std::string link, double s)
{
  if (gap <= 0.0) {
    return CrashEvent{t, std::move(link), s};
  }
  return std::nullopt;
}

double bumper_gap(
  const RoadNetwork & net, const std::vector<std::string> & route,
  std::string_view follower_link, double follower_s, std::string_view leader_link,
  double leader_s, double leader_length)
{
  if (follower_link == leader_link) {
    return leader_s - leader_length - follower_s;
  }
  auto it = std::find(route.begin(), route.end(), follower_link);
  if (it == route.end()) {
    throw InputError("follower link '" + std::string(follower_link) + "' is not on the route");
  }
  double between = net.find_link(*it)->length - follower_s;
  for (++it; it != route.end() && *it != leader_link; ++it) {
    between += net.find_link(*it)->length;
  }
  if (it == route.end()) {
    throw InputError("leader link '" + std::string(leader_link) + "' is not ahead on the route");
  }
  return between + leader_s - leader_length;
}

std::vector<ConflictEpisode> detect_episodes(
  const std::vector<SsmSample> & samples, const EpisodeConfig & cfg)
{
  std::vector<ConflictEpisode> out;
  std::optional<ConflictEpisode> open;
  std::optional<double> min_ttc_t;
  auto close = [&] {
      out.push_back(*open);
      open.reset();
    };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto & x = samples[i];
    if (i > 0 && x.t < samples[i - 1].t) {
      throw InputError("SSM samples are not time-ordered at index " + std::to_string(i));
    }
    if (open && (x.crash || x.conflict) && x.t - open->end > cfg.hangover + kTimeTolerance) {
      close();
    }
    if (x.crash) {
      if (!open) {
        open = ConflictEpisode{x.ego, x.t, x.t, kInf, 0.0, x.link, x.s, true};
      }
      open->end = x.t;
      open->crashed = true;
      if (std::isinf(open->min_ttc)) {
        open->link = x.link;
        open->s = x.s;
      }
      close();
      continue;
    }
    if (!x.conflict) {
      continue;
    }
    if (!open) {
      open = ConflictEpisode{x.ego, x.t, x.t, kInf, 0.0, x.link, x.s, false};
    }
    open->end = x.t;
    // extrema only from samples whose ttc lies in the plotting window
    if (x.ttc >= 0.0 && x.ttc <= cfg.ttc_window) {
      if (x.ttc < open->min_ttc) {
        open->min_ttc = x.ttc;
        open->link = x.link;
        open->s = x.s;
      }
      open->max_drac = std::max(open->max_drac, x.drac);
    }
  }
  if (open) {
    close();
  }
  return out;
}

std::vector<ConflictEpisode> detect_episodes_by_ego(
  const std::vector<SsmSample> & samples, const EpisodeConfig & cfg)
{
  std::vector<std::string> order;
  std::map<std::string, std::vector<SsmSample>> by_ego;
  for (const auto & s : samples) {
    auto [it, inserted] = by_ego.try_emplace(s.ego);
    if (inserted) {
      order.push_back(s.ego);
    }
    it->second.push_back(s);
  }
  std::vector<ConflictEpisode> out;
  for (const auto & ego : order) {
    auto eps = detect_episodes(by_ego[ego], cfg);
    out.insert(out.end(), eps.begin(), eps.end());
  }
  return out;
}

std::pair<double, double> mean_and_std(const std::vector<double> & values)
{
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  const auto n = static_cast<double>(values.size());
  double mean = sum / n;
  // second-pass correction removes the rounding left in the first mean
  double residual = 0.0;
  for (double v : values) {
    residual += v - mean;
  }
  mean += residual / n;
  double sq = 0.0;
  for (double v : values) {
    sq += (v - mean) * (v - mean);
  }
  return {mean, std::sqrt(sq / n)};
}

SsmSummary summarize(
  const std::string & scenario, const std::vector<ReplicationEpisodes> & runs,
  double match_radius)
{
  auto near = [&](const ConflictEpisode & a, const ConflictEpisode & b) {
      return a.link == b.link && std::abs(a.s - b.s) <= match_radius;
    };
  // anchor = the episode whose neighbourhood covers the most replications;
  // ties go to the earliest replication and start time
  const ConflictEpisode * anchor = nullptr;
  std::size_t best_cover = 0;
  for (const auto & run : runs) {
    for (const auto & ep : run.episodes) {
      std::size_t cover = 0;
      for (const auto & other : runs) {
        cover += std::any_of(
          other.episodes.begin(), other.episodes.end(),
          [&](const ConflictEpisode & e) { return near(ep, e); });
      }
      if (cover > best_cover) {
        best_cover = cover;
        anchor = &ep;
      }
    }
  }
  if (!anchor) {
    throw EmptySummaryError(scenario);
  }
  SsmSummary sum;
  sum.scenario = scenario;
  sum.replications = static_cast<int>(runs.size());
  sum.link = anchor->link;
  sum.s = anchor->s;
  std::vector<double> ttcs, dracs;
  for (const auto & run : runs) {
    const ConflictEpisode * pick = nullptr;
    for (const auto & e : run.episodes) {
      if (!near(*anchor, e)) {
        continue;
      }
      // a crash dominates; otherwise the most severe (lowest min ttc)
      if (!pick || (e.crashed && !pick->crashed) ||
        (e.crashed == pick->crashed && e.min_ttc < pick->min_ttc))
      {
        pick = &e;
      }
    }
    if (!pick) {
      ++sum.missing;
      sum.matched.emplace_back();
      continue;
    }
    sum.matched.emplace_back(*pick);
    if (pick->crashed) {
      ++sum.crashes;
    } else {
      ttcs.push_back(pick->min_ttc);
      dracs.push_back(pick->max_drac);
    }
  }
  std::tie(sum.mean_min_ttc, sum.std_min_ttc) = mean_and_std(ttcs);
  std::tie(sum.mean_max_drac, sum.std_max_drac) = mean_and_std(dracs);
  return sum;
}

std::string ssm_csv(const std::vector<SsmSample> & samples)
{
  std::ostringstream out;
  out << "t,ego,gap,v,v_lead,ttc,drac,conflict,leader,link,s,crash\n";
  for (const auto & x : samples) {
    out << format_double(x.t) << ',' << x.ego << ',' << format_double(x.gap) << ','
        << format_double(x.v) << ',' << format_double(x.v_lead) << ',' << format_double(x.ttc)
        << ',' << format_double(x.drac) << ',' << (x.conflict ? 1 : 0) << ',' << x.leader << ','
        << x.link << ',' << format_double(x.s) << ',' << (x.crash ? 1 : 0) << '\n';
  }
  return out.str();
}

std::vector<SsmSample> parse_ssm_csv(std::string_view text)
{
  std::vector<SsmSample> out;
  std::size_t line_no = 0;
  for (const auto & raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || (line_no == 1 && line.substr(0, 2) == "t,")) {
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 12) {
      throw ParseError("expected 12 fields", line_no);
    }
    SsmSample x;
    std::int64_t conflict = 0, crash = 0;
    if (!parse_double(f[0], x.t) || !parse_double(f[2], x.gap) || !parse_double(f[3], x.v) ||
      !parse_double(f[4], x.v_lead) || !parse_double(f[5], x.ttc) ||
      !parse_double(f[6], x.drac) || !parse_int(f[7], conflict) ||
      !parse_double(f[10], x.s) || !parse_int(f[11], crash))
    {
      throw ParseError("malformed SSM row", line_no);
    }
    x.ego = f[1];
    x.conflict = conflict != 0;
    x.leader = f[8];
    x.link = f[9];
    x.crash = crash != 0;
    out.push_back(std::move(x));
  }
  return out;
}

std::string episodes_csv(const std::vector<std::pair<std::string, ReplicationEpisodes>> & rows)
{
  std::ostringstream out;
  out << "scenario,replication,start,end,min_ttc,max_drac,link,s,crashed,ego\n";
  for (const auto & [scenario, run] : rows) {
    for (const auto & e : run.episodes) {
      out << scenario << ',' << run.replication << ',' << format_double(e.start) << ','
          << format_double(e.end) << ',' << format_double(e.min_ttc) << ','
          << format_double(e.max_drac) << ',' << e.link << ',' << format_double(e.s) << ','
          << (e.crashed ? 1 : 0) << ',' << e.ego << '\n';
    }
  }
  return out.str();
}

std::string summary_csv(const std::vector<SsmSummary> & columns)
{
  std::ostringstream out;
  out << "statistic";
  for (const auto & c : columns) {
    out << ',' << c.scenario;
  }
  out << '\n';
  auto row = [&](const char * name, auto value) {
      out << name;
      for (const auto & c : columns) {
        out << ',' << value(c);
      }
      out << '\n';
    };
  row("mean_min_ttc", [](const SsmSummary & c) { return format_double(c.mean_min_ttc); });
  row("std_min_ttc_population", [](const SsmSummary & c) { return format_double(c.std_min_ttc); });
  row("mean_max_drac", [](const SsmSummary & c) { return format_double(c.mean_max_drac); });
  row("std_max_drac_population", [](const SsmSummary & c) { return format_double(c.std_max_drac); });
  row("crash_count", [](const SsmSummary & c) { return std::to_string(c.crashes); });
  row("replications", [](const SsmSummary & c) { return std::to_string(c.replications); });
  row("unmatched", [](const SsmSummary & c) { return std::to_string(c.missing); });
  return out.str();
}

}  // namespace safetwin
