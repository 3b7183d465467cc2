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

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Usage: safetwin_acceptance [data_dir]

#include "oracles.hpp"
#include "safetwin/common.hpp"
#include "safetwin/ego.hpp"
#include "safetwin/scenario.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace
{

using namespace safetwin;
namespace fs = std::filesystem;

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string data_dir = SAFETWIN_DATA_DIR;

ScenarioConfig baseline()
{
  return load_scenario_config(data_dir + "/baseline.cfg");
}

std::string fmt(double v, int digits = 4)
{
  std::ostringstream o;
  o << std::setprecision(digits) << v;
  return o.str();
}

double rel_err(double got, double want)
{
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

fs::path scratch(const std::string & name)
{
  auto dir = fs::temp_directory_path() / ("safetwin_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// 1
Outcome ssm_formulas()
{
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> gap(0.1, 200.0), speed(0.0, 40.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double g = gap(rng);
    if (g <= 0.1) {
      g = 200.0;  // the interval is open at 0.1
    }
    const double v = speed(rng), vl = speed(rng);
    const double t = ttc(g, v, vl), d = drac(g, v, vl);
    if (v > vl) {
      worst = std::max(worst, rel_err(t * (v - vl), g));
      worst = std::max(worst, rel_err(2.0 * g * d, (v - vl) * (v - vl)));
      worst = std::max(worst, rel_err(2.0 * t * d, v - vl));
    } else if (!(std::isinf(t) && t > 0 && d == 0.0)) {
      return {false, "non-closing triple gave finite ttc or nonzero drac"};
    }
  }
  const bool hand = ttc(30.0, 20.0, 10.0) == 3.0 && drac(25.0, 20.0, 10.0) == 2.0;
  return {worst <= 1e-12 && hand,
    "max relative identity error " + fmt(worst, 3) + ", hand cases " + (hand ? "exact" : "wrong")};
}

// 2
Outcome friction_clamp()
{
  std::string detail;
  bool ok = true;
  for (double mu : {0.35, 0.4, 0.7}) {
    VehicleLimits limits;
    limits.mu = mu;
    DriverParams driver;
    auto ego = EgoState::at("ego", 0.0, 30.0);
    for (int i = 0; i < 2000; ++i) {
      ego = plant_step(ego, -1.0, limits, driver, 0.001);
    }
    const double want = mu * 9.81;
    const double err = rel_err(-ego.a_realized, want);
    ok = ok && err <= 1e-3;
    detail += "mu=" + fmt(mu) + ": " + fmt(-ego.a_realized, 6) + " m/s^2; ";
  }
  return {ok, detail};
}

// 3
Outcome lag_property()
{
  auto c = baseline();
  c.replications = 1;
  const auto res = run_scenario(c);
  const auto & rep = res.replications.at(0);
  if (!rep.trigger_time) {
    return {false, "trigger did not fire"};
  }
  const auto & trace = rep.logs.ego_traces.at("ego");
  const double micro = c.bridge.micro_dt;
  auto index_at = [&](double t) {
      return static_cast<std::size_t>(std::clamp<double>(
               std::llround(t / micro) - 1, 0.0, static_cast<double>(trace.size() - 1)));
    };
  // Braking episode: from the trigger to the end of the conflict episode.
  if (rep.episodes.empty()) {
    return {false, "no conflict episode"};
  }
  const std::size_t i0 = index_at(*rep.trigger_time);
  const std::size_t i1 = index_at(rep.episodes.front().end);
  const std::size_t max_lag = 1000;  // 1 s
  if (i1 + max_lag >= trace.size()) {
    return {false, "trace too short for the lag search"};
  }
  const std::size_t n = i1 - i0;
  auto corr = [&](std::size_t lag) {
      double mr = 0, mv = 0;
      for (std::size_t i = i0; i < i1; ++i) {
        mr += trace[i].v_ref;
        mv += trace[i + lag].v;
      }
      mr /= static_cast<double>(n);
      mv /= static_cast<double>(n);
      double sxy = 0, sxx = 0, syy = 0;
      for (std::size_t i = i0; i < i1; ++i) {
        const double x = trace[i].v_ref - mr, y = trace[i + lag].v - mv;
        sxy += x * y;
        sxx += x * x;
        syy += y * y;
      }
      return sxy / std::sqrt(sxx * syy);
    };
  std::size_t best = 0;
  double best_c = -2.0;
  for (std::size_t lag = 0; lag <= max_lag; ++lag) {
    const double r = corr(lag);
    if (r > best_c) {
      best_c = r;
      best = lag;
    }
  }
  const double lag_s = static_cast<double>(best) * micro;

  // Every speed level crossed during braking is crossed first by v_ref.
  bool ordered = true;
  int levels = 0;
  for (double level = trace[i0].v - 0.5; level > trace[i1].v; level -= 0.5) {
    std::optional<std::size_t> tr, tv;
    for (std::size_t i = i0; i <= i1 && !(tr && tv); ++i) {
      if (!tr && trace[i].v_ref <= level) {
        tr = i;
      }
      if (!tv && trace[i].v <= level) {
        tv = i;
      }
    }
    ++levels;
    ordered = ordered && tr && tv && *tr < *tv;
  }
  return {lag_s >= c.bridge.macro_dt - 1e-12 && ordered,
    "cross-correlation peak at lag " + fmt(lag_s) + " s (r=" + fmt(best_c, 6) + "); v_ref first at " +
    std::to_string(levels) + " levels: " + (ordered ? "yes" : "no")};
}

std::string column(const ScenarioResult & r)
{
  if (!r.summary) {
    return r.config.name + " no summary";
  }
  const auto & s = *r.summary;
  return r.config.name + " ttc " + fmt(s.mean_min_ttc) + "+-" + fmt(s.std_min_ttc, 3) +
         " drac " + fmt(s.mean_max_drac) + " crashes " + std::to_string(s.crashes);
}

bool trends(const std::vector<ScenarioResult> & rs, std::string & detail)
{
  bool ok = true;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    detail += (i ? "; " : "") + column(rs[i]);
    ok = ok && rs[i].summary && rs[i].summary->crashes == 0 && rs[i].summary->missing == 0;
  }
  for (std::size_t i = 1; ok && i < rs.size(); ++i) {
    const auto & a = *rs[i - 1].summary, & b = *rs[i].summary;
    ok = b.mean_min_ttc < a.mean_min_ttc && b.mean_max_drac > a.mean_max_drac;
  }
  return ok;
}

// 4
Outcome friction_trend()
{
  auto base = baseline();
  base.visibility = 150.0;
  const auto rs = sweep({base, SweepAxis::mu, {0.7, 0.4, 0.35}});
  std::string detail;
  bool ok = trends(rs, detail);
  for (const auto & r : rs) {
    ok = ok && r.summary->mean_min_ttc < 3.0;
    for (const auto & m : r.summary->matched) {
      ok = ok && m && m->min_ttc < 3.0;
    }
  }
  const double t0 = rs[0].summary ? rs[0].summary->mean_min_ttc : NAN;
  ok = ok && t0 >= 1.0 && t0 < 3.0;
  return {ok, detail};
}

// 5
Outcome visibility_trend()
{
  auto base = baseline();
  base.mu = 0.7;
  const auto rs = sweep({base, SweepAxis::visibility, {55, 50, 47}});
  std::string detail;
  bool ok = trends(rs, detail);
  ok = ok && rs[2].summary->std_min_ttc > rs[0].summary->std_min_ttc;
  return {ok, detail};
}

// 6
Outcome crash_regime()
{
  auto base = baseline();
  base.mu = 0.7;
  const auto rs = sweep({base, SweepAxis::visibility, {45, 40}});
  bool ok = true;
  std::string detail;
  for (const auto & r : rs) {
    int crashed = 0;
    std::optional<std::string> link;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto & rep : r.replications) {
      const auto it = std::find_if(rep.logs.crashes.begin(), rep.logs.crashes.end(),
          [](const CrashRecord & x) { return x.follower == "ego"; });
      if (it == rep.logs.crashes.end()) {
        continue;
      }
      ++crashed;
      ok = ok && (!link || *link == it->link);
      link = it->link;
      lo = std::min(lo, it->s);
      hi = std::max(hi, it->s);
    }
    ok = ok && crashed == r.config.replications && hi - lo <= 50.0;
    detail += r.config.name + ": " + std::to_string(crashed) + "/" +
      std::to_string(r.config.replications) + " crashed on " + link.value_or("-") +
      " spread " + fmt(hi - lo) + " m; ";
  }
  return {ok, detail};
}

// 7
Outcome lockstep_exactness()
{
  auto c = baseline();
  c.replications = 1;
  const auto res = run_scenario(c);
  const auto & logs = res.replications.at(0).logs;
  const auto steps = macro_steps(c.duration, c.bridge.macro_dt);
  bool ticks_ok = static_cast<std::int64_t>(logs.ticks.size()) == steps;
  for (std::size_t k = 0; ticks_ok && k < logs.ticks.size(); ++k) {
    ticks_ok = logs.ticks[k] == static_cast<std::int64_t>(k);
  }
  std::map<std::int64_t, const TrajectoryRow *> ego_rows;
  for (const auto & row : logs.trajectory) {
    if (row.id == "ego") {
      ego_rows[row.tick] = &row;
    }
  }
  std::size_t equal = 0;
  for (const auto & b : logs.boundaries) {
    const auto it = ego_rows.find(b.tick);
    if (it != ego_rows.end() && it->second->route_s == b.s && it->second->v == b.v) {
      ++equal;
    }
  }
  const bool ok = ticks_ok && logs.boundaries.size() == static_cast<std::size_t>(steps) &&
    equal == logs.boundaries.size();
  return {ok, std::to_string(equal) + "/" + std::to_string(steps) +
    " boundaries bit-identical; tick sequence 0.." + std::to_string(steps - 1) +
    (ticks_ok ? " complete" : " broken")};
}

bool same_files(const fs::path & a, const fs::path & b, const std::vector<std::string> & files,
  std::string & detail)
{
  for (const auto & f : files) {
    if (read_file((a / f).string()) != read_file((b / f).string())) {
      detail += f + " differs; ";
      return false;
    }
  }
  return true;
}

// 8
Outcome transport_equivalence()
{
  auto c = baseline();
  const auto a = run_scenario(c);
  c.bridge.transport = TransportKind::stream;
  const auto b = run_scenario(c);
  const auto da = scratch("in_process"), db = scratch("stream");
  export_results(da.string(), {&a}, false);
  export_results(db.string(), {&b}, false);
  std::string detail;
  const bool ok = same_files(da, db, {"episodes.csv", "summary.csv"}, detail);
  return {ok, detail + "episodes.csv and summary.csv " + (ok ? "byte-identical" : "differ")};
}

// 9
Outcome demand_optimality()
{
  std::mt19937_64 gen(314);
  SampleOptions lenient;
  lenient.strict_coverage = false;
  int match = 0, exact_recount = 0;
  for (int k = 0; k < 50; ++k) {
    const auto in = oracles::random_instance(gen);
    std::mt19937_64 rng(static_cast<std::uint64_t>(k));
    const auto t = sample_routes(in.counts, in.routes, 600.0, rng, lenient);
    match += t.optimal && t.deviation == oracles::brute_force(in);
    exact_recount += recount(t.trips, in.routes, in.counts) == t.achieved;
  }
  return {match == 50 && exact_recount == 50, std::to_string(match) +
    "/50 optimal objectives, " + std::to_string(exact_recount) + "/50 exact recounts"};
}

// 10
Outcome determinism()
{
  const auto c = baseline();
  const auto a = run_scenario(c);
  const auto b = run_scenario(c);
  const auto da = scratch("det_a"), db = scratch("det_b");
  export_results(da.string(), {&a}, false);
  export_results(db.string(), {&b}, false);
  std::vector<std::string> files{"episodes.csv", "summary.csv"};
  for (int r = 0; r < c.replications; ++r) {
    files.push_back("run_" + std::to_string(r) + "/trajectory.csv");
    files.push_back("run_" + std::to_string(r) + "/ssm.csv");
  }
  std::string detail;
  const bool ok = same_files(da, db, files, detail);
  return {ok, detail + std::to_string(files.size()) + " files " +
    (ok ? "bit-identical" : "differ")};
}

// 11
Outcome episode_oracle()
{
  std::mt19937_64 rng(20260101);
  const EpisodeConfig cfg;
  int match = 0;
  std::size_t episodes = 0;
  for (int k = 0; k < 1000; ++k) {
    const auto s = oracles::random_stream(rng);
    const auto got = detect_episodes(s, cfg);
    match += got == oracles::oracle(s, cfg);
    episodes += got.size();
  }
  return {match == 1000, std::to_string(match) + "/1000 streams match (" +
    std::to_string(episodes) + " episodes)"};
}

struct Criterion
{
  int id;
  const char * name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char ** argv)
{
  if (argc > 1) {
    data_dir = argv[1];
  }
  const std::vector<Criterion> criteria{
    {1, "ssm-formula-oracle", 1.0, ssm_formulas},
    {2, "friction-clamp", 1.0, friction_clamp},
    {3, "lag-property", 10.0, lag_property},
    {4, "friction-trend", 120.0, friction_trend},
    {5, "visibility-trend", 120.0, visibility_trend},
    {6, "guaranteed-crash-regime", 60.0, crash_regime},
    {7, "lockstep-exactness", 30.0, lockstep_exactness},
    {8, "transport-equivalence", 60.0, transport_equivalence},
    {9, "demand-sampler-optimality", 30.0, demand_optimality},
    {10, "determinism", 60.0, determinism},
    {11, "episode-detector-oracle", 10.0, episode_oracle},
  };
  int failed = 0;
  for (const auto & c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception & e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = out.pass && secs < c.budget_s;
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << out.detail
              << " (" << fmt(secs, 3) << " s of " << fmt(c.budget_s) << " s)" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed ? 1 : 0;
}
