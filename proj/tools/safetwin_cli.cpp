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

// Command-line entry point: run, sweep and demand.

#include "safetwin/common.hpp"
#include "safetwin/demand.hpp"
#include "safetwin/scenario.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>

namespace
{

using nlohmann::json;
using namespace safetwin;

json number(double v)
{
  return std::isfinite(v) ? json(v) : json(nullptr);
}

json summary_json(const ScenarioResult & r)
{
  json j;
  j["scenario"] = r.config.name;
  j["mu"] = r.config.mu;
  j["visibility"] = r.config.visibility;
  j["replications"] = r.config.replications;
  if (r.summary) {
    const auto & s = *r.summary;
    j["crashes"] = s.crashes;
    j["missing"] = s.missing;
    j["mean_min_ttc"] = number(s.mean_min_ttc);
    j["std_min_ttc"] = number(s.std_min_ttc);
    j["mean_max_drac"] = number(s.mean_max_drac);
    j["std_max_drac"] = number(s.std_max_drac);
    j["link"] = s.link;
    j["s"] = s.s;
  }
  j["diagnostics"] = r.diagnostics;
  return j;
}

std::vector<double> parse_values(const std::string & text)
{
  std::vector<double> out;
  for (const auto & v : split(text, ',')) {
    double x = 0.0;
    if (!parse_double(trim(v), x)) {
      throw ConfigError("invalid sweep value '" + std::string(v) + "'");
    }
    out.push_back(x);
  }
  return out;
}

int fail(const std::string & kind, const std::string & message)
{
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"safetwin: traffic-safety co-simulation"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::optional<double> mu, visibility;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  auto * run = app.add_subcommand("run", "run one scenario");
  run->add_option("--config", config_path, "scenario config file")->required();
  run->add_option("--mu", mu, "friction coefficient");
  run->add_option("--visibility", visibility, "sensing range, m");
  run->add_option("--seed", seed, "base seed");
  run->add_option("--reps", reps, "replications");
  run->add_option("--out", out_dir, "output directory");

  std::string axis, values;
  auto * sw = app.add_subcommand("sweep", "sweep friction or visibility");
  sw->add_option("--config", config_path, "scenario config file")->required();
  sw->add_option("--axis", axis, "mu or visibility")->required();
  sw->add_option("--values", values, "comma-separated values")->required();
  sw->add_option("--out", out_dir, "output directory")->required();

  std::string counts_path, network_path, trips_out;
  std::uint64_t demand_seed = 1;
  bool lenient = false;
  auto * dm = app.add_subcommand("demand", "sample routes from detector counts");
  dm->add_option("--counts", counts_path, "count CSV")->required();
  dm->add_option("--network", network_path, "network file")->required();
  dm->add_option("--out", trips_out, "trip file to write")->required();
  dm->add_option("--seed", demand_seed, "departure seed");
  dm->add_flag("--lenient", lenient, "report unreachable detectors instead of failing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);
    }
    return fail("usage", e.what());
  }

  try {
    if (*run) {
      auto cfg = load_scenario_config(config_path);
      if (mu) {
        cfg.mu = *mu;
      }
      if (visibility) {
        cfg.visibility = *visibility;
      }
      if (seed) {
        cfg.seed = *seed;
      }
      if (reps) {
        cfg.replications = *reps;
      }
      const auto result = run_scenario(cfg);
      export_results(out_dir, {&result}, false);
      std::cout << summary_json(result).dump(2) << '\n';
      if (!result.summary) {
        return fail("empty-summary", "no conflict episode in scenario " + cfg.name);
      }
    } else if (*sw) {
      SweepSpec spec;
      spec.base = load_scenario_config(config_path);
      spec.axis = parse_axis(axis);
      spec.values = parse_values(values);
      const auto results = sweep(spec);
      std::vector<const ScenarioResult *> ptrs;
      json all = json::array();
      for (const auto & r : results) {
        ptrs.push_back(&r);
        all.push_back(summary_json(r));
      }
      export_results(out_dir, ptrs, true);
      std::cout << all.dump(2) << '\n';
    } else if (*dm) {
      const auto net = load_network(read_file(network_path));
      const auto counts = ingest_counts(read_file(counts_path), net);
      const auto candidates = candidate_routes(net);
      double horizon = 0.0;
      for (const auto & c : counts) {
        horizon = std::max(horizon, c.t_end);
      }
      std::mt19937_64 rng(demand_seed);
      SampleOptions opts;
      opts.strict_coverage = !lenient;
      const auto trips = sample_routes(counts, candidates, horizon, rng, opts);
      write_file(trips_out, write_trip_file(to_schedule(trips, candidates)));
      const auto fit = evaluate_fit(trips, candidates, counts);
      json rows = json::array();
      for (const auto & r : fit.rows) {
        rows.push_back({{"detector", r.target.detector}, {"start", r.target.t_start},
            {"end", r.target.t_end}, {"count", r.target.count}, {"achieved", r.achieved},
            {"pass", r.pass}});
      }
      std::cout << json{{"trips", trips.trips.size()}, {"deviation", trips.deviation},
          {"optimal", trips.optimal}, {"unreachable", trips.unreachable}, {"fit", rows},
          {"fit_pass", fit.pass}}.dump(2) << '\n';
    }
  } catch (const Error & e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception & e) {
    return fail("internal", e.what());
  }
  return 0;
}
