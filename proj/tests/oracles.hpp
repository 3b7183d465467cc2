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

// Independent reference implementations shared by the unit tests and the
// acceptance runner.

#ifndef SAFETWIN__TESTS__ORACLES_HPP_
#define SAFETWIN__TESTS__ORACLES_HPP_

#include "safetwin/demand.hpp"
#include "safetwin/ssm.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace safetwin::oracles
{

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent scan: group the conflicting samples, then compute each group's
// fields from scratch.
inline std::vector<ConflictEpisode> oracle(const std::vector<SsmSample> & s, const EpisodeConfig & cfg)
{
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s[i].conflict && !s[i].crash) {
      continue;
    }
    bool fresh = groups.empty();
    if (!fresh) {
      const auto & prev = s[groups.back().back()];
      fresh = prev.crash || s[i].t - prev.t > cfg.hangover + 1e-9;
    }
    if (fresh) {
      groups.emplace_back();
    }
    groups.back().push_back(i);
  }
  std::vector<ConflictEpisode> out;
  for (const auto & g : groups) {
    ConflictEpisode e;
    e.ego = s[g.front()].ego;
    e.start = s[g.front()].t;
    e.end = s[g.back()].t;
    e.crashed = s[g.back()].crash;
    e.min_ttc = kInf;
    e.max_drac = 0.0;
    e.link = s[g.front()].link;
    e.s = s[g.front()].s;
    std::optional<std::size_t> arg;
    for (auto i : g) {
      if (s[i].crash || s[i].ttc < 0.0 || s[i].ttc > cfg.ttc_window) {
        continue;
      }
      if (!arg || s[i].ttc < s[*arg].ttc) {
        arg = i;
      }
      e.max_drac = std::max(e.max_drac, s[i].drac);
    }
    if (arg) {
      e.min_ttc = s[*arg].ttc;
      e.link = s[*arg].link;
      e.s = s[*arg].s;
    } else if (e.crashed) {
      e.link = s[g.back()].link;
      e.s = s[g.back()].s;
    }
    out.push_back(e);
  }
  return out;
}

inline std::vector<SsmSample> random_stream(std::mt19937_64 & rng)
{
  std::uniform_int_distribution<int> len(0, 120), step(1, 6), kind(0, 99);
  std::uniform_real_distribution<double> gap(0.5, 80.0), v(0.0, 40.0);
  std::vector<SsmSample> out;
  std::int64_t tick = 0;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    tick += step(rng) == 1 ? 0 : step(rng);
    const double t = static_cast<double>(tick) * 0.1;
    const int k = kind(rng);
    const double g = k < 2 ? -0.1 : gap(rng);
    auto x = make_sample(t, "ego", "lead", g, v(rng), v(rng), k % 2 ? "m1" : "m2",
      static_cast<double>(i), {});
    out.push_back(x);
  }
  return out;
}

inline CandidateRoute route(std::string id, std::vector<std::string> detectors)
{
  return {std::move(id), {}, std::move(detectors)};
}

inline CountConstraint count(std::string d, std::int64_t n, double t0 = 0.0, double t1 = 600.0)
{
  return {std::move(d), t0, t1, n};
}

struct Instance
{
  std::vector<CountConstraint> counts;
  std::vector<CandidateRoute> routes;
};

inline Instance random_instance(std::mt19937_64 & rng)
{
  std::uniform_int_distribution<int> n_routes(1, 6), n_dets(1, 4), target(0, 20);
  Instance in;
  const int d = n_dets(rng);
  for (int k = 0; k < d; ++k) {
    in.counts.push_back(count("D" + std::to_string(k), target(rng)));
  }
  const int r = n_routes(rng);
  for (int k = 0; k < r; ++k) {
    std::vector<std::string> dets;
    for (int j = 0; j < d; ++j) {
      if (rng() % 2) {
        dets.push_back("D" + std::to_string(j));
      }
    }
    in.routes.push_back(route("R" + std::to_string(k), dets));
  }
  return in;
}

// Exhaustive minimum over every multiplicity vector with x_r at most the
// largest target the route sees (beyond that, lowering x_r improves every
// counted detector on r, so no optimum lies outside the box).
inline std::int64_t brute_force(const Instance & in)
{
  const auto nr = in.routes.size(), nc = in.counts.size();
  std::vector<std::vector<int>> hits(nr, std::vector<int>(nc, 0));
  std::vector<std::int64_t> ub(nr, 0);
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < nc; ++c) {
      const auto & d = in.routes[r].detectors;
      hits[r][c] = std::find(d.begin(), d.end(), in.counts[c].detector) != d.end();
      if (hits[r][c]) {
        ub[r] = std::max(ub[r], in.counts[c].count);
      }
    }
  }
  std::vector<std::int64_t> x(nr, 0), sum(nc, 0);
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  auto rec = [&](auto && self, std::size_t r) -> void {
      if (r == nr) {
        std::int64_t dev = 0;
        for (std::size_t c = 0; c < nc; ++c) {
          dev += std::abs(sum[c] - in.counts[c].count);
        }
        best = std::min(best, dev);
        return;
      }
      for (std::int64_t v = 0; v <= ub[r]; ++v) {
        for (std::size_t c = 0; c < nc; ++c) {
          sum[c] += hits[r][c] * v;
        }
        self(self, r + 1);
        for (std::size_t c = 0; c < nc; ++c) {
          sum[c] -= hits[r][c] * v;
        }
      }
    };
  rec(rec, 0);
  return best;
}

}  // namespace safetwin::oracles

#endif  // SAFETWIN__TESTS__ORACLES_HPP_
