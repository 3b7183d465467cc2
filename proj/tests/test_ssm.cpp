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
#include "safetwin/ssm.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

namespace safetwin
{
namespace
{

using namespace oracles;


TEST(Ttc, HandCases)
{
  EXPECT_EQ(ttc(30.0, 20.0, 10.0), 3.0);
  EXPECT_EQ(ttc(10.0, 10.0, 10.0), kInf);
  EXPECT_EQ(ttc(10.0, 5.0, 10.0), kInf);
  EXPECT_THROW(ttc(0.0, 20.0, 10.0), DomainError);
  EXPECT_THROW(ttc(-1.0, 20.0, 10.0), DomainError);
}

TEST(Drac, HandCases)
{
  EXPECT_EQ(drac(25.0, 20.0, 10.0), 2.0);
  EXPECT_EQ(drac(10.0, 15.0, 5.0), 5.0);
  EXPECT_EQ(drac(10.0, 10.0, 10.0), 0.0);
  EXPECT_THROW(drac(0.0, 20.0, 10.0), DomainError);
}

TEST(Ssm, IdentitiesAndDualityOnRandomTriples)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> gap_d(0.1, 200.0), v_d(0.0, 40.0);
  for (int i = 0; i < 10000; ++i) {
    const double gap = std::nextafter(gap_d(rng), 201.0);
    const double v = v_d(rng), vl = v_d(rng);
    const double t = ttc(gap, v, vl), d = drac(gap, v, vl);
    EXPECT_EQ(d > 0.0, std::isfinite(t));
    EXPECT_GE(d, 0.0);
    if (v > vl) {
      const double dv = v - vl;
      EXPECT_LE(std::abs(t * dv - gap) / gap, 1e-12);
      EXPECT_LE(std::abs(d * 2.0 * gap - dv * dv) / (dv * dv), 1e-12);
    }
  }
}

TEST(Ssm, Monotonicity)
{
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.5, 30.0);
  for (int i = 0; i < 1000; ++i) {
    const double gap = u(rng), dv = u(rng), vl = u(rng);
    EXPECT_LT(ttc(gap, vl + dv, vl), ttc(gap * 1.1, vl + dv, vl));
    EXPECT_GT(ttc(gap, vl + dv, vl), ttc(gap, vl + dv * 1.1, vl));
    EXPECT_GT(drac(gap, vl + dv, vl), drac(gap * 1.1, vl + dv, vl));
    EXPECT_LT(drac(gap, vl + dv, vl), drac(gap, vl + dv * 1.1, vl));
  }
}

SsmSample sample(double t, double ttc_v, double drac_v)
{
  SsmSample s;
  s.t = t;
  s.ego = "ego";
  s.ttc = ttc_v;
  s.drac = drac_v;
  s.conflict = classify(s, {});
  s.link = "m1";
  s.s = t;
  return s;
}

TEST(Classify, StrictThresholds)
{
  EXPECT_TRUE(classify(sample(0, 0.7010, 0.0), {}));
  EXPECT_FALSE(classify(sample(0, kInf, 0.0), {}));
  EXPECT_FALSE(classify(sample(0, 3.0, 3.0), {}));
  EXPECT_TRUE(classify(sample(0, 3.0, 3.0000001), {}));
  EXPECT_TRUE(classify(sample(0, 2.9999999, 0.0), {}));
}

TEST(DetectCrash, BoundaryIsInclusive)
{
  EXPECT_FALSE(detect_crash(0.01));
  EXPECT_TRUE(detect_crash(0.0));
  const auto c = detect_crash(-0.3, 12.5, "m2", 44.0);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->t, 12.5);
  EXPECT_EQ(c->link, "m2");
}

TEST(MakeSample, CrashSample)
{
  const auto s = make_sample(1.0, "e", "l", -0.2, 10.0, 0.0, "m1", 50.0, {});
  EXPECT_TRUE(s.crash);
  EXPECT_TRUE(s.conflict);
  EXPECT_EQ(s.ttc, 0.0);
  EXPECT_EQ(s.drac, kInf);
  const auto ok = make_sample(1.0, "e", "l", 30.0, 20.0, 10.0, "m1", 50.0, {});
  EXPECT_FALSE(ok.crash);
  EXPECT_FALSE(ok.conflict);
  EXPECT_EQ(ok.ttc, 3.0);
}

TEST(BumperGap, AcrossLinks)
{
  RoadNetwork net;
  net.nodes = {{"a"}, {"b"}, {"c"}};
  net.links = {{"l1", "a", "b", 100.0, 1, 20.0}, {"l2", "b", "c", 200.0, 1, 20.0}};
  const std::vector<std::string> route{"l1", "l2"};
  EXPECT_DOUBLE_EQ(bumper_gap(net, route, "l1", 90.0, "l1", 99.0, 4.5), 4.5);
  EXPECT_DOUBLE_EQ(bumper_gap(net, route, "l1", 90.0, "l2", 20.0, 4.5), 25.5);
  EXPECT_THROW(bumper_gap(net, route, "l2", 10.0, "l1", 20.0, 4.5), InputError);
}

TEST(Episodes, Basics)
{
  EXPECT_TRUE(detect_episodes({sample(0, kInf, 0), sample(0.1, 4.0, 1.0)}).empty());
  std::vector<SsmSample> block{sample(0.0, kInf, 0), sample(0.1, 2.5, 1.0),
    sample(0.2, 1.5, 2.0), sample(0.3, 2.0, 3.5), sample(0.4, 4.0, 1.0)};
  auto eps = detect_episodes(block);
  ASSERT_EQ(eps.size(), 1u);
  EXPECT_EQ(eps[0].start, 0.1);
  EXPECT_EQ(eps[0].end, 0.3);
  EXPECT_EQ(eps[0].min_ttc, 1.5);
  EXPECT_EQ(eps[0].s, 0.2);
  EXPECT_EQ(eps[0].max_drac, 3.5);
  EXPECT_FALSE(eps[0].crashed);

  std::vector<SsmSample> two{sample(0.0, 2.0, 0), sample(0.4, 4, 0), sample(1.0, 2.5, 0)};
  EXPECT_EQ(detect_episodes(two).size(), 2u);
  EXPECT_THROW(detect_episodes({sample(1.0, 2, 0), sample(0.5, 2, 0)}), InputError);
}

TEST(Episodes, CrashClosesEpisode)
{
  auto crash = make_sample(0.3, "ego", "l", -0.1, 10.0, 0.0, "m1", 7.0, {});
  std::vector<SsmSample> s{sample(0.1, 2.0, 1.0), sample(0.2, 1.0, 2.0), crash,
    sample(0.4, 2.0, 1.0)};
  const auto eps = detect_episodes(s);
  ASSERT_EQ(eps.size(), 2u);
  EXPECT_TRUE(eps[0].crashed);
  EXPECT_EQ(eps[0].end, 0.3);
  EXPECT_EQ(eps[0].min_ttc, 1.0);
  EXPECT_FALSE(eps[1].crashed);
}

TEST(Episodes, MatchBruteForceOnRandomStreams)
{
  std::mt19937_64 rng(20260101);
  const EpisodeConfig cfg;
  for (int k = 0; k < 1000; ++k) {
    const auto s = random_stream(rng);
    ASSERT_EQ(detect_episodes(s, cfg), oracle(s, cfg)) << "stream " << k;
  }
}

TEST(Episodes, EveryConflictIsCoveredOnce)
{
  std::mt19937_64 rng(99);
  const EpisodeConfig cfg;
  for (int k = 0; k < 300; ++k) {
    const auto s = random_stream(rng);
    const auto eps = detect_episodes(s, cfg);
    for (const auto & x : s) {
      if (!x.conflict) {
        continue;
      }
      int covering = 0;
      for (const auto & e : eps) {
        covering += x.t >= e.start && x.t <= e.end + cfg.hangover;
      }
      // samples at the same instant as a crash share its episode window
      EXPECT_GE(covering, 1);
      if (!x.crash) {
        int inside = 0;
        for (const auto & e : eps) {
          inside += x.t >= e.start && x.t <= e.end;
        }
        EXPECT_GE(inside, 1);
      }
    }
    for (const auto & e : eps) {
      EXPECT_LE(e.start, e.end);
    }
  }
}

ConflictEpisode ep(double min_ttc, double max_drac, double s, bool crashed = false)
{
  return {"ego", 0.0, 1.0, min_ttc, max_drac, "m2", s, crashed};
}

TEST(Summarize, SmallIdentities)
{
  auto same = summarize("a", {{0, {ep(1.6, 3.2, 100)}}, {1, {ep(1.6, 3.2, 105)}},
    {2, {ep(1.6, 3.2, 95)}}});
  EXPECT_DOUBLE_EQ(same.mean_min_ttc, 1.6);
  EXPECT_EQ(same.std_min_ttc, 0.0);
  auto two = summarize("b", {{0, {ep(1.0, 1.0, 100)}}, {1, {ep(2.0, 3.0, 110)}}});
  EXPECT_DOUBLE_EQ(two.mean_min_ttc, 1.5);
  EXPECT_DOUBLE_EQ(two.std_min_ttc, 0.5);
  EXPECT_DOUBLE_EQ(two.mean_max_drac, 2.0);
  EXPECT_DOUBLE_EQ(two.std_max_drac, 1.0);
  EXPECT_THROW(summarize("empty", {{0, {}}, {1, {}}}), EmptySummaryError);
}

TEST(Summarize, CrashesAndOutliers)
{
  auto s = summarize("c", {
      {0, {ep(1.0, 4.0, 100), ep(0.5, 9.0, 400)}},
      {1, {ep(kInf, kInf, 90, true)}},
      {2, {ep(2.0, 2.0, 120)}},
      {3, {}},
    });
  EXPECT_EQ(s.crashes, 1);
  EXPECT_EQ(s.missing, 1);
  EXPECT_EQ(s.replications, 4);
  EXPECT_DOUBLE_EQ(s.mean_min_ttc, 1.5);
  EXPECT_EQ(s.link, "m2");
  auto all_crash = summarize("d", {{0, {ep(kInf, 0, 10, true)}}});
  EXPECT_TRUE(std::isnan(all_crash.mean_min_ttc));
}

TEST(Summarize, TenReplicationsMatchDirectStatistics)
{
  const std::vector<double> ttcs{1.61, 1.58, 1.63, 1.60, 1.59, 1.62, 1.57, 1.64, 1.60, 1.61};
  const std::vector<double> dracs{4.1, 4.3, 3.9, 4.0, 4.2, 4.4, 3.8, 4.1, 4.0, 4.2};
  std::vector<ReplicationEpisodes> runs;
  for (int r = 0; r < 10; ++r) {
    runs.push_back({r, {ep(ttcs[r], dracs[r], 200.0 + r)}});
  }
  const auto s = summarize("e", runs);
  // two-pass sums written out by hand
  double mt = 0, md = 0;
  for (int r = 0; r < 10; ++r) {
    mt += ttcs[r] / 10.0;
    md += dracs[r] / 10.0;
  }
  double vt = 0, vd = 0;
  for (int r = 0; r < 10; ++r) {
    vt += (ttcs[r] - mt) * (ttcs[r] - mt) / 10.0;
    vd += (dracs[r] - md) * (dracs[r] - md) / 10.0;
  }
  EXPECT_NEAR(s.mean_min_ttc, mt, 1e-12);
  EXPECT_NEAR(s.std_min_ttc, std::sqrt(vt), 1e-12);
  EXPECT_NEAR(s.mean_max_drac, md, 1e-12);
  EXPECT_NEAR(s.std_max_drac, std::sqrt(vd), 1e-12);
  EXPECT_NEAR(s.mean_min_ttc, 1.605, 1e-12);
  EXPECT_EQ(s.crashes, 0);
}

TEST(SsmCsv, RoundTrip)
{
  std::mt19937_64 rng(3);
  auto s = random_stream(rng);
  while (s.empty()) {
    s = random_stream(rng);
  }
  EXPECT_EQ(parse_ssm_csv(ssm_csv(s)), s);
  EXPECT_THROW(parse_ssm_csv("t,ego\n1,2,3\n"), ParseError);
}

TEST(SummaryCsv, Layout)
{
  auto s = summarize("mu_0.7", {{0, {ep(1.0, 1.0, 100)}}, {1, {ep(2.0, 3.0, 110)}}});
  const auto csv = summary_csv({s});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "statistic,mu_0.7");
  EXPECT_NE(csv.find("std_min_ttc_population,0.5\n"), std::string::npos);
  EXPECT_NE(csv.find("crash_count,0\n"), std::string::npos);
}

}  // namespace
}  // namespace safetwin
