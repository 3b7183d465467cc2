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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <string>

namespace safetwin
{
namespace
{

const std::string kData = SAFETWIN_DATA_DIR;

constexpr const char * kMinimal =
  "node a\n"
  "node b\n"
  "link l1 from=a to=b length=500 lanes=1 speed=13.89\n";

TEST(LoadNetwork, MinimalStraightLink)
{
  const auto net = load_network(kMinimal);
  ASSERT_EQ(net.links.size(), 1u);
  EXPECT_EQ(net.nodes.size(), 2u);
  EXPECT_DOUBLE_EQ(net.links[0].length, 500.0);
  EXPECT_EQ(net.links[0].lane_count, 1);
}

TEST(LoadNetwork, DanglingNodeNamesMissingId)
{
  try {
    load_network("node a\nlink l1 from=a to=X length=10 lanes=1 speed=5\n");
    FAIL() << "expected ReferenceError";
  } catch (const ReferenceError & e) {
    EXPECT_EQ(e.missing_id(), "X");
  }
}

TEST(LoadNetwork, ParseErrorCarriesLineAndColumn)
{
  try {
    load_network("node a\nnode b\nlink l1 from=a to=b length=abc lanes=1 speed=5\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError & e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_GT(e.column(), 1u);
  }
  EXPECT_THROW(load_network("bogus x\n"), ParseError);
}

TEST(LoadNetwork, CorridorFixtureHasThreeIntersections)
{
  const auto net = load_network(read_file(kData + "/corridor.net"));
  EXPECT_TRUE(validate_network(net).empty());
  std::size_t main_heads = 0;
  double main_length = 0.0;
  for (const auto & h : net.signals) {
    main_heads += h.link[0] == 'm';
  }
  for (const auto & l : net.links) {
    main_length += l.id[0] == 'm' ? l.length : 0.0;
  }
  EXPECT_EQ(main_heads, 3u);
  EXPECT_EQ(net.controllers.size(), 3u);
  EXPECT_DOUBLE_EQ(main_length, 2000.0);
}

TEST(ExportNative, RoundTripIsIdentity)
{
  const auto net = load_network(read_file(kData + "/corridor.net"));
  const auto again = load_network(export_native(net));
  EXPECT_EQ(net, again);
}

TEST(ExportNative, RoundTripPreservesAwkwardFloats)
{
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> len(0.1, 5000.0);
  for (int i = 0; i < 200; ++i) {
    RoadNetwork net;
    net.nodes = {{"a"}, {"b"}};
    net.links.push_back({"l", "a", "b", len(rng), 1 + i % 3, len(rng) / 100.0});
    EXPECT_EQ(load_network(export_native(net)), net);
  }
}

TEST(ValidateNetwork, ValidMinimalIsEmpty)
{
  EXPECT_TRUE(validate_network(load_network(kMinimal)).empty());
}

TEST(ValidateNetwork, StopLineBeyondLaneNamesSignal)
{
  auto net = load_network(kMinimal);
  net.controllers.push_back({"c", ControlMode::fixed, 0, 0, 0, {{30, 3, 2, {"h"}, {}}}});
  net.signals.push_back({"h", "l1", 0, 600.0, "c"});
  const auto v = validate_network(net);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("signal h"), std::string::npos);
}

TEST(ValidateNetwork, DetectorOnMissingLinkNamesDetector)
{
  auto net = load_network(kMinimal);
  net.detectors.push_back({"d9", "nowhere", 10.0});
  const auto v = validate_network(net);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_NE(v[0].find("detector d9"), std::string::npos);
}

TEST(ValidateNetwork, SortedByEntityIdAndDeterministic)
{
  auto net = load_network(kMinimal);
  net.detectors.push_back({"z", "nowhere", 10.0});
  net.detectors.push_back({"b", "l1", -1.0});
  net.links.push_back({"m", "a", "q", 0.0, 0, 1.0});
  const auto first = validate_network(net);
  ASSERT_GE(first.size(), 3u);
  EXPECT_EQ(first, validate_network(net));
  std::vector<std::string> ids;
  for (const auto & line : first) {
    const auto start = line.find(' ') + 1;
    ids.push_back(line.substr(start, line.find(':') - start));
  }
  EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
}

TEST(ValidateNetwork, ControllerTimings)
{
  auto net = load_network(kMinimal);
  net.signals.push_back({"h", "l1", 0, 490.0, "c"});
  net.controllers.push_back({"c", ControlMode::actuated, 50, 20, 3, {{0, 3, 2, {"h"}, {}}}});
  ASSERT_EQ(validate_network(net).size(), 1u);
  net.controllers[0].min_green = 10;
  EXPECT_TRUE(validate_network(net).empty());
}

TEST(OpenDrive, SingleRoadTwoLanes)
{
  const auto net = import_opendrive_subset(
    R"(<OpenDRIVE><header/>
         <road id="r" length="300" junction="-1">
           <planView><geometry s="0" x="0" y="0" hdg="0" length="300"><line/></geometry></planView>
           <lanes><laneSection s="0"><right>
             <lane id="-1" type="driving"/><lane id="-2" type="driving"/><lane id="-3" type="sidewalk"/>
           </right></laneSection></lanes>
         </road></OpenDRIVE>)");
  ASSERT_EQ(net.links.size(), 1u);
  EXPECT_EQ(net.links[0].lane_count, 2);
  EXPECT_DOUBLE_EQ(net.links[0].length, 300.0);
  EXPECT_EQ(net.nodes.size(), 2u);
}

TEST(OpenDrive, ArcGeometryIsUnsupported)
{
  try {
    import_opendrive_subset(read_file(kData + "/arc_road.xodr"));
    FAIL() << "expected UnsupportedElementError";
  } catch (const UnsupportedElementError & e) {
    EXPECT_EQ(e.element(), "arc");
  }
}

TEST(OpenDrive, LinkedRoadsShareANode)
{
  const auto net = import_opendrive_subset(read_file(kData + "/two_roads.xodr"));
  ASSERT_EQ(net.links.size(), 2u);
  EXPECT_EQ(net.nodes.size(), 3u);
  EXPECT_EQ(net.links[0].to_node, net.links[1].from_node);
  EXPECT_NEAR(net.links[0].speed_limit, 50.0 / 3.6, 1e-12);
  EXPECT_EQ(net.links[0].lane_count, 2);
  EXPECT_NEAR(net.links[1].length, 250.5, 1e-9);
  EXPECT_TRUE(validate_network(net).empty());
}

TEST(OpenDrive, RoundTripThroughNativeKeepsLengths)
{
  const auto net = import_opendrive_subset(read_file(kData + "/two_roads.xodr"));
  const auto again = load_network(export_native(net));
  ASSERT_EQ(again.links.size(), net.links.size());
  for (std::size_t i = 0; i < net.links.size(); ++i) {
    EXPECT_NEAR(again.links[i].length, net.links[i].length, 1e-6);
  }
}

TEST(OpenDrive, MalformedXml)
{
  EXPECT_THROW(import_opendrive_subset("<OpenDRIVE><road></OpenDRIVE>"), ParseError);
}

TEST(OpenDrive, JunctionAndUnknownElements)
{
  EXPECT_THROW(
    import_opendrive_subset(R"(<OpenDRIVE><junction id="1"/></OpenDRIVE>)"),
    UnsupportedElementError);
  EXPECT_THROW(
    import_opendrive_subset(
      R"(<OpenDRIVE><road id="r" length="10"><planView><geometry length="10"><spiral/></geometry></planView></road></OpenDRIVE>)"),
    UnsupportedElementError);
}

TEST(OpenDrive, OutputAlwaysValidates)
{
  // chains of straight roads with random lengths and lane counts
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 5);
    std::string xml = "<OpenDRIVE><header/>";
    for (int i = 0; i < n; ++i) {
      const double len = 1.0 + static_cast<double>(rng() % 100000) / 100.0;
      const int lanes = 1 + static_cast<int>(rng() % 3);
      xml += "<road id=\"r" + std::to_string(i) + "\" length=\"" + format_double(len) + "\"><link>";
      if (i > 0) {
        xml += "<predecessor elementType=\"road\" elementId=\"r" + std::to_string(i - 1) +
          "\" contactPoint=\"end\"/>";
      }
      xml += "</link><planView><geometry length=\"" + format_double(len) +
        "\"><line/></geometry></planView><lanes><laneSection><right>";
      for (int k = 0; k < lanes; ++k) {
        xml += "<lane type=\"driving\"/>";
      }
      xml += "</right></laneSection></lanes></road>";
    }
    xml += "</OpenDRIVE>";
    const auto net = import_opendrive_subset(xml);
    EXPECT_TRUE(validate_network(net).empty());
    EXPECT_EQ(net.links.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(net.nodes.size(), static_cast<std::size_t>(n + 1));
  }
}

TEST(SimplePaths, CorridorRoutesRunEntryToExit)
{
  const auto net = load_network(read_file(kData + "/corridor.net"));
  const auto paths = enumerate_simple_paths(net, 8);
  EXPECT_FALSE(paths.empty());
  const std::vector<std::string> through{"m1", "m2", "m3", "m4"};
  EXPECT_NE(std::find(paths.begin(), paths.end(), through), paths.end());
  for (const auto & p : paths) {
    for (std::size_t i = 1; i < p.size(); ++i) {
      EXPECT_EQ(net.find_link(p[i - 1])->to_node, net.find_link(p[i])->from_node);
    }
    EXPECT_TRUE(net.outgoing(net.find_link(p.back())->to_node).empty());
  }
}

}  // namespace
}  // namespace safetwin
