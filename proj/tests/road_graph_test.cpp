/*
 * Copyright 2026 The navpred Authors. All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "navpred/error.hpp"
#include "navpred/road_graph.hpp"

using namespace navpred;
using geo::LocalPoint;

namespace
{

// Independent linear-scan oracle: distance to the chord via closest-point
// parameter, computed without the library helper.
std::vector<EdgeId> brute_force_radius(const std::map<NodeId, LocalPoint>& nodes, const std::set<NavGraph::Edge>& edges,
                                       LocalPoint c, double r)
{
  std::vector<EdgeId> out;
  std::uint32_t i = 0;
  for (const auto& [s, d] : edges)
  {
    const LocalPoint a = nodes.at(s);
    const LocalPoint b = nodes.at(d);
    const double ux = b.x - a.x, uy = b.y - a.y;
    const double l2 = ux * ux + uy * uy;
    double t = l2 == 0.0 ? 0.0 : ((c.x - a.x) * ux + (c.y - a.y) * uy) / l2;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    const double ex = a.x + t * ux - c.x, ey = a.y + t * uy - c.y;
    if (std::sqrt(ex * ex + ey * ey) <= r)
    {
      out.push_back(EdgeId{i});
    }
    ++i;
  }
  return out;
}

struct RandomGraph
{
  std::map<NodeId, LocalPoint> nodes;
  std::set<NavGraph::Edge> edges;
};

RandomGraph random_graph(std::mt19937_64& rng, int n_nodes, std::size_t n_edges, double extent)
{
  std::uniform_real_distribution<double> u(-extent, extent);
  RandomGraph g;
  for (int i = 0; i < n_nodes; ++i)
  {
    g.nodes[1000 + i] = {u(rng), u(rng)};
  }
  while (g.edges.size() < n_edges)
  {
    const NodeId a = 1000 + static_cast<NodeId>(rng() % n_nodes);
    const NodeId b = 1000 + static_cast<NodeId>(rng() % n_nodes);
    if (a != b)
    {
      g.edges.emplace(a, b);
    }
  }
  return g;
}

LocalNavGraph chain_graph(const std::set<NavGraph::Edge>& edges)
{
  std::map<NodeId, LocalPoint> nodes;
  for (const auto& [a, b] : edges)
  {
    nodes[a] = {static_cast<double>(a), 0.0};
    nodes[b] = {static_cast<double>(b), 1.0};
  }
  return LocalNavGraph::from_local(nodes, edges);
}

EdgeId id_of(const LocalNavGraph& g, NodeId a, NodeId b)
{
  return g.find_edge(a, b).value();
}

std::vector<EdgeId> ids(const LocalNavGraph& g, std::initializer_list<NavGraph::Edge> edges)
{
  std::vector<EdgeId> out;
  for (const auto& [a, b] : edges)
  {
    out.push_back(id_of(g, a, b));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST(Resample, ExactDivision)
{
  const auto p = resample_polyline({0, 0}, {4, 0}, 2.0);
  EXPECT_EQ(p, (std::vector<LocalPoint>{{0, 0}, {2, 0}, {4, 0}}));
}

TEST(Resample, CeilRule)
{
  const auto p = resample_polyline({0, 0}, {5, 0}, 2.0);
  ASSERT_EQ(p.size(), 4u);
  EXPECT_DOUBLE_EQ(p[1].x, 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(p[2].x, 10.0 / 3.0);
  EXPECT_EQ(p[3], (LocalPoint{5, 0}));
}

TEST(Resample, ShorterThanStepAndDegenerate)
{
  EXPECT_EQ(resample_polyline({0, 0}, {1, 0}, 2.0), (std::vector<LocalPoint>{{0, 0}, {1, 0}}));
  EXPECT_EQ(resample_polyline({3, 3}, {3, 3}, 2.0), (std::vector<LocalPoint>{{3, 3}, {3, 3}}));
  EXPECT_THROW(resample_polyline({0, 0}, {1, 0}, 0.0), Error);
}

TEST(Resample, ArcLengthAndUniformSpacingProperty)
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-200.0, 200.0);
  std::uniform_real_distribution<double> s(0.1, 7.0);
  for (int trial = 0; trial < 500; ++trial)
  {
    const LocalPoint a{u(rng), u(rng)};
    const LocalPoint b{u(rng), u(rng)};
    const double step = s(rng);
    const auto p = resample_polyline(a, b, step);
    const double length = std::hypot(b.x - a.x, b.y - a.y);
    double arc = 0.0;
    const double first = std::hypot(p[1].x - p[0].x, p[1].y - p[0].y);
    for (std::size_t i = 1; i < p.size(); ++i)
    {
      const double d = std::hypot(p[i].x - p[i - 1].x, p[i].y - p[i - 1].y);
      arc += d;
      EXPECT_LE(d, step * (1.0 + 1e-12));
      EXPECT_NEAR(d, first, 1e-9 * std::max(1.0, first));
    }
    EXPECT_LT(std::abs(arc - length), 1e-9 * length);
    EXPECT_EQ(p.front(), a);
    EXPECT_EQ(p.back(), b);
  }
}

TEST(Localize, OriginAndSpacing)
{
  NavGraph g;
  const auto frame = geo::pittsburgh_frame();
  const geo::GeoPoint origin = geo::utm_to_wgs84({frame.origin_easting, frame.origin_northing, 17,
                                                  geo::Hemisphere::north});
  g.add_node(1, origin);
  const auto local = localize(g, frame);
  EXPECT_NEAR(local.position(1).x, 0.0, 1e-6);
  EXPECT_NEAR(local.position(1).y, 0.0, 1e-6);

  // Two nodes one meter apart in easting.
  NavGraph pair;
  pair.add_node(1, geo::utm_to_wgs84({600000.0, 4480000.0, 17, geo::Hemisphere::north}));
  pair.add_node(2, geo::utm_to_wgs84({600001.0, 4480000.0, 17, geo::Hemisphere::north}));
  pair.add_edge(1, 2);
  const auto lp = localize(pair, frame);
  EXPECT_NEAR(lp.position(2).x - lp.position(1).x, 1.0, 1e-6);
  EXPECT_NEAR(lp.position(2).y - lp.position(1).y, 0.0, 1e-6);

  const auto empty = localize(NavGraph{}, frame);
  EXPECT_TRUE(empty.empty());
  EXPECT_EQ(empty.edge_count(), 0u);
  EXPECT_TRUE(empty.edges_in_radius({0, 0}, 100.0).empty());
}

TEST(RadiusQuery, MidpointAndMiss)
{
  const auto g = LocalNavGraph::from_local({{1, {0, 0}}, {2, {10, 0}}}, {{1, 2}});
  const auto hit = g.segments_in_radius({5, 0}, 1.0);
  ASSERT_EQ(hit.size(), 1u);
  EXPECT_EQ(hit[0].src, 1);
  EXPECT_EQ(hit[0].polyline.size(), 6u);
  EXPECT_TRUE(g.segments_in_radius({5, 3}, 2.0).empty());
  EXPECT_EQ(g.segments_in_radius({5, 3}, 3.0).size(), 1u);
  EXPECT_THROW(g.edges_in_radius({0, 0}, 0.0), Error);
}

TEST(RadiusQuery, MatchesBruteForceProperty)
{
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> uc(-120.0, 120.0);
  std::uniform_real_distribution<double> ur(0.5, 60.0);
  int nonempty = 0;
  for (int graph_trial = 0; graph_trial < 10; ++graph_trial)
  {
    const auto rg = random_graph(rng, 60, 100, 100.0);
    const auto g = LocalNavGraph::from_local(rg.nodes, rg.edges);
    for (int q = 0; q < 100; ++q)
    {
      const LocalPoint c{uc(rng), uc(rng)};
      const double r = ur(rng);
      const auto expected = brute_force_radius(rg.nodes, rg.edges, c, r);
      EXPECT_EQ(g.edges_in_radius(c, r), expected);
      nonempty += expected.empty() ? 0 : 1;
    }
  }
  EXPECT_GT(nonempty, 500);
}

TEST(RadiusQuery, InsertionOrderIndependent)
{
  std::mt19937_64 rng(9);
  const auto rg = random_graph(rng, 40, 80, 50.0);
  std::vector<NavGraph::Edge> shuffled(rg.edges.begin(), rg.edges.end());
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  NavGraph a;
  NavGraph b;
  for (const auto& [id, p] : rg.nodes)
  {
    a.add_node(id, {40.0 + p.x * 1e-5, -80.0 + p.y * 1e-5});
    b.add_node(id, {40.0 + p.x * 1e-5, -80.0 + p.y * 1e-5});
  }
  for (const auto& [s, d] : rg.edges)
  {
    a.add_edge(s, d);
  }
  for (const auto& [s, d] : shuffled)
  {
    b.add_edge(s, d);
  }
  const auto la = localize(a, geo::pittsburgh_frame());
  const auto lb = localize(b, geo::pittsburgh_frame());
  const LocalPoint c = la.position(1000);
  for (double r : {5.0, 50.0, 500.0})
  {
    const auto ea = la.edges_in_radius(c, r);
    const auto eb = lb.edges_in_radius(c, r);
    ASSERT_EQ(ea, eb);
    for (const EdgeId e : ea)
    {
      EXPECT_EQ(la.edge(e), lb.edge(e));
    }
  }
}

TEST(Topology, ChainForkMerge)
{
  const auto chain = chain_graph({{1, 2}, {2, 3}});
  EXPECT_EQ(chain.successors(id_of(chain, 1, 2)), ids(chain, {{2, 3}}));
  EXPECT_EQ(chain.predecessors(id_of(chain, 2, 3)), ids(chain, {{1, 2}}));
  EXPECT_TRUE(chain.successors(id_of(chain, 2, 3)).empty());

  const auto fork = chain_graph({{1, 2}, {2, 3}, {2, 4}});
  EXPECT_EQ(fork.successors(id_of(fork, 1, 2)), ids(fork, {{2, 3}, {2, 4}}));

  const auto merge = chain_graph({{1, 3}, {2, 3}, {3, 4}});
  EXPECT_EQ(merge.predecessors(id_of(merge, 3, 4)), ids(merge, {{1, 3}, {2, 3}}));

  const auto isolated = chain_graph({{5, 6}});
  EXPECT_TRUE(isolated.predecessors(id_of(isolated, 5, 6)).empty());
}

TEST(Topology, UTurnExcluded)
{
  const auto g = chain_graph({{1, 2}, {2, 1}});
  EXPECT_TRUE(g.successors(id_of(g, 1, 2)).empty());
  EXPECT_TRUE(g.predecessors(id_of(g, 1, 2)).empty());

  const auto road = chain_graph({{1, 2}, {2, 1}, {2, 3}, {3, 2}});
  EXPECT_EQ(road.successors(id_of(road, 1, 2)), ids(road, {{2, 3}}));
  EXPECT_EQ(road.predecessors(id_of(road, 2, 3)), ids(road, {{1, 2}}));
}

TEST(Topology, UnknownEdge)
{
  const auto g = chain_graph({{1, 2}});
  try
  {
    g.successors(EdgeId{7});
    FAIL();
  }
  catch (const Error& e)
  {
    EXPECT_EQ(e.code(), ErrorCode::not_found);
  }
  EXPECT_THROW(g.predecessors(EdgeId{1}), Error);
}

TEST(Topology, DualityProperty)
{
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 20; ++trial)
  {
    const auto rg = random_graph(rng, 25, 70, 30.0);
    const auto g = LocalNavGraph::from_local(rg.nodes, rg.edges);
    for (std::uint32_t i = 0; i < g.edge_count(); ++i)
    {
      for (std::uint32_t j = 0; j < g.edge_count(); ++j)
      {
        const auto succ = g.successors(EdgeId{i});
        const auto pred = g.predecessors(EdgeId{j});
        const bool forward = std::find(succ.begin(), succ.end(), EdgeId{j}) != succ.end();
        const bool backward = std::find(pred.begin(), pred.end(), EdgeId{i}) != pred.end();
        EXPECT_EQ(forward, backward);
      }
    }
  }
}
