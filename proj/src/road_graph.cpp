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

#include "navpred/road_graph.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/box.hpp>
#include <boost/geometry/geometries/point.hpp>
#include <boost/geometry/index/rtree.hpp>
#include <fmt/format.h>

#include "navpred/error.hpp"

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

namespace navpred
{

using geo::LocalPoint;

struct LocalNavGraph::SpatialIndex
{
  using Point = bg::model::point<double, 2, bg::cs::cartesian>;
  using Box = bg::model::box<Point>;
  using Value = std::pair<Box, std::uint32_t>;

  bgi::rtree<Value, bgi::rstar<16>> tree;
};

std::vector<LocalPoint> resample_polyline(const LocalPoint& src, const LocalPoint& dst, double step)
{
  if (!(step > 0.0) || !std::isfinite(step))
  {
    throw Error(ErrorCode::invalid_input, fmt::format("resampling step must be positive, got {}", step));
  }
  const double dx = dst.x - src.x;
  const double dy = dst.y - src.y;
  const double length = std::hypot(dx, dy);
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(length / step)));
  std::vector<LocalPoint> points;
  points.reserve(n + 1);
  points.push_back(src);
  for (std::size_t i = 1; i < n; ++i)
  {
    const double t = static_cast<double>(i);
    const double nd = static_cast<double>(n);
    points.push_back({src.x + dx * t / nd, src.y + dy * t / nd});
  }
  points.push_back(dst);
  return points;
}

double point_segment_distance(const LocalPoint& p, const LocalPoint& a, const LocalPoint& b)
{
  const double vx = b.x - a.x;
  const double vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0)
  {
    t = std::clamp(((p.x - a.x) * vx + (p.y - a.y) * vy) / len2, 0.0, 1.0);
  }
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

LocalNavGraph::LocalNavGraph() : index_(std::make_shared<SpatialIndex>()) {}

LocalNavGraph LocalNavGraph::from_local(const std::map<NodeId, LocalPoint>& nodes,
                                        const std::set<NavGraph::Edge>& edges)
{
  LocalNavGraph g;
  g.build(nodes, edges);
  return g;
}

LocalNavGraph localize(const NavGraph& graph, const geo::CityFrame& frame)
{
  std::map<NodeId, LocalPoint> local;
  for (const auto& [id, p] : graph.nodes())
  {
    local.emplace_hint(local.end(), id, geo::geo_to_local(p, frame));
  }
  LocalNavGraph g;
  g.frame_ = frame;
  g.build(local, graph.edges());
  return g;
}

void LocalNavGraph::build(const std::map<NodeId, LocalPoint>& nodes, const std::set<NavGraph::Edge>& edges)
{
  node_ids_.clear();
  positions_.clear();
  for (const auto& [id, p] : nodes)
  {
    if (!std::isfinite(p.x) || !std::isfinite(p.y))
    {
      throw Error(ErrorCode::invalid_input, fmt::format("node {} has a non-finite local position", id));
    }
    node_ids_.push_back(id);
    positions_.push_back(p);
  }
  edges_.assign(edges.begin(), edges.end());
  out_edges_.assign(node_ids_.size(), {});
  in_edges_.assign(node_ids_.size(), {});

  std::vector<SpatialIndex::Value> boxes;
  boxes.reserve(edges_.size());
  for (std::uint32_t i = 0; i < edges_.size(); ++i)
  {
    const auto [src, dst] = edges_[i];
    if (src == dst)
    {
      throw Error(ErrorCode::invalid_input, fmt::format("self-loop edge at node {}", src));
    }
    const std::size_t a = node_index(src);
    const std::size_t b = node_index(dst);
    out_edges_[a].push_back(EdgeId{i});
    in_edges_[b].push_back(EdgeId{i});
    const LocalPoint& pa = positions_[a];
    const LocalPoint& pb = positions_[b];
    SpatialIndex::Box box({std::min(pa.x, pb.x), std::min(pa.y, pb.y)}, {std::max(pa.x, pb.x), std::max(pa.y, pb.y)});
    boxes.emplace_back(box, i);
  }
  auto index = std::make_shared<SpatialIndex>();
  index->tree = decltype(index->tree)(boxes.begin(), boxes.end());
  index_ = std::move(index);
}

std::size_t LocalNavGraph::node_index(NodeId id) const
{
  const auto it = std::lower_bound(node_ids_.begin(), node_ids_.end(), id);
  if (it == node_ids_.end() || *it != id)
  {
    throw Error(ErrorCode::not_found, fmt::format("node {} not in graph", id));
  }
  return static_cast<std::size_t>(std::distance(node_ids_.begin(), it));
}

void LocalNavGraph::check(EdgeId id) const
{
  if (id.value >= edges_.size())
  {
    throw Error(ErrorCode::not_found, fmt::format("edge id {} not in graph", id.value));
  }
}

const LocalPoint& LocalNavGraph::position(NodeId id) const
{
  return positions_[node_index(id)];
}

const NavGraph::Edge& LocalNavGraph::edge(EdgeId id) const
{
  check(id);
  return edges_[id.value];
}

std::optional<EdgeId> LocalNavGraph::find_edge(NodeId src, NodeId dst) const
{
  const NavGraph::Edge key{src, dst};
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key)
  {
    return std::nullopt;
  }
  return EdgeId{static_cast<std::uint32_t>(std::distance(edges_.begin(), it))};
}

std::vector<EdgeId> LocalNavGraph::edges_in_radius(const LocalPoint& center, double radius) const
{
  if (!(radius > 0.0) || !std::isfinite(radius))
  {
    throw Error(ErrorCode::invalid_input, fmt::format("query radius must be positive, got {}", radius));
  }
  // Slightly padded box so rounding in center +- radius never drops a candidate;
  // the exact distance test below decides membership.
  const double pad = radius + 1e-9 * (1.0 + radius + std::abs(center.x) + std::abs(center.y));
  const SpatialIndex::Box query({center.x - pad, center.y - pad}, {center.x + pad, center.y + pad});
  std::vector<SpatialIndex::Value> candidates;
  index_->tree.query(bgi::intersects(query), std::back_inserter(candidates));

  std::vector<EdgeId> hits;
  for (const auto& [box, i] : candidates)
  {
    const auto [src, dst] = edges_[i];
    if (point_segment_distance(center, position(src), position(dst)) <= radius)
    {
      hits.push_back(EdgeId{i});
    }
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

RoadSegment LocalNavGraph::segment(EdgeId id, double step) const
{
  const auto [src, dst] = edge(id);
  return {id, src, dst, resample_polyline(position(src), position(dst), step)};
}

std::vector<RoadSegment> LocalNavGraph::segments_in_radius(const LocalPoint& center, double radius, double step) const
{
  std::vector<RoadSegment> out;
  for (const EdgeId id : edges_in_radius(center, radius))
  {
    out.push_back(segment(id, step));
  }
  return out;
}

std::vector<EdgeId> LocalNavGraph::successors(EdgeId id) const
{
  const auto [src, dst] = edge(id);
  std::vector<EdgeId> out;
  for (const EdgeId next : out_edges_[node_index(dst)])
  {
    if (edges_[next.value].second != src)
    {
      out.push_back(next);
    }
  }
  return out;
}

std::vector<EdgeId> LocalNavGraph::predecessors(EdgeId id) const
{
  const auto [src, dst] = edge(id);
  std::vector<EdgeId> out;
  for (const EdgeId prev : in_edges_[node_index(src)])
  {
    if (edges_[prev.value].first != dst)
    {
      out.push_back(prev);
    }
  }
  return out;
}

}  // namespace navpred
