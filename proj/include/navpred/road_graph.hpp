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

#ifndef NAVPRED_ROAD_GRAPH_HPP
#define NAVPRED_ROAD_GRAPH_HPP

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "navpred/geo.hpp"
#include "navpred/nav_graph.hpp"

namespace navpred
{

/// Index of an edge in (src, dst) order; stable for a given edge set.
struct EdgeId
{
  std::uint32_t value = 0;

  friend auto operator<=>(const EdgeId&, const EdgeId&) = default;
};

struct RoadSegment
{
  EdgeId edge_id;
  NodeId src = 0;
  NodeId dst = 0;
  std::vector<geo::LocalPoint> polyline;
};

/// Uniform resampling of the straight segment src->dst: n + 1 points with
/// n = max(1, ceil(length / step)), both endpoints included.
std::vector<geo::LocalPoint> resample_polyline(const geo::LocalPoint& src, const geo::LocalPoint& dst, double step);

/// Distance from `p` to the closed segment a-b.
double point_segment_distance(const geo::LocalPoint& p, const geo::LocalPoint& a, const geo::LocalPoint& b);

/// Road graph in a local metric frame with an HD-map style query surface.
/// Immutable after construction; copies share the spatial index.
class LocalNavGraph
{
public:
  static constexpr double default_step = 2.0;

  LocalNavGraph();

  /// Graph whose node positions are already local (e.g. synthetic lane graphs).
  static LocalNavGraph from_local(const std::map<NodeId, geo::LocalPoint>& nodes,
                                  const std::set<NavGraph::Edge>& edges);

  std::size_t node_count() const { return node_ids_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return node_ids_.empty(); }
  const std::optional<geo::CityFrame>& frame() const { return frame_; }

  const geo::LocalPoint& position(NodeId id) const;
  const NavGraph::Edge& edge(EdgeId id) const;
  std::optional<EdgeId> find_edge(NodeId src, NodeId dst) const;

  /// Edges whose src-dst chord passes within `radius` of `center`, sorted by id.
  std::vector<EdgeId> edges_in_radius(const geo::LocalPoint& center, double radius) const;
  std::vector<RoadSegment> segments_in_radius(const geo::LocalPoint& center, double radius,
                                              double step = default_step) const;
  RoadSegment segment(EdgeId id, double step = default_step) const;

  /// Edges leaving this edge's dst, without the immediate U-turn dst->src.
  std::vector<EdgeId> successors(EdgeId id) const;
  /// Edges entering this edge's src, without the reverse twin dst->src.
  std::vector<EdgeId> predecessors(EdgeId id) const;

private:
  friend LocalNavGraph localize(const NavGraph& graph, const geo::CityFrame& frame);

  struct SpatialIndex;

  void build(const std::map<NodeId, geo::LocalPoint>& nodes, const std::set<NavGraph::Edge>& edges);
  std::size_t node_index(NodeId id) const;
  void check(EdgeId id) const;

  std::optional<geo::CityFrame> frame_;
  std::vector<NodeId> node_ids_;                 // sorted
  std::vector<geo::LocalPoint> positions_;       // parallel to node_ids_
  std::vector<NavGraph::Edge> edges_;            // sorted, EdgeId indexes this
  std::vector<std::vector<EdgeId>> out_edges_;   // per node index
  std::vector<std::vector<EdgeId>> in_edges_;    // per node index
  std::shared_ptr<const SpatialIndex> index_;
};

/// Projects every node into `frame` and builds the spatial index.
LocalNavGraph localize(const NavGraph& graph, const geo::CityFrame& frame);

}  // namespace navpred

#endif  // NAVPRED_ROAD_GRAPH_HPP
