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

#ifndef NAVPRED_NAV_GRAPH_HPP
#define NAVPRED_NAV_GRAPH_HPP

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <utility>

#include "navpred/geo.hpp"

namespace navpred
{

using NodeId = std::int64_t;

/// Directed road graph. Nodes are keyed by OSM id, edges are road segments
/// between consecutive way nodes.
class NavGraph
{
public:
  using Edge = std::pair<NodeId, NodeId>;

  /// Replaces the position of an existing node.
  void add_node(NodeId id, const geo::GeoPoint& position);
  /// Endpoints must already exist; self-loops are rejected and duplicates are
  /// collapsed. Returns true if the edge was new.
  bool add_edge(NodeId src, NodeId dst);

  const std::map<NodeId, geo::GeoPoint>& nodes() const { return nodes_; }
  const std::set<Edge>& edges() const { return edges_; }
  bool empty() const { return nodes_.empty(); }

  friend bool operator==(const NavGraph& a, const NavGraph& b);

private:
  std::map<NodeId, geo::GeoPoint> nodes_;
  std::set<Edge> edges_;
};

/// On-disk graph. Line oriented:
///   F <name> <zone> <origin_easting> <origin_northing>   (optional, first)
///   N <id> <lat> <lon>                                    (9 fractional digits)
///   E <src> <dst>
/// Nodes are written in id order, edges in (src, dst) order. Lines starting
/// with '#' are comments.
struct GraphFile
{
  NavGraph graph;
  std::optional<geo::CityFrame> frame;
};

void write_graph(std::ostream& out, const NavGraph& graph, const std::optional<geo::CityFrame>& frame = {});
GraphFile read_graph(std::istream& in);
GraphFile load_graph(const std::string& path);

}  // namespace navpred

#endif  // NAVPRED_NAV_GRAPH_HPP
