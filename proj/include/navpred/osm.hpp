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

#ifndef NAVPRED_OSM_HPP
#define NAVPRED_OSM_HPP

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "navpred/nav_graph.hpp"

namespace navpred::osm
{

struct OsmNode
{
  NodeId id = 0;
  double lat = 0.0;
  double lon = 0.0;
};

struct OsmWay
{
  std::int64_t id = 0;
  std::vector<NodeId> node_refs;
  std::map<std::string, std::string> tags;
};

struct OsmDocument
{
  std::vector<OsmNode> nodes;
  std::vector<OsmWay> ways;
};

/// `highway` values of car-accessible roads.
inline constexpr std::array<std::string_view, 13> car_road_types = {
  "motorway",       "trunk",         "primary",       "secondary",      "tertiary",
  "unclassified",   "residential",   "motorway_link", "trunk_link",     "primary_link",
  "secondary_link", "tertiary_link", "living_street",
};

class RoadTypeWhitelist
{
public:
  /// The car-accessible set above.
  RoadTypeWhitelist();
  explicit RoadTypeWhitelist(std::set<std::string, std::less<>> types);

  bool contains(std::string_view highway) const { return types_.contains(highway); }
  const std::set<std::string, std::less<>>& types() const { return types_; }

private:
  std::set<std::string, std::less<>> types_;
};

enum class Direction
{
  both,
  forward,
  reverse,
};

/// yes/1/true -> forward, -1 -> reverse, anything else -> both.
Direction way_direction(const OsmWay& way);

/// Streaming parse of an OSM XML document. Elements other than node, way,
/// nd and tag are ignored; tags on nodes are ignored.
OsmDocument parse_osm(std::istream& in);
OsmDocument parse_osm_file(const std::string& path);

struct BuildResult
{
  NavGraph graph;
  std::vector<std::string> warnings;
  std::size_t retained_ways = 0;
  std::size_t skipped_ways = 0;
};

/// Keeps whitelisted ways, expands each into consecutive-node edges and drops
/// nodes no retained way references. Ways with unresolvable node refs are
/// skipped whole and reported in `warnings`.
BuildResult build_nav_graph(const OsmDocument& doc, const RoadTypeWhitelist& whitelist = {});

}  // namespace navpred::osm

#endif  // NAVPRED_OSM_HPP
