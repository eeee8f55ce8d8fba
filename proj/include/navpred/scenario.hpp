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

#ifndef NAVPRED_SCENARIO_HPP
#define NAVPRED_SCENARIO_HPP

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "navpred/geo.hpp"
#include "navpred/nav_graph.hpp"
#include "navpred/road_graph.hpp"

namespace navpred::scenario
{

using geo::LocalPoint;

inline constexpr int sample_rate_hz = 10;
inline constexpr int observed_steps = 20;  // 2 s
inline constexpr int future_steps = 30;    // 3 s
inline constexpr double step_seconds = 1.0 / sample_rate_hz;

struct WorldSpec
{
  std::uint64_t seed = 1;
  int num_roads = 40;
  int min_lanes = 1;
  int max_lanes = 3;
  double lane_width = 3.5;
  double min_curvature = 0.0;   // 1/m, magnitude
  double max_curvature = 0.02;  // 1/m, magnitude
  int intersection_count = 12;
  double extent = 400.0;        // root roads start in [-extent, extent]^2
  double vertex_spacing = 4.0;  // max distance between polyline vertices

  void validate() const;
};

struct Lane
{
  int id = 0;
  int road = 0;
  int index = 0;  // 0 is the rightmost lane
  std::vector<LocalPoint> centerline;
  std::vector<NodeId> vertex_ids;  // shared with connected lanes at junctions
  std::vector<int> successors;
};

struct Road
{
  int id = 0;
  std::vector<int> lanes;
  std::vector<int> successors;
  /// Length of the initial turning arc; 0 for roads that do not start with a turn.
  double turn_length = 0.0;
  /// Arithmetic mean of the lane centerlines.
  std::vector<LocalPoint> centerline;
  std::vector<NodeId> vertex_ids;
};

/// The same synthetic road network at lane level (HD view) and road level
/// (navigation view).
struct MapPair
{
  std::vector<Lane> hd_lanes;
  std::vector<Road> nav_roads;

  bool empty() const { return nav_roads.empty(); }
  friend bool operator==(const MapPair&, const MapPair&);
};

MapPair generate_world(const WorldSpec& spec);

/// Lane-level directed graph in local coordinates.
LocalNavGraph hd_graph(const MapPair& world);
/// Road-level graph with WGS84 nodes (9 decimal digits, as stored on disk).
NavGraph nav_graph(const MapPair& world, const geo::CityFrame& frame);

struct Scene
{
  std::int64_t scene_id = 0;
  std::vector<std::array<LocalPoint, observed_steps>> agents;
  int target = 0;
  std::array<LocalPoint, future_steps> future{};

  const std::array<LocalPoint, observed_steps>& target_track() const { return agents.at(target); }
  friend bool operator==(const Scene&, const Scene&) = default;
};

struct ScenarioConfig
{
  double min_speed = 3.0;
  double max_speed = 15.0;
  double noise_sigma = 0.1;
  double lane_change_probability = 0.3;
  double lane_change_seconds = 3.0;
  int max_background_agents = 4;
};

struct ManeuverLabel
{
  bool turn = false;
  bool lane_change = false;
};

/// Scenes 0..n-1; scene i draws from its own stream seeded by (seed, i), so any
/// subset can be regenerated independently.
std::vector<Scene> generate_scenes(const MapPair& world, std::size_t n, std::uint64_t seed,
                                   const ScenarioConfig& config = {}, std::vector<ManeuverLabel>* labels = nullptr);

/// Train/validation assignment by a hash of the scene id.
bool is_validation(std::int64_t scene_id, double val_fraction);

/// Newline-delimited JSON, one scene per line with keys in the order
/// scene_id, agents, target, future; coordinates with 6 fractional digits.
void write_scenes(std::ostream& out, const std::vector<Scene>& scenes);
std::vector<Scene> read_scenes(std::istream& in);
void save_scenes(const std::string& path, const std::vector<Scene>& scenes);
std::vector<Scene> load_scenes(const std::string& path);

/// World JSON with both views, vertex ids and connectivity.
void write_world(std::ostream& out, const MapPair& world);
MapPair read_world(std::istream& in);
void save_world(const std::string& path, const MapPair& world);
MapPair load_world(const std::string& path);

/// Rounds to the nearest value representable with 6 fractional digits, the
/// precision of the scene file.
double quantize(double v);

}  // namespace navpred::scenario

#endif  // NAVPRED_SCENARIO_HPP
