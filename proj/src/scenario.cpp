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

#include "navpred/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "navpred/error.hpp"
#include "navpred/random.hpp"

namespace navpred::scenario
{
namespace
{

using json = nlohmann::ordered_json;

struct Pose
{
  LocalPoint p;
  double heading = 0.0;
};

struct Piece
{
  double curvature = 0.0;
  double length = 0.0;
};

struct Centerline
{
  std::vector<LocalPoint> points;
  std::vector<double> headings;
};

Centerline trace(const Pose& start, const std::vector<Piece>& pieces, double spacing)
{
  Centerline c;
  c.points.push_back(start.p);
  c.headings.push_back(start.heading);
  Pose at = start;
  for (const Piece& piece : pieces)
  {
    const int m = std::max(1, static_cast<int>(std::ceil(piece.length / spacing)));
    const double ds = piece.length / m;
    const Pose from = at;
    for (int k = 1; k <= m; ++k)
    {
      const double s = ds * k;
      Pose next;
      if (std::abs(piece.curvature) < 1e-12)
      {
        next.heading = from.heading;
        next.p = {from.p.x + s * std::cos(from.heading), from.p.y + s * std::sin(from.heading)};
      }
      else
      {
        const double k_ = piece.curvature;
        next.heading = from.heading + k_ * s;
        next.p = {from.p.x + (std::sin(next.heading) - std::sin(from.heading)) / k_,
                  from.p.y - (std::cos(next.heading) - std::cos(from.heading)) / k_};
      }
      c.points.push_back(next.p);
      c.headings.push_back(next.heading);
      at = next;
    }
  }
  return c;
}

double lane_offset(int index, int lanes, double width)
{
  return (index - (lanes - 1) / 2.0) * width;
}

std::vector<Piece> free_pieces(Rng& rng, const WorldSpec& spec, int count)
{
  std::vector<Piece> pieces;
  for (int i = 0; i < count; ++i)
  {
    Piece p;
    p.length = rng.uniform(30.0, 70.0);
    if (rng.bernoulli(0.6) && spec.max_curvature > 0.0)
    {
      const double magnitude = rng.uniform(spec.min_curvature, spec.max_curvature);
      p.curvature = rng.bernoulli(0.5) ? magnitude : -magnitude;
    }
    else
    {
      p.curvature = spec.min_curvature > 0.0 ? spec.min_curvature : 0.0;
    }
    pieces.push_back(p);
  }
  return pieces;
}

struct RoadPlan
{
  int parent = -1;
  int lanes = 1;
  int kind = 0;  // 0 straight, 1 left, 2 right
  double turn_length = 0.0;
  Centerline center;
};

// Lane j of an n-lane road may enter a branch of this kind: right turns from
// the rightmost lane, left turns from the leftmost, straight from any lane.
bool lane_allows(int kind, int j, int lanes)
{
  return lanes == 1 || kind == 0 || (kind == 2 && j == 0) || (kind == 1 && j == lanes - 1);
}

double quantize_to(double v, int digits)
{
  char buf[64];
  const auto res = fmt::format_to_n(buf, sizeof(buf) - 1, "{:.{}f}", v, digits);
  *res.out = '\0';
  double out = 0.0;
  std::from_chars(buf, res.out, out);
  return out;
}

// Arc-length parametrization of a road for agent simulation.
struct RoadTrack
{
  std::vector<double> cumulative;
  double length = 0.0;
};

RoadTrack make_track(const Road& road)
{
  RoadTrack t;
  t.cumulative.push_back(0.0);
  for (std::size_t i = 1; i < road.centerline.size(); ++i)
  {
    const auto& a = road.centerline[i - 1];
    const auto& b = road.centerline[i];
    t.cumulative.push_back(t.cumulative.back() + std::hypot(b.x - a.x, b.y - a.y));
  }
  t.length = t.cumulative.back();
  return t;
}

LocalPoint lerp(const LocalPoint& a, const LocalPoint& b, double w)
{
  return {a.x + (b.x - a.x) * w, a.y + (b.y - a.y) * w};
}

class AgentSimulator
{
public:
  AgentSimulator(const MapPair& world, const ScenarioConfig& config) : world_(world), config_(config)
  {
    double total = 0.0;
    for (const auto& road : world.nav_roads)
    {
      tracks_.push_back(make_track(road));
      total += tracks_.back().length;
      length_cdf_.push_back(total);
    }
  }

  struct Path
  {
    std::vector<LocalPoint> positions;
    ManeuverLabel label;
  };

  // Lane-following path of `steps` samples; empty if the agent hits a dead end.
  Path simulate(Rng& rng, int steps, bool allow_lane_change) const
  {
    const double pick = rng.uniform() * length_cdf_.back();
    int road = static_cast<int>(std::upper_bound(length_cdf_.begin(), length_cdf_.end(), pick) - length_cdf_.begin());
    road = std::min<int>(road, static_cast<int>(tracks_.size()) - 1);
    double s = rng.uniform() * tracks_[road].length;
    const int lanes = static_cast<int>(world_.nav_roads[road].lanes.size());
    const double lane0 = static_cast<double>(rng.index(lanes));
    double lane1 = lane0;
    const double speed = rng.uniform(config_.min_speed, config_.max_speed);
    double change_start = 0.0;

    Path path;
    if (allow_lane_change && lanes >= 2 && rng.bernoulli(config_.lane_change_probability))
    {
      lane1 = lane0 == 0.0 ? 1.0 : (lane0 == lanes - 1.0 ? lane0 - 1.0 : lane0 + (rng.bernoulli(0.5) ? 1.0 : -1.0));
      change_start = rng.uniform(0.0, std::max(0.0, steps * step_seconds - 1.0));
      path.label.lane_change = true;
    }

    for (int k = 0; k < steps; ++k)
    {
      const double t = k * step_seconds;
      double u = std::clamp((t - change_start) / config_.lane_change_seconds, 0.0, 1.0);
      u = u * u * (3.0 - 2.0 * u);
      const double lane = lane0 + (lane1 - lane0) * u;
      if (k > 0)
      {
        s += speed * step_seconds;
        while (s > tracks_[road].length)
        {
          // Follow the lane-level topology of the lane the agent is closest to.
          const int j = static_cast<int>(std::lround(lane));
          const auto& next = world_.hd_lanes[world_.nav_roads[road].lanes[j]].successors;
          if (next.empty())
          {
            return {};
          }
          s -= tracks_[road].length;
          road = world_.hd_lanes[next[rng.index(next.size())]].road;
        }
      }
      path.positions.push_back(position(road, s, lane));
      if (s < world_.nav_roads[road].turn_length)
      {
        path.label.turn = true;
      }
    }
    return path;
  }

private:
  LocalPoint position(int road_index, double s, double lane) const
  {
    const Road& road = world_.nav_roads[road_index];
    const RoadTrack& track = tracks_[road_index];
    const auto it = std::upper_bound(track.cumulative.begin(), track.cumulative.end(), s);
    std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - track.cumulative.begin()) - 1));
    i = std::min(i, track.cumulative.size() - 2);
    const double span = track.cumulative[i + 1] - track.cumulative[i];
    const double f = span > 0.0 ? (s - track.cumulative[i]) / span : 0.0;
    const int a = static_cast<int>(std::floor(lane));
    const int b = std::min(a + 1, static_cast<int>(road.lanes.size()) - 1);
    const Lane& la = world_.hd_lanes[road.lanes[a]];
    const Lane& lb = world_.hd_lanes[road.lanes[b]];
    const LocalPoint pa = lerp(la.centerline[i], la.centerline[i + 1], f);
    const LocalPoint pb = lerp(lb.centerline[i], lb.centerline[i + 1], f);
    return lerp(pa, pb, lane - a);
  }

  const MapPair& world_;
  const ScenarioConfig& config_;
  std::vector<RoadTrack> tracks_;
  std::vector<double> length_cdf_;
};

LocalPoint noisy(Rng& rng, const LocalPoint& p, double sigma)
{
  if (sigma <= 0.0)
  {
    return {quantize(p.x), quantize(p.y)};
  }
  const double nx = rng.normal();
  const double ny = rng.normal();
  return {quantize(p.x + sigma * nx), quantize(p.y + sigma * ny)};
}

json points_json(const std::vector<LocalPoint>& points)
{
  json out = json::array();
  for (const auto& p : points)
  {
    out.push_back({p.x, p.y});
  }
  return out;
}

std::vector<LocalPoint> points_from(const json& j)
{
  std::vector<LocalPoint> out;
  for (const auto& p : j)
  {
    out.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  }
  return out;
}

template <std::size_t N>
void read_track(const json& j, std::array<LocalPoint, N>& out, const char* what)
{
  if (!j.is_array() || j.size() != N)
  {
    throw Error(ErrorCode::shape, fmt::format("{} must hold {} points", what, N));
  }
  for (std::size_t i = 0; i < N; ++i)
  {
    const auto& p = j[i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
    {
      throw Error(ErrorCode::shape, fmt::format("{} point {} is not an [x, y] pair", what, i));
    }
    out[i] = {p[0].get<double>(), p[1].get<double>()};
  }
}

void append_point(std::string& out, const LocalPoint& p)
{
  fmt::format_to(std::back_inserter(out), "[{:.6f},{:.6f}]", p.x, p.y);
}

}  // namespace

double quantize(double v)
{
  return quantize_to(v, 6);
}

void WorldSpec::validate() const
{
  if (num_roads < 0 || intersection_count < 0 || min_lanes < 1 || max_lanes > 3 || min_lanes > max_lanes ||
      !(lane_width > 0.0) || min_curvature < 0.0 || max_curvature < min_curvature || !(extent > 0.0) ||
      !(vertex_spacing > 0.0))
  {
    throw Error(ErrorCode::invalid_input, "invalid world spec");
  }
}

bool operator==(const MapPair& a, const MapPair& b)
{
  if (a.hd_lanes.size() != b.hd_lanes.size() || a.nav_roads.size() != b.nav_roads.size())
  {
    return false;
  }
  for (std::size_t i = 0; i < a.hd_lanes.size(); ++i)
  {
    const Lane& x = a.hd_lanes[i];
    const Lane& y = b.hd_lanes[i];
    if (x.id != y.id || x.road != y.road || x.index != y.index || x.centerline != y.centerline ||
        x.vertex_ids != y.vertex_ids || x.successors != y.successors)
    {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.nav_roads.size(); ++i)
  {
    const Road& x = a.nav_roads[i];
    const Road& y = b.nav_roads[i];
    if (x.id != y.id || x.lanes != y.lanes || x.successors != y.successors || x.turn_length != y.turn_length ||
        x.centerline != y.centerline || x.vertex_ids != y.vertex_ids)
    {
      return false;
    }
  }
  return true;
}

MapPair generate_world(const WorldSpec& spec)
{
  spec.validate();
  Rng rng(spec.seed);
  std::vector<RoadPlan> plans;
  std::vector<int> open_ends;
  int intersections = 0;

  while (static_cast<int>(plans.size()) < spec.num_roads)
  {
    const int remaining = spec.num_roads - static_cast<int>(plans.size());
    if (!open_ends.empty() && intersections < spec.intersection_count)
    {
      const int parent = open_ends.front();
      open_ends.erase(open_ends.begin());
      ++intersections;
      // Branch kinds: 0 straight, 1 left, 2 right.
      std::vector<int> kinds = {0, 1, 2};
      for (std::size_t i = kinds.size(); i > 1; --i)
      {
        std::swap(kinds[i - 1], kinds[rng.index(i)]);
      }
      const int branches = std::min(remaining, 2 + static_cast<int>(rng.index(2)));
      const Pose start{plans[parent].center.points.back(), plans[parent].center.headings.back()};
      for (int b = 0; b < branches; ++b)
      {
        RoadPlan plan;
        plan.parent = parent;
        plan.lanes = plans[parent].lanes;
        plan.kind = kinds[b];
        std::vector<Piece> pieces;
        if (kinds[b] == 0)
        {
          pieces.push_back({0.0, rng.uniform(20.0, 40.0)});
        }
        else
        {
          const double radius = rng.uniform(15.0, 25.0);
          const double sign = kinds[b] == 1 ? 1.0 : -1.0;
          plan.turn_length = std::numbers::pi / 2.0 * radius;
          pieces.push_back({sign / radius, plan.turn_length});
        }
        const auto more = free_pieces(rng, spec, 1 + static_cast<int>(rng.index(2)));
        pieces.insert(pieces.end(), more.begin(), more.end());
        plan.center = trace(start, pieces, spec.vertex_spacing);
        plans.push_back(std::move(plan));
        open_ends.push_back(static_cast<int>(plans.size()) - 1);
      }
    }
    else
    {
      RoadPlan plan;
      plan.lanes = spec.min_lanes + static_cast<int>(rng.index(spec.max_lanes - spec.min_lanes + 1));
      const Pose start{{rng.uniform(-spec.extent, spec.extent), rng.uniform(-spec.extent, spec.extent)},
                       rng.uniform(-std::numbers::pi, std::numbers::pi)};
      plan.center = trace(start, free_pieces(rng, spec, 2 + static_cast<int>(rng.index(2))), spec.vertex_spacing);
      plans.push_back(std::move(plan));
      open_ends.push_back(static_cast<int>(plans.size()) - 1);
    }
  }

  MapPair world;
  NodeId next_road_node = 1;
  NodeId next_lane_node = 1;
  for (std::size_t r = 0; r < plans.size(); ++r)
  {
    const RoadPlan& plan = plans[r];
    const std::size_t nv = plan.center.points.size();
    Road road;
    road.id = static_cast<int>(r);
    road.turn_length = plan.turn_length;
    road.centerline.assign(nv, {0.0, 0.0});

    for (int j = 0; j < plan.lanes; ++j)
    {
      Lane lane;
      lane.id = static_cast<int>(world.hd_lanes.size());
      lane.road = road.id;
      lane.index = j;
      const double offset = lane_offset(j, plan.lanes, spec.lane_width);
      for (std::size_t v = 0; v < nv; ++v)
      {
        const double h = plan.center.headings[v];
        const LocalPoint& c = plan.center.points[v];
        lane.centerline.push_back({c.x - offset * std::sin(h), c.y + offset * std::cos(h)});
      }
      for (std::size_t v = 0; v < nv; ++v)
      {
        if (v == 0 && plan.parent >= 0)
        {
          const Lane& parent_lane = world.hd_lanes[world.nav_roads[plan.parent].lanes[j]];
          lane.vertex_ids.push_back(parent_lane.vertex_ids.back());
        }
        else
        {
          lane.vertex_ids.push_back(next_lane_node++);
        }
      }
      road.lanes.push_back(lane.id);
      world.hd_lanes.push_back(std::move(lane));
    }

    for (std::size_t v = 0; v < nv; ++v)
    {
      double sx = 0.0;
      double sy = 0.0;
      for (const int lane_id : road.lanes)
      {
        sx += world.hd_lanes[lane_id].centerline[v].x;
        sy += world.hd_lanes[lane_id].centerline[v].y;
      }
      road.centerline[v] = {sx / plan.lanes, sy / plan.lanes};
      if (v == 0 && plan.parent >= 0)
      {
        road.vertex_ids.push_back(world.nav_roads[plan.parent].vertex_ids.back());
      }
      else
      {
        road.vertex_ids.push_back(next_road_node++);
      }
    }
    if (plan.parent >= 0)
    {
      Road& parent = world.nav_roads[plan.parent];
      parent.successors.push_back(road.id);
      for (int j = 0; j < plan.lanes; ++j)
      {
        if (lane_allows(plan.kind, j, plan.lanes))
        {
          world.hd_lanes[parent.lanes[j]].successors.push_back(road.lanes[j]);
        }
      }
    }
    world.nav_roads.push_back(std::move(road));
  }
  // A lane left without an allowed branch (e.g. the middle lane when there is
  // no straight branch) may continue into any of them.
  for (const auto& road : world.nav_roads)
  {
    for (std::size_t j = 0; j < road.lanes.size(); ++j)
    {
      auto& lane = world.hd_lanes[road.lanes[j]];
      if (lane.successors.empty())
      {
        for (const int next : road.successors)
        {
          lane.successors.push_back(world.nav_roads[next].lanes[j]);
        }
      }
    }
  }
  return world;
}

LocalNavGraph hd_graph(const MapPair& world)
{
  std::map<NodeId, LocalPoint> nodes;
  std::set<NavGraph::Edge> edges;
  for (const Lane& lane : world.hd_lanes)
  {
    for (std::size_t v = 0; v < lane.centerline.size(); ++v)
    {
      nodes.emplace(lane.vertex_ids[v], lane.centerline[v]);
      if (v > 0 && lane.vertex_ids[v - 1] != lane.vertex_ids[v])
      {
        edges.emplace(lane.vertex_ids[v - 1], lane.vertex_ids[v]);
      }
    }
  }
  return LocalNavGraph::from_local(nodes, edges);
}

NavGraph nav_graph(const MapPair& world, const geo::CityFrame& frame)
{
  NavGraph graph;
  for (const Road& road : world.nav_roads)
  {
    for (std::size_t v = 0; v < road.centerline.size(); ++v)
    {
      if (!graph.nodes().contains(road.vertex_ids[v]))
      {
        const geo::GeoPoint g = geo::local_to_geo(road.centerline[v], frame);
        graph.add_node(road.vertex_ids[v], {quantize_to(g.lat, 9), quantize_to(g.lon, 9)});
      }
    }
    for (std::size_t v = 1; v < road.centerline.size(); ++v)
    {
      if (road.vertex_ids[v - 1] != road.vertex_ids[v])
      {
        graph.add_edge(road.vertex_ids[v - 1], road.vertex_ids[v]);
      }
    }
  }
  return graph;
}

std::vector<Scene> generate_scenes(const MapPair& world, std::size_t n, std::uint64_t seed,
                                   const ScenarioConfig& config, std::vector<ManeuverLabel>* labels)
{
  if (n == 0)
  {
    return {};
  }
  if (world.hd_lanes.empty())
  {
    throw Error(ErrorCode::invalid_input, "scene generation needs a world with at least one lane");
  }
  const AgentSimulator sim(world, config);
  constexpr int attempts = 200;
  constexpr int total_steps = observed_steps + future_steps;
  std::vector<Scene> scenes;
  scenes.reserve(n);
  if (labels)
  {
    labels->clear();
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    Rng rng(Rng::derive(seed, i));
    Scene scene;
    scene.scene_id = static_cast<std::int64_t>(i);

    AgentSimulator::Path target;
    for (int a = 0; a < attempts && target.positions.empty(); ++a)
    {
      target = sim.simulate(rng, total_steps, true);
    }
    if (target.positions.empty())
    {
      throw Error(ErrorCode::invalid_input, "world has no lane path long enough for a 5 s scene");
    }

    const int background = static_cast<int>(rng.index(config.max_background_agents + 1));
    std::vector<std::array<LocalPoint, observed_steps>> others;
    for (int b = 0; b < background; ++b)
    {
      AgentSimulator::Path path;
      for (int a = 0; a < attempts && path.positions.empty(); ++a)
      {
        path = sim.simulate(rng, observed_steps, false);
      }
      if (path.positions.empty())
      {
        continue;
      }
      std::array<LocalPoint, observed_steps> track{};
      for (int k = 0; k < observed_steps; ++k)
      {
        track[k] = noisy(rng, path.positions[k], config.noise_sigma);
      }
      others.push_back(track);
    }

    std::array<LocalPoint, observed_steps> observed{};
    for (int k = 0; k < observed_steps; ++k)
    {
      observed[k] = noisy(rng, target.positions[k], config.noise_sigma);
    }
    for (int k = 0; k < future_steps; ++k)
    {
      scene.future[k] = noisy(rng, target.positions[observed_steps + k], config.noise_sigma);
    }
    scene.target = static_cast<int>(rng.index(others.size() + 1));
    scene.agents = std::move(others);
    scene.agents.insert(scene.agents.begin() + scene.target, observed);
    scenes.push_back(std::move(scene));
    if (labels)
    {
      labels->push_back(target.label);
    }
  }
  return scenes;
}

bool is_validation(std::int64_t scene_id, double val_fraction)
{
  const std::uint64_t h = Rng::derive(0x5ce7e5u, static_cast<std::uint64_t>(scene_id));
  return static_cast<double>(h >> 11) * 0x1.0p-53 < val_fraction;
}

void write_scenes(std::ostream& out, const std::vector<Scene>& scenes)
{
  std::string line;
  for (const Scene& s : scenes)
  {
    line.clear();
    fmt::format_to(std::back_inserter(line), "{{\"scene_id\":{},\"agents\":[", s.scene_id);
    for (std::size_t a = 0; a < s.agents.size(); ++a)
    {
      line += a == 0 ? "[" : ",[";
      for (int k = 0; k < observed_steps; ++k)
      {
        if (k > 0)
        {
          line += ',';
        }
        append_point(line, s.agents[a][k]);
      }
      line += ']';
    }
    fmt::format_to(std::back_inserter(line), "],\"target\":{},\"future\":[", s.target);
    for (int k = 0; k < future_steps; ++k)
    {
      if (k > 0)
      {
        line += ',';
      }
      append_point(line, s.future[k]);
    }
    line += "]}\n";
    out << line;
  }
}

std::vector<Scene> read_scenes(std::istream& in)
{
  std::vector<Scene> scenes;
  std::string line;
  std::size_t record = 0;
  while (std::getline(in, line))
  {
    if (line.empty())
    {
      continue;
    }
    try
    {
      const json j = json::parse(line);
      Scene s;
      s.scene_id = j.at("scene_id").get<std::int64_t>();
      const json& agents = j.at("agents");
      if (!agents.is_array() || agents.empty())
      {
        throw Error(ErrorCode::shape, "agents must be a non-empty list");
      }
      for (const auto& a : agents)
      {
        std::array<LocalPoint, observed_steps> track{};
        read_track(a, track, "agent track");
        s.agents.push_back(track);
      }
      s.target = j.at("target").get<int>();
      if (s.target < 0 || s.target >= static_cast<int>(s.agents.size()))
      {
        throw Error(ErrorCode::shape, fmt::format("target index {} out of range", s.target));
      }
      read_track(j.at("future"), s.future, "future");
      scenes.push_back(std::move(s));
    }
    catch (const Error& e)
    {
      throw Error(ErrorCode::parse, fmt::format("scene record {}: {}", record, e.message()));
    }
    catch (const json::exception& e)
    {
      throw Error(ErrorCode::parse, fmt::format("scene record {}: {}", record, e.what()));
    }
    ++record;
  }
  return scenes;
}

void save_scenes(const std::string& path, const std::vector<Scene>& scenes)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error(ErrorCode::io, fmt::format("cannot write '{}'", path));
  }
  write_scenes(out, scenes);
}

std::vector<Scene> load_scenes(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error(ErrorCode::io, fmt::format("cannot open '{}'", path));
  }
  try
  {
    return read_scenes(in);
  }
  catch (const Error& e)
  {
    throw Error(e.code(), fmt::format("{}: {}", path, e.message()));
  }
}

void write_world(std::ostream& out, const MapPair& world)
{
  json j;
  j["version"] = 1;
  j["lanes"] = json::array();
  for (const Lane& lane : world.hd_lanes)
  {
    j["lanes"].push_back({{"id", lane.id},
                          {"road", lane.road},
                          {"index", lane.index},
                          {"successors", lane.successors},
                          {"vertex_ids", lane.vertex_ids},
                          {"centerline", points_json(lane.centerline)}});
  }
  j["roads"] = json::array();
  for (const Road& road : world.nav_roads)
  {
    j["roads"].push_back({{"id", road.id},
                          {"lanes", road.lanes},
                          {"successors", road.successors},
                          {"turn_length", road.turn_length},
                          {"vertex_ids", road.vertex_ids},
                          {"centerline", points_json(road.centerline)}});
  }
  out << j.dump() << '\n';
}

MapPair read_world(std::istream& in)
{
  try
  {
    const json j = json::parse(in);
    if (j.at("version").get<int>() != 1)
    {
      throw Error(ErrorCode::parse, "unsupported world version");
    }
    MapPair world;
    for (const auto& l : j.at("lanes"))
    {
      Lane lane;
      lane.id = l.at("id").get<int>();
      lane.road = l.at("road").get<int>();
      lane.index = l.at("index").get<int>();
      lane.successors = l.at("successors").get<std::vector<int>>();
      lane.vertex_ids = l.at("vertex_ids").get<std::vector<NodeId>>();
      lane.centerline = points_from(l.at("centerline"));
      world.hd_lanes.push_back(std::move(lane));
    }
    for (const auto& r : j.at("roads"))
    {
      Road road;
      road.id = r.at("id").get<int>();
      road.lanes = r.at("lanes").get<std::vector<int>>();
      road.successors = r.at("successors").get<std::vector<int>>();
      road.turn_length = r.at("turn_length").get<double>();
      road.vertex_ids = r.at("vertex_ids").get<std::vector<NodeId>>();
      road.centerline = points_from(r.at("centerline"));
      world.nav_roads.push_back(std::move(road));
    }
    return world;
  }
  catch (const json::exception& e)
  {
    throw Error(ErrorCode::parse, fmt::format("world file: {}", e.what()));
  }
}

void save_world(const std::string& path, const MapPair& world)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error(ErrorCode::io, fmt::format("cannot write '{}'", path));
  }
  write_world(out, world);
}

MapPair load_world(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error(ErrorCode::io, fmt::format("cannot open '{}'", path));
  }
  return read_world(in);
}

}  // namespace navpred::scenario
