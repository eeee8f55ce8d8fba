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

#include "navpred/nav_graph.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "navpred/error.hpp"

namespace navpred
{

void NavGraph::add_node(NodeId id, const geo::GeoPoint& position)
{
  nodes_[id] = position;
}

bool NavGraph::add_edge(NodeId src, NodeId dst)
{
  if (src == dst)
  {
    throw Error(ErrorCode::invalid_input, fmt::format("self-loop edge at node {}", src));
  }
  if (!nodes_.contains(src) || !nodes_.contains(dst))
  {
    throw Error(ErrorCode::not_found, fmt::format("edge ({}, {}) references a missing node", src, dst));
  }
  return edges_.emplace(src, dst).second;
}

bool operator==(const NavGraph& a, const NavGraph& b)
{
  if (a.edges_ != b.edges_ || a.nodes_.size() != b.nodes_.size())
  {
    return false;
  }
  for (auto ia = a.nodes_.begin(), ib = b.nodes_.begin(); ia != a.nodes_.end(); ++ia, ++ib)
  {
    if (ia->first != ib->first || ia->second.lat != ib->second.lat || ia->second.lon != ib->second.lon)
    {
      return false;
    }
  }
  return true;
}

void write_graph(std::ostream& out, const NavGraph& graph, const std::optional<geo::CityFrame>& frame)
{
  if (frame)
  {
    out << fmt::format("F {} {} {} {}\n", frame->name, frame->zone, frame->origin_easting,
                       frame->origin_northing);
  }
  for (const auto& [id, p] : graph.nodes())
  {
    out << fmt::format("N {} {:.9f} {:.9f}\n", id, p.lat, p.lon);
  }
  for (const auto& [src, dst] : graph.edges())
  {
    out << fmt::format("E {} {}\n", src, dst);
  }
}

GraphFile read_graph(std::istream& in)
{
  GraphFile file;
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::parse, fmt::format("graph line {}: {}", line_no, what));
  };
  while (std::getline(in, line))
  {
    ++line_no;
    if (line.empty() || line[0] == '#')
    {
      continue;
    }
    std::istringstream fields(line);
    char kind = 0;
    fields >> kind;
    std::string rest;
    if (kind == 'N')
    {
      NodeId id = 0;
      geo::GeoPoint p;
      if (!(fields >> id >> p.lat >> p.lon) || (fields >> rest))
      {
        fail("expected 'N id lat lon'");
      }
      if (file.graph.nodes().contains(id))
      {
        throw Error(ErrorCode::duplicate_id, fmt::format("graph line {}: duplicate node {}", line_no, id));
      }
      file.graph.add_node(id, p);
    }
    else if (kind == 'E')
    {
      NodeId src = 0;
      NodeId dst = 0;
      if (!(fields >> src >> dst) || (fields >> rest))
      {
        fail("expected 'E src dst'");
      }
      try
      {
        file.graph.add_edge(src, dst);
      }
      catch (const Error& e)
      {
        fail(e.message());
      }
    }
    else if (kind == 'F')
    {
      geo::CityFrame frame;
      if (!(fields >> frame.name >> frame.zone >> frame.origin_easting >> frame.origin_northing) || (fields >> rest))
      {
        fail("expected 'F name zone easting northing'");
      }
      geo::validate(frame);
      file.frame = frame;
    }
    else
    {
      fail(fmt::format("unknown record '{}'", line.substr(0, 1)));
    }
  }
  return file;
}

GraphFile load_graph(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw Error(ErrorCode::io, fmt::format("cannot open graph file '{}'", path));
  }
  return read_graph(in);
}

}  // namespace navpred
