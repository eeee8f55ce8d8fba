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

#include "navpred/osm.hpp"

#include <charconv>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include <expat.h>
#include <fmt/format.h>

#include "navpred/error.hpp"

namespace navpred::osm
{
namespace
{

std::optional<std::string_view> attribute(const XML_Char** attrs, std::string_view name)
{
  for (int i = 0; attrs[i] != nullptr; i += 2)
  {
    if (name == attrs[i])
    {
      return std::string_view(attrs[i + 1]);
    }
  }
  return std::nullopt;
}

template <typename T>
bool parse_number(std::string_view text, T& value)
{
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && end == text.data() + text.size();
}

class OsmHandler
{
public:
  explicit OsmHandler(XML_Parser parser) : parser_(parser) {}

  static void on_start(void* self, const XML_Char* name, const XML_Char** attrs)
  {
    static_cast<OsmHandler*>(self)->start(name, attrs);
  }

  static void on_end(void* self, const XML_Char* /*name*/)
  {
    auto* h = static_cast<OsmHandler*>(self);
    if (h->depth_ == 2 && h->in_way_)
    {
      h->doc_.ways.push_back(std::move(h->way_));
      h->way_ = {};
      h->in_way_ = false;
    }
    --h->depth_;
  }

  OsmDocument take() { return std::move(doc_); }
  const std::optional<Error>& error() const { return error_; }
  bool saw_root() const { return saw_root_; }

private:
  void start(std::string_view name, const XML_Char** attrs)
  {
    ++depth_;
    if (depth_ == 1)
    {
      if (name != "osm")
      {
        fail(ErrorCode::parse, fmt::format("root element is <{}>, expected <osm>", name));
      }
      saw_root_ = true;
      return;
    }
    if (depth_ == 2 && name == "node")
    {
      read_node(attrs);
    }
    else if (depth_ == 2 && name == "way")
    {
      in_way_ = true;
      way_ = {};
      if (!parse_id(attrs, way_.id, "way"))
      {
        return;
      }
    }
    else if (depth_ == 3 && in_way_ && name == "nd")
    {
      NodeId ref = 0;
      const auto text = attribute(attrs, "ref");
      if (!text || !parse_number(*text, ref))
      {
        fail(ErrorCode::parse, fmt::format("<nd> in way {} lacks a numeric ref", way_.id));
        return;
      }
      way_.node_refs.push_back(ref);
    }
    else if (depth_ == 3 && in_way_ && name == "tag")
    {
      const auto k = attribute(attrs, "k");
      const auto v = attribute(attrs, "v");
      if (!k || !v)
      {
        fail(ErrorCode::parse, fmt::format("<tag> in way {} lacks k or v", way_.id));
        return;
      }
      way_.tags.insert_or_assign(std::string(*k), std::string(*v));
    }
  }

  bool parse_id(const XML_Char** attrs, std::int64_t& id, std::string_view what)
  {
    const auto text = attribute(attrs, "id");
    if (!text || !parse_number(*text, id))
    {
      fail(ErrorCode::parse, fmt::format("<{}> lacks a numeric id", what));
      return false;
    }
    return true;
  }

  void read_node(const XML_Char** attrs)
  {
    OsmNode node;
    if (!parse_id(attrs, node.id, "node"))
    {
      return;
    }
    const auto lat = attribute(attrs, "lat");
    const auto lon = attribute(attrs, "lon");
    if (!lat || !lon || !parse_number(*lat, node.lat) || !parse_number(*lon, node.lon))
    {
      fail(ErrorCode::parse, fmt::format("node {} lacks numeric lat/lon", node.id));
      return;
    }
    if (node.lat < -90.0 || node.lat > 90.0 || node.lon < -180.0 || node.lon > 180.0)
    {
      fail(ErrorCode::parse, fmt::format("node {} has out-of-range coordinates", node.id));
      return;
    }
    if (!seen_nodes_.insert(node.id).second)
    {
      fail(ErrorCode::duplicate_id, fmt::format("duplicate node id {}", node.id));
      return;
    }
    doc_.nodes.push_back(node);
  }

  void fail(ErrorCode code, const std::string& what)
  {
    if (error_)
    {
      return;
    }
    error_.emplace(code, fmt::format("line {}, column {}: {}", XML_GetCurrentLineNumber(parser_),
                                     XML_GetCurrentColumnNumber(parser_) + 1, what));
    XML_StopParser(parser_, XML_FALSE);
  }

  XML_Parser parser_;
  OsmDocument doc_;
  OsmWay way_;
  std::unordered_set<NodeId> seen_nodes_;
  std::optional<Error> error_;
  int depth_ = 0;
  bool in_way_ = false;
  bool saw_root_ = false;
};

struct ParserDeleter
{
  void operator()(XML_Parser p) const { XML_ParserFree(p); }
};

}  // namespace

RoadTypeWhitelist::RoadTypeWhitelist() : types_(car_road_types.begin(), car_road_types.end()) {}

RoadTypeWhitelist::RoadTypeWhitelist(std::set<std::string, std::less<>> types) : types_(std::move(types)) {}

Direction way_direction(const OsmWay& way)
{
  const auto it = way.tags.find("oneway");
  if (it == way.tags.end())
  {
    return Direction::both;
  }
  if (it->second == "yes" || it->second == "1" || it->second == "true")
  {
    return Direction::forward;
  }
  if (it->second == "-1")
  {
    return Direction::reverse;
  }
  return Direction::both;
}

OsmDocument parse_osm(std::istream& in)
{
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, ParserDeleter> parser(XML_ParserCreate(nullptr));
  if (!parser)
  {
    throw Error(ErrorCode::io, "cannot allocate XML parser");
  }
  OsmHandler handler(parser.get());
  XML_SetUserData(parser.get(), &handler);
  XML_SetElementHandler(parser.get(), &OsmHandler::on_start, &OsmHandler::on_end);

  std::array<char, 1 << 16> buffer{};
  bool done = false;
  while (!done)
  {
    in.read(buffer.data(), buffer.size());
    const auto got = in.gcount();
    done = got < static_cast<std::streamsize>(buffer.size());
    if (XML_Parse(parser.get(), buffer.data(), static_cast<int>(got), done ? XML_TRUE : XML_FALSE) ==
        XML_STATUS_ERROR)
    {
      if (handler.error())
      {
        throw *handler.error();
      }
      throw Error(ErrorCode::parse,
                  fmt::format("line {}, column {}: {}", XML_GetCurrentLineNumber(parser.get()),
                              XML_GetCurrentColumnNumber(parser.get()) + 1,
                              XML_ErrorString(XML_GetErrorCode(parser.get()))));
    }
  }
  if (handler.error())
  {
    throw *handler.error();
  }
  if (!handler.saw_root())
  {
    throw Error(ErrorCode::parse, "document has no <osm> root element");
  }
  return handler.take();
}

OsmDocument parse_osm_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error(ErrorCode::io, fmt::format("cannot open '{}'", path));
  }
  try
  {
    return parse_osm(in);
  }
  catch (const Error& e)
  {
    throw Error(e.code(), fmt::format("{}: {}", path, e.message()));
  }
}

BuildResult build_nav_graph(const OsmDocument& doc, const RoadTypeWhitelist& whitelist)
{
  std::unordered_map<NodeId, const OsmNode*> index;
  index.reserve(doc.nodes.size());
  for (const auto& n : doc.nodes)
  {
    index.emplace(n.id, &n);
  }

  BuildResult result;
  std::vector<const OsmWay*> kept;
  for (const auto& way : doc.ways)
  {
    const auto highway = way.tags.find("highway");
    if (highway == way.tags.end() || !whitelist.contains(highway->second))
    {
      continue;
    }
    if (way.node_refs.size() < 2)
    {
      result.warnings.push_back(fmt::format("way {}: fewer than two node refs, skipped", way.id));
      ++result.skipped_ways;
      continue;
    }
    bool resolvable = true;
    for (const NodeId ref : way.node_refs)
    {
      if (!index.contains(ref))
      {
        result.warnings.push_back(fmt::format("way {}: node {} not in document, way skipped", way.id, ref));
        resolvable = false;
        break;
      }
    }
    if (!resolvable)
    {
      ++result.skipped_ways;
      continue;
    }
    kept.push_back(&way);
  }

  for (const OsmWay* way : kept)
  {
    for (const NodeId ref : way->node_refs)
    {
      const OsmNode* n = index.at(ref);
      result.graph.add_node(n->id, {n->lat, n->lon});
    }
    const Direction dir = way_direction(*way);
    for (std::size_t i = 0; i + 1 < way->node_refs.size(); ++i)
    {
      const NodeId a = way->node_refs[i];
      const NodeId b = way->node_refs[i + 1];
      if (a == b)
      {
        result.warnings.push_back(fmt::format("way {}: repeated node {} ignored", way->id, a));
        continue;
      }
      if (dir != Direction::reverse)
      {
        result.graph.add_edge(a, b);
      }
      if (dir != Direction::forward)
      {
        result.graph.add_edge(b, a);
      }
    }
  }
  result.retained_ways = kept.size();
  return result;
}

}  // namespace navpred::osm
