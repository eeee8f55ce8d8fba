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

#include "navpred/dataset.hpp"

#include <fmt/format.h>

#include "navpred/error.hpp"
#include "navpred/nav_graph.hpp"

namespace navpred
{

const LocalNavGraph* Dataset::graph(model::MapSource source) const
{
  switch (source)
  {
    case model::MapSource::hd: return &hd;
    case model::MapSource::nav: return &nav;
    case model::MapSource::none: return nullptr;
  }
  return nullptr;
}

void split_scenes(const std::vector<scenario::Scene>& scenes, double val_fraction, std::vector<scenario::Scene>& train,
                  std::vector<scenario::Scene>& val)
{
  for (const auto& s : scenes)
  {
    (scenario::is_validation(s.scene_id, val_fraction) ? val : train).push_back(s);
  }
}

Dataset make_dataset(const scenario::MapPair& world, const geo::CityFrame& frame,
                     const std::vector<scenario::Scene>& scenes, double val_fraction)
{
  Dataset d;
  d.world = world;
  d.hd = scenario::hd_graph(world);
  d.nav = localize(scenario::nav_graph(world, frame), frame);
  split_scenes(scenes, val_fraction, d.train, d.val);
  return d;
}

Dataset load_dataset(const std::filesystem::path& dir)
{
  if (!std::filesystem::is_directory(dir))
  {
    throw Error(ErrorCode::io, fmt::format("dataset directory '{}' does not exist", dir.string()));
  }
  Dataset d;
  d.world = scenario::load_world((dir / dataset_files::world).string());
  d.hd = scenario::hd_graph(d.world);
  const GraphFile nav = load_graph((dir / dataset_files::nav).string());
  if (!nav.frame)
  {
    throw Error(ErrorCode::frame_mismatch, fmt::format("'{}' does not name its city frame",
                                                       (dir / dataset_files::nav).string()));
  }
  d.nav = localize(nav.graph, *nav.frame);
  d.train = scenario::load_scenes((dir / dataset_files::train).string());
  d.val = scenario::load_scenes((dir / dataset_files::val).string());
  return d;
}

}  // namespace navpred
