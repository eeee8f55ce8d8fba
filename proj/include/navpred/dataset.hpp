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

#ifndef NAVPRED_DATASET_HPP
#define NAVPRED_DATASET_HPP

#include <filesystem>
#include <vector>

#include "navpred/geo.hpp"
#include "navpred/model.hpp"
#include "navpred/road_graph.hpp"
#include "navpred/scenario.hpp"

namespace navpred
{

/// Generated dataset directory: world.json (HD view), nav.graph (nav view in
/// WGS84 with its city frame), train.jsonl and val.jsonl.
struct Dataset
{
  scenario::MapPair world;
  LocalNavGraph hd;
  LocalNavGraph nav;
  std::vector<scenario::Scene> train;
  std::vector<scenario::Scene> val;

  /// Graph the given map source reads from; nullptr for none.
  const LocalNavGraph* graph(model::MapSource source) const;
};

namespace dataset_files
{
inline constexpr const char* world = "world.json";
inline constexpr const char* nav = "nav.graph";
inline constexpr const char* train = "train.jsonl";
inline constexpr const char* val = "val.jsonl";
}  // namespace dataset_files

/// Splits scenes by the scene-id hash.
void split_scenes(const std::vector<scenario::Scene>& scenes, double val_fraction, std::vector<scenario::Scene>& train,
                  std::vector<scenario::Scene>& val);

/// Builds an in-memory dataset exactly as write_dataset + load_dataset would
/// (nav geometry goes through the same WGS84 round trip).
Dataset make_dataset(const scenario::MapPair& world, const geo::CityFrame& frame,
                     const std::vector<scenario::Scene>& scenes, double val_fraction);

Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace navpred

#endif  // NAVPRED_DATASET_HPP
