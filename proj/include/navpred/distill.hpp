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

#ifndef NAVPRED_DISTILL_HPP
#define NAVPRED_DISTILL_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "navpred/model.hpp"

namespace navpred::distill
{

using model::ModelConfig;
using model::ModelParams;

/// Teacher width d_t and student width d; the first d_t student coordinates
/// are guided by the teacher.
struct EmbeddingSpec
{
  int d_t = 64;
  int d = 64;

  int guided() const { return d_t; }
  int unguided() const { return d - d_t; }
  void validate() const;
};

enum class Variant
{
  matched,  // d = d_t
  shared,   // d = round(1.5 * d_t)
};

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view text);

/// Student width for a teacher width under the given variant.
int student_width(Variant variant, int d_t);

struct DistillConfig
{
  double alpha = 1.0;
  double beta = 1.0;
  Variant variant = Variant::shared;
  std::string teacher;  // checkpoint path, informational
  // Compute each scene's teacher embedding once instead of on every visit.
  // The teacher is frozen, so the results are identical either way.
  bool cache_teacher = false;

  void validate() const;
  EmbeddingSpec spec(int d_t) const { return {d_t, student_width(variant, d_t)}; }
};

/// Mean squared difference between the teacher embedding and the first
/// teacher.size() coordinates of the student embedding.
double distill_loss(const Eigen::VectorXd& teacher, const Eigen::VectorXd& student);

/// Gradient of distill_loss with respect to the student embedding.
Eigen::VectorXd distill_gradient(const Eigen::VectorXd& teacher, const Eigen::VectorXd& student);

double total_loss(double model_loss, double distill_loss, const DistillConfig& config);

/// Map points handed to the model for each scene (empty for the map-free model).
using MapViews = std::vector<std::vector<geo::LocalPoint>>;

MapViews map_views(std::span<const scenario::Scene> scenes, const LocalNavGraph* graph, const ModelConfig& config);

struct TrainConfig
{
  int epochs = 40;
  int batch_size = 32;
  double learning_rate = 2e-4;
  double momentum = 0.9;
  double clip_norm = 50.0;  // global gradient norm cap per batch; 0 disables
  std::uint64_t seed = 1;
  int threads = 1;

  void validate() const;
};

struct EpochLog
{
  int epoch = 0;
  double loss = 0.0;
  double model_loss = 0.0;
  double distill_loss = 0.0;
};

/// Frozen teacher with its own map views; its embeddings are recomputed each
/// time a scene is visited unless `embeddings` holds one per scene.
struct Teacher
{
  const ModelParams* params = nullptr;
  const MapViews* views = nullptr;
  DistillConfig config;
  const std::vector<Eigen::VectorXd>* embeddings = nullptr;
};

struct TrainResult
{
  ModelParams params;
  std::vector<EpochLog> log;
};

using EpochCallback = std::function<void(const EpochLog&)>;

/// SGD with momentum over shuffled mini-batches. Per-scene gradients may be
/// computed on several threads; they are always summed in scene order, so the
/// result does not depend on the thread count.
TrainResult train(std::span<const scenario::Scene> scenes, const MapViews& views, const ModelConfig& model_config,
                  const TrainConfig& config, const Teacher* teacher = nullptr, const EpochCallback& on_epoch = {});

/// Trains the HD-map teacher.
TrainResult train_teacher(std::span<const scenario::Scene> scenes, const LocalNavGraph& hd, ModelConfig model_config,
                          const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Trains a navigation-map student guided by a frozen teacher.
TrainResult train_student(std::span<const scenario::Scene> scenes, const LocalNavGraph& hd, const LocalNavGraph& nav,
                          const ModelParams& teacher, ModelConfig model_config, const DistillConfig& distill_config,
                          const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace navpred::distill

#endif  // NAVPRED_DISTILL_HPP
