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

#ifndef NAVPRED_MODEL_HPP
#define NAVPRED_MODEL_HPP

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "navpred/road_graph.hpp"
#include "navpred/scenario.hpp"

namespace navpred::model
{

using geo::LocalPoint;
using scenario::future_steps;
using scenario::observed_steps;

enum class MapSource
{
  hd,
  nav,
  none,
};

std::string_view to_string(MapSource source);
MapSource parse_map_source(std::string_view text);

struct ModelConfig
{
  int d = 64;       // fusion embedding width
  int k = 6;        // modes
  int hidden = 64;  // agent encoder hidden width
  double map_radius = 50.0;
  double map_step = 2.0;
  MapSource source = MapSource::nav;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Embedding presets: the large-model scale (teacher 128, shared student 192)
/// and the small-model scale (teacher 64, shared student 96).
struct EmbeddingPreset
{
  int teacher = 0;
  int shared_student = 0;
};
inline constexpr EmbeddingPreset large_preset{128, 192};
inline constexpr EmbeddingPreset small_preset{64, 96};

inline constexpr int agent_features = 2 * (observed_steps - 1);
inline constexpr int head_outputs = 2 * future_steps;

enum class Block : int
{
  agent_w1,
  agent_b1,
  agent_w2,
  agent_b2,
  key_w,
  key_b,
  value_w,
  value_b,
  traj_w,
  traj_b,
  conf_w,
  conf_b,
};
inline constexpr int block_count = 12;

struct BlockShape
{
  std::string_view name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixView = Eigen::Map<RowMatrix>;
using ConstMatrixView = Eigen::Map<const RowMatrix>;

/// All weights and biases in one row-major buffer. Also used for gradients.
class ModelParams
{
public:
  ModelParams() = default;
  explicit ModelParams(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const std::array<BlockShape, block_count>& shapes() const { return shapes_; }

  Eigen::VectorXd& flat() { return values_; }
  const Eigen::VectorXd& flat() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }

  MatrixView block(Block b);
  ConstMatrixView block(Block b) const;

  void set_zero() { values_.setZero(); }

  friend bool operator==(const ModelParams& a, const ModelParams& b);

private:
  ModelConfig config_;
  std::array<BlockShape, block_count> shapes_{};
  Eigen::VectorXd values_;
};

/// Seeded initialization (scaled normal weights, zero biases).
ModelParams init_params(const ModelConfig& config, std::uint64_t seed);

struct PredictionSet
{
  std::vector<std::array<LocalPoint, future_steps>> trajectories;
  std::vector<double> confidences;
};

/// Map points fed to the model: resampled polylines of the road or lane
/// segments within `radius` of `center`. A node shared by two returned
/// segments contributes one point.
std::vector<LocalPoint> map_view(const LocalNavGraph& graph, const LocalPoint& center, double radius, double step);

/// Everything the backward pass needs.
struct ForwardCache
{
  LocalPoint origin;  // last observed target position
  Eigen::VectorXd input;
  Eigen::VectorXd hidden_pre;
  Eigen::VectorXd hidden;
  Eigen::VectorXd agent;  // h_a
  RowMatrix features;   // P x 2
  RowMatrix key_pre;
  RowMatrix keys;       // P x d
  RowMatrix value_pre;
  RowMatrix values;     // P x d
  Eigen::VectorXd attention; // P
  Eigen::VectorXd xi;        // d
  Eigen::VectorXd head_out;  // k * 60
  Eigen::VectorXd conf_logits;
  PredictionSet prediction;
};

Eigen::VectorXd agent_input(const std::array<LocalPoint, observed_steps>& track);
Eigen::VectorXd encode_agent(const std::array<LocalPoint, observed_steps>& track, const ModelParams& params);

struct MapEncoding
{
  RowMatrix keys;    // P x d
  RowMatrix values;  // P x d
};
MapEncoding encode_map(std::span<const LocalPoint> points, const LocalPoint& origin, const ModelParams& params);

/// Single-query scaled dot-product attention of h_a over the map keys plus a
/// residual connection; h_a itself when the map set is empty.
Eigen::VectorXd fuse(const Eigen::VectorXd& agent, const MapEncoding& map);

PredictionSet decode(const Eigen::VectorXd& xi, const LocalPoint& origin, const ModelParams& params);

/// Full forward pass. `map_points` is ignored when the config's source is none.
ForwardCache forward(const scenario::Scene& scene, std::span<const LocalPoint> map_points, const ModelParams& params);

struct LossTerms
{
  double regression = 0.0;
  double classification = 0.0;
  int winner = 0;

  double total() const { return regression + classification; }
};

/// Winner-takes-all: the mode with the lowest average displacement wins (ties to
/// the lowest index); loss = mean squared point error of the winner + -log of
/// its confidence.
LossTerms model_loss(const PredictionSet& prediction, const std::array<LocalPoint, future_steps>& future);

/// Embedding guidance added to the model loss: beta * mean squared error
/// between the first teacher.size() coordinates of xi and `teacher`.
struct EmbeddingTarget
{
  Eigen::VectorXd teacher;
  double alpha = 1.0;
  double beta = 1.0;
};

struct LossGradient
{
  double loss = 0.0;  // alpha * model + beta * distill (model only without a target)
  LossTerms model;
  double distill = 0.0;
  ModelParams gradient;
};

/// Analytic gradient of the (optionally distillation-augmented) loss for one scene.
LossGradient gradients(const scenario::Scene& scene, std::span<const LocalPoint> map_points, const ModelParams& params,
                       const EmbeddingTarget* target = nullptr);

/// Loss value only, for finite-difference checks.
double loss_value(const scenario::Scene& scene, std::span<const LocalPoint> map_points, const ModelParams& params,
                  const EmbeddingTarget* target = nullptr);

/// Checkpoint: JSON with a version, the model config, the block shape table
/// and the row-major values.
void write_checkpoint(std::ostream& out, const ModelParams& params);
ModelParams read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const ModelParams& params);
ModelParams load_checkpoint(const std::string& path);

/// FNV-1a over the raw parameter bits.
std::uint64_t checksum(const ModelParams& params);

}  // namespace navpred::model

#endif  // NAVPRED_MODEL_HPP
