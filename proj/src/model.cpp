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

#include "navpred/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "navpred/distill.hpp"
#include "navpred/error.hpp"
#include "navpred/random.hpp"

namespace navpred::model
{
namespace
{

using json = nlohmann::ordered_json;

constexpr int checkpoint_version = 1;

std::array<BlockShape, block_count> make_shapes(const ModelConfig& c)
{
  const int h = c.hidden;
  const int d = c.d;
  const int k = c.k;
  std::array<BlockShape, block_count> shapes = {{
    {"agent_w1", h, agent_features},
    {"agent_b1", h, 1},
    {"agent_w2", d, h},
    {"agent_b2", d, 1},
    {"key_w", d, 2},
    {"key_b", d, 1},
    {"value_w", d, 2},
    {"value_b", d, 1},
    {"traj_w", k * head_outputs, d},
    {"traj_b", k * head_outputs, 1},
    {"conf_w", k, d},
    {"conf_b", k, 1},
  }};
  std::size_t offset = 0;
  for (auto& s : shapes)
  {
    s.offset = offset;
    offset += static_cast<std::size_t>(s.rows) * static_cast<std::size_t>(s.cols);
  }
  return shapes;
}

Eigen::VectorXd relu(const Eigen::VectorXd& v)
{
  return v.cwiseMax(0.0);
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits)
{
  const double top = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - top).exp().matrix();
  return e / e.sum();
}

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& m, std::string_view block)
{
  if (!m.allFinite())
  {
    throw Error(ErrorCode::numeric, fmt::format("non-finite values in {} block", block));
  }
}

Eigen::VectorXd column(const ConstMatrixView& m)
{
  return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

double squared_error(const LocalPoint& a, const LocalPoint& b)
{
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace

std::string_view to_string(MapSource source)
{
  switch (source)
  {
    case MapSource::hd: return "hd";
    case MapSource::nav: return "nav";
    case MapSource::none: return "none";
  }
  return "none";
}

MapSource parse_map_source(std::string_view text)
{
  if (text == "hd")
  {
    return MapSource::hd;
  }
  if (text == "nav")
  {
    return MapSource::nav;
  }
  if (text == "none")
  {
    return MapSource::none;
  }
  throw Error(ErrorCode::config, fmt::format("unknown map source '{}' (expected hd, nav or none)", text));
}

void ModelConfig::validate() const
{
  if (d < 1 || k < 1 || hidden < 1 || !(map_radius > 0.0) || !(map_step > 0.0))
  {
    throw Error(ErrorCode::config,
                fmt::format("invalid model config d={} k={} hidden={} radius={} step={}", d, k, hidden, map_radius,
                            map_step));
  }
}

ModelParams::ModelParams(const ModelConfig& config) : config_(config), shapes_(make_shapes(config))
{
  config.validate();
  const auto& last = shapes_.back();
  values_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(last.offset + last.rows * last.cols));
}

MatrixView ModelParams::block(Block b)
{
  const auto& s = shapes_[static_cast<int>(b)];
  return MatrixView(values_.data() + s.offset, s.rows, s.cols);
}

ConstMatrixView ModelParams::block(Block b) const
{
  const auto& s = shapes_[static_cast<int>(b)];
  return ConstMatrixView(values_.data() + s.offset, s.rows, s.cols);
}

bool operator==(const ModelParams& a, const ModelParams& b)
{
  return a.config_ == b.config_ && a.values_.size() == b.values_.size() &&
         std::memcmp(a.values_.data(), b.values_.data(), sizeof(double) * a.values_.size()) == 0;
}

ModelParams init_params(const ModelConfig& config, std::uint64_t seed)
{
  ModelParams p(config);
  Rng rng(seed);
  auto fill = [&](Block b, double stddev) {
    auto m = p.block(b);
    for (Eigen::Index i = 0; i < m.size(); ++i)
    {
      m.data()[i] = stddev * rng.normal();
    }
  };
  // Map features are offsets of up to map_radius meters; scale so the first
  // layer sees inputs of order one.
  const double map_scale = 1.0 / config.map_radius;
  fill(Block::agent_w1, std::sqrt(2.0 / agent_features));
  fill(Block::agent_w2, std::sqrt(1.0 / config.hidden));
  fill(Block::key_w, map_scale);
  fill(Block::value_w, map_scale);
  fill(Block::traj_w, 0.1 / std::sqrt(static_cast<double>(config.d)));
  fill(Block::conf_w, 0.1 / std::sqrt(static_cast<double>(config.d)));
  return p;
}

std::vector<LocalPoint> map_view(const LocalNavGraph& graph, const LocalPoint& center, double radius, double step)
{
  const auto segments = graph.segments_in_radius(center, radius, step);
  std::set<NodeId> starts;
  for (const auto& s : segments)
  {
    starts.insert(s.src);
  }
  std::vector<LocalPoint> points;
  for (const auto& s : segments)
  {
    const bool keep_last = !starts.contains(s.dst);
    points.insert(points.end(), s.polyline.begin(), keep_last ? s.polyline.end() : s.polyline.end() - 1);
  }
  return points;
}

Eigen::VectorXd agent_input(const std::array<LocalPoint, observed_steps>& track)
{
  Eigen::VectorXd x(agent_features);
  for (int t = 1; t < observed_steps; ++t)
  {
    x(2 * (t - 1)) = track[t].x - track[t - 1].x;
    x(2 * (t - 1) + 1) = track[t].y - track[t - 1].y;
  }
  return x;
}

Eigen::VectorXd encode_agent(const std::array<LocalPoint, observed_steps>& track, const ModelParams& params)
{
  const Eigen::VectorXd x = agent_input(track);
  const Eigen::VectorXd hidden = relu(params.block(Block::agent_w1) * x + column(params.block(Block::agent_b1)));
  return params.block(Block::agent_w2) * hidden + column(params.block(Block::agent_b2));
}

static void lift(const RowMatrix& features, const ConstMatrixView& w, const ConstMatrixView& b, RowMatrix& pre, RowMatrix& out)
{
  const auto n = features.rows();
  const Eigen::RowVectorXd wx = w.col(0).transpose();
  const Eigen::RowVectorXd wy = w.col(1).transpose();
  const Eigen::RowVectorXd bias = b.col(0).transpose();
  pre.resize(n, w.rows());
  for (Eigen::Index i = 0; i < n; ++i)
  {
    pre.row(i) = features(i, 0) * wx + features(i, 1) * wy + bias;
  }
  out = pre.cwiseMax(0.0);
}

static RowMatrix map_features(std::span<const LocalPoint> points, const LocalPoint& origin)
{
  RowMatrix features(static_cast<Eigen::Index>(points.size()), 2);
  for (Eigen::Index i = 0; i < features.rows(); ++i)
  {
    features(i, 0) = points[i].x - origin.x;
    features(i, 1) = points[i].y - origin.y;
  }
  return features;
}

MapEncoding encode_map(std::span<const LocalPoint> points, const LocalPoint& origin, const ModelParams& params)
{
  const RowMatrix features = map_features(points, origin);
  MapEncoding enc;
  RowMatrix pre;
  lift(features, params.block(Block::key_w), params.block(Block::key_b), pre, enc.keys);
  lift(features, params.block(Block::value_w), params.block(Block::value_b), pre, enc.values);
  return enc;
}

Eigen::VectorXd fuse(const Eigen::VectorXd& agent, const MapEncoding& map)
{
  if (map.keys.rows() == 0)
  {
    return agent;
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(agent.size()));
  const Eigen::VectorXd weights = softmax(map.keys * agent * scale);
  return agent + map.values.transpose() * weights;
}

static PredictionSet assemble(const Eigen::VectorXd& out, const Eigen::VectorXd& logits, const LocalPoint& origin, int k)
{
  const Eigen::VectorXd conf = softmax(logits);
  PredictionSet pred;
  pred.trajectories.resize(k);
  pred.confidences.assign(conf.data(), conf.data() + k);
  for (int m = 0; m < k; ++m)
  {
    LocalPoint at = origin;
    for (int t = 0; t < future_steps; ++t)
    {
      at.x += out(m * head_outputs + 2 * t);
      at.y += out(m * head_outputs + 2 * t + 1);
      pred.trajectories[m][t] = at;
    }
  }
  return pred;
}

PredictionSet decode(const Eigen::VectorXd& xi, const LocalPoint& origin, const ModelParams& params)
{
  const Eigen::VectorXd out = params.block(Block::traj_w) * xi + column(params.block(Block::traj_b));
  const Eigen::VectorXd logits = params.block(Block::conf_w) * xi + column(params.block(Block::conf_b));
  return assemble(out, logits, origin, params.config().k);
}

ForwardCache forward(const scenario::Scene& scene, std::span<const LocalPoint> map_points, const ModelParams& params)
{
  const ModelConfig& cfg = params.config();
  const auto& track = scene.target_track();
  ForwardCache c;
  c.origin = track.back();

  c.input = agent_input(track);
  c.hidden_pre = params.block(Block::agent_w1) * c.input + column(params.block(Block::agent_b1));
  c.hidden = relu(c.hidden_pre);
  c.agent = params.block(Block::agent_w2) * c.hidden + column(params.block(Block::agent_b2));
  require_finite(c.agent, "agent encoder");

  const std::span<const LocalPoint> used =
    cfg.source == MapSource::none ? std::span<const LocalPoint>{} : map_points;
  const auto n = static_cast<Eigen::Index>(used.size());
  c.features = map_features(used, c.origin);
  lift(c.features, params.block(Block::key_w), params.block(Block::key_b), c.key_pre, c.keys);
  lift(c.features, params.block(Block::value_w), params.block(Block::value_b), c.value_pre, c.values);

  if (n == 0)
  {
    c.xi = c.agent;
  }
  else
  {
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d));
    c.attention = softmax(c.keys * c.agent * scale);
    c.xi = c.agent + c.values.transpose() * c.attention;
  }
  if (!c.xi.allFinite())
  {
    require_finite(c.keys, "map encoder");
    require_finite(c.values, "map encoder");
    require_finite(c.xi, "fusion");
  }

  c.head_out = params.block(Block::traj_w) * c.xi + column(params.block(Block::traj_b));
  c.conf_logits = params.block(Block::conf_w) * c.xi + column(params.block(Block::conf_b));
  require_finite(c.head_out, "decoder");
  require_finite(c.conf_logits, "decoder");
  c.prediction = assemble(c.head_out, c.conf_logits, c.origin, cfg.k);
  return c;
}

LossTerms model_loss(const PredictionSet& prediction, const std::array<LocalPoint, future_steps>& future)
{
  LossTerms terms;
  double best = INFINITY;
  for (std::size_t m = 0; m < prediction.trajectories.size(); ++m)
  {
    double ade = 0.0;
    for (int t = 0; t < future_steps; ++t)
    {
      ade += std::sqrt(squared_error(prediction.trajectories[m][t], future[t]));
    }
    ade /= future_steps;
    if (ade < best)
    {
      best = ade;
      terms.winner = static_cast<int>(m);
    }
  }
  const auto& winner = prediction.trajectories[terms.winner];
  for (int t = 0; t < future_steps; ++t)
  {
    terms.regression += squared_error(winner[t], future[t]);
  }
  terms.regression /= future_steps;
  terms.classification = -std::log(prediction.confidences[terms.winner]);
  return terms;
}

// Gradient of an affine+ReLU lift whose upstream gradient is the outer
// product row_scale * col_scale^T: accumulates the weight columns and bias.
static void accumulate_lift(const RowMatrix& pre, const RowMatrix& features, const Eigen::VectorXd& row_scale,
                            const Eigen::VectorXd& col_scale, Eigen::VectorXd& gx, Eigen::VectorXd& gy,
                            Eigen::VectorXd& gb)
{
  const auto d = pre.cols();
  const double* __restrict cs = col_scale.data();
  double* __restrict ox = gx.data();
  double* __restrict oy = gy.data();
  double* __restrict ob = gb.data();
  for (Eigen::Index i = 0; i < pre.rows(); ++i)
  {
    const double* __restrict p = pre.data() + i * d;
    const double r = row_scale(i);
    const double fx = features(i, 0);
    const double fy = features(i, 1);
    for (Eigen::Index j = 0; j < d; ++j)
    {
      const double gv = p[j] > 0.0 ? r * cs[j] : 0.0;
      ox[j] += gv * fx;
      oy[j] += gv * fy;
      ob[j] += gv;
    }
  }
}

LossGradient gradients(const scenario::Scene& scene, std::span<const LocalPoint> map_points, const ModelParams& params,
                       const EmbeddingTarget* target)
{
  const ModelConfig& cfg = params.config();
  const ForwardCache c = forward(scene, map_points, params);
  LossGradient out;
  out.model = model_loss(c.prediction, scene.future);
  const double alpha = target ? target->alpha : 1.0;
  out.loss = alpha * out.model.total();
  if (target)
  {
    out.distill = distill::distill_loss(target->teacher, c.xi);
    out.loss += target->beta * out.distill;
  }
  if (!std::isfinite(out.loss))
  {
    throw Error(ErrorCode::numeric, fmt::format("non-finite loss in scene {}", scene.scene_id));
  }

  ModelParams g(cfg);
  const int m = out.model.winner;

  // Decoder: trajectory head of the winning mode.
  Eigen::VectorXd d_out = Eigen::VectorXd::Zero(head_outputs);
  {
    const auto& traj = c.prediction.trajectories[m];
    double run_x = 0.0;
    double run_y = 0.0;
    // Position t is the cumulative sum of steps 0..t, so step u collects the
    // gradients of every position t >= u.
    for (int t = future_steps - 1; t >= 0; --t)
    {
      run_x += 2.0 / future_steps * (traj[t].x - scene.future[t].x);
      run_y += 2.0 / future_steps * (traj[t].y - scene.future[t].y);
      d_out(2 * t) = alpha * run_x;
      d_out(2 * t + 1) = alpha * run_y;
    }
  }
  auto traj_w = params.block(Block::traj_w);
  g.block(Block::traj_w).middleRows(m * head_outputs, head_outputs) = d_out * c.xi.transpose();
  g.block(Block::traj_b).middleRows(m * head_outputs, head_outputs) = d_out;
  Eigen::VectorXd d_xi = traj_w.middleRows(m * head_outputs, head_outputs).transpose() * d_out;

  // Confidence head: d(-log softmax_m)/dlogits = softmax - onehot(m).
  Eigen::VectorXd d_logits = Eigen::Map<const Eigen::VectorXd>(c.prediction.confidences.data(), cfg.k);
  d_logits(m) -= 1.0;
  d_logits *= alpha;
  g.block(Block::conf_w) = d_logits * c.xi.transpose();
  g.block(Block::conf_b) = d_logits;
  d_xi += params.block(Block::conf_w).transpose() * d_logits;

  if (target)
  {
    d_xi += target->beta * distill::distill_gradient(target->teacher, c.xi);
  }

  // Fusion.
  Eigen::VectorXd d_agent = d_xi;
  const auto n = c.keys.rows();
  if (n > 0)
  {
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d));
    const Eigen::VectorXd d_weights = c.values * d_xi;  // P
    const double mean = c.attention.dot(d_weights);
    const Eigen::VectorXd d_scores = c.attention.cwiseProduct((d_weights.array() - mean).matrix());
    d_agent += scale * (c.keys.transpose() * d_scores);

    // d key_pre(i, j) = scale * d_scores(i) * agent(j) and d value_pre(i, j) =
    // attention(i) * d_xi(j), each masked by its ReLU.
    const auto d = static_cast<int>(c.keys.cols());
    Eigen::VectorXd kx = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd ky = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd kb = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd vx = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd vy = Eigen::VectorXd::Zero(d);
    Eigen::VectorXd vb = Eigen::VectorXd::Zero(d);
    accumulate_lift(c.key_pre, c.features, scale * d_scores, c.agent, kx, ky, kb);
    accumulate_lift(c.value_pre, c.features, c.attention, d_xi, vx, vy, vb);
    g.block(Block::key_w).col(0) = kx;
    g.block(Block::key_w).col(1) = ky;
    g.block(Block::key_b) = kb;
    g.block(Block::value_w).col(0) = vx;
    g.block(Block::value_w).col(1) = vy;
    g.block(Block::value_b) = vb;
  }

  // Agent encoder.
  g.block(Block::agent_w2) = d_agent * c.hidden.transpose();
  g.block(Block::agent_b2) = d_agent;
  const Eigen::VectorXd d_hidden = (params.block(Block::agent_w2).transpose() * d_agent)
                                     .cwiseProduct((c.hidden_pre.array() > 0.0).cast<double>().matrix());
  g.block(Block::agent_w1) = d_hidden * c.input.transpose();
  g.block(Block::agent_b1) = d_hidden;

  if (!g.flat().allFinite())
  {
    throw Error(ErrorCode::numeric, fmt::format("non-finite gradient in scene {}", scene.scene_id));
  }
  out.gradient = std::move(g);
  return out;
}

double loss_value(const scenario::Scene& scene, std::span<const LocalPoint> map_points, const ModelParams& params,
                  const EmbeddingTarget* target)
{
  const ForwardCache c = forward(scene, map_points, params);
  const double alpha = target ? target->alpha : 1.0;
  double loss = alpha * model_loss(c.prediction, scene.future).total();
  if (target)
  {
    loss += target->beta * distill::distill_loss(target->teacher, c.xi);
  }
  return loss;
}

void write_checkpoint(std::ostream& out, const ModelParams& params)
{
  const ModelConfig& c = params.config();
  json j;
  j["format"] = "navpred-checkpoint";
  j["version"] = checkpoint_version;
  j["config"] = {{"d", c.d},
                 {"k", c.k},
                 {"hidden", c.hidden},
                 {"map_radius", c.map_radius},
                 {"map_step", c.map_step},
                 {"map_source", to_string(c.source)}};
  j["blocks"] = json::array();
  for (const auto& s : params.shapes())
  {
    j["blocks"].push_back({{"name", s.name}, {"rows", s.rows}, {"cols", s.cols}});
  }
  j["values"] = std::vector<double>(params.flat().data(), params.flat().data() + params.size());
  out << j.dump() << '\n';
}

ModelParams read_checkpoint(std::istream& in)
{
  try
  {
    const json j = json::parse(in);
    if (j.at("format").get<std::string>() != "navpred-checkpoint")
    {
      throw Error(ErrorCode::parse, "not a navpred checkpoint");
    }
    const int version = j.at("version").get<int>();
    if (version != checkpoint_version)
    {
      throw Error(ErrorCode::parse, fmt::format("unsupported checkpoint version {}", version));
    }
    const json& jc = j.at("config");
    ModelConfig c;
    c.d = jc.at("d").get<int>();
    c.k = jc.at("k").get<int>();
    c.hidden = jc.at("hidden").get<int>();
    c.map_radius = jc.at("map_radius").get<double>();
    c.map_step = jc.at("map_step").get<double>();
    c.source = parse_map_source(jc.at("map_source").get<std::string>());
    ModelParams p(c);
    const json& blocks = j.at("blocks");
    if (blocks.size() != block_count)
    {
      throw Error(ErrorCode::shape, "checkpoint block table does not match the model");
    }
    for (int b = 0; b < block_count; ++b)
    {
      const auto& s = p.shapes()[b];
      if (blocks[b].at("name").get<std::string>() != s.name || blocks[b].at("rows").get<int>() != s.rows ||
          blocks[b].at("cols").get<int>() != s.cols)
      {
        throw Error(ErrorCode::shape, fmt::format("checkpoint block {} has an unexpected shape", s.name));
      }
    }
    const auto values = j.at("values").get<std::vector<double>>();
    if (values.size() != p.size())
    {
      throw Error(ErrorCode::shape, fmt::format("checkpoint holds {} values, model needs {}", values.size(), p.size()));
    }
    std::copy(values.begin(), values.end(), p.flat().data());
    return p;
  }
  catch (const nlohmann::json::exception& e)
  {
    throw Error(ErrorCode::parse, fmt::format("checkpoint: {}", e.what()));
  }
}

void save_checkpoint(const std::string& path, const ModelParams& params)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error(ErrorCode::io, fmt::format("cannot write '{}'", path));
  }
  write_checkpoint(out, params);
}

ModelParams load_checkpoint(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw Error(ErrorCode::io, fmt::format("cannot open '{}'", path));
  }
  return read_checkpoint(in);
}

std::uint64_t checksum(const ModelParams& params)
{
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(params.flat().data());
  for (std::size_t i = 0; i < params.size() * sizeof(double); ++i)
  {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace navpred::model
