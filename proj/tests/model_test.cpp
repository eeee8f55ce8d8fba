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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "gradient_check.hpp"
#include "navpred/error.hpp"
#include "navpred/model.hpp"
#include "navpred/random.hpp"

using namespace navpred;
using namespace navpred::model;

namespace
{

ModelConfig tiny_config(MapSource source = MapSource::nav)
{
  ModelConfig c;
  c.d = 8;
  c.k = 3;
  c.hidden = 6;
  c.map_radius = 30.0;
  c.source = source;
  return c;
}

scenario::Scene straight_scene(double speed)
{
  scenario::Scene s;
  s.scene_id = 1;
  s.agents.resize(1);
  for (int t = 0; t < observed_steps; ++t)
  {
    s.agents[0][t] = {speed * 0.1 * t, 0.0};
  }
  for (int t = 0; t < future_steps; ++t)
  {
    s.future[t] = {speed * 0.1 * (observed_steps + t), 0.0};
  }
  return s;
}

struct Fixture
{
  scenario::MapPair world;
  LocalNavGraph hd;
  std::vector<scenario::Scene> scenes;
};

const Fixture& fixture()
{
  static const Fixture f = [] {
    Fixture out;
    scenario::WorldSpec spec;
    spec.seed = 5;
    spec.num_roads = 12;
    spec.intersection_count = 4;
    spec.extent = 200;
    out.world = scenario::generate_world(spec);
    out.hd = scenario::hd_graph(out.world);
    out.scenes = scenario::generate_scenes(out.world, 20, 11);
    return out;
  }();
  return f;
}

std::vector<LocalPoint> view_of(const scenario::Scene& s, const ModelConfig& c)
{
  return map_view(fixture().hd, s.target_track().back(), c.map_radius, c.map_step);
}

PredictionSet offsets_prediction(const std::array<LocalPoint, future_steps>& gt, std::vector<LocalPoint> offsets,
                                 std::vector<double> conf)
{
  PredictionSet p;
  for (const auto& o : offsets)
  {
    std::array<LocalPoint, future_steps> traj{};
    for (int t = 0; t < future_steps; ++t)
    {
      traj[t] = {gt[t].x + o.x, gt[t].y + o.y};
    }
    p.trajectories.push_back(traj);
  }
  p.confidences = std::move(conf);
  return p;
}

}  // namespace

TEST(ModelParamsTest, BlockLayoutIsContiguousRowMajor)
{
  const ModelConfig c = tiny_config();
  ModelParams p(c);
  std::size_t expected = 0;
  for (const auto& s : p.shapes())
  {
    EXPECT_EQ(s.offset, expected) << s.name;
    expected += static_cast<std::size_t>(s.rows * s.cols);
  }
  EXPECT_EQ(p.size(), expected);
  p.block(Block::traj_w)(1, 2) = 7.0;
  const auto& s = p.shapes()[static_cast<int>(Block::traj_w)];
  EXPECT_EQ(p.flat()(static_cast<Eigen::Index>(s.offset) + 1 * s.cols + 2), 7.0);
  EXPECT_EQ(s.rows, c.k * head_outputs);
}

TEST(ModelParamsTest, InitIsSeeded)
{
  EXPECT_EQ(init_params(tiny_config(), 3), init_params(tiny_config(), 3));
  EXPECT_FALSE(init_params(tiny_config(), 3) == init_params(tiny_config(), 4));
  EXPECT_EQ(checksum(init_params(tiny_config(), 3)), checksum(init_params(tiny_config(), 3)));
  EXPECT_NE(checksum(init_params(tiny_config(), 3)), checksum(init_params(tiny_config(), 4)));
}

TEST(ModelConfigTest, Validation)
{
  ModelConfig c;
  c.d = 0;
  EXPECT_THROW(ModelParams{c}, Error);
  EXPECT_EQ(parse_map_source("hd"), MapSource::hd);
  EXPECT_EQ(to_string(MapSource::none), "none");
  EXPECT_THROW(parse_map_source("sat"), Error);
}

TEST(AgentEncoderTest, ZeroParamsGiveZeroEmbedding)
{
  ModelParams p(tiny_config());
  const auto h = encode_agent(straight_scene(10).target_track(), p);
  EXPECT_EQ(h.size(), 8);
  EXPECT_EQ(h.norm(), 0.0);
}

TEST(AgentEncoderTest, HandComputedTwoLayer)
{
  ModelConfig c = tiny_config();
  c.d = 2;
  c.hidden = 2;
  ModelParams p(c);
  // hidden0 = relu(dx of first step), hidden1 = relu(-dx of first step) + 0.5
  p.block(Block::agent_w1)(0, 0) = 1.0;
  p.block(Block::agent_w1)(1, 0) = -1.0;
  p.block(Block::agent_b1)(1, 0) = 0.5;
  p.block(Block::agent_w2) << 2.0, 0.0, 1.0, 3.0;
  p.block(Block::agent_b2) << 0.0, -1.0;
  const auto h = encode_agent(straight_scene(10).target_track(), p);
  // first step dx = 1.0: hidden = (1, 0) -> h = (2, 1 - 1)
  EXPECT_DOUBLE_EQ(h(0), 2.0);
  EXPECT_DOUBLE_EQ(h(1), 0.0);
}

TEST(AgentEncoderTest, TranslationInvariant)
{
  const ModelParams p = test_support::random_params(tiny_config(), 12);
  auto track = fixture().scenes[2].target_track();
  const auto base = encode_agent(track, p);
  for (auto& q : track)
  {
    q = {q.x + 10.0, q.y + 10.0};
  }
  EXPECT_LT((encode_agent(track, p) - base).norm(), 1e-12);
}

TEST(MapEncoderTest, EmptyAndOriginPoint)
{
  const ModelParams p = test_support::random_params(tiny_config(), 13);
  const auto empty = encode_map({}, {3, 4}, p);
  EXPECT_EQ(empty.keys.rows(), 0);
  const std::vector<LocalPoint> one{{3, 4}};
  const auto enc = encode_map(one, {3, 4}, p);
  for (int j = 0; j < 8; ++j)
  {
    EXPECT_EQ(enc.keys(0, j), std::max(0.0, p.block(Block::key_b)(j, 0)));
    EXPECT_EQ(enc.values(0, j), std::max(0.0, p.block(Block::value_b)(j, 0)));
  }
}

TEST(MapEncoderTest, HandComputedThreePoints)
{
  ModelConfig c = tiny_config();
  c.d = 2;
  ModelParams p(c);
  p.block(Block::key_w) << 1.0, 0.0, 0.0, 1.0;
  p.block(Block::key_b) << 0.0, -1.0;
  p.block(Block::value_w) << 1.0, 1.0, -1.0, 2.0;
  p.block(Block::value_b) << 0.5, 0.0;
  const std::vector<LocalPoint> pts{{11, 20}, {9, 22}, {10, 19}};
  const auto enc = encode_map(pts, {10, 20}, p);
  // features (1,0), (-1,2), (0,-1)
  Eigen::MatrixXd keys(3, 2);
  keys << 1.0, 0.0, 0.0, 1.0, 0.0, 0.0;
  Eigen::MatrixXd values(3, 2);
  values << 1.5, 0.0, 1.5, 5.0, 0.0, 0.0;
  EXPECT_EQ(enc.keys, keys);
  EXPECT_EQ(enc.values, values);
}

TEST(FuseTest, EmptyMapIsAgentEmbedding)
{
  Eigen::VectorXd a(3);
  a << 1, -2, 3;
  MapEncoding empty;
  empty.keys.resize(0, 3);
  empty.values.resize(0, 3);
  EXPECT_EQ(fuse(a, empty), a);
}

TEST(FuseTest, SingletonAndIdenticalPoints)
{
  Eigen::VectorXd a(2);
  a << 0.3, -0.7;
  MapEncoding one;
  one.keys = Eigen::MatrixXd::Constant(1, 2, 5.0);
  one.values = Eigen::MatrixXd(1, 2);
  one.values << 1.5, 2.5;
  Eigen::VectorXd xi = fuse(a, one);
  EXPECT_DOUBLE_EQ(xi(0), 1.8);
  EXPECT_DOUBLE_EQ(xi(1), 1.8);

  MapEncoding two;
  two.keys = Eigen::MatrixXd::Constant(2, 2, -1.0);
  two.values = Eigen::MatrixXd(2, 2);
  two.values << 1.5, 2.5, 1.5, 2.5;
  xi = fuse(a, two);
  EXPECT_NEAR(xi(0), 1.8, 1e-15);
  EXPECT_NEAR(xi(1), 1.8, 1e-15);
}

TEST(FuseTest, HandComputedAttention)
{
  // d = 2, keys (1,0) and (0,1), agent (2,0): scores 2/sqrt2, 0
  Eigen::VectorXd a(2);
  a << 2.0, 0.0;
  MapEncoding m;
  m.keys = Eigen::MatrixXd::Identity(2, 2);
  m.values = Eigen::MatrixXd(2, 2);
  m.values << 1.0, 0.0, 0.0, 1.0;
  const double w0 = 1.0 / (1.0 + std::exp(-std::sqrt(2.0)));
  const Eigen::VectorXd xi = fuse(a, m);
  EXPECT_NEAR(xi(0), 2.0 + w0, 1e-15);
  EXPECT_NEAR(xi(1), 1.0 - w0, 1e-15);
}

TEST(FuseTest, PermutationInvariant)
{
  Rng rng(4);
  const int n = 40;
  const int d = 5;
  MapEncoding m;
  m.keys.resize(n, d);
  m.values.resize(n, d);
  for (int i = 0; i < n; ++i)
  {
    for (int j = 0; j < d; ++j)
    {
      m.keys(i, j) = rng.uniform(0, 2);
      m.values(i, j) = rng.uniform(0, 2);
    }
  }
  Eigen::VectorXd a(d);
  for (int j = 0; j < d; ++j)
  {
    a(j) = rng.normal();
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n; i > 1; --i)
  {
    std::swap(perm[i - 1], perm[rng.index(i)]);
  }
  MapEncoding shuffled = m;
  for (int i = 0; i < n; ++i)
  {
    shuffled.keys.row(i) = m.keys.row(perm[i]);
    shuffled.values.row(i) = m.values.row(perm[i]);
  }
  EXPECT_LT((fuse(a, m) - fuse(a, shuffled)).norm(), 1e-12);
}

TEST(DecodeTest, ZeroEverythingStaysPut)
{
  ModelParams p(tiny_config());
  const auto pred = decode(Eigen::VectorXd::Zero(8), {4.0, -2.0}, p);
  ASSERT_EQ(pred.trajectories.size(), 3u);
  for (const auto& traj : pred.trajectories)
  {
    for (const auto& q : traj)
    {
      EXPECT_EQ(q, (LocalPoint{4.0, -2.0}));
    }
  }
  for (double c : pred.confidences)
  {
    EXPECT_DOUBLE_EQ(c, 1.0 / 3.0);
  }
}

TEST(DecodeTest, HandComputedTwoModes)
{
  ModelConfig c = tiny_config();
  c.d = 2;
  c.k = 2;
  ModelParams p(c);
  auto w = p.block(Block::traj_w);
  auto b = p.block(Block::traj_b);
  for (int t = 0; t < future_steps; ++t)
  {
    w(2 * t, 0) = 0.5;                     // mode 0 dx = 0.5 * xi0
    w(2 * t + 1, 1) = 0.25;                // mode 0 dy = 0.25 * xi1
    w(head_outputs + 2 * t, 0) = 1.0;      // mode 1 dx = xi0
    b(head_outputs + 2 * t + 1, 0) = 0.1;  // mode 1 dy = 0.1
  }
  p.block(Block::conf_w) << 1.0, 0.0, 0.0, 1.0;
  Eigen::VectorXd xi(2);
  xi << 1.0, 2.0;
  const auto pred = decode(xi, {10.0, 20.0}, p);
  for (int t = 0; t < future_steps; ++t)
  {
    EXPECT_NEAR(pred.trajectories[0][t].x, 10.0 + 0.5 * (t + 1), 1e-12);
    EXPECT_NEAR(pred.trajectories[0][t].y, 20.0 + 0.5 * (t + 1), 1e-12);
    EXPECT_NEAR(pred.trajectories[1][t].x, 10.0 + 1.0 * (t + 1), 1e-12);
    EXPECT_NEAR(pred.trajectories[1][t].y, 20.0 + 0.1 * (t + 1), 1e-12);
  }
  const double e = std::exp(1.0);
  EXPECT_NEAR(pred.confidences[0], 1.0 / (1.0 + e), 1e-15);
  EXPECT_NEAR(pred.confidences[1], e / (1.0 + e), 1e-15);
}

TEST(DecodeTest, ConfidencesOnSimplex)
{
  const ModelConfig c = tiny_config();
  for (int trial = 0; trial < 1000; ++trial)
  {
    ModelParams p = init_params(c, trial);
    Rng rng(Rng::derive(99, trial));
    p.block(Block::conf_b) *= 0.0;
    for (Eigen::Index i = 0; i < p.block(Block::conf_b).size(); ++i)
    {
      p.block(Block::conf_b).data()[i] = 10.0 * rng.normal();
    }
    Eigen::VectorXd xi(c.d);
    for (int j = 0; j < c.d; ++j)
    {
      xi(j) = 5.0 * rng.normal();
    }
    const auto pred = decode(xi, {0, 0}, p);
    double sum = 0.0;
    for (double v : pred.confidences)
    {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(LossTest, ExactMatchWithFullConfidenceIsZero)
{
  const auto s = straight_scene(8);
  const auto pred = offsets_prediction(s.future, {{0, 0}}, {1.0});
  const auto terms = model_loss(pred, s.future);
  EXPECT_EQ(terms.regression, 0.0);
  EXPECT_EQ(terms.classification, 0.0);
  EXPECT_EQ(terms.total(), 0.0);
}

TEST(LossTest, TwoConstantOffsetModes)
{
  const auto s = straight_scene(8);
  const auto pred = offsets_prediction(s.future, {{1, 0}, {2, 0}}, {0.5, 0.5});
  const auto terms = model_loss(pred, s.future);
  EXPECT_EQ(terms.winner, 0);
  EXPECT_NEAR(terms.regression, 1.0, 1e-12);
  EXPECT_NEAR(terms.classification, std::log(2.0), 1e-15);
}

TEST(LossTest, TiesGoToLowestMode)
{
  const auto s = straight_scene(8);
  const auto pred = offsets_prediction(s.future, {{0, 3}, {3, 0}, {0, -3}}, {0.2, 0.5, 0.3});
  const auto terms = model_loss(pred, s.future);
  EXPECT_EQ(terms.winner, 0);
  EXPECT_NEAR(terms.classification, -std::log(0.2), 1e-15);
}

TEST(LossTest, MatchesBruteForce)
{
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial)
  {
    std::array<LocalPoint, future_steps> gt{};
    for (auto& q : gt)
    {
      q = {rng.uniform(-50, 50), rng.uniform(-50, 50)};
    }
    PredictionSet pred;
    const int k = 6;
    std::vector<double> raw(k);
    for (int m = 0; m < k; ++m)
    {
      std::array<LocalPoint, future_steps> traj{};
      for (auto& q : traj)
      {
        q = {rng.uniform(-50, 50), rng.uniform(-50, 50)};
      }
      pred.trajectories.push_back(traj);
      raw[m] = rng.uniform(0.01, 1.0);
    }
    const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    for (double& r : raw)
    {
      r /= total;
    }
    pred.confidences = raw;

    // Enumerate all modes: pick the smallest mean distance, then evaluate.
    int best = -1;
    double best_ade = 0.0;
    for (int m = 0; m < k; ++m)
    {
      double ade = 0.0;
      for (int t = 0; t < future_steps; ++t)
      {
        ade += std::hypot(pred.trajectories[m][t].x - gt[t].x, pred.trajectories[m][t].y - gt[t].y);
      }
      ade /= future_steps;
      if (best < 0 || ade < best_ade)
      {
        best = m;
        best_ade = ade;
      }
    }
    double sq = 0.0;
    for (int t = 0; t < future_steps; ++t)
    {
      const double dx = pred.trajectories[best][t].x - gt[t].x;
      const double dy = pred.trajectories[best][t].y - gt[t].y;
      sq += dx * dx + dy * dy;
    }
    const auto terms = model_loss(pred, gt);
    EXPECT_EQ(terms.winner, best);
    EXPECT_NEAR(terms.regression, sq / future_steps, 1e-9);
    EXPECT_DOUBLE_EQ(terms.classification, -std::log(raw[best]));
  }
}

TEST(MapViewTest, SharedNodesAppearOnce)
{
  std::map<NodeId, LocalPoint> nodes{{1, {0, 0}}, {2, {4, 0}}, {3, {8, 0}}};
  const auto g = LocalNavGraph::from_local(nodes, {{1, 2}, {2, 3}});
  const auto pts = map_view(g, {4, 0}, 50.0, 2.0);
  const std::vector<LocalPoint> expected{{0, 0}, {2, 0}, {4, 0}, {6, 0}, {8, 0}};
  EXPECT_EQ(pts, expected);
}

TEST(ForwardTest, NoneSourceIgnoresMap)
{
  const auto& f = fixture();
  const ModelConfig c = tiny_config(MapSource::none);
  const ModelParams p = init_params(c, 8);
  const auto& scene = f.scenes[0];
  const auto with_map = forward(scene, view_of(scene, c), p);
  const auto without = forward(scene, {}, p);
  EXPECT_EQ(with_map.xi, without.xi);
  EXPECT_EQ(with_map.prediction.trajectories, without.prediction.trajectories);
  EXPECT_EQ(with_map.prediction.confidences, without.prediction.confidences);
}

TEST(ForwardTest, TranslationEquivariance)
{
  const auto& f = fixture();
  const ModelConfig c = tiny_config();
  const ModelParams p = init_params(c, 2);
  const LocalPoint offset{1234.5, -987.25};
  for (std::size_t i = 0; i < 5; ++i)
  {
    scenario::Scene moved = f.scenes[i];
    for (auto& agent : moved.agents)
    {
      for (auto& q : agent)
      {
        q = {q.x + offset.x, q.y + offset.y};
      }
    }
    auto view = view_of(f.scenes[i], c);
    auto moved_view = view;
    for (auto& q : moved_view)
    {
      q = {q.x + offset.x, q.y + offset.y};
    }
    const auto a = forward(f.scenes[i], view, p).prediction;
    const auto b = forward(moved, moved_view, p).prediction;
    for (int m = 0; m < c.k; ++m)
    {
      for (int t = 0; t < future_steps; ++t)
      {
        EXPECT_NEAR(b.trajectories[m][t].x, a.trajectories[m][t].x + offset.x, 1e-9);
        EXPECT_NEAR(b.trajectories[m][t].y, a.trajectories[m][t].y + offset.y, 1e-9);
      }
      EXPECT_NEAR(b.confidences[m], a.confidences[m], 1e-12);
    }
  }
}

TEST(ForwardTest, NonFiniteNamesBlock)
{
  const auto& f = fixture();
  const ModelConfig c = tiny_config();
  ModelParams p = init_params(c, 2);
  p.block(Block::agent_b2)(0, 0) = NAN;
  try
  {
    forward(f.scenes[0], view_of(f.scenes[0], c), p);
    FAIL() << "expected a numeric error";
  }
  catch (const Error& e)
  {
    EXPECT_EQ(e.code(), ErrorCode::numeric);
    EXPECT_NE(std::string(e.what()).find("agent encoder"), std::string::npos);
  }
}

TEST(GradientTest, ZeroParamsMatchFiniteDifferences)
{
  const auto& f = fixture();
  const ModelConfig c = tiny_config();
  const ModelParams p(c);
  for (std::size_t i = 0; i < 3; ++i)
  {
    // Every mode predicts the same trajectory here, so the minimum over modes
    // is tied and only the branch of the selected winner is differentiable.
    const auto& scene = f.scenes[i];
    const auto view = view_of(scene, c);
    const auto g = gradients(scene, view, p);
    EXPECT_EQ(g.model.winner, 0);
    const auto check = test_support::check_gradient(g.gradient.flat(), p, [&](const ModelParams& q) {
      return test_support::fixed_winner_loss(scene, view, q, 0);
    });
    EXPECT_GT(check.analytic_norm, 0.0);
    EXPECT_LT(check.relative_error, 1e-4) << "scene " << i;
  }
}

TEST(GradientTest, RandomDrawsMatchFiniteDifferences)
{
  const auto& f = fixture();
  for (int draw = 0; draw < 10; ++draw)
  {
    const ModelConfig c = tiny_config(draw % 3 == 2 ? MapSource::none : MapSource::nav);
    const ModelParams p = test_support::random_params(c, 100 + draw);
    for (int s = 0; s < 5; ++s)
    {
      const auto& scene = f.scenes[(draw * 5 + s) % f.scenes.size()];
      const auto check = test_support::check_gradient(scene, view_of(scene, c), p);
      EXPECT_LT(check.relative_error, 1e-4) << "draw " << draw << " scene " << s;
    }
  }
}

TEST(GradientTest, WithEmbeddingTarget)
{
  const auto& f = fixture();
  const ModelConfig teacher_config = tiny_config(MapSource::hd);
  ModelConfig student_config = tiny_config();
  student_config.d = 12;
  const ModelParams teacher = test_support::random_params(teacher_config, 5);
  const ModelParams student = test_support::random_params(student_config, 6);
  for (int s = 0; s < 4; ++s)
  {
    const auto& scene = f.scenes[s];
    EmbeddingTarget target;
    target.teacher = forward(scene, view_of(scene, teacher_config), teacher).xi;
    target.alpha = 1.0;
    target.beta = 1.0;
    const auto check = test_support::check_gradient(scene, view_of(scene, student_config), student, &target);
    EXPECT_LT(check.relative_error, 1e-4) << "scene " << s;
  }
}

TEST(GradientTest, MapPermutationKeepsGradientNorm)
{
  const auto& f = fixture();
  const ModelConfig c = tiny_config();
  const ModelParams p = test_support::random_params(c, 31);
  const auto& scene = f.scenes[3];
  auto view = view_of(scene, c);
  ASSERT_GT(view.size(), 2u);
  const double base = gradients(scene, view, p).gradient.flat().norm();
  std::reverse(view.begin(), view.end());
  const double reversed = gradients(scene, view, p).gradient.flat().norm();
  EXPECT_NEAR(base, reversed, 1e-9 * base);
}

TEST(CheckpointTest, RoundTripIsExact)
{
  ModelConfig c = tiny_config(MapSource::hd);
  c.map_radius = 42.5;
  const ModelParams p = test_support::random_params(c, 77);
  std::stringstream buffer;
  write_checkpoint(buffer, p);
  const std::string text = buffer.str();
  const ModelParams back = read_checkpoint(buffer);
  EXPECT_EQ(back, p);
  EXPECT_EQ(back.config(), c);
  std::stringstream again;
  write_checkpoint(again, back);
  EXPECT_EQ(again.str(), text);
}

TEST(CheckpointTest, RejectsBadInput)
{
  std::stringstream garbage("{not json");
  EXPECT_THROW(read_checkpoint(garbage), Error);

  const ModelParams p = test_support::random_params(tiny_config(), 1);
  std::stringstream buffer;
  write_checkpoint(buffer, p);
  std::string text = buffer.str();
  text.replace(text.find("\"version\":1"), 11, "\"version\":9");
  std::stringstream bad_version(text);
  EXPECT_THROW(read_checkpoint(bad_version), Error);

  text = buffer.str();
  text.replace(text.find("\"rows\":6"), 8, "\"rows\":7");
  std::stringstream bad_shape(text);
  try
  {
    read_checkpoint(bad_shape);
    FAIL() << "expected a shape error";
  }
  catch (const Error& e)
  {
    EXPECT_EQ(e.code(), ErrorCode::shape);
  }
}
