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

#include "navpred/distill.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <thread>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include <fmt/format.h>

#include "navpred/error.hpp"
#include "navpred/random.hpp"

namespace navpred::distill
{
namespace
{

model::LossGradient scene_gradient(const scenario::Scene& scene, std::size_t index, std::span<const geo::LocalPoint> view,
                                   const ModelParams& params, const Teacher* teacher)
{
  if (teacher == nullptr || teacher->config.beta == 0.0)
  {
    // With beta = 0 the distillation term contributes nothing; skipping it keeps
    // the update bit-identical to an unguided run.
    auto g = model::gradients(scene, view, params);
    if (teacher != nullptr)
    {
      g.loss = teacher->config.alpha * g.model.total();
      if (teacher->config.alpha != 1.0)
      {
        g.gradient.flat() *= teacher->config.alpha;
      }
    }
    return g;
  }
  model::EmbeddingTarget target;
  target.teacher = teacher->embeddings != nullptr ? (*teacher->embeddings)[index]
                                                  : model::forward(scene, (*teacher->views)[index], *teacher->params).xi;
  target.alpha = teacher->config.alpha;
  target.beta = teacher->config.beta;
  return model::gradients(scene, view, params, &target);
}

// Per-scene buffers are a few hundred kB; keep them on the heap instead of
// fresh mmap regions so training does not spend its time in page faults.
void keep_buffers_on_heap()
{
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 64 << 20);
    mallopt(M_TRIM_THRESHOLD, 256 << 20);
  });
#endif
}

}  // namespace

void EmbeddingSpec::validate() const
{
  if (d_t < 1 || d < d_t)
  {
    throw Error(ErrorCode::spec_violation, fmt::format("embedding widths must satisfy d >= d_t >= 1 (d={}, d_t={})", d, d_t));
  }
}

std::string_view to_string(Variant variant)
{
  return variant == Variant::matched ? "matched" : "shared";
}

Variant parse_variant(std::string_view text)
{
  if (text == "matched")
  {
    return Variant::matched;
  }
  if (text == "shared")
  {
    return Variant::shared;
  }
  throw Error(ErrorCode::config, fmt::format("unknown distillation variant '{}' (expected matched or shared)", text));
}

int student_width(Variant variant, int d_t)
{
  if (variant == Variant::matched)
  {
    return d_t;
  }
  return static_cast<int>(std::lround(1.5 * d_t));
}

void DistillConfig::validate() const
{
  if (!std::isfinite(alpha) || !std::isfinite(beta) || alpha < 0.0 || beta < 0.0)
  {
    throw Error(ErrorCode::config, fmt::format("loss weights must be finite and non-negative (alpha={}, beta={})", alpha, beta));
  }
}

double distill_loss(const Eigen::VectorXd& teacher, const Eigen::VectorXd& student)
{
  EmbeddingSpec{static_cast<int>(teacher.size()), static_cast<int>(student.size())}.validate();
  const auto d_t = teacher.size();
  return (teacher - student.head(d_t)).squaredNorm() / static_cast<double>(d_t);
}

Eigen::VectorXd distill_gradient(const Eigen::VectorXd& teacher, const Eigen::VectorXd& student)
{
  EmbeddingSpec{static_cast<int>(teacher.size()), static_cast<int>(student.size())}.validate();
  const auto d_t = teacher.size();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(student.size());
  g.head(d_t) = 2.0 * (student.head(d_t) - teacher) / static_cast<double>(d_t);
  return g;
}

double total_loss(double model_loss, double distill_loss, const DistillConfig& config)
{
  return config.alpha * model_loss + config.beta * distill_loss;
}

MapViews map_views(std::span<const scenario::Scene> scenes, const LocalNavGraph* graph, const ModelConfig& config)
{
  MapViews views(scenes.size());
  if (config.source == model::MapSource::none || graph == nullptr)
  {
    return views;
  }
  for (std::size_t i = 0; i < scenes.size(); ++i)
  {
    views[i] = model::map_view(*graph, scenes[i].target_track().back(), config.map_radius, config.map_step);
  }
  return views;
}

void TrainConfig::validate() const
{
  if (epochs < 0 || batch_size < 1 || !(learning_rate > 0.0) || momentum < 0.0 || momentum >= 1.0 ||
      clip_norm < 0.0 || threads < 1)
  {
    throw Error(ErrorCode::config,
                fmt::format("invalid training config (epochs={}, batch={}, lr={}, momentum={}, clip={}, threads={})",
                            epochs, batch_size, learning_rate, momentum, clip_norm, threads));
  }
}

TrainResult train(std::span<const scenario::Scene> scenes, const MapViews& views, const ModelConfig& model_config,
                  const TrainConfig& config, const Teacher* teacher, const EpochCallback& on_epoch)
{
  config.validate();
  keep_buffers_on_heap();
  if (views.size() != scenes.size())
  {
    throw Error(ErrorCode::shape, "map views do not match the scene count");
  }
  if (teacher != nullptr)
  {
    teacher->config.validate();
    if (teacher->params == nullptr || teacher->views == nullptr || teacher->views->size() != scenes.size() ||
        (teacher->embeddings != nullptr && teacher->embeddings->size() != scenes.size()))
    {
      throw Error(ErrorCode::config, "teacher is missing parameters or map views");
    }
    EmbeddingSpec{teacher->params->config().d, model_config.d}.validate();
  }
  if (scenes.empty())
  {
    throw Error(ErrorCode::empty_split, "no training scenes");
  }

  TrainResult result{model::init_params(model_config, config.seed), {}};
  ModelParams& params = result.params;
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params.size()));
  std::vector<std::size_t> order(scenes.size());
  std::vector<model::LossGradient> slots(static_cast<std::size_t>(config.batch_size));

  for (int epoch = 0; epoch < config.epochs; ++epoch)
  {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(Rng::derive(config.seed, static_cast<std::uint64_t>(epoch)));
    for (std::size_t i = order.size(); i > 1; --i)
    {
      std::swap(order[i - 1], order[rng.index(i)]);
    }

    EpochLog log{epoch, 0.0, 0.0, 0.0};
    for (std::size_t start = 0; start < order.size(); start += config.batch_size)
    {
      const std::size_t count = std::min<std::size_t>(config.batch_size, order.size() - start);
      auto run = [&](std::size_t j) {
        const std::size_t s = order[start + j];
        slots[j] = scene_gradient(scenes[s], s, views[s], params, teacher);
      };
      const int workers = std::min<int>(config.threads, static_cast<int>(count));
      if (workers <= 1)
      {
        for (std::size_t j = 0; j < count; ++j)
        {
          run(j);
        }
      }
      else
      {
        std::vector<std::jthread> pool;
        std::vector<std::exception_ptr> failures(workers);
        for (int w = 0; w < workers; ++w)
        {
          pool.emplace_back([&, w] {
            try
            {
              for (std::size_t j = w; j < count; j += workers)
              {
                run(j);
              }
            }
            catch (...)
            {
              failures[w] = std::current_exception();
            }
          });
        }
        pool.clear();
        for (const auto& f : failures)
        {
          if (f)
          {
            std::rethrow_exception(f);
          }
        }
      }

      Eigen::VectorXd grad = slots[0].gradient.flat();
      log.loss += slots[0].loss;
      log.model_loss += slots[0].model.total();
      log.distill_loss += slots[0].distill;
      for (std::size_t j = 1; j < count; ++j)
      {
        grad += slots[j].gradient.flat();
        log.loss += slots[j].loss;
        log.model_loss += slots[j].model.total();
        log.distill_loss += slots[j].distill;
      }
      grad /= static_cast<double>(count);
      if (config.clip_norm > 0.0)
      {
        const double norm = grad.norm();
        if (norm > config.clip_norm)
        {
          grad *= config.clip_norm / norm;
        }
      }
      velocity = config.momentum * velocity + grad;
      params.flat() -= config.learning_rate * velocity;
      if (!params.flat().allFinite())
      {
        throw Error(ErrorCode::numeric, fmt::format("parameters diverged in epoch {}", epoch));
      }
    }
    const double n = static_cast<double>(scenes.size());
    log.loss /= n;
    log.model_loss /= n;
    log.distill_loss /= n;
    result.log.push_back(log);
    if (on_epoch)
    {
      on_epoch(log);
    }
  }
  return result;
}

TrainResult train_teacher(std::span<const scenario::Scene> scenes, const LocalNavGraph& hd, ModelConfig model_config,
                          const TrainConfig& config, const EpochCallback& on_epoch)
{
  model_config.source = model::MapSource::hd;
  const MapViews views = map_views(scenes, &hd, model_config);
  return train(scenes, views, model_config, config, nullptr, on_epoch);
}

TrainResult train_student(std::span<const scenario::Scene> scenes, const LocalNavGraph& hd, const LocalNavGraph& nav,
                          const ModelParams& teacher, ModelConfig model_config, const DistillConfig& distill_config,
                          const TrainConfig& config, const EpochCallback& on_epoch)
{
  distill_config.validate();
  if (teacher.config().source != model::MapSource::hd)
  {
    throw Error(ErrorCode::config, "the teacher must use the hd map source");
  }
  model_config.source = model::MapSource::nav;
  const int expected = student_width(distill_config.variant, teacher.config().d);
  if (model_config.d != expected)
  {
    throw Error(ErrorCode::config,
                fmt::format("{} variant with a teacher of width {} needs student width {}, got {}",
                            to_string(distill_config.variant), teacher.config().d, expected, model_config.d));
  }
  const MapViews views = map_views(scenes, &nav, model_config);
  const MapViews teacher_views = map_views(scenes, &hd, teacher.config());
  std::vector<Eigen::VectorXd> embeddings;
  if (distill_config.cache_teacher)
  {
    embeddings.reserve(scenes.size());
    for (std::size_t i = 0; i < scenes.size(); ++i)
    {
      embeddings.push_back(model::forward(scenes[i], teacher_views[i], teacher).xi);
    }
  }
  const Teacher t{&teacher, &teacher_views, distill_config, distill_config.cache_teacher ? &embeddings : nullptr};
  return train(scenes, views, model_config, config, &t, on_epoch);
}

}  // namespace navpred::distill
