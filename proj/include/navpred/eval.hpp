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

#ifndef NAVPRED_EVAL_HPP
#define NAVPRED_EVAL_HPP

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "navpred/model.hpp"

namespace navpred::eval
{

using geo::LocalPoint;
using model::PredictionSet;
using Future = std::array<LocalPoint, scenario::future_steps>;

/// Endpoint radius for a hit; a distance of exactly this value is a hit.
inline constexpr double miss_radius = 2.0;

struct ModeDistance
{
  double distance = 0.0;
  int mode = 0;
};

/// Modes considered at k: the k most confident (ties to the lower index), in
/// mode order. k = 1 is the single most confident mode.
std::vector<int> top_modes(const PredictionSet& pred, int k);

/// Smallest endpoint distance over the k selected modes (ties to the lower index).
ModeDistance min_fde(const PredictionSet& pred, const Future& future, int k);

/// Mean point distance of the mode selected by min_fde.
double min_ade(const PredictionSet& pred, const Future& future, int k);

/// Fraction of values above miss_radius.
double miss_rate(std::span<const double> min_fde_values);

struct SceneMetrics
{
  std::int64_t scene_id = 0;
  double min_ade_1 = 0.0;
  double min_fde_1 = 0.0;
  double min_ade_6 = 0.0;
  double min_fde_6 = 0.0;
};

SceneMetrics scene_metrics(std::int64_t scene_id, const PredictionSet& pred, const Future& future);

struct KMetrics
{
  double min_ade = 0.0;
  double min_fde = 0.0;
  double miss_rate = 0.0;
};

struct MetricReport
{
  std::size_t scenes = 0;
  KMetrics k1;
  KMetrics k6;
};

/// Means over the scenes, summed in the given order.
MetricReport aggregate(std::span<const SceneMetrics> scenes);

struct Evaluation
{
  MetricReport report;
  std::vector<SceneMetrics> per_scene;
};

Evaluation evaluate(const model::ModelParams& params, std::span<const scenario::Scene> scenes,
                    const std::vector<std::vector<LocalPoint>>& views);

/// Aligned table: one row per model, minADE/minFDE/MR at k=1 then k=6.
void write_table(std::ostream& out, const std::vector<std::pair<std::string, MetricReport>>& rows);
void write_json(std::ostream& out, const MetricReport& report);
void write_scene_csv(std::ostream& out, std::span<const SceneMetrics> scenes);
std::vector<SceneMetrics> read_scene_csv(std::istream& in);

struct HistogramReport
{
  bool empty = true;        // no value above miss_radius
  std::size_t count = 0;    // values above miss_radius
  double bin_width = 0.0;
  std::vector<double> edges;   // bins (edges[i], edges[i+1]]
  std::vector<double> counts;  // normalized, sum to 1
  double bandwidth = 0.0;
  std::vector<double> kde_x;
  std::vector<double> kde_y;
};

/// Silverman's rule: 0.9 * min(sd, IQR / 1.34) * n^(-1/5), using whichever
/// spread is non-zero; 0 when all values coincide.
double silverman_bandwidth(std::span<const double> values);

/// Histogram of the values above miss_radius plus a Gaussian KDE on a uniform
/// grid spanning four bandwidths beyond the data.
HistogramReport fde_histogram(std::span<const double> values, double bin_width,
                              std::optional<double> bandwidth = std::nullopt, int kde_points = 201);

void write_histogram_csv(std::ostream& out, const HistogramReport& hist);
void write_histogram_svg(std::ostream& out, const HistogramReport& hist, const std::string& title);

}  // namespace navpred::eval

#endif  // NAVPRED_EVAL_HPP
