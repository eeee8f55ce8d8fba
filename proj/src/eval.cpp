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

#include "navpred/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "navpred/error.hpp"

namespace navpred::eval
{
namespace
{

double distance(const LocalPoint& a, const LocalPoint& b)
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

void check_k(const PredictionSet& pred, int k)
{
  if (k < 1 || static_cast<std::size_t>(k) > pred.trajectories.size())
  {
    throw Error(ErrorCode::config, fmt::format("k={} but the prediction has {} modes", k, pred.trajectories.size()));
  }
}

double quantile(std::vector<double> sorted, double q)
{
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - static_cast<double>(lo));
}

double parse_double(std::string_view text, std::size_t line)
{
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
  {
    throw Error(ErrorCode::parse, fmt::format("line {}: bad number '{}'", line, text));
  }
  return v;
}

}  // namespace

std::vector<int> top_modes(const PredictionSet& pred, int k)
{
  check_k(pred, k);
  std::vector<int> order(pred.trajectories.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return pred.confidences[a] > pred.confidences[b]; });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

ModeDistance min_fde(const PredictionSet& pred, const Future& future, int k)
{
  ModeDistance best{INFINITY, -1};
  for (const int m : top_modes(pred, k))
  {
    const double d = distance(pred.trajectories[m].back(), future.back());
    if (d < best.distance)
    {
      best = {d, m};
    }
  }
  return best;
}

double min_ade(const PredictionSet& pred, const Future& future, int k)
{
  const auto& traj = pred.trajectories[min_fde(pred, future, k).mode];
  double sum = 0.0;
  for (std::size_t t = 0; t < future.size(); ++t)
  {
    sum += distance(traj[t], future[t]);
  }
  return sum / static_cast<double>(future.size());
}

double miss_rate(std::span<const double> min_fde_values)
{
  if (min_fde_values.empty())
  {
    throw Error(ErrorCode::empty_split, "miss rate of an empty split");
  }
  std::size_t misses = 0;
  for (const double v : min_fde_values)
  {
    misses += v > miss_radius ? 1 : 0;
  }
  return static_cast<double>(misses) / static_cast<double>(min_fde_values.size());
}

SceneMetrics scene_metrics(std::int64_t scene_id, const PredictionSet& pred, const Future& future)
{
  SceneMetrics m;
  m.scene_id = scene_id;
  m.min_fde_1 = min_fde(pred, future, 1).distance;
  m.min_ade_1 = min_ade(pred, future, 1);
  const int k6 = std::min<int>(6, static_cast<int>(pred.trajectories.size()));
  m.min_fde_6 = min_fde(pred, future, k6).distance;
  m.min_ade_6 = min_ade(pred, future, k6);
  return m;
}

MetricReport aggregate(std::span<const SceneMetrics> scenes)
{
  if (scenes.empty())
  {
    throw Error(ErrorCode::empty_split, "no scenes to evaluate");
  }
  MetricReport r;
  r.scenes = scenes.size();
  std::size_t miss1 = 0;
  std::size_t miss6 = 0;
  for (const auto& s : scenes)
  {
    r.k1.min_ade += s.min_ade_1;
    r.k1.min_fde += s.min_fde_1;
    r.k6.min_ade += s.min_ade_6;
    r.k6.min_fde += s.min_fde_6;
    miss1 += s.min_fde_1 > miss_radius ? 1 : 0;
    miss6 += s.min_fde_6 > miss_radius ? 1 : 0;
  }
  const double n = static_cast<double>(scenes.size());
  r.k1.min_ade /= n;
  r.k1.min_fde /= n;
  r.k6.min_ade /= n;
  r.k6.min_fde /= n;
  r.k1.miss_rate = static_cast<double>(miss1) / n;
  r.k6.miss_rate = static_cast<double>(miss6) / n;
  return r;
}

Evaluation evaluate(const model::ModelParams& params, std::span<const scenario::Scene> scenes,
                    const std::vector<std::vector<LocalPoint>>& views)
{
  if (views.size() != scenes.size())
  {
    throw Error(ErrorCode::shape, "map views do not match the scene count");
  }
  Evaluation e;
  e.per_scene.reserve(scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i)
  {
    const auto pred = model::forward(scenes[i], views[i], params).prediction;
    e.per_scene.push_back(scene_metrics(scenes[i].scene_id, pred, scenes[i].future));
  }
  e.report = aggregate(e.per_scene);
  return e;
}

void write_table(std::ostream& out, const std::vector<std::pair<std::string, MetricReport>>& rows)
{
  std::size_t width = 5;
  for (const auto& [name, _] : rows)
  {
    width = std::max(width, name.size());
  }
  out << fmt::format("{:<{}} | {:>8} {:>8} {:>6} | {:>8} {:>8} {:>6} | {:>6}\n", "", width, "k=1", "", "", "k=6", "",
                     "", "");
  out << fmt::format("{:<{}} | {:>8} {:>8} {:>6} | {:>8} {:>8} {:>6} | {:>6}\n", "model", width, "minADE", "minFDE",
                     "MR", "minADE", "minFDE", "MR", "scenes");
  out << std::string(width, '-') << "-+-" << std::string(24, '-') << "-+-" << std::string(24, '-') << "-+-"
      << std::string(6, '-') << '\n';
  for (const auto& [name, r] : rows)
  {
    out << fmt::format("{:<{}} | {:>8.3f} {:>8.3f} {:>6.3f} | {:>8.3f} {:>8.3f} {:>6.3f} | {:>6}\n", name, width,
                       r.k1.min_ade, r.k1.min_fde, r.k1.miss_rate, r.k6.min_ade, r.k6.min_fde, r.k6.miss_rate,
                       r.scenes);
  }
}

void write_json(std::ostream& out, const MetricReport& report)
{
  nlohmann::ordered_json j;
  j["scenes"] = report.scenes;
  for (const auto& [key, m] : {std::pair{"k1", report.k1}, std::pair{"k6", report.k6}})
  {
    j[key] = {{"minADE", m.min_ade}, {"minFDE", m.min_fde}, {"MR", m.miss_rate}};
  }
  out << j.dump(2) << '\n';
}

void write_scene_csv(std::ostream& out, std::span<const SceneMetrics> scenes)
{
  out << "scene_id,minADE_1,minFDE_1,minADE_6,minFDE_6\n";
  for (const auto& s : scenes)
  {
    out << fmt::format("{},{},{},{},{}\n", s.scene_id, s.min_ade_1, s.min_fde_1, s.min_ade_6, s.min_fde_6);
  }
}

std::vector<SceneMetrics> read_scene_csv(std::istream& in)
{
  std::vector<SceneMetrics> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line))
  {
    ++number;
    if (number == 1 || line.empty())
    {
      continue;
    }
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos; rest.remove_prefix(pos + 1))
    {
      fields.push_back(rest.substr(0, pos));
    }
    fields.push_back(rest);
    if (fields.size() != 5)
    {
      throw Error(ErrorCode::parse, fmt::format("line {}: expected 5 fields, got {}", number, fields.size()));
    }
    SceneMetrics s;
    s.scene_id = static_cast<std::int64_t>(parse_double(fields[0], number));
    s.min_ade_1 = parse_double(fields[1], number);
    s.min_fde_1 = parse_double(fields[2], number);
    s.min_ade_6 = parse_double(fields[3], number);
    s.min_fde_6 = parse_double(fields[4], number);
    out.push_back(s);
  }
  return out;
}

double silverman_bandwidth(std::span<const double> values)
{
  const auto n = values.size();
  if (n < 2)
  {
    return 0.0;
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (const double v : values)
  {
    var += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(var / static_cast<double>(n - 1));
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = (quantile(sorted, 0.75) - quantile(sorted, 0.25)) / 1.34;
  double spread = std::min(sd, iqr);
  if (spread <= 0.0)
  {
    spread = std::max(sd, iqr);
  }
  return 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
}

HistogramReport fde_histogram(std::span<const double> values, double bin_width, std::optional<double> bandwidth,
                              int kde_points)
{
  if (values.empty())
  {
    throw Error(ErrorCode::empty_split, "histogram of an empty split");
  }
  if (!(bin_width > 0.0) || kde_points < 2)
  {
    throw Error(ErrorCode::config, fmt::format("invalid histogram settings (bin width {}, {} KDE points)", bin_width,
                                               kde_points));
  }
  HistogramReport h;
  h.bin_width = bin_width;
  std::vector<double> tail;
  for (const double v : values)
  {
    if (v > miss_radius)
    {
      tail.push_back(v);
    }
  }
  h.count = tail.size();
  if (tail.empty())
  {
    return h;
  }
  h.empty = false;

  const double top = *std::max_element(tail.begin(), tail.end());
  const auto bins = static_cast<std::size_t>(std::max(1.0, std::ceil((top - miss_radius) / bin_width)));
  for (std::size_t i = 0; i <= bins; ++i)
  {
    h.edges.push_back(miss_radius + bin_width * static_cast<double>(i));
  }
  h.counts.assign(bins, 0.0);
  for (const double v : tail)
  {
    // Bins are closed on the right: (edge_i, edge_i+1].
    auto i = static_cast<std::size_t>(std::ceil((v - miss_radius) / bin_width));
    i = std::clamp<std::size_t>(i, 1, bins) - 1;
    h.counts[i] += 1.0;
  }
  for (double& c : h.counts)
  {
    c /= static_cast<double>(tail.size());
  }

  h.bandwidth = bandwidth.value_or(silverman_bandwidth(tail));
  if (!(h.bandwidth > 0.0))
  {
    h.bandwidth = 0.5 * bin_width;
  }
  const double lo = *std::min_element(tail.begin(), tail.end()) - 4.0 * h.bandwidth;
  const double hi = top + 4.0 * h.bandwidth;
  const double norm = 1.0 / (static_cast<double>(tail.size()) * h.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (int i = 0; i < kde_points; ++i)
  {
    const double x = lo + (hi - lo) * i / (kde_points - 1);
    double y = 0.0;
    for (const double v : tail)
    {
      const double z = (x - v) / h.bandwidth;
      y += std::exp(-0.5 * z * z);
    }
    h.kde_x.push_back(x);
    h.kde_y.push_back(y * norm);
  }
  return h;
}

void write_histogram_csv(std::ostream& out, const HistogramReport& hist)
{
  out << "# values above " << miss_radius << " m: " << hist.count << ", KDE bandwidth " << hist.bandwidth << '\n';
  out << "kind,x0,x1,value\n";
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
  {
    out << fmt::format("bin,{},{},{}\n", hist.edges[i], hist.edges[i + 1], hist.counts[i]);
  }
  for (std::size_t i = 0; i < hist.kde_x.size(); ++i)
  {
    out << fmt::format("kde,{},{},{}\n", hist.kde_x[i], hist.kde_x[i], hist.kde_y[i]);
  }
}

void write_histogram_svg(std::ostream& out, const HistogramReport& hist, const std::string& title)
{
  constexpr double width = 640.0;
  constexpr double height = 360.0;
  constexpr double margin = 48.0;
  out << fmt::format(R"(<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">)",
                     width, height)
      << '\n';
  out << fmt::format(R"(<text x="{}" y="20" text-anchor="middle">{}</text>)", width / 2, title) << '\n';
  if (hist.empty)
  {
    out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">no scene above {} m</text>)", width / 2,
                       height / 2, miss_radius)
        << "\n</svg>\n";
    return;
  }
  const double x0 = std::min(hist.edges.front(), hist.kde_x.front());
  const double x1 = std::max(hist.edges.back(), hist.kde_x.back());
  // Bars show probability per bin; the KDE is scaled by the bin width to match.
  double y1 = *std::max_element(hist.counts.begin(), hist.counts.end());
  for (const double y : hist.kde_y)
  {
    y1 = std::max(y1, y * hist.bin_width);
  }
  const auto sx = [&](double x) { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); };
  const auto sy = [&](double y) { return height - margin - y / y1 * (height - 2 * margin); };
  for (std::size_t i = 0; i < hist.counts.size(); ++i)
  {
    out << fmt::format(R"(<rect x="{:.2f}" y="{:.2f}" width="{:.2f}" height="{:.2f}" fill="#9ab" stroke="#567"/>)",
                       sx(hist.edges[i]), sy(hist.counts[i]), sx(hist.edges[i + 1]) - sx(hist.edges[i]),
                       sy(0.0) - sy(hist.counts[i]))
        << '\n';
  }
  out << R"(<polyline fill="none" stroke="#c33" stroke-width="1.5" points=")";
  for (std::size_t i = 0; i < hist.kde_x.size(); ++i)
  {
    out << fmt::format("{}{:.2f},{:.2f}", i == 0 ? "" : " ", sx(hist.kde_x[i]), sy(hist.kde_y[i] * hist.bin_width));
  }
  out << "\"/>\n";
  out << fmt::format(R"(<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/>)", margin, sy(0.0),
                     width - margin)
      << '\n';
  out << fmt::format(R"(<text x="{}" y="{}" text-anchor="middle">minFDE (m), k=6</text>)", width / 2, height - 12)
      << '\n';
  out << fmt::format(R"(<text x="{:.2f}" y="{:.2f}" text-anchor="middle">{:.0f}</text>)", sx(x0), sy(0.0) + 16, x0)
      << '\n';
  out << fmt::format(R"(<text x="{:.2f}" y="{:.2f}" text-anchor="middle">{:.0f}</text>)", sx(x1), sy(0.0) + 16, x1)
      << '\n';
  out << "</svg>\n";
}

}  // namespace navpred::eval
