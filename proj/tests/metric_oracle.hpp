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

#ifndef NAVPRED_TESTS_METRIC_ORACLE_HPP
#define NAVPRED_TESTS_METRIC_ORACLE_HPP

#include <cmath>
#include <vector>

#include "navpred/eval.hpp"

namespace navpred::test_support
{

/// Straightforward re-implementation of the metric definitions.
struct OracleMetrics
{
  double min_ade = 0.0;
  double min_fde = 0.0;
  bool miss = false;
};

inline OracleMetrics oracle_metrics(const model::PredictionSet& pred, const eval::Future& gt, int k)
{
  const int modes = static_cast<int>(pred.trajectories.size());
  // Select the k modes with the highest confidence, lower index first on ties.
  std::vector<bool> chosen(modes, false);
  for (int round = 0; round < k; ++round)
  {
    int pick = -1;
    for (int m = 0; m < modes; ++m)
    {
      if (!chosen[m] && (pick < 0 || pred.confidences[m] > pred.confidences[pick]))
      {
        pick = m;
      }
    }
    chosen[pick] = true;
  }
  int best = -1;
  double best_fde = 0.0;
  for (int m = 0; m < modes; ++m)
  {
    if (!chosen[m])
    {
      continue;
    }
    const auto& end = pred.trajectories[m][scenario::future_steps - 1];
    const auto& target = gt[scenario::future_steps - 1];
    const double fde = std::hypot(end.x - target.x, end.y - target.y);
    if (best < 0 || fde < best_fde)
    {
      best = m;
      best_fde = fde;
    }
  }
  double ade = 0.0;
  for (int t = 0; t < scenario::future_steps; ++t)
  {
    ade += std::hypot(pred.trajectories[best][t].x - gt[t].x, pred.trajectories[best][t].y - gt[t].y);
  }
  return {ade / scenario::future_steps, best_fde, best_fde > 2.0};
}

}  // namespace navpred::test_support

#endif  // NAVPRED_TESTS_METRIC_ORACLE_HPP
