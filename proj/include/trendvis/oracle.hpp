// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "trendvis/core.hpp"
#include "trendvis/errors.hpp"
#include "trendvis/regression.hpp"

namespace trendvis {

// Cross-check path used only in tests. Visibility comes from naive
// per-observation std::pow sums, the fit from a textbook two-pass least
// squares with r2 = 1 - SS_res/SS_tot, and the argmax scan is written out
// here again; nothing is shared with the histogram fast path.
inline SweepResult oracle_sweep(const Dataset& ds, std::span<const double> grid) {
  if (grid.size() < 2)
    throw Error(errc::empty_grid, "sweep needs at least 2 grid points, got " +
                                      std::to_string(grid.size()));
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i - 1] < grid[i]))
      throw Error(errc::invalid_grid, "grid points must be strictly ascending");

  SweepResult result;
  result.curve.reserve(grid.size());
  for (const double d : grid) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [topic, traj] : ds.trajectories) {
      const auto m = ds.meta.find(topic);
      if (m == ds.meta.end() || m->second.n_reads == 0) continue;
      double v = 0.0;
      for (const RankObservation& o : traj.obs)
        v += std::pow(static_cast<double>(o.rank), -d);
      if (!(v > 0.0)) continue;
      xs.push_back(std::log10(v));
      ys.push_back(std::log10(static_cast<double>(m->second.n_reads)));
    }
    if (xs.size() < 3)
      throw Error(errc::too_few_points, "only " + std::to_string(xs.size()) +
                                            " regressable topics at d = " + std::to_string(d));
    const double n = static_cast<double>(xs.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mean_x += xs[i];
      mean_y += ys[i];
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
      sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
    }
    if (sxx == 0.0)
      throw Error(errc::degenerate_variance, "all points share one visibility value");
    const double slope = sxy / sxx;
    const double intercept = mean_y - slope * mean_x;
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double resid = ys[i] - (intercept + slope * xs[i]);
      ss_res += resid * resid;
      ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
    }
    if (ss_tot == 0.0)
      throw Error(errc::degenerate_variance, "all points share one read count");
    result.curve.push_back({d, 1.0 - ss_res / ss_tot, xs.size()});
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < result.curve.size(); ++i)
    if (result.curve[i].r2 > result.curve[best].r2) best = i;
  result.d_max = result.curve[best].d;
  result.r2_max = result.curve[best].r2;
  result.n = result.curve[best].n;
  if (best == 0)
    result.boundary = Boundary::at_lower_edge;
  else if (best == result.curve.size() - 1)
    result.boundary = Boundary::at_upper_edge;
  else
    result.boundary = Boundary::interior;
  return result;
}

}  // namespace trendvis
