// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trendvis/core.hpp"
#include "trendvis/errors.hpp"
#include "trendvis/visibility.hpp"

namespace trendvis {

struct RegressionPoint {
  std::string topic;
  double v = 0.0;
  std::uint64_t reads = 0;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

enum class Boundary { interior, at_lower_edge, at_upper_edge };

inline const char* boundary_name(Boundary b) {
  switch (b) {
    case Boundary::interior: return "interior";
    case Boundary::at_lower_edge: return "at_lower_edge";
    case Boundary::at_upper_edge: return "at_upper_edge";
  }
  return "interior";
}

struct SweepPoint {
  double d = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

// An edge argmax means the r2 curve kept rising into a grid endpoint, i.e.
// no maximum was found inside the scanned range.
struct SweepResult {
  std::vector<SweepPoint> curve;
  double d_max = 0.0;
  double r2_max = 0.0;
  Boundary boundary = Boundary::interior;
  std::size_t n = 0;
};

struct CategoryReport {
  std::string category;
  double r2_max = 0.0;
  double d_max = 0.0;
  std::size_t n_topics = 0;
  Boundary boundary = Boundary::interior;
};

struct PerCategoryResult {
  std::vector<CategoryReport> reports;
  std::vector<std::pair<std::string, std::size_t>> skipped;
};

struct FilterResult {
  std::vector<RegressionPoint> points;
  std::vector<Diagnostic> excluded;
};

// Least squares of log10(reads) on log10(v). r2 is computed through the
// identity r2 = Sxy^2 / (Sxx * Syy), which equals 1 - SS_res/SS_tot for the
// fitted line and stays in [0, 1] without any clamping.
inline FitResult ols_loglog(std::span<const RegressionPoint> points) {
  if (points.size() < 3)
    throw Error(errc::too_few_points,
                "need at least 3 points, got " + std::to_string(points.size()));
  const std::size_t n = points.size();
  double sum_x = 0.0;
  double sum_y = 0.0;
  for (const RegressionPoint& p : points) {
    sum_x += std::log10(p.v);
    sum_y += std::log10(static_cast<double>(p.reads));
  }
  const double mean_x = sum_x / static_cast<double>(n);
  const double mean_y = sum_y / static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const RegressionPoint& p : points) {
    const double dx = std::log10(p.v) - mean_x;
    const double dy = std::log10(static_cast<double>(p.reads)) - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0)
    throw Error(errc::degenerate_variance, "all points share one visibility value");
  if (syy == 0.0)
    throw Error(errc::degenerate_variance, "all points share one read count");
  FitResult fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  fit.r2 = (sxy * sxy) / (sxx * syy);
  fit.n = n;
  return fit;
}

// Joins trajectories with metadata at one discrimination level. Topics
// missing metadata, with zero reads, or with V(d) = 0 are excluded with a
// reason each; everything else becomes a regression point, in key order.
inline FilterResult filter_regression_points(const Dataset& ds, double d) {
  FilterResult out;
  for (const auto& [topic, traj] : ds.trajectories) {
    const auto m = ds.meta.find(topic);
    if (m == ds.meta.end()) {
      out.excluded.push_back({errc::no_meta, topic, "no metadata row", false});
      continue;
    }
    if (m->second.n_reads == 0) {
      out.excluded.push_back({errc::zero_reads, topic, "log10 of zero reads is undefined", false});
      continue;
    }
    const double v = visibility(traj, d);
    if (!(v > 0.0)) {
      out.excluded.push_back({errc::zero_visibility, topic, "empty trajectory", false});
      continue;
    }
    out.points.push_back({topic, v, m->second.n_reads});
  }
  return out;
}

namespace detail {

// Per-topic state shared across grid points: the gcd-reduced histogram as
// sparse (rank, count/gcd) pairs in ascending rank order. Dotting it with
// rank_weights() and rescaling reproduces visibility() bit-for-bit.
struct JoinedTopic {
  const std::string* topic;
  std::vector<std::pair<int, double>> reduced;
  std::uint64_t gcd = 1;
  std::uint64_t reads = 0;
};

inline std::vector<JoinedTopic> prejoin(const Dataset& ds) {
  std::vector<JoinedTopic> joined;
  for (const auto& [topic, traj] : ds.trajectories) {
    const auto m = ds.meta.find(topic);
    if (m == ds.meta.end() || m->second.n_reads == 0 || traj.obs.empty()) continue;
    JoinedTopic jt;
    jt.topic = &topic;
    jt.reads = m->second.n_reads;
    std::uint64_t g = 0;
    for (int r = 1; r <= traj.rank_cap(); ++r)
      g = std::gcd(g, static_cast<std::uint64_t>(traj.hist[static_cast<std::size_t>(r)]));
    jt.gcd = g;
    for (int r = 1; r <= traj.rank_cap(); ++r) {
      const std::uint64_t h = traj.hist[static_cast<std::size_t>(r)];
      if (h != 0) jt.reduced.emplace_back(r, static_cast<double>(h / g));
    }
    joined.push_back(std::move(jt));
  }
  return joined;
}

inline void check_grid(std::span<const double> grid) {
  if (grid.size() < 2)
    throw Error(errc::empty_grid, "sweep needs at least 2 grid points, got " +
                                      std::to_string(grid.size()));
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i - 1] < grid[i]))
      throw Error(errc::invalid_grid, "grid points must be strictly ascending");
}

inline SweepResult select_argmax(std::vector<SweepPoint> curve) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].r2 > curve[best].r2) best = i;
  SweepResult result;
  result.d_max = curve[best].d;
  result.r2_max = curve[best].r2;
  result.n = curve[best].n;
  if (best == 0)
    result.boundary = Boundary::at_lower_edge;
  else if (best == curve.size() - 1)
    result.boundary = Boundary::at_upper_edge;
  else
    result.boundary = Boundary::interior;
  result.curve = std::move(curve);
  return result;
}

}  // namespace detail

// Scans the grid, fitting reads against visibility at each d, and reports
// the smallest d attaining the maximal r2. Joins once up front; per-point
// results are bit-identical to filter_regression_points + ols_loglog.
inline SweepResult sweep_dmax(const Dataset& ds, std::span<const double> grid) {
  detail::check_grid(grid);
  const std::vector<detail::JoinedTopic> joined = detail::prejoin(ds);
  const int r_cap = ds.r_cap;

  std::vector<SweepPoint> curve;
  curve.reserve(grid.size());
  std::vector<RegressionPoint> points;
  points.reserve(joined.size());
  for (const double d : grid) {
    const std::vector<double> w = rank_weights(d, r_cap);
    points.clear();
    for (const detail::JoinedTopic& jt : joined) {
      double acc = 0.0;
      for (const auto& [rank, count] : jt.reduced) acc += count * w[static_cast<std::size_t>(rank)];
      const double v = detail::scale_by_count(acc, jt.gcd);
      if (!(v > 0.0)) continue;
      points.push_back({*jt.topic, v, jt.reads});
    }
    if (points.size() < 3)
      throw Error(errc::too_few_points, "only " + std::to_string(points.size()) +
                                            " regressable topics at d = " + std::to_string(d));
    const FitResult fit = ols_loglog(points);
    curve.push_back({d, fit.r2, fit.n});
  }
  return detail::select_argmax(std::move(curve));
}

// Optional refinement around the grid argmax: golden-section maximization of
// r2 on [d_lo, d_hi]. Not used by the sweep itself; grid resolution is the
// reported default.
inline std::pair<double, double> refine_dmax(const Dataset& ds, double d_lo, double d_hi,
                                             double tol = 1e-6) {
  if (!(d_lo < d_hi) || !(tol > 0.0))
    throw Error(errc::invalid_bracket, "need d_lo < d_hi and tol > 0");
  const auto r2_at = [&](double d) {
    const FilterResult f = filter_regression_points(ds, d);
    if (f.points.size() < 3)
      throw Error(errc::too_few_points, "only " + std::to_string(f.points.size()) +
                                            " regressable topics at d = " + std::to_string(d));
    return ols_loglog(f.points).r2;
  };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = d_lo;
  double b = d_hi;
  double c = b - inv_phi * (b - a);
  double e = a + inv_phi * (b - a);
  double fc = r2_at(c);
  double fe = r2_at(e);
  while (b - a > tol) {
    if (fc > fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - inv_phi * (b - a);
      fc = r2_at(c);
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + inv_phi * (b - a);
      fe = r2_at(e);
    }
  }
  const double mid = a + (b - a) / 2.0;
  return {mid, r2_at(mid)};
}

// Groups regressable topics by category and sweeps each group of at least
// min_topics members. Reports are sorted by d_max then label; smaller groups
// land in the skipped list (label order).
inline PerCategoryResult per_category_sweep(const Dataset& ds, std::span<const double> grid,
                                            std::size_t min_topics = 30) {
  if (min_topics < 3)
    throw Error(errc::invalid_config, "min_topics must be >= 3, got " +
                                          std::to_string(min_topics));
  detail::check_grid(grid);

  std::map<std::string, std::vector<const std::string*>> groups;
  for (const auto& [topic, traj] : ds.trajectories) {
    const auto m = ds.meta.find(topic);
    if (m == ds.meta.end() || m->second.n_reads == 0 || traj.obs.empty()) continue;
    groups[m->second.category].push_back(&topic);
  }

  PerCategoryResult out;
  for (const auto& [category, members] : groups) {
    if (members.size() < min_topics) {
      out.skipped.emplace_back(category, members.size());
      continue;
    }
    Dataset sub;
    sub.epoch_iso = ds.epoch_iso;
    sub.r_cap = ds.r_cap;
    for (const std::string* topic : members) {
      sub.trajectories.emplace(*topic, ds.trajectories.at(*topic));
      sub.meta.emplace(*topic, ds.meta.at(*topic));
    }
    const SweepResult sweep = sweep_dmax(sub, grid);
    out.reports.push_back({category, sweep.r2_max, sweep.d_max, members.size(), sweep.boundary});
  }
  std::sort(out.reports.begin(), out.reports.end(),
            [](const CategoryReport& a, const CategoryReport& b) {
              if (a.d_max != b.d_max) return a.d_max < b.d_max;
              return a.category < b.category;
            });
  return out;
}

}  // namespace trendvis
