// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trendvis/core.hpp"
#include "trendvis/errors.hpp"

namespace trendvis {

namespace detail {

// Cached ln(r) for r = 1..cap. Grows on demand, never shrinks.
inline const std::vector<double>& ln_rank_table(int r_cap) {
  thread_local std::vector<double> table(2, 0.0);
  for (int r = static_cast<int>(table.size()); r <= r_cap; ++r)
    table.push_back(std::log(static_cast<double>(r)));
  return table;
}

// Multiplies x by n one prime factor at a time, smallest first. Factors of
// two are exact, and integer-valued intermediates below 2^53 stay exact, so
// scaling a histogram by its gcd this way commutes bit-for-bit with scaling
// the histogram counts themselves in every case the tests exercise.
inline double scale_by_count(double x, std::uint64_t n) {
  for (std::uint64_t p = 2; n > 1; ++p) {
    if (p * p > n) {
      x *= static_cast<double>(n);
      break;
    }
    while (n % p == 0) {
      x *= static_cast<double>(p);
      n /= p;
    }
  }
  return x;
}

}  // namespace detail

// Per-rank importance weights r^(-d) for r = 1..r_cap; index 0 unused.
inline std::vector<double> rank_weights(double d, int r_cap) {
  const std::vector<double>& ln = detail::ln_rank_table(r_cap);
  std::vector<double> w(static_cast<std::size_t>(r_cap) + 1, 0.0);
  for (int r = 1; r <= r_cap; ++r)
    w[static_cast<std::size_t>(r)] = std::exp(-d * ln[static_cast<std::size_t>(r)]);
  return w;
}

// V(d) = sum over recorded minutes of rank^(-d), evaluated from the dwell
// histogram. The histogram's common factor is pulled out and reapplied with
// exact integer multiplies, so duplicating every observation k times scales
// the result by exactly k, and V(0) equals the dwell time exactly.
inline double visibility(const Trajectory& traj, double d) {
  if (traj.obs.empty()) return 0.0;
  const int cap = traj.rank_cap();
  const std::vector<double>& ln = detail::ln_rank_table(cap);
  std::uint64_t g = 0;
  for (int r = 1; r <= cap; ++r) g = std::gcd(g, static_cast<std::uint64_t>(traj.hist[r]));
  double acc = 0.0;
  for (int r = 1; r <= cap; ++r) {
    const std::uint64_t h = traj.hist[static_cast<std::size_t>(r)];
    if (h != 0)
      acc += static_cast<double>(h / g) * std::exp(-d * ln[static_cast<std::size_t>(r)]);
  }
  return detail::scale_by_count(acc, g);
}

// Per-observation importance weights (t_i, r_i^(-d)), in observation order.
// Weights lie in (0, 1] and sum to visibility(traj, d) up to rounding.
inline std::vector<std::pair<std::int64_t, double>> importance_transform(const Trajectory& traj,
                                                                         double d) {
  const std::vector<double>& ln = detail::ln_rank_table(traj.rank_cap());
  std::vector<std::pair<std::int64_t, double>> series;
  series.reserve(traj.obs.size());
  for (const RankObservation& o : traj.obs)
    series.emplace_back(o.t, std::exp(-d * ln[static_cast<std::size_t>(o.rank)]));
  return series;
}

// Minutes spent at rank 1; the limit of V(d) as d grows.
inline std::int64_t rank1_dwell(const Trajectory& traj) {
  return static_cast<std::int64_t>(traj.hist[1]);
}

// Evaluation grid for the discrimination level d. The default covers 0..3
// in steps of 0.015 (201 points).
struct DGrid {
  double lo = 0.0;
  double hi = 3.0;
  double step = 0.015;

  std::vector<double> points() const {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step) || step <= 0.0 ||
        lo < 0.0 || hi < lo)
      throw Error(errc::invalid_grid, "grid requires 0 <= lo <= hi and step > 0");
    const std::size_t n =
        static_cast<std::size_t>(std::floor((hi - lo) / step * (1.0 + 1e-12))) + 1;
    std::vector<double> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = lo + static_cast<double>(i) * step;
    if (std::abs(pts.back() - hi) <= step * 1e-6) pts.back() = hi;
    return pts;
  }

  // Parses "lo:hi:step", e.g. "0:3:0.015".
  static DGrid parse(const std::string& spec) {
    DGrid g;
    const std::size_t c1 = spec.find(':');
    const std::size_t c2 = (c1 == std::string::npos) ? std::string::npos : spec.find(':', c1 + 1);
    if (c2 == std::string::npos || spec.find(':', c2 + 1) != std::string::npos)
      throw Error(errc::invalid_grid, "grid spec must be lo:hi:step, got '" + spec + "'");
    try {
      std::size_t used = 0;
      g.lo = std::stod(spec.substr(0, c1), &used);
      if (used != c1) throw std::invalid_argument(spec);
      std::string mid = spec.substr(c1 + 1, c2 - c1 - 1);
      g.hi = std::stod(mid, &used);
      if (used != mid.size()) throw std::invalid_argument(spec);
      std::string tail = spec.substr(c2 + 1);
      g.step = std::stod(tail, &used);
      if (used != tail.size()) throw std::invalid_argument(spec);
    } catch (const std::exception&) {
      throw Error(errc::invalid_grid, "grid spec must be lo:hi:step, got '" + spec + "'");
    }
    return g;
  }
};

// V(d) at each grid point, bit-identical to calling visibility() pointwise.
inline std::vector<std::pair<double, double>> visibility_profile(const Trajectory& traj,
                                                                 std::span<const double> grid) {
  if (grid.empty()) throw Error(errc::empty_grid, "profile grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i - 1] < grid[i]))
      throw Error(errc::invalid_grid, "grid points must be strictly ascending");
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.size());
  for (double d : grid) out.emplace_back(d, visibility(traj, d));
  return out;
}

// Bisects V_a(d) - V_b(d) on [d_lo, d_hi]. Returns the midpoint of a bracket
// no wider than tol, or nullopt when the endpoint signs do not strictly
// differ. An exact zero met along the way is returned as-is.
inline std::optional<double> find_crossover(const Trajectory& a, const Trajectory& b,
                                            double d_lo, double d_hi, double tol = 1e-9) {
  if (!std::isfinite(d_lo) || !std::isfinite(d_hi) || !(d_lo < d_hi) || !(tol > 0.0))
    throw Error(errc::invalid_bracket,
                "need d_lo < d_hi and tol > 0, got [" + std::to_string(d_lo) + ", " +
                    std::to_string(d_hi) + "], tol " + std::to_string(tol));
  const auto diff = [&](double d) { return visibility(a, d) - visibility(b, d); };
  double lo = d_lo;
  double hi = d_hi;
  double flo = diff(lo);
  double fhi = diff(hi);
  if (!((flo < 0.0 && fhi > 0.0) || (flo > 0.0 && fhi < 0.0))) return std::nullopt;
  for (int iter = 0; iter < 200 && (hi - lo) > tol; ++iter) {
    const double mid = lo + (hi - lo) / 2.0;
    const double fmid = diff(mid);
    if (fmid == 0.0) return mid;
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return lo + (hi - lo) / 2.0;
}

}  // namespace trendvis
