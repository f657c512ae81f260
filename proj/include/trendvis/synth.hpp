// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "trendvis/core.hpp"
#include "trendvis/errors.hpp"
#include "trendvis/ingest.hpp"
#include "trendvis/visibility.hpp"

namespace trendvis {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

// Deterministic per-topic random stream. mt19937_64 output is fixed by the
// standard, and every transform below is spelled out rather than delegated
// to std distributions (whose algorithms are implementation-defined), so the
// same (seed, index) yields the same draws on every platform. Draw order is
// part of the generator's output format.
class SubStream {
 public:
  SubStream(std::uint64_t master_seed, std::uint64_t index)
      : gen_(detail::splitmix64(master_seed + 0x9e3779b97f4a7c15ULL * (index + 1))) {}

  std::uint64_t next() { return gen_(); }

  // Uniform integer in [0, bound); 0 when bound is 0.
  std::uint64_t below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  // Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; first factor uses a (0, 1] uniform so
  // the logarithm stays finite.
  double gaussian() {
    const double u1 = static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793238462643383279502884 * u2);
  }

 private:
  std::mt19937_64 gen_;
};

struct SynthCategory {
  std::string label;
  double weight = 1.0;
  std::optional<double> d_star;

  friend bool operator==(const SynthCategory&, const SynthCategory&) = default;
};

// Generator knobs. The rank walk enters uniformly in
// [entry_rank_min, entry_rank_max], steps uniformly in [-step_max, step_max]
// each minute, reflects off rank 1 and off r_cap + overshoot_band (minutes
// spent beyond r_cap are off the chart and create gaps), and ends on an exit
// coin flip or at max_duration. Reads follow
//   n_reads = max(1, round(c * V(d_star)^b * 10^eps)),  eps ~ N(0, sigma^2).
struct SynthConfig {
  std::uint64_t n_topics = 100;
  std::uint64_t seed = 1;
  int r_cap = kDefaultRankCap;
  int entry_rank_min = 20;
  int entry_rank_max = 50;
  int step_max = 3;
  double exit_prob = 0.02;
  std::int64_t max_duration = 600;
  int overshoot_band = 10;
  std::int64_t start_spread = 1440;
  double read_scale_c = 1000.0;
  double read_exponent_b = 1.0;
  double read_d_star = 1.0;
  double read_sigma = 0.0;
  std::vector<SynthCategory> categories;

  friend bool operator==(const SynthConfig&, const SynthConfig&) = default;

  void validate() const {
    const auto bad = [](const std::string& what) -> Error {
      return Error(errc::invalid_config, what);
    };
    if (n_topics < 1) throw bad("n_topics must be >= 1");
    if (r_cap < 1) throw bad("r_cap must be >= 1");
    if (entry_rank_min < 1 || entry_rank_max < entry_rank_min || entry_rank_max > r_cap)
      throw bad("entry ranks must satisfy 1 <= entry_rank_min <= entry_rank_max <= r_cap");
    if (step_max < 0) throw bad("step_max must be >= 0");
    if (!(exit_prob >= 0.0 && exit_prob <= 1.0)) throw bad("exit_prob must be in [0, 1]");
    if (max_duration < 1) throw bad("max_duration must be >= 1");
    if (overshoot_band < 0) throw bad("overshoot_band must be >= 0");
    if (start_spread < 0) throw bad("start_spread must be >= 0");
    if (!(read_scale_c > 0.0) || !std::isfinite(read_scale_c)) throw bad("read_scale_c must be positive");
    if (!(read_exponent_b > 0.0) || !std::isfinite(read_exponent_b))
      throw bad("read_exponent_b must be positive");
    if (!(read_d_star >= 0.0) || !std::isfinite(read_d_star)) throw bad("read_d_star must be >= 0");
    if (!(read_sigma >= 0.0) || !std::isfinite(read_sigma)) throw bad("read_sigma must be >= 0");
    for (const SynthCategory& c : categories) {
      if (c.label.empty()) throw bad("category label must not be empty");
      if (!(c.weight > 0.0) || !std::isfinite(c.weight)) throw bad("category weight must be positive");
      if (c.d_star && (!(*c.d_star >= 0.0) || !std::isfinite(*c.d_star)))
        throw bad("category d_star must be >= 0");
      for (const SynthCategory& other : categories)
        if (&other != &c && other.label == c.label)
          throw bad("duplicate category label '" + c.label + "'");
    }
  }
};

namespace detail {

// Exact reflection of w into [1, band] (period 2*(band-1)).
inline std::int64_t reflect_rank(std::int64_t w, std::int64_t band) {
  if (band <= 1) return 1;
  const std::int64_t span = 2 * (band - 1);
  std::int64_t x = (w - 1) % span;
  if (x < 0) x += span;
  return (x < band - 1) ? x + 1 : 2 * band - 1 - x;
}

}  // namespace detail

// Builds a dataset from the config, deterministically in the seed: topic i
// consumes only its own substream, so results do not depend on evaluation
// order. Every topic records at least its entry minute, keeping all
// synthetic topics regressable.
inline Dataset generate_dataset(const SynthConfig& cfg) {
  cfg.validate();
  Dataset ds;
  ds.r_cap = cfg.r_cap;

  double total_weight = 0.0;
  for (const SynthCategory& c : cfg.categories) total_weight += c.weight;
  const std::int64_t band = static_cast<std::int64_t>(cfg.r_cap) + cfg.overshoot_band;

  for (std::uint64_t i = 0; i < cfg.n_topics; ++i) {
    SubStream rng(cfg.seed, i);
    char buf[32];
    std::snprintf(buf, sizeof buf, "t%06llu", static_cast<unsigned long long>(i));
    const std::string topic = buf;

    std::string category = "unknown";
    double d_star = cfg.read_d_star;
    if (!cfg.categories.empty()) {
      double u = rng.unit() * total_weight;
      for (const SynthCategory& c : cfg.categories) {
        if (u < c.weight || &c == &cfg.categories.back()) {
          category = c.label;
          if (c.d_star) d_star = *c.d_star;
          break;
        }
        u -= c.weight;
      }
    }

    const std::int64_t start =
        static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(cfg.start_spread) + 1));
    std::int64_t w = cfg.entry_rank_min +
                     static_cast<std::int64_t>(rng.below(
                         static_cast<std::uint64_t>(cfg.entry_rank_max - cfg.entry_rank_min) + 1));

    Trajectory traj(topic, cfg.r_cap);
    for (std::int64_t minute = 0;;) {
      if (w <= cfg.r_cap) traj.append({start + minute, static_cast<int>(w)});
      ++minute;
      if (minute >= cfg.max_duration) break;
      if (rng.unit() < cfg.exit_prob) break;
      const std::int64_t step =
          static_cast<std::int64_t>(rng.below(2 * static_cast<std::uint64_t>(cfg.step_max) + 1)) -
          cfg.step_max;
      w = detail::reflect_rank(w + step, band);
    }

    const double v = visibility(traj, d_star);
    const double vb = (cfg.read_exponent_b == 1.0) ? v : std::pow(v, cfg.read_exponent_b);
    const double noise = std::pow(10.0, cfg.read_sigma * rng.gaussian());
    const double raw = std::min(cfg.read_scale_c * vb * noise, 9.0e18);
    const std::uint64_t reads =
        static_cast<std::uint64_t>(std::max<long long>(1, std::llround(raw)));

    ds.meta.emplace(topic, TopicMeta{topic, category, reads});
    ds.trajectories.emplace(topic, std::move(traj));
  }
  return ds;
}

// --- flat key=value config text ---

// Lines are `key = value`; '#' starts a comment; categories repeat as
// `category = <label> <weight> [d_star]`.
inline SynthConfig parse_synth_config(std::istream& in) {
  SynthConfig cfg;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string_view stripped = detail::trim(raw);
    if (stripped.empty()) continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string_view::npos)
      throw Error(errc::invalid_config,
                  "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(detail::trim(stripped.substr(0, eq)));
    const std::string value(detail::trim(stripped.substr(eq + 1)));
    const auto bad = [&](const std::string& what) -> Error {
      return Error(errc::invalid_config, "line " + std::to_string(line_no) + ": " + what);
    };
    const auto as_f64 = [&]() {
      try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
      } catch (const std::exception&) {
        throw bad("bad number '" + value + "' for " + key);
      }
    };
    const auto as_u64 = [&]() {
      std::uint64_t v = 0;
      if (!detail::parse_u64(value, v)) throw bad("bad integer '" + value + "' for " + key);
      return v;
    };
    const auto as_i64 = [&]() {
      std::int64_t v = 0;
      if (!detail::parse_i64(value, v)) throw bad("bad integer '" + value + "' for " + key);
      return v;
    };
    const auto as_int = [&]() {
      int v = 0;
      if (!detail::parse_int(value, v)) throw bad("bad integer '" + value + "' for " + key);
      return v;
    };

    if (key == "n_topics") cfg.n_topics = as_u64();
    else if (key == "seed") cfg.seed = as_u64();
    else if (key == "r_cap") cfg.r_cap = as_int();
    else if (key == "entry_rank_min") cfg.entry_rank_min = as_int();
    else if (key == "entry_rank_max") cfg.entry_rank_max = as_int();
    else if (key == "step_max") cfg.step_max = as_int();
    else if (key == "exit_prob") cfg.exit_prob = as_f64();
    else if (key == "max_duration") cfg.max_duration = as_i64();
    else if (key == "overshoot_band") cfg.overshoot_band = as_int();
    else if (key == "start_spread") cfg.start_spread = as_i64();
    else if (key == "read_scale_c") cfg.read_scale_c = as_f64();
    else if (key == "read_exponent_b") cfg.read_exponent_b = as_f64();
    else if (key == "read_d_star") cfg.read_d_star = as_f64();
    else if (key == "read_sigma") cfg.read_sigma = as_f64();
    else if (key == "category") {
      std::vector<std::string> tokens;
      std::string tok;
      for (char ch : value) {
        if (ch == ' ' || ch == '\t') {
          if (!tok.empty()) tokens.push_back(std::exchange(tok, {}));
        } else {
          tok += ch;
        }
      }
      if (!tok.empty()) tokens.push_back(tok);
      if (tokens.size() < 2 || tokens.size() > 3)
        throw bad("category needs '<label> <weight> [d_star]'");
      SynthCategory cat;
      cat.label = tokens[0];
      try {
        std::size_t used = 0;
        cat.weight = std::stod(tokens[1], &used);
        if (used != tokens[1].size()) throw std::invalid_argument(tokens[1]);
        if (tokens.size() == 3) {
          cat.d_star = std::stod(tokens[2], &used);
          if (used != tokens[2].size()) throw std::invalid_argument(tokens[2]);
        }
      } catch (const std::exception&) {
        throw bad("bad category numbers");
      }
      cfg.categories.push_back(std::move(cat));
    } else {
      throw bad("unknown key '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

inline void serialize_synth_config(std::ostream& out, const SynthConfig& cfg) {
  char num[64];
  const auto f64 = [&](double v) {
    std::snprintf(num, sizeof num, "%.17g", v);
    return std::string(num);
  };
  out << "n_topics = " << cfg.n_topics << '\n'
      << "seed = " << cfg.seed << '\n'
      << "r_cap = " << cfg.r_cap << '\n'
      << "entry_rank_min = " << cfg.entry_rank_min << '\n'
      << "entry_rank_max = " << cfg.entry_rank_max << '\n'
      << "step_max = " << cfg.step_max << '\n'
      << "exit_prob = " << f64(cfg.exit_prob) << '\n'
      << "max_duration = " << cfg.max_duration << '\n'
      << "overshoot_band = " << cfg.overshoot_band << '\n'
      << "start_spread = " << cfg.start_spread << '\n'
      << "read_scale_c = " << f64(cfg.read_scale_c) << '\n'
      << "read_exponent_b = " << f64(cfg.read_exponent_b) << '\n'
      << "read_d_star = " << f64(cfg.read_d_star) << '\n'
      << "read_sigma = " << f64(cfg.read_sigma) << '\n';
  for (const SynthCategory& c : cfg.categories) {
    out << "category = " << c.label << ' ' << f64(c.weight);
    if (c.d_star) out << ' ' << f64(*c.d_star);
    out << '\n';
  }
}

}  // namespace trendvis
