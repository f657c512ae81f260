// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "trendvis/errors.hpp"

namespace trendvis {

inline constexpr int kDefaultRankCap = 50;

// Topic ids are opaque tokens, normalized by stripping edge whitespace.
inline std::string normalize_topic(std::string_view raw) {
  const std::size_t begin = raw.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const std::size_t end = raw.find_last_not_of(" \t\r\n");
  return std::string(raw.substr(begin, end - begin + 1));
}

// One chart appearance: the topic held `rank` during minute `t` (minutes
// since the dataset epoch).
struct RankObservation {
  std::int64_t t = 0;
  int rank = 0;

  friend bool operator==(const RankObservation&, const RankObservation&) = default;
};

enum class DuplicatePolicy { strict, lenient };
enum class AppendOutcome { inserted, replaced, ignored };

// Chart history of a single topic. Observations stay sorted by time with
// strictly increasing timestamps, and `hist[r]` counts minutes spent at
// rank r. Both views are maintained on every append.
class Trajectory {
 public:
  std::string topic;
  std::vector<RankObservation> obs;
  std::vector<std::uint32_t> hist;

  explicit Trajectory(std::string topic_id = "", int rank_cap = kDefaultRankCap)
      : topic(std::move(topic_id)), hist(static_cast<std::size_t>(rank_cap) + 1, 0) {
    if (rank_cap < 1) throw Error(errc::rank_out_of_range, "rank cap must be >= 1");
  }

  int rank_cap() const { return static_cast<int>(hist.size()) - 1; }

  // Minutes on the chart; equals the observation count.
  std::int64_t dwell_time() const { return static_cast<std::int64_t>(obs.size()); }

  AppendOutcome append(RankObservation o, DuplicatePolicy policy = DuplicatePolicy::strict) {
    if (o.t < 0)
      throw Error(errc::negative_time,
                  "topic '" + topic + "': t = " + std::to_string(o.t));
    if (o.rank < 1 || o.rank > rank_cap())
      throw Error(errc::rank_out_of_range,
                  "topic '" + topic + "': rank " + std::to_string(o.rank) +
                      " outside [1, " + std::to_string(rank_cap()) + "]");
    auto it = std::lower_bound(obs.begin(), obs.end(), o.t,
                               [](const RankObservation& a, std::int64_t t) { return a.t < t; });
    if (it != obs.end() && it->t == o.t) {
      if (policy == DuplicatePolicy::strict)
        throw Error(errc::duplicate_timestamp,
                    "topic '" + topic + "': minute " + std::to_string(o.t) +
                        " recorded twice");
      if (o.rank >= it->rank) return AppendOutcome::ignored;
      --hist[static_cast<std::size_t>(it->rank)];
      ++hist[static_cast<std::size_t>(o.rank)];
      it->rank = o.rank;
      return AppendOutcome::replaced;
    }
    obs.insert(it, o);
    ++hist[static_cast<std::size_t>(o.rank)];
    return AppendOutcome::inserted;
  }

  // True when the sorted view and the histogram describe the same multiset.
  bool consistent() const {
    std::vector<std::uint32_t> recount(hist.size(), 0);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const RankObservation& o = obs[i];
      if (o.t < 0 || o.rank < 1 || o.rank > rank_cap()) return false;
      if (i > 0 && obs[i - 1].t >= o.t) return false;
      ++recount[static_cast<std::size_t>(o.rank)];
    }
    return recount == hist;
  }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct TopicMeta {
  std::string topic;
  std::string category = "unknown";
  std::uint64_t n_reads = 0;

  friend bool operator==(const TopicMeta&, const TopicMeta&) = default;
};

// A bundle of trajectories plus optional per-topic metadata, keyed by topic
// id. std::map keeps iteration (and therefore every export) deterministic.
struct Dataset {
  std::string epoch_iso;
  int r_cap = kDefaultRankCap;
  std::map<std::string, Trajectory> trajectories;
  std::map<std::string, TopicMeta> meta;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Non-throwing preflight: reports corrupt trajectories (fatal) and unjoined
// or unusable rows (non-fatal) in deterministic key order.
inline std::vector<Diagnostic> validate_dataset(const Dataset& ds) {
  std::vector<Diagnostic> out;
  for (const auto& [topic, traj] : ds.trajectories) {
    if (!traj.consistent())
      out.push_back({errc::corrupt_trajectory, topic,
                     "observations and histogram disagree", true});
    if (!ds.meta.contains(topic))
      out.push_back({errc::no_meta, topic, "trajectory has no metadata row", false});
  }
  for (const auto& [topic, m] : ds.meta) {
    if (!ds.trajectories.contains(topic))
      out.push_back({errc::no_trajectory, topic, "metadata row has no trajectory", false});
    else if (m.n_reads == 0)
      out.push_back({errc::zero_reads, topic, "topic has zero reads", false});
  }
  return out;
}

}  // namespace trendvis
