// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "trendvis/core.hpp"
#include "trendvis/errors.hpp"

namespace trendvis {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool parse_i64(std::string_view s, std::int64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !s.empty();
}

inline bool parse_u64(std::string_view s, std::uint64_t& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && !s.empty();
}

inline bool parse_int(std::string_view s, int& out) {
  std::int64_t v = 0;
  if (!parse_i64(s, v) || v < INT32_MIN || v > INT32_MAX) return false;
  out = static_cast<int>(v);
  return true;
}

// --- calendar arithmetic (proleptic Gregorian, UTC) ---

inline std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = static_cast<int>(y - era * 400);
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const int doe = static_cast<int>(z - era * 146097);
  const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const int mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = static_cast<int>(yoe + era * 400) + (m <= 2);
}

inline int days_in_month(int y, int m) {
  static constexpr int lens[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) return 29;
  return lens[m - 1];
}

// Accepts exactly `YYYY-MM-DDTHH:MM:SSZ`; returns seconds since the unix epoch.
inline std::optional<std::int64_t> parse_iso8601_utc(std::string_view s) {
  if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
      s[16] != ':' || s[19] != 'Z')
    return std::nullopt;
  int y = 0, mo = 0, da = 0, h = 0, mi = 0, se = 0;
  if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) ||
      !parse_int(s.substr(8, 2), da) || !parse_int(s.substr(11, 2), h) ||
      !parse_int(s.substr(14, 2), mi) || !parse_int(s.substr(17, 2), se))
    return std::nullopt;
  if (mo < 1 || mo > 12 || da < 1 || da > days_in_month(y, mo) || h > 23 || mi > 59 || se > 59)
    return std::nullopt;
  return days_from_civil(y, mo, da) * 86400 + h * 3600 + mi * 60 + se;
}

inline std::string format_iso8601_utc(std::int64_t unix_seconds) {
  std::int64_t days = unix_seconds / 86400;
  std::int64_t rem = unix_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  int y = 0, m = 0, d = 0;
  civil_from_days(days, y, m, d);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                static_cast<int>(rem / 3600), static_cast<int>(rem % 3600 / 60),
                static_cast<int>(rem % 60));
  return buf;
}

// --- topic token escaping for the snapshot line format ---

inline std::string percent_encode(std::string_view raw) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(raw.size());
  for (unsigned char c : raw) {
    if (c == '%' || c == '\t' || c == '\n' || c == '\r' || c == ':') {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    } else {
      out += static_cast<char>(c);
    }
  }
  return out;
}

inline std::optional<std::string> percent_decode(std::string_view enc) {
  const auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  std::string out;
  out.reserve(enc.size());
  for (std::size_t i = 0; i < enc.size(); ++i) {
    if (enc[i] != '%') {
      out += enc[i];
      continue;
    }
    if (i + 2 >= enc.size()) return std::nullopt;
    const int hi = nibble(enc[i + 1]);
    const int lo = nibble(enc[i + 2]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out += static_cast<char>(hi * 16 + lo);
    i += 2;
  }
  return out;
}

// --- minimal RFC 4180 reading and writing ---

inline std::string csv_field(std::string_view raw) {
  if (raw.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(raw);
  std::string out = "\"";
  for (char c : raw) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}

// Reads one CSV record (possibly spanning lines inside quotes). Returns
// nullopt at end of input. `line` is advanced past consumed newlines.
inline std::optional<std::vector<std::string>> read_csv_record(std::istream& in,
                                                               std::size_t& line) {
  int c = in.get();
  while (c == '\n') {
    ++line;
    c = in.get();
  }
  if (c == std::istream::traits_type::eof()) return std::nullopt;
  std::vector<std::string> fields(1);
  bool quoted = false;
  const std::size_t start_line = line;
  while (true) {
    if (c == std::istream::traits_type::eof()) {
      if (quoted)
        throw Error(errc::malformed_line,
                    "line " + std::to_string(start_line) + ": unterminated quoted field");
      break;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          fields.back() += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        if (ch == '\n') ++line;
        fields.back() += ch;
      }
    } else if (ch == '"') {
      if (!fields.back().empty())
        throw Error(errc::malformed_line,
                    "line " + std::to_string(line) + ": stray quote inside field");
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else if (ch == '\n') {
      ++line;
      break;
    } else if (ch == '\r') {
      if (in.peek() == '\n') {
        in.get();
        ++line;
        break;
      }
      fields.back() += ch;
    } else {
      fields.back() += ch;
    }
    c = in.get();
  }
  return fields;
}

}  // namespace detail

// Parsing knobs shared by every reader. Lenient mode downgrades recoverable
// problems to diagnostics and keeps going; strict mode throws on the first.
struct ParseOptions {
  bool strict = false;
  int r_cap = kDefaultRankCap;
  std::optional<std::string> epoch_iso;
};

// One crawled minute: the chart entries observed at minute t, rank ascending.
struct Snapshot {
  std::int64_t t = 0;
  std::vector<std::pair<int, std::string>> entries;

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

struct SnapshotParse {
  std::vector<Snapshot> snapshots;
  std::vector<Diagnostic> diagnostics;
  std::string epoch_iso;
};

struct TrajectoryParse {
  std::map<std::string, Trajectory> trajectories;
  std::vector<Diagnostic> diagnostics;
};

struct MetaParse {
  std::map<std::string, TopicMeta> meta;
  std::vector<Diagnostic> diagnostics;
};

// Parses the tab-separated snapshot line format:
//   <ISO-8601 UTC>\t<rank>:<topic>\t<rank>:<topic>...
// The first record's timestamp becomes minute 0 unless options.epoch_iso
// overrides it. Blank lines are skipped.
inline SnapshotParse parse_snapshot_stream(std::istream& in, const ParseOptions& options = {}) {
  SnapshotParse result;
  std::optional<std::int64_t> epoch_sec;
  if (options.epoch_iso) {
    epoch_sec = detail::parse_iso8601_utc(*options.epoch_iso);
    if (!epoch_sec)
      throw Error(errc::malformed_line, "epoch override '" + *options.epoch_iso +
                                            "' is not a valid ISO-8601 UTC timestamp");
    result.epoch_iso = *options.epoch_iso;
  }

  std::string raw;
  std::size_t line_no = 0;
  const auto fail = [&](errc code, const std::string& msg) {
    const std::string where = "line " + std::to_string(line_no);
    if (options.strict) throw Error(code, where + ": " + msg);
    result.diagnostics.push_back({code, where, msg, false});
  };

  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;

    std::vector<std::string_view> fields;
    std::string_view rest = raw;
    while (true) {
      const std::size_t tab = rest.find('\t');
      fields.push_back(rest.substr(0, tab));
      if (tab == std::string_view::npos) break;
      rest.remove_prefix(tab + 1);
    }

    const auto ts = detail::parse_iso8601_utc(fields[0]);
    if (!ts) {
      fail(errc::malformed_line, "bad timestamp '" + std::string(fields[0]) + "'");
      continue;
    }
    if (!epoch_sec) {
      epoch_sec = *ts;
      result.epoch_iso = std::string(fields[0]);
    }
    if (*ts < *epoch_sec) {
      fail(errc::malformed_line, "timestamp precedes epoch " + result.epoch_iso);
      continue;
    }

    Snapshot snap;
    snap.t = (*ts - *epoch_sec) / 60;
    std::unordered_set<std::string> seen;
    bool ok = true;
    int prev_rank = 0;
    for (std::size_t i = 1; i < fields.size() && ok; ++i) {
      const std::string_view entry = fields[i];
      const std::size_t colon = entry.find(':');
      int rank = 0;
      if (colon == std::string_view::npos || !detail::parse_int(entry.substr(0, colon), rank)) {
        fail(errc::malformed_line, "bad entry '" + std::string(entry) + "'");
        ok = false;
        break;
      }
      if (rank < 1 || rank > options.r_cap) {
        fail(errc::rank_out_of_range, "rank " + std::to_string(rank) + " outside [1, " +
                                          std::to_string(options.r_cap) + "]");
        ok = false;
        break;
      }
      if (rank <= prev_rank) {
        fail(errc::non_monotonic_ranks, "rank " + std::to_string(rank) + " follows rank " +
                                            std::to_string(prev_rank));
        ok = false;
        break;
      }
      prev_rank = rank;
      const auto decoded = detail::percent_decode(entry.substr(colon + 1));
      std::string topic = decoded ? normalize_topic(*decoded) : std::string();
      if (topic.empty()) {
        fail(errc::malformed_line, "bad topic token '" + std::string(entry.substr(colon + 1)) + "'");
        ok = false;
        break;
      }
      if (!seen.insert(topic).second) {
        fail(errc::duplicate_topic_in_snapshot, "topic '" + topic + "' repeats in one snapshot");
        ok = false;
        break;
      }
      snap.entries.emplace_back(rank, std::move(topic));
    }
    if (ok) result.snapshots.push_back(std::move(snap));
  }
  return result;
}

// Folds time-sorted snapshots into per-topic trajectories. Input order is
// kept for equal minutes (stable sort), and the duplicate-timestamp policy
// of the core model applies per topic.
inline TrajectoryParse snapshots_to_trajectories(std::span<const Snapshot> snaps,
                                                 const ParseOptions& options = {}) {
  std::vector<const Snapshot*> order;
  order.reserve(snaps.size());
  for (const Snapshot& s : snaps) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(),
                   [](const Snapshot* a, const Snapshot* b) { return a->t < b->t; });

  TrajectoryParse result;
  const DuplicatePolicy policy =
      options.strict ? DuplicatePolicy::strict : DuplicatePolicy::lenient;
  for (const Snapshot* snap : order) {
    for (const auto& [rank, topic] : snap->entries) {
      auto [it, inserted] =
          result.trajectories.try_emplace(topic, Trajectory(topic, options.r_cap));
      const AppendOutcome outcome = it->second.append({snap->t, rank}, policy);
      if (outcome != AppendOutcome::inserted)
        result.diagnostics.push_back({errc::duplicate_timestamp, topic,
                                      "minute " + std::to_string(snap->t) +
                                          " seen twice, kept the better rank",
                                      false});
    }
  }
  return result;
}

// Parses `topic_id,t_minute,rank` rows into trajectories. Rows may arrive in
// any order; each topic's trajectory is time-sorted on insert.
inline TrajectoryParse parse_trajectory_csv(std::istream& in, const ParseOptions& options = {}) {
  TrajectoryParse result;
  std::size_t line = 1;
  std::size_t record_line = line;
  auto header = detail::read_csv_record(in, line);
  if (!header || *header != std::vector<std::string>{"topic_id", "t_minute", "rank"})
    throw Error(errc::malformed_line, "line 1: expected header topic_id,t_minute,rank");

  const DuplicatePolicy policy =
      options.strict ? DuplicatePolicy::strict : DuplicatePolicy::lenient;
  const auto fail = [&](errc code, const std::string& msg) {
    const std::string where = "line " + std::to_string(record_line);
    if (options.strict) throw Error(code, where + ": " + msg);
    result.diagnostics.push_back({code, where, msg, false});
  };

  while (true) {
    record_line = line;
    auto rec = detail::read_csv_record(in, line);
    if (!rec) break;
    if (rec->size() == 1 && (*rec)[0].empty()) continue;
    if (rec->size() != 3) {
      fail(errc::malformed_line, "expected 3 fields, got " + std::to_string(rec->size()));
      continue;
    }
    const std::string topic = normalize_topic((*rec)[0]);
    std::int64_t t = 0;
    int rank = 0;
    if (topic.empty() || !detail::parse_i64((*rec)[1], t) || !detail::parse_int((*rec)[2], rank)) {
      fail(errc::malformed_line, "bad row for topic '" + topic + "'");
      continue;
    }
    if (t < 0) {
      fail(errc::negative_time, "t = " + std::to_string(t));
      continue;
    }
    if (rank < 1 || rank > options.r_cap) {
      fail(errc::rank_out_of_range,
           "rank " + std::to_string(rank) + " outside [1, " + std::to_string(options.r_cap) + "]");
      continue;
    }
    auto [it, inserted] = result.trajectories.try_emplace(topic, Trajectory(topic, options.r_cap));
    if (policy == DuplicatePolicy::strict) {
      try {
        it->second.append({t, rank}, policy);
      } catch (const Error& e) {
        throw Error(e.code(), "line " + std::to_string(record_line) + ": " + e.message());
      }
    } else {
      const AppendOutcome outcome = it->second.append({t, rank}, policy);
      if (outcome != AppendOutcome::inserted)
        result.diagnostics.push_back({errc::duplicate_timestamp,
                                      "line " + std::to_string(record_line),
                                      "duplicate minute " + std::to_string(t) + " for topic '" +
                                          topic + "', kept the better rank",
                                      false});
    }
  }
  return result;
}

// Parses `topic_id,category,n_reads` rows. Duplicate topics error in strict
// mode and last-wins in lenient mode. An empty category becomes "unknown".
inline MetaParse parse_metadata_csv(std::istream& in, const ParseOptions& options = {}) {
  MetaParse result;
  std::size_t line = 1;
  std::size_t record_line = line;
  auto header = detail::read_csv_record(in, line);
  if (!header || *header != std::vector<std::string>{"topic_id", "category", "n_reads"})
    throw Error(errc::malformed_line, "line 1: expected header topic_id,category,n_reads");

  const auto fail = [&](errc code, const std::string& msg) {
    const std::string where = "line " + std::to_string(record_line);
    if (options.strict) throw Error(code, where + ": " + msg);
    result.diagnostics.push_back({code, where, msg, false});
  };

  while (true) {
    record_line = line;
    auto rec = detail::read_csv_record(in, line);
    if (!rec) break;
    if (rec->size() == 1 && (*rec)[0].empty()) continue;
    if (rec->size() != 3) {
      fail(errc::malformed_line, "expected 3 fields, got " + std::to_string(rec->size()));
      continue;
    }
    const std::string topic = normalize_topic((*rec)[0]);
    if (topic.empty()) {
      fail(errc::malformed_line, "empty topic_id");
      continue;
    }
    std::int64_t reads = 0;
    if (!detail::parse_i64((*rec)[2], reads)) {
      fail(errc::malformed_line, "bad n_reads '" + (*rec)[2] + "'");
      continue;
    }
    if (reads < 0) {
      fail(errc::negative_reads, "n_reads = " + std::to_string(reads));
      continue;
    }
    TopicMeta m;
    m.topic = topic;
    const std::string category = normalize_topic((*rec)[1]);
    m.category = category.empty() ? "unknown" : category;
    m.n_reads = static_cast<std::uint64_t>(reads);
    auto [it, inserted] = result.meta.insert_or_assign(topic, std::move(m));
    (void)it;
    if (!inserted) {
      if (options.strict)
        throw Error(errc::duplicate_topic,
                    "line " + std::to_string(record_line) + ": duplicate topic '" + topic + "'");
      result.diagnostics.push_back({errc::duplicate_topic, "line " + std::to_string(record_line),
                                    "duplicate topic '" + topic + "', last row wins", false});
    }
  }
  return result;
}

inline void write_trajectory_csv(std::ostream& out,
                                 const std::map<std::string, Trajectory>& trajectories) {
  out << "topic_id,t_minute,rank\n";
  for (const auto& [topic, traj] : trajectories) {
    const std::string field = detail::csv_field(topic);
    for (const RankObservation& o : traj.obs)
      out << field << ',' << o.t << ',' << o.rank << '\n';
  }
}

inline void write_metadata_csv(std::ostream& out, const std::map<std::string, TopicMeta>& meta) {
  out << "topic_id,category,n_reads\n";
  for (const auto& [topic, m] : meta)
    out << detail::csv_field(topic) << ',' << detail::csv_field(m.category) << ',' << m.n_reads
        << '\n';
}

inline void write_diagnostics_csv(std::ostream& out, std::span<const Diagnostic> diagnostics) {
  out << "code,location,message\n";
  for (const Diagnostic& d : diagnostics)
    out << errc_name(d.code) << ',' << detail::csv_field(d.where) << ','
        << detail::csv_field(d.message) << '\n';
}

}  // namespace trendvis
