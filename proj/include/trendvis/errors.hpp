// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace trendvis {

// Failure kinds raised by the library. The parser codes double as diagnostic
// codes when lenient parsing downgrades them to warnings.
enum class errc {
  duplicate_timestamp,
  rank_out_of_range,
  negative_time,
  corrupt_trajectory,
  malformed_line,
  non_monotonic_ranks,
  duplicate_topic_in_snapshot,
  negative_reads,
  duplicate_topic,
  too_few_points,
  degenerate_variance,
  empty_grid,
  invalid_grid,
  invalid_bracket,
  no_meta,
  no_trajectory,
  zero_reads,
  zero_visibility,
  unknown_topic,
  invalid_config,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::duplicate_timestamp: return "DuplicateTimestamp";
    case errc::rank_out_of_range: return "RankOutOfRange";
    case errc::negative_time: return "NegativeTime";
    case errc::corrupt_trajectory: return "CorruptTrajectory";
    case errc::malformed_line: return "MalformedLine";
    case errc::non_monotonic_ranks: return "NonMonotonicRanks";
    case errc::duplicate_topic_in_snapshot: return "DuplicateTopicInSnapshot";
    case errc::negative_reads: return "NegativeReads";
    case errc::duplicate_topic: return "DuplicateTopic";
    case errc::too_few_points: return "TooFewPoints";
    case errc::degenerate_variance: return "DegenerateVariance";
    case errc::empty_grid: return "EmptyGrid";
    case errc::invalid_grid: return "InvalidGrid";
    case errc::invalid_bracket: return "InvalidBracket";
    case errc::no_meta: return "NoMeta";
    case errc::no_trajectory: return "NoTrajectory";
    case errc::zero_reads: return "ZeroReads";
    case errc::zero_visibility: return "ZeroVisibility";
    case errc::unknown_topic: return "UnknownTopic";
    case errc::invalid_config: return "InvalidConfig";
    case errc::io_error: return "IoError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, std::string message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        message_(std::move(message)) {}

  errc code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

 private:
  errc code_;
  std::string message_;
};

// One parse or validation finding. `where` names the offending line or topic.
struct Diagnostic {
  errc code;
  std::string where;
  std::string message;
  bool fatal = false;
};

}  // namespace trendvis
