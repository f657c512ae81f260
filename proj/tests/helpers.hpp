// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "trendvis/core.hpp"
#include "trendvis/visibility.hpp"

namespace testutil {

namespace fs = std::filesystem;

// The four worked-example trajectories used throughout the tests.
inline trendvis::Trajectory example_trajectory(int which) {
  trendvis::Trajectory traj("example" + std::to_string(which));
  switch (which) {
    case 1:
      for (auto [t, r] : {std::pair{1, 40}, {2, 30}, {3, 50}}) traj.append({t, r});
      break;
    case 2:
      for (auto [t, r] : {std::pair{10, 40}, {11, 40}, {12, 30}, {13, 30}, {14, 50}, {15, 50}})
        traj.append({t, r});
      break;
    case 3:
      for (auto [t, r] : {std::pair{27, 40}, {28, 30}, {29, 30}, {30, 50}, {31, 40}, {32, 50}})
        traj.append({t, r});
      break;
    case 4:
      for (auto [t, r] : {std::pair{27, 40}, {28, 30}, {29, 30}, {30, 50}, {31, 40}, {32, 20}})
        traj.append({t, r});
      break;
    default:
      throw std::runtime_error("no such example");
  }
  return traj;
}

// Reference visibility: naive per-observation power sum, nothing shared with
// the histogram path.
inline double naive_visibility(const trendvis::Trajectory& traj, double d) {
  double v = 0.0;
  for (const trendvis::RankObservation& o : traj.obs)
    v += std::pow(static_cast<double>(o.rank), -d);
  return v;
}

inline trendvis::Trajectory random_trajectory(std::mt19937_64& rng, int len_min, int len_max,
                                              int r_cap = trendvis::kDefaultRankCap) {
  const int len = std::uniform_int_distribution<int>(len_min, len_max)(rng);
  trendvis::Trajectory traj("random", r_cap);
  std::int64_t t = std::uniform_int_distribution<std::int64_t>(0, 1000)(rng);
  std::uniform_int_distribution<int> rank(1, r_cap);
  std::uniform_int_distribution<std::int64_t> gap(1, 3);
  for (int i = 0; i < len; ++i) {
    traj.append({t, rank(rng)});
    t += gap(rng);
  }
  return traj;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = fs::temp_directory_path() /
            ("trendvis_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

#ifdef TRENDVIS_CLI_PATH

struct CliResult {
  int exit_code = -1;
  std::string output;
};

// Runs the CLI with stdout+stderr captured. SOURCE_DATE_EPOCH is pinned so
// manifests are reproducible across invocations.
inline CliResult run_cli(const std::string& args, const fs::path& scratch) {
  static std::atomic<unsigned> counter{0};
  const fs::path capture = scratch / ("cli_capture_" + std::to_string(counter++) + ".txt");
  const std::string cmd = "env SOURCE_DATE_EPOCH=1700000000 " + std::string(TRENDVIS_CLI_PATH) +
                          " " + args + " >" + capture.string() + " 2>&1";
  const int rc = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  result.output = slurp(capture);
  return result;
}

#endif  // TRENDVIS_CLI_PATH

}  // namespace testutil
