// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "trendvis/errors.hpp"
#include "trendvis/ingest.hpp"

namespace trendvis {

namespace detail {

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

inline std::string content_digest(std::string_view bytes) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(detail::fnv1a64(bytes)));
  return buf;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(errc::io_error, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(errc::io_error, "failed reading '" + path.string() + "'");
  return std::move(ss).str();
}

inline std::string file_digest(const std::filesystem::path& path) {
  return content_digest(read_file(path));
}

// Write-temp-then-rename so readers never observe a partial file.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(errc::io_error, "cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(errc::io_error, "failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw Error(errc::io_error,
                "cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

// Honors SOURCE_DATE_EPOCH so runs can be made byte-reproducible.
inline std::string manifest_timestamp() {
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
    std::int64_t sec = 0;
    if (detail::parse_i64(env, sec)) return detail::format_iso8601_utc(sec);
  }
  return detail::format_iso8601_utc(static_cast<std::int64_t>(std::time(nullptr)));
}

struct ManifestInput {
  std::string path;
  std::string digest;
};

// Reproducibility record written next to every command's outputs: what ran,
// on which bytes, with which resolved parameters, producing which files.
struct RunManifest {
  std::string command;
  std::vector<ManifestInput> inputs;
  std::map<std::string, std::string> parameters;
  std::vector<std::string> outputs;
  std::string timestamp;

  void add_input(const std::filesystem::path& path) {
    inputs.push_back({path.string(), file_digest(path)});
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["inputs"] = nlohmann::json::array();
    for (const ManifestInput& in : inputs)
      j["inputs"].push_back({{"path", in.path}, {"digest", in.digest}});
    j["parameters"] = parameters;
    j["outputs"] = outputs;
    j["timestamp"] = timestamp;
    return j;
  }

  // Writes <dir>/manifest.json, listing the manifest itself as an output.
  void write(const std::filesystem::path& dir) {
    if (timestamp.empty()) timestamp = manifest_timestamp();
    outputs.push_back("manifest.json");
    atomic_write(dir / "manifest.json", to_json().dump(2) + "\n");
  }
};

}  // namespace trendvis
