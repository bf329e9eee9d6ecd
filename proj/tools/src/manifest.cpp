#include "timely/cli/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "timely/errors.hpp"

#ifndef TIMELY_VERSION
#define TIMELY_VERSION "unknown"
#endif

namespace timely::cli {

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string tool_version() { return TIMELY_VERSION; }

RunManifest make_manifest(std::string command, const ConfigDocument& doc, std::vector<std::uint64_t> seeds) {
  RunManifest m;
  m.command = std::move(command);
  m.config_hash = hex64(config_hash(doc));
  m.solver = doc.solver;
  m.seeds = std::move(seeds);
  m.version = tool_version();
  m.timestamp = utc_now();
  return m;
}

nlohmann::json to_json(const RunManifest& manifest) {
  return nlohmann::json{{"command", manifest.command},
                        {"config_hash", manifest.config_hash},
                        {"solver", to_json(manifest.solver)},
                        {"seeds", manifest.seeds},
                        {"version", manifest.version},
                        {"timestamp", manifest.timestamp}};
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw ConfigError({path.string() + ": cannot write manifest"});
  }
  out << to_json(manifest).dump(2) << '\n';
}

}  // namespace timely::cli
