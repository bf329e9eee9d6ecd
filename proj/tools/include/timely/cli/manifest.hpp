#ifndef TIMELY_CLI_MANIFEST_HPP
#define TIMELY_CLI_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "timely/cli/config_io.hpp"

namespace timely::cli {

/// What is needed to rerun a command and get the same output.
struct RunManifest {
  std::string command;
  std::string config_hash;  ///< 16 hex digits, see config_hash().
  SolverSettings solver;
  std::vector<std::uint64_t> seeds;
  std::string version;
  std::string timestamp;  ///< UTC, ISO 8601.
};

RunManifest make_manifest(std::string command, const ConfigDocument& doc, std::vector<std::uint64_t> seeds = {});

nlohmann::json to_json(const RunManifest& manifest);

/// Writes the manifest as pretty JSON. Throws ConfigError on I/O failure.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

std::string tool_version();

}  // namespace timely::cli

#endif  // TIMELY_CLI_MANIFEST_HPP
