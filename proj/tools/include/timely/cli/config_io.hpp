#ifndef TIMELY_CLI_CONFIG_IO_HPP
#define TIMELY_CLI_CONFIG_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "timely/model.hpp"
#include "timely/optimizer.hpp"

namespace timely::cli {

/// A config document: the problem instance plus optional solver settings.
struct ConfigDocument {
  SystemConfig config;
  SolverSettings solver;
  bool operator==(const ConfigDocument&) const = default;
};

/// Reads a file into a string. Throws ConfigError when it cannot be opened.
std::string read_text(const std::filesystem::path& path);

/// Parses JSON text, turning syntax errors into ConfigError with
/// "<source>:<line>:<column>" positions.
nlohmann::json parse_json(std::string_view text, std::string_view source);

/// Converts a JSON object with keys K, theta, sigma_sq, mu, eps, f_max and an
/// optional "solver" object. Unknown keys, wrong types and invalid values
/// are all reported together in one ConfigError. `context` prefixes the
/// messages (e.g. the file name).
ConfigDocument config_from_json(const nlohmann::json& j, std::string_view context);

ConfigDocument load_config(const std::filesystem::path& path);

nlohmann::json to_json(const SystemConfig& config);
nlohmann::json to_json(const SolverSettings& settings);
nlohmann::json to_json(const ConfigDocument& doc);

/// 64-bit FNV-1a of the compact JSON form of the document.
std::uint64_t config_hash(const ConfigDocument& doc);

}  // namespace timely::cli

#endif  // TIMELY_CLI_CONFIG_IO_HPP
