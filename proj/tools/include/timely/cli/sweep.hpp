#ifndef TIMELY_CLI_SWEEP_HPP
#define TIMELY_CLI_SWEEP_HPP

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "timely/cli/config_io.hpp"
#include "timely/optimizer.hpp"

namespace timely::cli {

enum class SweepParameter { eps, k, theta, f_max };

std::string_view to_string(SweepParameter p);

/// One solver run per value of a single parameter.
///
/// Spec file layout:
///   {"base": {<config>}, "parameter": "eps" | "K" | "theta_k" | "f_max",
///    "index": <1-based process, theta_k only>, "values": [...]}
/// For K sweeps the base must be homogeneous (one theta and one sigma_sq
/// shared by all processes); each K replicates that process.
struct SweepSpec {
  ConfigDocument base;
  SweepParameter parameter = SweepParameter::eps;
  int index = 0;  ///< 0-based process index for theta sweeps.
  std::vector<double> values;
};

struct SweepRow {
  double value = 0.0;
  OptimalPolicy policy;
};

SweepSpec sweep_from_json(const nlohmann::json& j, std::string_view context);
SweepSpec load_sweep(const std::filesystem::path& path);

/// Base config with the swept parameter set to `value`.
SystemConfig substitute(const SweepSpec& spec, double value);

/// Solves every value, concurrently, and returns rows in input order.
/// The first SolverError or ConfigError (in input order) is rethrown.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

inline constexpr std::string_view kSweepHeader =
    "parameter_value,tau_star,beta_star,tau_unconstrained,tau_constrained,binding";

/// Header plus one line per row, 12 significant digits, binding as 1/0.
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace timely::cli

#endif  // TIMELY_CLI_SWEEP_HPP
