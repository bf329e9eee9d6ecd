#ifndef TIMELY_SIMULATOR_HPP
#define TIMELY_SIMULATOR_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "timely/model.hpp"

/**
 * \file
 * \brief Discrete-event Monte Carlo of the maximum-age-first sensing loop.
 *
 * One epoch is a full scheduling round: the threshold wait, then one
 * successful delivery per process in maximum-age-first order. Every attempt
 * takes a fresh sample, occupies the server for an exp(mu) time and is erased
 * with probability eps; erased samples are retried from the same process.
 * The per-process MSE is integrated in closed form between receptions, so no
 * time discretization enters the estimate.
 *
 * Bookkeeping:
 * - Every process starts with a virtual sample at t = 0 (AoI 0).
 * - The first round is simulated but not measured. It gives every process a
 *   genuine reception and provides the service time the first measured wait
 *   is computed from.
 * - Service times, erasures and OU path values come from three independent
 *   substreams of the seed, so changing the wait placement or turning path
 *   tracking on leaves the service and erasure draws unchanged.
 */

namespace timely {

enum class WaitMode {
  grouped,  ///< Whole wait before the first attempt of the epoch.
  split,    ///< Wait / K before each process's first attempt.
};

std::string_view to_string(WaitMode mode);
/// Throws DomainError for anything but "grouped" or "split".
WaitMode wait_mode_from_string(std::string_view text);

/// One measured epoch.
struct EpochRecord {
  std::int64_t index = 0;              ///< 1-based measured epoch number.
  double wait = 0.0;
  std::vector<int> attempts;           ///< Attempts per process, each >= 1.
  double service_total = 0.0;
  double length = 0.0;                 ///< wait + service_total.
  std::vector<double> mse_contrib;     ///< Integral of each process's MSE over the epoch.
  int samples_taken = 0;               ///< Sum of attempts.
};

/// Sums over a contiguous block of epochs; batch means give standard errors
/// that account for the dependence between consecutive epochs.
struct BatchTotals {
  std::int64_t epochs = 0;
  double time = 0.0;
  double mse = 0.0;
  double service = 0.0;
  double samples = 0.0;
  double path_mse = 0.0;
  std::vector<double> process_mse;
};

struct SimulationStats {
  std::int64_t epochs = 0;
  double total_time = 0.0;
  double sum_mse = 0.0;
  double sum_mse_stderr = 0.0;
  double sampling_freq = 0.0;
  double sampling_freq_stderr = 0.0;
  double mean_epoch_service = 0.0;
  double mean_epoch_service_stderr = 0.0;
  double mean_epoch_length = 0.0;
  double mean_epoch_length_stderr = 0.0;
  std::vector<double> per_process_mse;
  std::int64_t samples_taken = 0;

  /// Time average of (X - Xhat)^2 from simulated OU paths; set when paths are tracked.
  std::optional<double> path_sum_mse;
  std::optional<double> path_sum_mse_stderr;

  std::vector<BatchTotals> batches;
};

struct SimulationOptions {
  double tau = 0.0;
  std::int64_t epochs = 1;
  std::uint64_t seed = 1;
  WaitMode mode = WaitMode::grouped;
  bool track_paths = false;
  int path_grid_points = 20;  ///< Stratified evaluation points per epoch.
  int batches = 50;
  std::function<void(const EpochRecord&)> on_epoch;  ///< Called for every measured epoch.
};

/// Exact OU step: X_{s + delta} given X_s = x, driven by a standard normal
/// deviate. Throws DomainError for delta <= 0.
double ou_transition(double x, double theta, double sigma_sq, double delta, double standard_normal);

template <class Urbg>
double ou_transition(double x, double theta, double sigma_sq, double delta, Urbg& rng) {
  std::normal_distribution<double> normal;
  return ou_transition(x, theta, sigma_sq, delta, normal(rng));
}

/// Index of the largest age; ties go to the lowest index.
std::size_t maf_select(std::span<const double> aoi);

/// Simulates options.epochs measured epochs under threshold options.tau.
/// Deterministic given (config, options). Throws DomainError for epochs < 1,
/// a negative tau or nonpositive grid or batch counts.
SimulationStats run(const SystemConfig& config, const SimulationOptions& options);

/// Runs `replications` independent simulations with seeds seed, seed + 1, ...
/// concurrently and merges them.
SimulationStats run_replications(const SystemConfig& config, const SimulationOptions& options, int replications);

/// Pools runs of the same configuration by concatenating their batches.
SimulationStats merge(std::span<const SimulationStats> runs);

/// Total samples per unit time.
double estimate_sampling_freq(const SimulationStats& stats);

}  // namespace timely

#endif  // TIMELY_SIMULATOR_HPP
