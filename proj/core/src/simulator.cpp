#include "timely/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

#include "timely/errors.hpp"
#include "timely/optimizer.hpp"

namespace timely {

namespace {

enum class Stream : std::uint64_t { service = 1, erasure = 2, path = 3 };

std::mt19937_64 make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

struct RatioEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

// Ratio-of-sums estimate with a delta-method standard error over batches.
template <class Num, class Den>
RatioEstimate batch_ratio(const std::vector<BatchTotals>& batches, Num numerator, Den denominator) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& b : batches) {
    num += numerator(b);
    den += denominator(b);
  }
  RatioEstimate out;
  out.value = num / den;
  const auto count = static_cast<double>(batches.size());
  if (batches.size() >= 2) {
    double ss = 0.0;
    for (const auto& b : batches) {
      const double r = numerator(b) - out.value * denominator(b);
      ss += r * r;
    }
    out.stderr_ = std::sqrt(count / (count - 1.0) * ss) / den;
  }
  return out;
}

SimulationStats summarize(std::vector<BatchTotals> batches, std::size_t processes, bool has_path) {
  SimulationStats stats;
  stats.per_process_mse.assign(processes, 0.0);
  double samples = 0.0;
  for (const auto& b : batches) {
    stats.epochs += b.epochs;
    stats.total_time += b.time;
    samples += b.samples;
    for (std::size_t k = 0; k < processes; ++k) {
      stats.per_process_mse[k] += b.process_mse[k];
    }
  }
  for (auto& v : stats.per_process_mse) {
    v /= stats.total_time;
  }
  stats.samples_taken = static_cast<std::int64_t>(samples);

  const auto time = [](const BatchTotals& b) { return b.time; };
  const auto count = [](const BatchTotals& b) { return static_cast<double>(b.epochs); };

  const auto mse = batch_ratio(batches, [](const BatchTotals& b) { return b.mse; }, time);
  stats.sum_mse = mse.value;
  stats.sum_mse_stderr = mse.stderr_;

  const auto freq = batch_ratio(batches, [](const BatchTotals& b) { return b.samples; }, time);
  stats.sampling_freq = freq.value;
  stats.sampling_freq_stderr = freq.stderr_;

  const auto service = batch_ratio(batches, [](const BatchTotals& b) { return b.service; }, count);
  stats.mean_epoch_service = service.value;
  stats.mean_epoch_service_stderr = service.stderr_;

  const auto length = batch_ratio(batches, time, count);
  stats.mean_epoch_length = length.value;
  stats.mean_epoch_length_stderr = length.stderr_;

  if (has_path) {
    const auto path = batch_ratio(batches, [](const BatchTotals& b) { return b.path_mse; }, time);
    stats.path_sum_mse = path.value;
    stats.path_sum_mse_stderr = path.stderr_;
  }
  stats.batches = std::move(batches);
  return stats;
}

}  // namespace

std::string_view to_string(WaitMode mode) {
  switch (mode) {
    case WaitMode::grouped:
      return "grouped";
    case WaitMode::split:
      return "split";
  }
  return "grouped";
}

WaitMode wait_mode_from_string(std::string_view text) {
  if (text == "grouped") {
    return WaitMode::grouped;
  }
  if (text == "split") {
    return WaitMode::split;
  }
  throw DomainError("unknown wait mode '" + std::string(text) + "' (expected grouped or split)");
}

double ou_transition(double x, double theta, double sigma_sq, double delta, double standard_normal) {
  if (!(delta > 0.0)) {
    throw DomainError("ou_transition: time step must be positive, got " + std::to_string(delta));
  }
  const double mean = x * std::exp(-theta * delta);
  const double variance = mse_instant(theta, sigma_sq, delta);
  return mean + std::sqrt(variance) * standard_normal;
}

std::size_t maf_select(std::span<const double> aoi) {
  if (aoi.empty()) {
    throw DomainError("maf_select: no processes to choose from");
  }
  // max_element returns the first maximum, which is the lowest-index tie.
  return static_cast<std::size_t>(std::distance(aoi.begin(), std::max_element(aoi.begin(), aoi.end())));
}

SimulationStats run(const SystemConfig& config, const SimulationOptions& options) {
  require_valid(config);
  if (options.epochs < 1) {
    throw DomainError("simulation needs at least one epoch, got " + std::to_string(options.epochs));
  }
  if (!(options.tau >= 0.0) || !std::isfinite(options.tau)) {
    throw DomainError("threshold must be finite and nonnegative, got " + std::to_string(options.tau));
  }
  if (options.path_grid_points < 1 || options.batches < 1) {
    throw DomainError("path grid and batch counts must be positive");
  }

  const auto processes = static_cast<std::size_t>(config.k);
  const auto& theta = config.theta;
  const auto& sigma_sq = config.sigma_sq;

  auto service_rng = make_stream(options.seed, Stream::service);
  auto erasure_rng = make_stream(options.seed, Stream::erasure);
  auto path_rng = make_stream(options.seed, Stream::path);
  std::exponential_distribution<double> service(config.mu);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;

  const auto batch_count = std::min<std::int64_t>(options.batches, options.epochs);
  std::vector<BatchTotals> batches(static_cast<std::size_t>(batch_count));
  for (auto& b : batches) {
    b.process_mse.assign(processes, 0.0);
  }

  // Latest received sample per process: its sampling instant and, when
  // paths are tracked, the sampled value.
  std::vector<double> sample_time(processes, 0.0);
  std::vector<double> received_value(processes, 0.0);
  std::vector<OuState> path(processes);
  if (options.track_paths) {
    for (std::size_t k = 0; k < processes; ++k) {
      path[k].value = std::sqrt(stationary_variance(theta[k], sigma_sq[k])) * normal(path_rng);
      received_value[k] = path[k].value;
    }
  }

  std::vector<double> aoi(processes);
  std::vector<double> previous_sample(processes);
  std::vector<double> new_sample(processes);
  std::vector<double> delivery(processes);
  std::vector<double> grid(static_cast<std::size_t>(options.path_grid_points));

  EpochRecord record;
  record.attempts.assign(processes, 0);
  record.mse_contrib.assign(processes, 0.0);

  const double split_share = 1.0 / static_cast<double>(processes);
  double now = 0.0;
  double previous_service = 0.0;

  for (std::int64_t epoch = 0; epoch <= options.epochs; ++epoch) {
    const bool measured = epoch > 0;
    const double wait = measured ? waiting(previous_service, options.tau) : 0.0;
    const double start = now;
    if (options.mode == WaitMode::grouped) {
      now += wait;
    }

    double service_total = 0.0;
    std::fill(record.attempts.begin(), record.attempts.end(), 0);
    for (std::size_t served = 0; served < processes; ++served) {
      for (std::size_t k = 0; k < processes; ++k) {
        aoi[k] = now - sample_time[k];
      }
      const std::size_t k = maf_select(aoi);
      if (options.mode == WaitMode::split) {
        now += wait * split_share;
      }
      double sampled_at = now;
      do {
        sampled_at = now;
        const double y = service(service_rng);
        now += y;
        service_total += y;
        ++record.attempts[k];
      } while (unit(erasure_rng) < config.eps);
      previous_sample[k] = sample_time[k];
      new_sample[k] = sampled_at;
      delivery[k] = now;
      sample_time[k] = sampled_at;
    }
    const double end = now;

    double path_error = 0.0;
    if (options.track_paths) {
      const double length = end - start;
      const double weight = length / static_cast<double>(grid.size());
      if (measured) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
          grid[j] = start + (static_cast<double>(j) + unit(path_rng)) * weight;
        }
      }
      for (std::size_t k = 0; k < processes; ++k) {
        const auto advance = [&](double to) {
          if (to > path[k].time) {
            path[k].value = ou_transition(path[k].value, theta[k], sigma_sq[k], to - path[k].time, normal(path_rng));
            path[k].time = to;
          }
        };
        double fresh = 0.0;
        bool sampled = false;
        if (measured) {
          for (const double t : grid) {
            if (!sampled && new_sample[k] <= t) {
              advance(new_sample[k]);
              fresh = path[k].value;
              sampled = true;
            }
            advance(t);
            const double estimate = t >= delivery[k]
                                        ? fresh * std::exp(-theta[k] * (t - new_sample[k]))
                                        : received_value[k] * std::exp(-theta[k] * (t - previous_sample[k]));
            const double err = path[k].value - estimate;
            path_error += err * err * weight;
          }
        }
        if (!sampled) {
          advance(new_sample[k]);
          fresh = path[k].value;
        }
        received_value[k] = fresh;
      }
    }

    if (measured) {
      const std::int64_t m = epoch - 1;
      auto& batch = batches[static_cast<std::size_t>(m * batch_count / options.epochs)];
      record.index = epoch;
      record.wait = wait;
      record.service_total = service_total;
      record.length = end - start;
      record.samples_taken = 0;
      double epoch_mse = 0.0;
      for (std::size_t k = 0; k < processes; ++k) {
        record.mse_contrib[k] = mse_integral(theta[k], sigma_sq[k], start, delivery[k], previous_sample[k]) +
                                mse_integral(theta[k], sigma_sq[k], delivery[k], end, new_sample[k]);
        record.samples_taken += record.attempts[k];
        batch.process_mse[k] += record.mse_contrib[k];
        epoch_mse += record.mse_contrib[k];
      }
      batch.epochs += 1;
      batch.time += record.length;
      batch.mse += epoch_mse;
      batch.service += service_total;
      batch.samples += record.samples_taken;
      batch.path_mse += path_error;
      if (options.on_epoch) {
        options.on_epoch(record);
      }
    }
    previous_service = service_total;
  }

  return summarize(std::move(batches), processes, options.track_paths);
}

SimulationStats merge(std::span<const SimulationStats> runs) {
  if (runs.empty()) {
    throw DomainError("merge: no simulation runs given");
  }
  std::vector<BatchTotals> batches;
  const bool has_path = runs.front().path_sum_mse.has_value();
  const std::size_t processes = runs.front().per_process_mse.size();
  for (const auto& r : runs) {
    if (r.per_process_mse.size() != processes || r.path_sum_mse.has_value() != has_path) {
      throw DomainError("merge: runs describe different configurations");
    }
    batches.insert(batches.end(), r.batches.begin(), r.batches.end());
  }
  return summarize(std::move(batches), processes, has_path);
}

SimulationStats run_replications(const SystemConfig& config, const SimulationOptions& options, int replications) {
  if (replications < 1) {
    throw DomainError("run_replications: need at least one replication");
  }
  std::vector<std::future<SimulationStats>> pending;
  pending.reserve(static_cast<std::size_t>(replications));
  for (int r = 0; r < replications; ++r) {
    SimulationOptions opt = options;
    opt.seed = options.seed + static_cast<std::uint64_t>(r);
    opt.on_epoch = nullptr;
    pending.push_back(std::async(std::launch::async, [config, opt] { return run(config, opt); }));
  }
  std::vector<SimulationStats> runs;
  runs.reserve(pending.size());
  for (auto& f : pending) {
    runs.push_back(f.get());
  }
  return merge(runs);
}

double estimate_sampling_freq(const SimulationStats& stats) {
  return static_cast<double>(stats.samples_taken) / stats.total_time;
}

}  // namespace timely
