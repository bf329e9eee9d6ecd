#ifndef TIMELY_MODEL_HPP
#define TIMELY_MODEL_HPP

#include <string>
#include <vector>

/**
 * \file
 * \brief Problem instance and elementary Ornstein-Uhlenbeck quantities.
 *
 * K independent OU processes dX = -theta X dt + sigma dW share one sensor.
 * Samples are served one at a time at rate mu, each delivery is erased with
 * probability eps, and the sensor may take at most f_max samples per unit
 * time on average. Times are dimensionless; their unit is whatever 1/mu is
 * expressed in.
 */

namespace timely {

/// Full problem instance. `sigma_sq` holds the variance rates sigma_k^2.
struct SystemConfig {
  int k = 1;
  std::vector<double> theta;
  std::vector<double> sigma_sq;
  double mu = 1.0;
  double eps = 0.0;
  double f_max = 1.0;

  bool operator==(const SystemConfig&) const = default;
};

/// Value of one process at a given time.
struct OuState {
  double value = 0.0;
  double time = 0.0;
};

/// Every violated invariant of `config`, in a stable order. Empty means valid.
std::vector<std::string> validate(const SystemConfig& config);

/// Throws ConfigError carrying all violations when `config` is invalid.
void require_valid(const SystemConfig& config);

/// sigma^2 / (2 theta): the variance of a stationary OU process.
double stationary_variance(double theta, double sigma_sq);

/// MMSE of the estimate X_s e^{-theta delta} of X_{s + delta}:
/// sigma^2 / (2 theta) (1 - e^{-2 theta delta}).
double mse_instant(double theta, double sigma_sq, double delta);

/// Integral of mse_instant(theta, sigma_sq, t - s) over t in [a, b].
/// Requires s <= a <= b.
double mse_integral(double theta, double sigma_sq, double a, double b, double s);

}  // namespace timely

#endif  // TIMELY_MODEL_HPP
