#include "timely/model.hpp"

#include <cmath>
#include <sstream>

#include "timely/errors.hpp"

namespace timely {

namespace {

std::string describe(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void check_theta(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw DomainError("theta must be positive and finite, got " + describe(theta));
  }
}

// v - (1 - e^{-v}) for v >= 0, without cancellation for small v.
double excess_over_expm1(double v) {
  if (v < 1e-3) {
    // v^2/2 - v^3/6 + v^4/24 - v^5/120
    return v * v * (0.5 - v * (1.0 / 6.0 - v * (1.0 / 24.0 - v / 120.0)));
  }
  return v + std::expm1(-v);
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration";
        for (const auto& v : violations) {
          msg += "; " + v;
        }
        return msg;
      }()),
      violations_(std::move(violations)) {}

std::vector<std::string> validate(const SystemConfig& config) {
  std::vector<std::string> out;
  if (config.k < 1) {
    out.push_back("number of processes K must be >= 1, got " + std::to_string(config.k));
  }
  const auto expected = static_cast<std::size_t>(config.k < 0 ? 0 : config.k);
  if (config.theta.size() != expected) {
    out.push_back("theta must have K = " + std::to_string(config.k) + " entries, got " +
                  std::to_string(config.theta.size()));
  }
  if (config.sigma_sq.size() != expected) {
    out.push_back("sigma_sq must have K = " + std::to_string(config.k) + " entries, got " +
                  std::to_string(config.sigma_sq.size()));
  }
  for (std::size_t i = 0; i < config.theta.size(); ++i) {
    if (!(config.theta[i] > 0.0) || !std::isfinite(config.theta[i])) {
      out.push_back("theta[" + std::to_string(i + 1) + "] must be positive, got " + describe(config.theta[i]));
    }
  }
  for (std::size_t i = 0; i < config.sigma_sq.size(); ++i) {
    if (!(config.sigma_sq[i] > 0.0) || !std::isfinite(config.sigma_sq[i])) {
      out.push_back("sigma_sq[" + std::to_string(i + 1) + "] must be positive, got " +
                    describe(config.sigma_sq[i]));
    }
  }
  if (!(config.mu > 0.0) || !std::isfinite(config.mu)) {
    out.push_back("service rate mu must be positive, got " + describe(config.mu));
  }
  if (!(config.eps >= 0.0)) {
    out.push_back("erasure probability must be >= 0, got " + describe(config.eps));
  } else if (!(config.eps < 1.0)) {
    out.push_back("erasure probability must be < 1, got " + describe(config.eps));
  }
  if (!(config.f_max > 0.0) || !std::isfinite(config.f_max)) {
    out.push_back("sampling budget f_max must be positive, got " + describe(config.f_max));
  }
  return out;
}

void require_valid(const SystemConfig& config) {
  auto violations = validate(config);
  if (!violations.empty()) {
    throw ConfigError(std::move(violations));
  }
}

double stationary_variance(double theta, double sigma_sq) {
  check_theta(theta);
  return sigma_sq / (2.0 * theta);
}

double mse_instant(double theta, double sigma_sq, double delta) {
  check_theta(theta);
  if (!(delta >= 0.0)) {
    throw DomainError("mse_instant: age must be nonnegative, got " + describe(delta));
  }
  return sigma_sq / (2.0 * theta) * -std::expm1(-2.0 * theta * delta);
}

double mse_integral(double theta, double sigma_sq, double a, double b, double s) {
  check_theta(theta);
  if (!(s <= a && a <= b)) {
    throw DomainError("mse_integral: requires s <= a <= b, got s=" + describe(s) + " a=" + describe(a) +
                      " b=" + describe(b));
  }
  // 2 theta * integral of (1 - e^{-2 theta (t - s)}) over [a, b], split into
  // two nonnegative parts: [v - (1 - e^{-v})] + (1 - e^{-u})(1 - e^{-v})
  // with u = 2 theta (a - s), v = 2 theta (b - a).
  const double two_theta = 2.0 * theta;
  const double u = two_theta * (a - s);
  const double v = two_theta * (b - a);
  const double scaled = excess_over_expm1(v) + std::expm1(-u) * std::expm1(-v);
  return sigma_sq / two_theta * scaled / two_theta;
}

}  // namespace timely
