#include "timely/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "timely/errors.hpp"

namespace timely {

namespace {

constexpr double kBracketMargin = 1e-12;
constexpr int kMonotoneProbes = 5;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

void require_valid(const SolverSettings& settings) {
  std::vector<std::string> bad;
  if (!(settings.beta_tol > 0.0)) {
    bad.push_back("solver.beta_tol must be positive, got " + fmt(settings.beta_tol));
  }
  if (!(settings.tau_tol > 0.0)) {
    bad.push_back("solver.tau_tol must be positive, got " + fmt(settings.tau_tol));
  }
  if (!(settings.series_tol > 0.0 && settings.series_tol < 1.0)) {
    bad.push_back("solver.series_tol must lie in (0, 1), got " + fmt(settings.series_tol));
  }
  if (settings.max_iter < 1) {
    bad.push_back("solver.max_iter must be >= 1, got " + std::to_string(settings.max_iter));
  }
  if (!bad.empty()) {
    throw ConfigError(std::move(bad));
  }
}

double constraint_level(const SystemConfig& config) {
  const double k = static_cast<double>(config.k);
  const double gap = k / config.f_max - k / config.mu;
  return std::max(gap, 0.0) / (1.0 - config.eps);
}

double waiting(double z, double tau) { return std::max(tau - z, 0.0); }

double policy_mse(const AnalyticContext& ctx, double tau) {
  const auto parts = objective_parts(ctx, tau);
  return parts.numerator / parts.denominator;
}

double policy_mse(const SystemConfig& config, double tau) {
  return policy_mse(AnalyticContext(config), tau);
}

OptimalPolicy solve(const SystemConfig& config, const SolverSettings& settings) {
  require_valid(config);
  require_valid(settings);
  const AnalyticContext ctx(config, settings.series_tol);

  const double tau_constrained = h_inverse(ctx, constraint_level(config), settings.tau_tol);
  const auto threshold = [&](double beta) {
    return std::max(g_inverse(ctx, beta, settings.tau_tol), tau_constrained);
  };
  const auto p = [&](double beta) { return dinkelbach_p(ctx, beta, threshold(beta)); };

  const double total = ctx.stationary_total();
  const double margin = std::min(kBracketMargin, 1e-6 * total);
  double lo = margin;
  double hi = total - margin;
  const double p_lo = p(lo);
  const double p_hi = p(hi);
  if (!(p_lo > 0.0 && p_hi < 0.0)) {
    throw SolverError("Dinkelbach objective has no sign change on (" + fmt(lo) + ", " + fmt(hi) +
                      "): p = " + fmt(p_lo) + ", " + fmt(p_hi));
  }

  OptimalPolicy policy;

  // p(beta) is the minimum over thresholds of affine, strictly decreasing
  // functions of beta; spot-check that on a coarse grid.
  {
    double previous = p_lo;
    for (int j = 1; j <= kMonotoneProbes + 1; ++j) {
      const double beta = j <= kMonotoneProbes ? lo + (hi - lo) * j / (kMonotoneProbes + 1) : hi;
      const double value = j <= kMonotoneProbes ? p(beta) : p_hi;
      if (!(value < previous)) {
        policy.warnings.push_back("p(beta) failed the monotonicity spot check near beta = " + fmt(beta));
        break;
      }
      previous = value;
    }
  }

  double best_beta = std::abs(p_lo) < std::abs(p_hi) ? lo : hi;
  double best_p = std::min(std::abs(p_lo), std::abs(p_hi));
  int iter = 0;
  while (iter < settings.max_iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    ++iter;
    const double value = p(mid);
    if (std::abs(value) < best_p) {
      best_p = std::abs(value);
      best_beta = mid;
    }
    if (value == 0.0) {
      break;
    }
    if (value > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  if (!(best_p < settings.beta_tol)) {
    throw SolverError("bisection on beta did not reach |p| < " + fmt(settings.beta_tol) + " within " +
                          std::to_string(settings.max_iter) + " iterations",
                      best_beta, threshold(best_beta), best_p);
  }

  policy.beta_star = best_beta;
  policy.tau_unconstrained = g_inverse(ctx, best_beta, settings.tau_tol);
  policy.tau_constrained = tau_constrained;
  policy.tau_star = std::max(policy.tau_unconstrained, policy.tau_constrained);
  policy.binding = policy.tau_constrained > policy.tau_unconstrained;
  policy.residual = best_p;
  policy.iterations = iter;

  const double achieved = policy_mse(ctx, policy.tau_star);
  if (std::abs(achieved - policy.beta_star) > settings.beta_tol) {
    policy.warnings.push_back("objective at tau* (" + fmt(achieved) + ") differs from beta* by more than beta_tol");
  }
  return policy;
}

}  // namespace timely
