#include "timely/analytic.hpp"

#include <cmath>
#include <utility>
#include <string>

#include "timely/errors.hpp"

namespace timely {

namespace {

constexpr double kMaxBracket = 1e12;

void check_tau(double tau) {
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw DomainError("threshold must be finite and nonnegative, got " + std::to_string(tau));
  }
}

// Lower incomplete Gamma values gamma(mu tau, rho) for rho = K .. rho_max + extra.
std::vector<double> service_ladder(const AnalyticContext& ctx, double tau, int extra) {
  const auto& plan = ctx.plan();
  const auto n = static_cast<std::size_t>(plan.size() + extra);
  std::vector<double> lower(n);
  std::vector<double> upper(n);
  incomplete_gamma_ladder(ctx.config().mu * tau, plan.rho_min, lower, upper);
  return lower;
}

double cdf_from_ladder(const TruncationPlan& plan, const std::vector<double>& lower) {
  double cdf = 0.0;
  for (std::size_t i = 0; i < plan.weights.size(); ++i) {
    cdf += plan.weights[i] * lower[i];
  }
  return cdf;
}

// sum_rho w_rho (mu/(mu + 2 theta))^rho (1 - gamma((2 theta + mu) tau, rho)),
// i.e. E[e^{-2 theta Y_epoch}; Y_epoch > tau].
double discounted_survival(const AnalyticContext& ctx, double tau, std::size_t process) {
  const auto& plan = ctx.plan();
  const double theta = ctx.config().theta[process];
  const double mu = ctx.config().mu;
  const auto n = plan.weights.size();
  std::vector<double> lower(n);
  std::vector<double> upper(n);
  incomplete_gamma_ladder((2.0 * theta + mu) * tau, plan.rho_min, lower, upper);

  const double ratio = ctx.laplace_service()[process];
  double ratio_pow = std::pow(ratio, plan.rho_min);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += plan.weights[i] * ratio_pow * upper[i];
    ratio_pow *= ratio;
  }
  return sum;
}

// Bisection on a nondecreasing function over [lo, hi] with value(lo) < target <= value(hi).
template <class Fn>
double bisect_increasing(Fn&& value, double target, double lo, double hi, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    if (value(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void check_tol(double tau_tol) {
  if (!(tau_tol > 0.0)) {
    throw DomainError("inversion tolerance must be positive, got " + std::to_string(tau_tol));
  }
}

}  // namespace

AnalyticContext::AnalyticContext(SystemConfig config, double series_tol)
    : config_(std::move(config)) {
  require_valid(config_);
  plan_ = make_truncation_plan(config_.k, config_.eps, series_tol);
  laplace_service_.reserve(config_.theta.size());
  for (std::size_t i = 0; i < config_.theta.size(); ++i) {
    const double theta = config_.theta[i];
    laplace_service_.push_back(config_.mu / (config_.mu + 2.0 * theta));
    stationary_total_ += stationary_variance(theta, config_.sigma_sq[i]);
  }
}

double g_fn(const AnalyticContext& ctx, double tau) {
  check_tau(tau);
  const auto& cfg = ctx.config();
  double sum = 0.0;
  for (std::size_t i = 0; i < cfg.theta.size(); ++i) {
    const double theta = cfg.theta[i];
    sum += stationary_variance(theta, cfg.sigma_sq[i]) *
           (1.0 - ctx.laplace_service()[i] * std::exp(-2.0 * theta * tau));
  }
  return sum;
}

double g_inverse(const AnalyticContext& ctx, double beta, double tau_tol) {
  check_tol(tau_tol);
  if (std::isnan(beta)) {
    throw DomainError("g_inverse: beta is NaN");
  }
  if (beta >= ctx.stationary_total()) {
    throw DomainError("g_inverse: beta must be below the total stationary variance " +
                      std::to_string(ctx.stationary_total()) + ", got " + std::to_string(beta));
  }
  if (beta <= g_fn(ctx, 0.0)) {
    return 0.0;
  }
  double lo = 0.0;
  double hi = 1.0;
  while (g_fn(ctx, hi) < beta) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMaxBracket) {
      throw DomainError("g_inverse: no finite threshold reaches beta = " + std::to_string(beta));
    }
  }
  return bisect_increasing([&](double t) { return g_fn(ctx, t); }, beta, lo, hi, tau_tol);
}

double h_fn(const AnalyticContext& ctx, double tau) {
  check_tau(tau);
  const auto& plan = ctx.plan();
  const double mu = ctx.config().mu;
  const auto lower = service_ladder(ctx, tau, 1);
  double h = 0.0;
  for (std::size_t i = 0; i < plan.weights.size(); ++i) {
    const double rho = static_cast<double>(plan.rho_min) + static_cast<double>(i);
    h += plan.weights[i] * (tau * lower[i] - rho / mu * lower[i + 1]);
  }
  return std::max(h, 0.0);
}

double h_inverse(const AnalyticContext& ctx, double c, double tau_tol) {
  check_tol(tau_tol);
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw DomainError("h_inverse: level must be finite and nonnegative, got " + std::to_string(c));
  }
  if (c == 0.0) {
    return 0.0;
  }
  double lo = 0.0;
  double hi = 1.0;
  while (h_fn(ctx, hi) < c) {
    lo = hi;
    hi *= 2.0;
    if (hi > kMaxBracket) {
      throw DomainError("h_inverse: level " + std::to_string(c) + " is out of numeric range");
    }
  }
  return bisect_increasing([&](double t) { return h_fn(ctx, t); }, c, lo, hi, tau_tol);
}

double epoch_service_cdf(const AnalyticContext& ctx, double tau) {
  check_tau(tau);
  return cdf_from_ladder(ctx.plan(), service_ladder(ctx, tau, 0));
}

double f_fn(const AnalyticContext& ctx, double tau, std::size_t process) {
  check_tau(tau);
  if (process >= ctx.config().theta.size()) {
    throw DomainError("f_fn: process index " + std::to_string(process) + " out of range for K = " +
                      std::to_string(ctx.config().k));
  }
  const double theta = ctx.config().theta[process];
  const double cdf = epoch_service_cdf(ctx, tau);
  return std::exp(-2.0 * theta * tau) * cdf + discounted_survival(ctx, tau, process);
}

double mean_epoch_service(const AnalyticContext& ctx) {
  const auto& cfg = ctx.config();
  return static_cast<double>(cfg.k) / (cfg.mu * (1.0 - cfg.eps));
}

EpochFunctionals epoch_functionals(const AnalyticContext& ctx, double tau) {
  check_tau(tau);
  const auto& plan = ctx.plan();
  const auto& cfg = ctx.config();
  const auto lower = service_ladder(ctx, tau, 1);

  EpochFunctionals out;
  for (std::size_t i = 0; i < plan.weights.size(); ++i) {
    const double rho = static_cast<double>(plan.rho_min) + static_cast<double>(i);
    out.h += plan.weights[i] * (tau * lower[i] - rho / cfg.mu * lower[i + 1]);
    out.cdf += plan.weights[i] * lower[i];
  }
  out.h = std::max(out.h, 0.0);
  out.f.reserve(cfg.theta.size());
  for (std::size_t k = 0; k < cfg.theta.size(); ++k) {
    out.f.push_back(std::exp(-2.0 * cfg.theta[k] * tau) * out.cdf + discounted_survival(ctx, tau, k));
  }
  return out;
}

ObjectiveParts objective_parts(const AnalyticContext& ctx, double tau) {
  const auto& cfg = ctx.config();
  const auto fun = epoch_functionals(ctx, tau);
  ObjectiveParts parts;
  parts.denominator = fun.h + mean_epoch_service(ctx);
  for (std::size_t k = 0; k < cfg.theta.size(); ++k) {
    const double theta = cfg.theta[k];
    const double variance = stationary_variance(theta, cfg.sigma_sq[k]);
    const double discount = ctx.laplace_service()[k] * (1.0 - fun.f[k]) / (2.0 * theta);
    parts.numerator += variance * (parts.denominator - discount);
  }
  return parts;
}

double dinkelbach_p(const AnalyticContext& ctx, double beta, double tau) {
  const auto parts = objective_parts(ctx, tau);
  return parts.numerator - beta * parts.denominator;
}

}  // namespace timely
