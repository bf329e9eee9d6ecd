#include "timely/special_functions.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "timely/errors.hpp"

namespace timely {

namespace {

constexpr int kLogFactorialTableSize = 256;

// Attempt counts beyond this are treated as a configuration error: the series
// would need more terms than any sensible erasure probability produces.
constexpr int kMaxPlanSize = 50'000'000;

const std::array<double, kLogFactorialTableSize>& log_factorial_table() {
  static const auto table = [] {
    std::array<double, kLogFactorialTableSize> t{};
    for (int n = 1; n < kLogFactorialTableSize; ++n) {
      t[static_cast<std::size_t>(n)] = t[static_cast<std::size_t>(n - 1)] + std::log(static_cast<double>(n));
    }
    return t;
  }();
  return table;
}

double log_binomial(int n, int r) {
  return log_factorial(n) - log_factorial(r) - log_factorial(n - r);
}

// log(e^{-x} x^n / n!), x > 0.
double log_poisson_term(double x, int n) {
  return -x + static_cast<double>(n) * std::log(x) - log_factorial(n);
}

// (lower, upper) regularized incomplete Gamma pair. The branch that sums the
// smaller of the two tails directly keeps that one accurate to full relative
// precision.
std::pair<double, double> incomplete_gamma_pair(double x, int n) {
  if (x == 0.0) {
    return {0.0, 1.0};
  }
  if (std::isinf(x)) {
    return {1.0, 0.0};
  }
  const double shape = static_cast<double>(n);
  if (x < shape + 1.0) {
    // lower = sum_{j >= n} e^{-x} x^j / j!, ratios x / (j + 1) < 1.
    double term = std::exp(log_poisson_term(x, n));
    double sum = term;
    for (int j = n + 1; term > sum * 1e-17; ++j) {
      term *= x / static_cast<double>(j);
      sum += term;
    }
    const double lower = std::min(sum, 1.0);
    return {lower, 1.0 - lower};
  }
  // upper = sum_{j < n} e^{-x} x^j / j!, summed downward from j = n - 1.
  double term = std::exp(log_poisson_term(x, n - 1));
  double sum = term;
  for (int j = n - 1; j > 0 && term > sum * 1e-17; --j) {
    term *= static_cast<double>(j) / x;
    sum += term;
  }
  const double upper = std::min(sum, 1.0);
  return {1.0 - upper, upper};
}

void check_gamma_args(double x, int n) {
  if (!(x >= 0.0)) {
    throw DomainError("incomplete gamma: x must be nonnegative, got " + std::to_string(x));
  }
  if (n < 1) {
    throw DomainError("incomplete gamma: shape must be >= 1, got " + std::to_string(n));
  }
}

void check_negbin_args(int k, double eps) {
  if (k < 1) {
    throw DomainError("negative binomial: K must be >= 1, got " + std::to_string(k));
  }
  if (!(eps >= 0.0 && eps < 1.0)) {
    throw DomainError("negative binomial: erasure probability must lie in [0, 1), got " +
                      std::to_string(eps));
  }
}

}  // namespace

double log_factorial(int n) {
  if (n < 0) {
    throw DomainError("log_factorial: negative argument " + std::to_string(n));
  }
  if (n < kLogFactorialTableSize) {
    return log_factorial_table()[static_cast<std::size_t>(n)];
  }
  const double z = static_cast<double>(n) + 1.0;
  const double inv = 1.0 / z;
  const double inv2 = inv * inv;
  const double series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * std::numbers::pi) + series;
}

double reg_incomplete_gamma(double x, int n) {
  check_gamma_args(x, n);
  return incomplete_gamma_pair(x, n).first;
}

double reg_incomplete_gamma_upper(double x, int n) {
  check_gamma_args(x, n);
  return incomplete_gamma_pair(x, n).second;
}

void incomplete_gamma_ladder(double x, int first, std::span<double> lower, std::span<double> upper) {
  check_gamma_args(x, first);
  if (lower.size() != upper.size()) {
    throw DomainError("incomplete_gamma_ladder: output spans differ in length");
  }
  if (lower.empty()) {
    return;
  }
  auto [p, q] = incomplete_gamma_pair(x, first);
  lower[0] = p;
  upper[0] = q;
  if (x == 0.0 || std::isinf(x)) {
    for (std::size_t i = 1; i < lower.size(); ++i) {
      lower[i] = p;
      upper[i] = q;
    }
    return;
  }
  const double log_x = std::log(x);
  double log_term = log_poisson_term(x, first);
  for (std::size_t i = 1; i < lower.size(); ++i) {
    const double term = std::exp(log_term);
    p = std::max(p - term, 0.0);
    q = std::min(q + term, 1.0);
    lower[i] = p;
    upper[i] = q;
    const int n = first + static_cast<int>(i);
    log_term += log_x - std::log(static_cast<double>(n));
  }
}

double negbin_pmf(int rho, int k, double eps) {
  check_negbin_args(k, eps);
  if (rho < k) {
    throw DomainError("negbin_pmf: attempt count " + std::to_string(rho) + " is below K = " +
                      std::to_string(k));
  }
  if (eps == 0.0) {
    return rho == k ? 1.0 : 0.0;
  }
  const int failures = rho - k;
  if (k <= 50 && rho <= 10'000) {
    double binom = 1.0;
    const int r = k - 1;
    for (int i = 1; i <= r; ++i) {
      binom *= static_cast<double>(rho - 1 - r + i) / static_cast<double>(i);
    }
    return binom * std::pow(eps, failures) * std::pow(1.0 - eps, k);
  }
  const double log_pmf = log_binomial(rho - 1, k - 1) + static_cast<double>(failures) * std::log(eps) +
                         static_cast<double>(k) * std::log1p(-eps);
  return std::exp(log_pmf);
}

double negbin_tail(int rho, int k, double eps) {
  check_negbin_args(k, eps);
  if (rho < k) {
    return 1.0;
  }
  if (eps == 0.0) {
    return 0.0;
  }
  // Fewer than k successes among rho Bernoulli(1 - eps) attempts.
  const double log_p = std::log1p(-eps);
  const double log_q = std::log(eps);
  double tail = 0.0;
  for (int j = 0; j < k; ++j) {
    tail += std::exp(log_binomial(rho, j) + static_cast<double>(j) * log_p +
                     static_cast<double>(rho - j) * log_q);
  }
  return std::min(tail, 1.0);
}

TruncationPlan make_truncation_plan(int k, double eps, double tol) {
  check_negbin_args(k, eps);
  if (!(tol > 0.0 && tol < 1.0)) {
    throw DomainError("make_truncation_plan: tolerance must lie in (0, 1), got " + std::to_string(tol));
  }

  int rho_max = k;
  if (negbin_tail(k, k, eps) >= tol) {
    int lo = k;  // tail(lo) >= tol
    int step = 1;
    int hi = k + step;
    while (negbin_tail(hi, k, eps) >= tol) {
      lo = hi;
      if (step > kMaxPlanSize) {
        throw DomainError("make_truncation_plan: series needs more than " + std::to_string(kMaxPlanSize) +
                          " terms; erasure probability too close to 1");
      }
      step *= 2;
      hi = k + step;
    }
    while (hi - lo > 1) {
      const int mid = lo + (hi - lo) / 2;
      if (negbin_tail(mid, k, eps) >= tol) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    rho_max = hi;
  }

  TruncationPlan plan;
  plan.rho_min = k;
  plan.rho_max = rho_max;
  plan.tail_mass = negbin_tail(rho_max, k, eps);
  plan.weights.reserve(static_cast<std::size_t>(rho_max - k + 1));
  for (int rho = k; rho <= rho_max; ++rho) {
    plan.weights.push_back(negbin_pmf(rho, k, eps));
  }
  return plan;
}

}  // namespace timely
