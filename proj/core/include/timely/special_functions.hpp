#ifndef TIMELY_SPECIAL_FUNCTIONS_HPP
#define TIMELY_SPECIAL_FUNCTIONS_HPP

#include <span>
#include <vector>

/**
 * \file
 * \brief Integer-shape incomplete Gamma functions and the negative-binomial
 * law of the number of channel attempts needed for K deliveries.
 */

namespace timely {

/// Default tail mass left out when an infinite negative-binomial series is truncated.
inline constexpr double kDefaultSeriesTol = 1e-12;

/// ln(n!) for n >= 0. Table lookup for small n, Stirling series above.
double log_factorial(int n);

/// Lower regularized incomplete Gamma function for an integer shape,
/// gamma(x, n) = 1 - e^{-x} sum_{j<n} x^j / j!.
/// Throws DomainError when x < 0 (or NaN) or n < 1.
double reg_incomplete_gamma(double x, int n);

/// Complement 1 - reg_incomplete_gamma(x, n), computed without cancellation
/// when the result is small.
double reg_incomplete_gamma_upper(double x, int n);

/// Lower and upper regularized incomplete Gamma values for the shapes
/// first, first + 1, ..., first + lower.size() - 1 at a fixed x. Adjacent
/// shapes differ by the Poisson term e^{-x} x^n / n!, so one direct
/// evaluation seeds the whole ladder.
void incomplete_gamma_ladder(double x, int first, std::span<double> lower, std::span<double> upper);

/// P(rho attempts are needed for k successes) when each attempt is erased
/// independently with probability eps:
/// C(rho - 1, k - 1) eps^(rho - k) (1 - eps)^k.
double negbin_pmf(int rho, int k, double eps);

/// P(more than rho attempts are needed for k successes).
double negbin_tail(int rho, int k, double eps);

/// Finite support used to evaluate series over the attempt count.
struct TruncationPlan {
  int rho_min = 1;           ///< Equals K.
  int rho_max = 1;           ///< Last attempt count kept.
  double tail_mass = 0.0;    ///< P(attempts > rho_max).
  std::vector<double> weights;  ///< weights[i] = negbin_pmf(rho_min + i, K, eps).

  int size() const noexcept { return rho_max - rho_min + 1; }
};

/// Smallest rho_max whose negative-binomial tail mass is strictly below tol.
/// Throws DomainError for eps outside [0, 1) (eps = 1 never terminates), k < 1
/// or tol outside (0, 1).
TruncationPlan make_truncation_plan(int k, double eps, double tol = kDefaultSeriesTol);

}  // namespace timely

#endif  // TIMELY_SPECIAL_FUNCTIONS_HPP
