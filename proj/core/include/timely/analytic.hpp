#ifndef TIMELY_ANALYTIC_HPP
#define TIMELY_ANALYTIC_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "timely/model.hpp"
#include "timely/special_functions.hpp"

/**
 * \file
 * \brief Closed-form functionals of the threshold waiting policy.
 *
 * Notation: Y ~ exp(mu) is one service time and Y_epoch is the total service
 * time of an epoch, i.e. the sum of rho exp(mu) services where rho, the
 * number of attempts needed for K deliveries, is negative binomial.
 *
 * - G(tau)  = sum_k sigma_k^2/(2 theta_k) (1 - E[e^{-2 theta_k Y}] e^{-2 theta_k tau})
 * - H(tau)  = E[(tau - Y_epoch)^+], the mean wait under threshold tau
 * - F_k(tau) = E[e^{-2 theta_k max(tau, Y_epoch)}]
 */

namespace timely {

/// Default absolute tolerance of the bisection inversions, in time units.
inline constexpr double kDefaultTauTol = 1e-12;

/// Validated configuration plus the precomputed pieces every functional needs.
/// Immutable after construction.
class AnalyticContext {
 public:
  explicit AnalyticContext(SystemConfig config, double series_tol = kDefaultSeriesTol);

  const SystemConfig& config() const noexcept { return config_; }
  const TruncationPlan& plan() const noexcept { return plan_; }

  /// E[e^{-2 theta_k Y}] = mu / (mu + 2 theta_k), one entry per process.
  std::span<const double> laplace_service() const noexcept { return laplace_service_; }

  /// sum_k sigma_k^2 / (2 theta_k), the supremum of G and of any average MSE.
  double stationary_total() const noexcept { return stationary_total_; }

 private:
  SystemConfig config_;
  TruncationPlan plan_;
  std::vector<double> laplace_service_;
  double stationary_total_ = 0.0;
};

double g_fn(const AnalyticContext& ctx, double tau);

/// Smallest tau >= 0 with G(tau) = beta; 0 when beta <= G(0).
/// Throws DomainError when beta >= stationary_total().
double g_inverse(const AnalyticContext& ctx, double beta, double tau_tol = kDefaultTauTol);

double h_fn(const AnalyticContext& ctx, double tau);

/// tau with H(tau) = c. H is unbounded, so every c >= 0 is attainable.
double h_inverse(const AnalyticContext& ctx, double c, double tau_tol = kDefaultTauTol);

/// F_k(tau) for the zero-based process index `process`.
double f_fn(const AnalyticContext& ctx, double tau, std::size_t process);

/// P(Y_epoch <= tau); also the derivative of H.
double epoch_service_cdf(const AnalyticContext& ctx, double tau);

/// E[Y_epoch] = K / (mu (1 - eps)).
double mean_epoch_service(const AnalyticContext& ctx);

/// H, P(Y_epoch <= tau) and every F_k from a single pass over the series.
struct EpochFunctionals {
  double h = 0.0;
  double cdf = 0.0;
  std::vector<double> f;
};
EpochFunctionals epoch_functionals(const AnalyticContext& ctx, double tau);

/// Numerator and denominator of the long-term average sum MSE under
/// threshold tau. The denominator is the mean epoch length H(tau) + E[Y_epoch].
struct ObjectiveParts {
  double numerator = 0.0;
  double denominator = 0.0;
};
ObjectiveParts objective_parts(const AnalyticContext& ctx, double tau);

/// Dinkelbach objective numerator(tau) - beta * denominator(tau). The
/// coupling of tau to beta is left to the caller.
double dinkelbach_p(const AnalyticContext& ctx, double beta, double tau);

}  // namespace timely

#endif  // TIMELY_ANALYTIC_HPP
