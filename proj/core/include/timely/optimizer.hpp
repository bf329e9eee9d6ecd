#ifndef TIMELY_OPTIMIZER_HPP
#define TIMELY_OPTIMIZER_HPP

#include <string>
#include <vector>

#include "timely/analytic.hpp"
#include "timely/model.hpp"

/**
 * \file
 * \brief Optimal threshold waiting policy for maximum-age-first sampling.
 *
 * The optimal policy waits w(z) = [tau* - z]^+ at the start of every epoch,
 * where z is the previous epoch's total service time. The threshold is
 * tau* = max(G^{-1}(beta*), H^{-1}(c)) with c the sampling-budget level
 * (see constraint_level) and beta* the optimal long-term average sum MSE,
 * found as the root of the Dinkelbach objective p(beta) = 0.
 */

namespace timely {

struct SolverSettings {
  double beta_tol = 1e-9;                ///< Largest accepted |p(beta*, tau*)|.
  double tau_tol = kDefaultTauTol;       ///< Absolute tolerance of G and H inversions.
  double series_tol = kDefaultSeriesTol; ///< Negative-binomial tail mass left out.
  int max_iter = 200;                    ///< Bisection steps on beta.

  bool operator==(const SolverSettings&) const = default;
};

/// Throws ConfigError unless every setting is positive.
void require_valid(const SolverSettings& settings);

struct OptimalPolicy {
  double tau_star = 0.0;
  double beta_star = 0.0;
  double tau_unconstrained = 0.0;  ///< G^{-1}(beta*), clamped at 0.
  double tau_constrained = 0.0;    ///< H^{-1}(c).
  bool binding = false;            ///< tau_constrained > tau_unconstrained.
  double residual = 0.0;           ///< |p(beta*, tau*)|.
  int iterations = 0;
  std::vector<std::string> warnings;
};

/// c = [K/f_max - K/mu]^+ / (1 - eps), the least mean wait per epoch that
/// keeps the long-run sampling frequency at or below f_max. Zero iff f_max >= mu.
double constraint_level(const SystemConfig& config);

/// Optimal threshold and minimum long-term average sum MSE.
/// Throws ConfigError for an invalid config or settings and SolverError when
/// the root bracket has no sign change or bisection fails to reach beta_tol.
OptimalPolicy solve(const SystemConfig& config, const SolverSettings& settings = {});

/// Threshold wait [tau - z]^+ after an epoch with total service time z.
double waiting(double z, double tau);

/// Long-term average sum MSE achieved by threshold tau (optimal or not).
double policy_mse(const AnalyticContext& ctx, double tau);
double policy_mse(const SystemConfig& config, double tau);

}  // namespace timely

#endif  // TIMELY_OPTIMIZER_HPP
