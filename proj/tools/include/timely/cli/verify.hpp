#ifndef TIMELY_CLI_VERIFY_HPP
#define TIMELY_CLI_VERIFY_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "timely/analytic.hpp"

namespace timely::cli {

/// One comparison of an analytic value against an independent estimate.
/// Monte Carlo checks pass when |z| < z_limit; exact checks compare to a
/// relative tolerance and report z = 0.
struct VerifyCheck {
  std::string name;
  double analytic = 0.0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  double z = 0.0;
  bool exact = false;
  bool passed = false;
};

struct VerifyOptions {
  std::int64_t draws = 1'000'000;
  std::uint64_t seed = 1;
  std::vector<double> taus;  ///< Thresholds to check h and f at; empty means {mean epoch service}.
  double z_limit = 3.0;
  double exact_rel_tol = 1e-12;
  int chunks = 16;  ///< Independent substreams; fixed so results do not depend on the thread count.
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  std::vector<std::string> warnings;
  bool passed() const;
};

/// Monte Carlo of E[(tau - Y)^+] and E[exp(-2 theta_k max(tau, Y))] for every
/// process, where Y is drawn by simulating every attempt of one epoch.
std::vector<VerifyCheck> check_epoch_functionals(const AnalyticContext& ctx, double tau, std::int64_t draws,
                                                 std::uint64_t seed, double z_limit = 3.0, int chunks = 16);

/// Full battery: epoch functionals at every tau, mean epoch service, the
/// attempt-count distribution, OU transition moments and, when eps = 0,
/// exact comparisons against the Erlang closed forms.
VerifyReport run_verify(const AnalyticContext& ctx, const VerifyOptions& options);

void print_report(std::ostream& out, const VerifyReport& report);

}  // namespace timely::cli

#endif  // TIMELY_CLI_VERIFY_HPP
