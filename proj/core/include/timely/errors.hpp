#ifndef TIMELY_ERRORS_HPP
#define TIMELY_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace timely {

/// Precondition violated by an argument (negative time, index out of range, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A problem instance or input document failed validation. Carries every
/// violation found, not only the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Root finding failed. When the failure is non-convergence the best iterate
/// seen so far is attached.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
  SolverError(const std::string& what, double best_beta, double best_tau, double best_residual)
      : std::runtime_error(what),
        has_iterate_(true),
        best_beta_(best_beta),
        best_tau_(best_tau),
        best_residual_(best_residual) {}

  bool has_iterate() const noexcept { return has_iterate_; }
  double best_beta() const noexcept { return best_beta_; }
  double best_tau() const noexcept { return best_tau_; }
  double best_residual() const noexcept { return best_residual_; }

 private:
  bool has_iterate_ = false;
  double best_beta_ = 0.0;
  double best_tau_ = 0.0;
  double best_residual_ = 0.0;
};

}  // namespace timely

#endif  // TIMELY_ERRORS_HPP
