#include <doctest.h>

#include <cmath>
#include <future>

#include "oracles.hpp"
#include "timely/errors.hpp"
#include "timely/optimizer.hpp"

using namespace timely;

namespace {

SystemConfig two_process(double eps, double f_max) { return {2, {0.1, 0.5}, {1.0, 2.0}, 1.0, eps, f_max}; }

SystemConfig symmetric(int k, double f_max) {
  return {k, std::vector<double>(k, 0.5), std::vector<double>(k, 1.0), 1.0, 0.0, f_max};
}

}  // namespace

TEST_SUITE("optimizer") {

TEST_CASE("constraint level") {
  CHECK(constraint_level(two_process(0.0, 1.5)) == 0.0);
  CHECK(constraint_level(two_process(0.6, 1.5)) == 0.0);
  CHECK(constraint_level(two_process(0.0, 0.5)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(constraint_level(two_process(0.5, 0.5)) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(constraint_level(two_process(0.3, 1.0)) == 0.0);
}

TEST_CASE("waiting") {
  CHECK(waiting(3.0, 2.0) == 0.0);
  CHECK(waiting(0.5, 2.0) == 1.5);
  CHECK(waiting(1.7, 1.7) == 0.0);
}

TEST_CASE("single process without erasures matches an independent Dinkelbach iteration") {
  for (auto [theta, s2, mu] : {std::tuple{0.5, 1.0, 1.0}, std::tuple{0.1, 2.0, 1.0}, std::tuple{1.5, 0.7, 2.5}}) {
    const SystemConfig c{1, {theta}, {s2}, mu, 0.0, 2.0 * mu};
    const auto policy = solve(c);
    const auto ref = oracle::single_process_optimum(theta, s2, mu);
    CAPTURE(theta);
    CHECK(policy.beta_star == doctest::Approx(ref.beta).epsilon(1e-9));
    CHECK(std::abs(policy.tau_star - ref.tau) < 1e-7);
    CHECK_FALSE(policy.binding);
    CHECK(policy.tau_star == policy.tau_unconstrained);
  }
  const auto p = solve(SystemConfig{1, {0.5}, {1.0}, 1.0, 0.0, 1.5});
  CHECK(p.tau_star == doctest::Approx(0.646150).epsilon(1e-6));
  CHECK(p.beta_star == doctest::Approx(0.737970).epsilon(1e-6));
}

TEST_CASE("binding budget at f_max = 0.5, eps = 0") {
  const auto c = two_process(0.0, 0.5);
  const auto policy = solve(c);
  CHECK(policy.binding);
  const AnalyticContext ctx(c);
  CHECK(std::abs(policy.tau_star - h_inverse(ctx, 2.0)) < 1e-10);
  const double reference = oracle::root([](double t) { return oracle::erlang_shortfall(2, 1.0, t) - 2.0; }, 0.0, 50.0);
  CHECK(std::abs(policy.tau_star - reference) < 1e-9);
}

TEST_CASE("two-process crossing near eps = 0.7 at f_max = 0.95") {
  CHECK_FALSE(solve(two_process(0.0, 0.95)).binding);
  CHECK_FALSE(solve(two_process(0.6, 0.95)).binding);
  CHECK_FALSE(solve(two_process(0.65, 0.95)).binding);
  CHECK(solve(two_process(0.75, 0.95)).binding);
  CHECK(solve(two_process(0.9, 0.95)).binding);
}

TEST_CASE("two-process reference values") {
  const auto a = solve(two_process(0.3, 0.95));
  CHECK(a.beta_star == doctest::Approx(3.797899).epsilon(1e-6));
  CHECK(a.tau_star == doctest::Approx(1.631694).epsilon(1e-6));
  CHECK(a.tau_constrained == doctest::Approx(1.437319).epsilon(1e-6));
  const auto b = solve(two_process(0.3, 0.5));
  CHECK(b.beta_star == doctest::Approx(4.352294).epsilon(1e-6));
  CHECK(b.tau_star == doctest::Approx(5.540590).epsilon(1e-6));
  CHECK(b.binding);
}

TEST_CASE("policy invariants on random instances") {
  oracle::ConfigGen gen(404);
  for (int i = 0; i < 40; ++i) {
    const auto c = gen.config(5, 0.85);
    const auto p = solve(c);
    const AnalyticContext ctx(c);
    CAPTURE(i);
    CHECK(p.tau_star == std::max(p.tau_unconstrained, p.tau_constrained));
    CHECK(p.beta_star > 0.0);
    CHECK(p.beta_star < ctx.stationary_total());
    CHECK(p.residual < 1e-9);
    CHECK(p.binding == (p.tau_constrained > p.tau_unconstrained));
    CHECK(std::abs(policy_mse(ctx, p.tau_star) - p.beta_star) < 1e-9);
    CHECK(p.warnings.empty());
    if (c.f_max >= c.mu) {
      CHECK_FALSE(p.binding);
      CHECK(p.tau_constrained == 0.0);
    }
  }
}

TEST_CASE("policy MSE is minimized at tau* without a budget") {
  oracle::ConfigGen gen(9);
  for (int i = 0; i < 8; ++i) {
    auto c = gen.config(3, 0.7);
    c.f_max = 2.0 * c.mu;
    const auto p = solve(c);
    const AnalyticContext ctx(c);
    const double best = policy_mse(ctx, p.tau_star);
    const double hi = std::max(5.0 * p.tau_star, 1.0);
    for (int j = 0; j <= 200; ++j) {
      CHECK(policy_mse(ctx, hi * j / 200.0) >= best - 1e-9);
    }
  }
}

TEST_CASE("policy MSE saturates at the stationary variance") {
  const auto c = two_process(0.3, 0.95);
  const AnalyticContext ctx(c);
  CHECK(policy_mse(ctx, 1e6) == doctest::Approx(ctx.stationary_total()).epsilon(1e-4));
  CHECK(policy_mse(c, 2.0) == policy_mse(ctx, 2.0));
}

TEST_CASE("tau* is nondecreasing in eps") {
  for (double f_max : {0.5, 0.95, 1.5}) {
    double previous = 0.0;
    for (int i = 0; i <= 18; ++i) {
      const auto p = solve(two_process(0.05 * i, f_max));
      CAPTURE(f_max);
      CAPTURE(i);
      CHECK(p.tau_star >= previous - 1e-10);
      previous = p.tau_star;
    }
  }
}

TEST_CASE("symmetric system: tau* and beta* grow with K") {
  for (double f_max : {0.5, 0.95, 1.5}) {
    double tau = 0.0;
    double beta = 0.0;
    for (int k = 1; k <= 8; ++k) {
      const auto p = solve(symmetric(k, f_max));
      CHECK(p.tau_star >= tau - 1e-10);
      CHECK(p.beta_star > beta);
      tau = p.tau_star;
      beta = p.beta_star;
    }
  }
}

TEST_CASE("binding threshold does not depend on theta_2") {
  const SystemConfig base{2, {0.5, 0.1}, {2.0, 1.0}, 1.0, 0.0, 0.5};
  const double tau = solve(base).tau_star;
  for (int i = 2; i <= 10; ++i) {
    auto c = base;
    c.theta[1] = 0.1 * i;
    CHECK(std::abs(solve(c).tau_star - tau) < 1e-8);
  }
}

TEST_CASE("unconstrained threshold and beta* fall with theta_2 (caption instance)") {
  const SystemConfig base{2, {1.0, 0.1}, {1.0, 1.0}, 1.0, 0.0, 1.5};
  double tau = 1e300;
  double beta = 1e300;
  for (int i = 1; i <= 10; ++i) {
    auto c = base;
    c.theta[1] = 0.1 * i;
    const auto p = solve(c);
    CHECK(p.tau_star <= tau + 1e-10);
    CHECK(p.beta_star < beta);
    tau = p.tau_star;
    beta = p.beta_star;
  }
}

TEST_CASE("unconstrained threshold is zero exactly when beta* <= G(0)") {
  oracle::ConfigGen gen(41);
  for (int i = 0; i < 30; ++i) {
    auto c = gen.config(3, 0.8);
    c.f_max = 1e6;
    const auto p = solve(c);
    const AnalyticContext ctx(c);
    CHECK((p.tau_unconstrained == 0.0) == (p.beta_star <= g_fn(ctx, 0.0)));
    CHECK(p.tau_star == p.tau_unconstrained);
  }
}

TEST_CASE("solver errors") {
  SolverSettings s;
  s.max_iter = 3;
  try {
    solve(two_process(0.3, 0.95), s);
    FAIL("expected SolverError");
  } catch (const SolverError& e) {
    CHECK(e.has_iterate());
    CHECK(e.best_residual() >= 1e-9);
    CHECK(e.best_beta() > 0.0);
  }
  s = {};
  s.beta_tol = 0.0;
  CHECK_THROWS_AS(solve(two_process(0.3, 0.95), s), ConfigError);
  s = {};
  s.series_tol = 1.0;
  CHECK_THROWS_AS(solve(two_process(0.3, 0.95), s), ConfigError);
  CHECK_THROWS_AS(solve(two_process(1.0, 0.95)), ConfigError);
}

TEST_CASE("concurrent solves agree with serial ones") {
  std::vector<std::future<OptimalPolicy>> runs;
  for (int i = 0; i < 6; ++i) {
    runs.push_back(std::async(std::launch::async, [i] { return solve(two_process(0.1 * i, 0.95)); }));
  }
  for (int i = 0; i < 6; ++i) {
    const auto parallel = runs[static_cast<std::size_t>(i)].get();
    const auto serial = solve(two_process(0.1 * i, 0.95));
    CHECK(parallel.beta_star == serial.beta_star);
    CHECK(parallel.tau_star == serial.tau_star);
  }
}

}  // TEST_SUITE
