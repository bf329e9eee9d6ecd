#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "timely/analytic.hpp"
#include "timely/errors.hpp"
#include "timely/optimizer.hpp"

using namespace timely;

namespace {

SystemConfig single(double theta, double s2, double mu, double eps) { return {1, {theta}, {s2}, mu, eps, 10.0}; }

SystemConfig homogeneous(int k, double theta, double s2, double mu, double eps) {
  return {k, std::vector<double>(k, theta), std::vector<double>(k, s2), mu, eps, 10.0};
}

SystemConfig two_process(double eps = 0.3, double f_max = 0.95) { return {2, {0.1, 0.5}, {1.0, 2.0}, 1.0, eps, f_max}; }

}  // namespace

TEST_SUITE("analytic") {

TEST_CASE("context caches the service Laplace transform") {
  const AnalyticContext ctx(two_process());
  REQUIRE(ctx.laplace_service().size() == 2);
  CHECK(std::abs(ctx.laplace_service()[0] - 1.0 / 1.2) < 1e-15);
  CHECK(std::abs(ctx.laplace_service()[1] - 0.5) < 1e-15);
  CHECK(ctx.plan().rho_min == 2);
  CHECK(ctx.stationary_total() == doctest::Approx(7.0).epsilon(1e-15));
  CHECK_THROWS_AS(AnalyticContext(SystemConfig{}), ConfigError);
}

TEST_CASE("G: single process at tau = 0") {
  const AnalyticContext ctx(single(0.5, 1.0, 1.0, 0.0));
  CHECK(g_fn(ctx, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  std::mt19937_64 rng(1);
  std::exponential_distribution<double> y(1.0);
  oracle::Mean m;
  for (int i = 0; i < 1'000'000; ++i) {
    m.add(mse_instant(0.5, 1.0, y(rng)));
  }
  CHECK(std::abs(m.z(0.5)) < 3.0);
}

TEST_CASE("G: limit and two-process value at tau = 1") {
  const AnalyticContext ctx(two_process());
  CHECK(g_fn(ctx, 400.0) == doctest::Approx(7.0).epsilon(1e-14));

  std::mt19937_64 rng(2);
  std::exponential_distribution<double> y(1.0);
  oracle::Mean m;
  for (int i = 0; i < 10'000'000; ++i) {
    const double age = 1.0 + y(rng);
    m.add(mse_instant(0.1, 1.0, age) + mse_instant(0.5, 2.0, age));
  }
  CHECK(std::abs(m.z(g_fn(ctx, 1.0))) < 3.0);
}

TEST_CASE("G: closed-form identity") {
  oracle::ConfigGen gen(21);
  for (int i = 0; i < 50; ++i) {
    const auto c = gen.config();
    const AnalyticContext ctx(c);
    const double tau = gen.uniform(0.0, 8.0);
    double expected = 0.0;
    for (int k = 0; k < c.k; ++k) {
      expected += c.sigma_sq[k] / (2 * c.theta[k]) * (1.0 - ctx.laplace_service()[k] * std::exp(-2 * c.theta[k] * tau));
    }
    CHECK(g_fn(ctx, tau) == doctest::Approx(expected).epsilon(1e-15));
  }
}

TEST_CASE("G inverse") {
  const AnalyticContext ctx(two_process());
  CHECK(g_inverse(ctx, g_fn(ctx, 0.0)) == 0.0);
  CHECK(g_inverse(ctx, 0.1) == 0.0);
  CHECK(std::abs(g_inverse(ctx, g_fn(ctx, 2.0)) - 2.0) < 1e-10);
  CHECK_THROWS_AS(g_inverse(ctx, 7.0), DomainError);
  CHECK_THROWS_AS(g_inverse(ctx, 8.0), DomainError);

  const AnalyticContext one(single(0.5, 1.0, 1.0, 0.0));
  CHECK(g_inverse(one, 0.75) == doctest::Approx(std::log(2.0)).epsilon(1e-11));
}

TEST_CASE("G and H round-trips on grids") {
  oracle::ConfigGen gen(8);
  for (int i = 0; i < 10; ++i) {
    const AnalyticContext ctx(gen.config());
    for (double tau = 0.05; tau < 12.0; tau *= 1.6) {
      // G flattens out, so the forward error is bounded by its conditioning.
      const double slope = (g_fn(ctx, tau * 1.001) - g_fn(ctx, tau * 0.999)) / (0.002 * tau);
      const double back = g_inverse(ctx, g_fn(ctx, tau));
      CHECK(std::abs(back - tau) < 1e-10 + 1e-14 * ctx.stationary_total() / slope);
      CHECK(std::abs(g_fn(ctx, back) - g_fn(ctx, tau)) < 1e-11 * ctx.stationary_total());
      CHECK(std::abs(h_inverse(ctx, h_fn(ctx, tau)) - tau) < 1e-10);
      CHECK(std::abs(h_fn(ctx, h_inverse(ctx, tau)) - tau) < 1e-10);
    }
  }
}

TEST_CASE("H: examples") {
  const AnalyticContext one(single(0.5, 1.0, 1.0, 0.0));
  CHECK(h_fn(one, 0.0) == 0.0);
  CHECK(h_fn(one, 1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(h_fn(one, 1.0) == doctest::Approx(0.367879).epsilon(1e-6));

  const AnalyticContext two(homogeneous(2, 0.5, 1.0, 1.0, 0.5));
  std::mt19937_64 rng(3);
  oracle::Mean m;
  for (int i = 0; i < 10'000'000; ++i) {
    m.add(std::max(3.0 - oracle::draw_epoch(2, 1.0, 0.5, rng).service, 0.0));
  }
  CHECK(std::abs(m.z(h_fn(two, 3.0))) < 3.0);
}

TEST_CASE("H: asymptote and monotonicity") {
  oracle::ConfigGen gen(13);
  for (int i = 0; i < 20; ++i) {
    const AnalyticContext ctx(gen.config());
    const double mean = mean_epoch_service(ctx);
    CHECK(std::abs(h_fn(ctx, 60.0 * mean + 50.0) - (60.0 * mean + 50.0 - mean)) < 1e-9);
    double previous = h_fn(ctx, 0.0);
    for (double tau = 0.1; tau < 20.0; tau += 0.7) {
      const double h = h_fn(ctx, tau);
      CHECK(h > previous);
      previous = h;
    }
  }
}

TEST_CASE("H derivative is the epoch service cdf") {
  oracle::ConfigGen gen(29);
  for (int i = 0; i < 20; ++i) {
    const AnalyticContext ctx(gen.config());
    for (double tau = 0.2; tau < 15.0; tau *= 1.9) {
      const double d = 1e-5;
      const double slope = (h_fn(ctx, tau + d) - h_fn(ctx, tau - d)) / (2 * d);
      CHECK(slope >= 0.0);
      CHECK(slope <= 1.0);
      CHECK(std::abs(slope - epoch_service_cdf(ctx, tau)) < 1e-6);
    }
  }
}

TEST_CASE("H inverse") {
  const AnalyticContext ctx(two_process());
  CHECK(h_inverse(ctx, 0.0) == 0.0);
  CHECK(std::abs(h_inverse(ctx, h_fn(ctx, 5.0)) - 5.0) < 1e-10);
  CHECK_THROWS_AS(h_inverse(ctx, -1.0), DomainError);

  // K = 2, eps = 0: Erlang(2) shortfall solved by an independent bracketing root finder.
  const AnalyticContext two(two_process(0.0, 0.5));
  const double reference = oracle::root([](double t) { return oracle::erlang_shortfall(2, 1.0, t) - 2.0; }, 0.0, 50.0);
  const double tau = h_inverse(two, 2.0);
  CHECK(std::abs(tau - reference) < 1e-10);
  CHECK(tau == doctest::Approx(3.878413).epsilon(1e-6));

  std::mt19937_64 rng(4);
  std::gamma_distribution<double> erlang(2.0, 1.0);
  oracle::Mean m;
  for (int i = 0; i < 1'000'000; ++i) {
    m.add(std::max(tau - erlang(rng), 0.0));
  }
  CHECK(std::abs(m.z(2.0)) < 3.0);
}

TEST_CASE("F: examples") {
  const AnalyticContext one(single(0.5, 1.0, 1.0, 0.0));
  CHECK(f_fn(one, 0.0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(f_fn(one, 400.0, 0) < 1e-100);
  CHECK_THROWS_AS(f_fn(one, 1.0, 1), DomainError);
  CHECK_THROWS_AS(f_fn(one, -1.0, 0), DomainError);

  const AnalyticContext two(homogeneous(2, 0.5, 1.0, 1.0, 0.3));
  std::mt19937_64 rng(5);
  oracle::Mean m;
  for (int i = 0; i < 10'000'000; ++i) {
    m.add(std::exp(-std::max(2.0, oracle::draw_epoch(2, 1.0, 0.3, rng).service)));
  }
  CHECK(std::abs(m.z(f_fn(two, 2.0, 0))) < 3.0);
  CHECK(f_fn(two, 2.0, 0) == f_fn(two, 2.0, 1));
}

TEST_CASE("F: decreasing in tau, starts at the epoch Laplace transform") {
  const AnalyticContext ctx(two_process(0.4));
  for (std::size_t k = 0; k < 2; ++k) {
    // E[e^{-s Y}] for Y the sum of a negative binomial number of exp(mu) draws.
    const double s = 2.0 * ctx.config().theta[k];
    double laplace = 0.0;
    for (std::size_t i = 0; i < ctx.plan().weights.size(); ++i) {
      laplace += ctx.plan().weights[i] * std::pow(1.0 / (1.0 + s), 2.0 + static_cast<double>(i));
    }
    CHECK(f_fn(ctx, 0.0, k) == doctest::Approx(laplace).epsilon(1e-12));
    double previous = f_fn(ctx, 0.0, k);
    for (double tau = 0.25; tau < 30.0; tau += 0.75) {
      const double f = f_fn(ctx, tau, k);
      CHECK(f < previous);
      CHECK(f > 0.0);
      previous = f;
    }
  }
}

TEST_CASE("H and F match Monte Carlo on random tuples") {
  oracle::ConfigGen gen(20261016);
  for (int t = 0; t < 20; ++t) {
    const auto c = gen.config(4, 0.8);
    const double tau = gen.uniform(0.0, 10.0);
    const AnalyticContext ctx(c);
    oracle::Mean h;
    std::vector<oracle::Mean> f(static_cast<std::size_t>(c.k));
    for (int i = 0; i < 1'000'000; ++i) {
      const double y = oracle::draw_epoch(c.k, c.mu, c.eps, gen.rng()).service;
      h.add(std::max(tau - y, 0.0));
      for (int k = 0; k < c.k; ++k) {
        f[static_cast<std::size_t>(k)].add(std::exp(-2.0 * c.theta[k] * std::max(tau, y)));
      }
    }
    CAPTURE(t);
    CAPTURE(tau);
    CHECK(std::abs(h.z(h_fn(ctx, tau))) < 3.0);
    for (int k = 0; k < c.k; ++k) {
      CHECK(std::abs(f[static_cast<std::size_t>(k)].z(f_fn(ctx, tau, static_cast<std::size_t>(k)))) < 3.0);
    }
  }
}

TEST_CASE("epoch functionals agree with the individual functions") {
  oracle::ConfigGen gen(77);
  for (int i = 0; i < 10; ++i) {
    const AnalyticContext ctx(gen.config());
    const double tau = gen.uniform(0.0, 6.0);
    const auto fun = epoch_functionals(ctx, tau);
    CHECK(fun.h == doctest::Approx(h_fn(ctx, tau)).epsilon(1e-15));
    CHECK(fun.cdf == doctest::Approx(epoch_service_cdf(ctx, tau)).epsilon(1e-15));
    for (std::size_t k = 0; k < fun.f.size(); ++k) {
      CHECK(fun.f[k] == doctest::Approx(f_fn(ctx, tau, k)).epsilon(1e-15));
    }
  }
}

TEST_CASE("mean epoch service") {
  CHECK(mean_epoch_service(AnalyticContext(homogeneous(2, 0.5, 1.0, 1.0, 0.0))) == 2.0);
  CHECK(mean_epoch_service(AnalyticContext(homogeneous(2, 0.5, 1.0, 1.0, 0.5))) == 4.0);
  CHECK(mean_epoch_service(AnalyticContext(homogeneous(1, 0.5, 1.0, 2.0, 0.5))) == 1.0);

  for (auto [k, mu, eps, expected] : {std::tuple{2, 1.0, 0.5, 4.0}, std::tuple{1, 2.0, 0.5, 1.0}}) {
    std::mt19937_64 rng(6 + k);
    oracle::Mean m;
    for (int i = 0; i < 10'000'000; ++i) {
      m.add(oracle::draw_epoch(k, mu, eps, rng).service);
    }
    CHECK(std::abs(m.z(expected)) < 3.0);
  }
}

TEST_CASE("Dinkelbach objective") {
  const AnalyticContext ctx(two_process());
  for (double tau : {0.0, 0.5, 2.0, 9.0}) {
    CHECK(dinkelbach_p(ctx, 0.0, tau) > 0.0);
    CHECK(dinkelbach_p(ctx, ctx.stationary_total(), tau) < 0.0);
    // Affine and decreasing in beta with slope -(H + E[Y]).
    const double slope = -(h_fn(ctx, tau) + mean_epoch_service(ctx));
    const double p0 = dinkelbach_p(ctx, 1.0, tau);
    const double p1 = dinkelbach_p(ctx, 2.5, tau);
    const double p2 = dinkelbach_p(ctx, 4.0, tau);
    CHECK((p1 - p0) / 1.5 == doctest::Approx(slope).epsilon(1e-12));
    CHECK((p2 - p1) / 1.5 == doctest::Approx(slope).epsilon(1e-12));
  }
  const auto policy = solve(two_process());
  CHECK(std::abs(dinkelbach_p(ctx, policy.beta_star, policy.tau_star)) < 1e-9);
}

TEST_CASE("analytic functions reject negative thresholds") {
  const AnalyticContext ctx(two_process());
  CHECK_THROWS_AS(g_fn(ctx, -0.1), DomainError);
  CHECK_THROWS_AS(h_fn(ctx, -0.1), DomainError);
  CHECK_THROWS_AS(epoch_service_cdf(ctx, -0.1), DomainError);
}

}  // TEST_SUITE
