#include "timely/cli/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <random>
#include <thread>

#include "timely/errors.hpp"
#include "timely/simulator.hpp"

namespace timely::cli {

namespace {

constexpr std::int64_t kLowPowerDraws = 10'000;
constexpr double kMinExpectedCount = 5.0;

struct Moments {
  double n = 0.0;
  double sum = 0.0;
  double sumsq = 0.0;

  void add(double x) {
    n += 1.0;
    sum += x;
    sumsq += x * x;
  }
  void merge(const Moments& o) {
    n += o.n;
    sum += o.sum;
    sumsq += o.sumsq;
  }
  double mean() const { return sum / n; }
  double stderr_of_mean() const {
    if (n < 2.0) {
      return 0.0;
    }
    const double m = mean();
    return std::sqrt(std::max(sumsq - n * m * m, 0.0) / (n - 1.0) / n);
  }
};

struct EpochAccumulator {
  Moments h;
  std::vector<Moments> f;
  Moments service;
  Moments attempts;
  std::vector<double> attempt_counts;  // index M - K; last slot collects overflow

  void merge(const EpochAccumulator& o) {
    h.merge(o.h);
    for (std::size_t k = 0; k < f.size(); ++k) {
      f[k].merge(o.f[k]);
    }
    service.merge(o.service);
    attempts.merge(o.attempts);
    for (std::size_t i = 0; i < attempt_counts.size(); ++i) {
      attempt_counts[i] += o.attempt_counts[i];
    }
  }
};

std::mt19937_64 chunk_rng(std::uint64_t seed, std::uint64_t stream, int chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(chunk)};
  return std::mt19937_64(seq);
}

// Splits `draws` over `chunks` substreams and folds the per-chunk results in
// chunk order, so the outcome is the same for any number of threads.
template <class Acc, class Make, class Body>
Acc parallel_chunks(std::int64_t draws, std::uint64_t seed, std::uint64_t stream, int chunks, Make make,
                    Body body) {
  const auto n_chunks = static_cast<std::size_t>(std::max(chunks, 1));
  std::vector<Acc> parts(n_chunks, make());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n_chunks, std::thread::hardware_concurrency()));
  std::vector<std::future<void>> pending;
  for (std::size_t w = 0; w < workers; ++w) {
    pending.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t c = w; c < n_chunks; c += workers) {
        const auto ci = static_cast<std::int64_t>(c);
        const auto nc = static_cast<std::int64_t>(n_chunks);
        const std::int64_t count = draws / nc + (ci < draws % nc ? 1 : 0);
        auto rng = chunk_rng(seed, stream, static_cast<int>(c));
        body(parts[c], rng, count);
      }
    }));
  }
  for (auto& f : pending) {
    f.get();
  }
  Acc total = make();
  for (const auto& p : parts) {
    total.merge(p);
  }
  return total;
}

VerifyCheck mc_check(std::string name, double analytic, const Moments& m, double z_limit) {
  VerifyCheck c;
  c.name = std::move(name);
  c.analytic = analytic;
  c.estimate = m.mean();
  c.stderr_ = m.stderr_of_mean();
  const double diff = c.estimate - analytic;
  if (c.stderr_ > 0.0) {
    c.z = diff / c.stderr_;
    c.passed = std::abs(c.z) < z_limit;
  } else {
    // Degenerate sample (e.g. h at tau = 0): every draw equals the mean.
    c.z = 0.0;
    c.passed = std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(analytic));
  }
  return c;
}

VerifyCheck exact_check(std::string name, double analytic, double reference, double rel_tol) {
  VerifyCheck c;
  c.name = std::move(name);
  c.analytic = analytic;
  c.estimate = reference;
  c.exact = true;
  c.passed = std::abs(analytic - reference) <= rel_tol * std::max(std::abs(analytic), std::abs(reference)) + 1e-15;
  return c;
}

std::string with_tau(const std::string& what, double tau) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(tau=%.6g)", tau);
  return what + buf;
}

EpochAccumulator sample_epochs(const AnalyticContext& ctx, double tau, std::int64_t draws, std::uint64_t seed,
                               int chunks) {
  const auto& cfg = ctx.config();
  const auto processes = static_cast<std::size_t>(cfg.k);
  const std::size_t bins = ctx.plan().weights.size() + 1;
  const auto make = [&] {
    EpochAccumulator a;
    a.f.resize(processes);
    a.attempt_counts.assign(bins, 0.0);
    return a;
  };
  return parallel_chunks<EpochAccumulator>(
      draws, seed, 1, chunks, make, [&](EpochAccumulator& acc, std::mt19937_64& rng, std::int64_t count) {
        std::exponential_distribution<double> service(cfg.mu);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (std::int64_t i = 0; i < count; ++i) {
          double y = 0.0;
          int m = 0;
          for (std::size_t k = 0; k < processes; ++k) {
            do {
              y += service(rng);
              ++m;
            } while (unit(rng) < cfg.eps);
          }
          acc.h.add(std::max(tau - y, 0.0));
          const double horizon = std::max(tau, y);
          for (std::size_t k = 0; k < processes; ++k) {
            acc.f[k].add(std::exp(-2.0 * cfg.theta[k] * horizon));
          }
          acc.service.add(y);
          acc.attempts.add(static_cast<double>(m));
          const auto slot = std::min(static_cast<std::size_t>(m - cfg.k), bins - 1);
          acc.attempt_counts[slot] += 1.0;
        }
      });
}

std::vector<VerifyCheck> functional_checks(const AnalyticContext& ctx, double tau, const EpochAccumulator& acc,
                                           double z_limit) {
  std::vector<VerifyCheck> out;
  out.push_back(mc_check(with_tau("h", tau), h_fn(ctx, tau), acc.h, z_limit));
  for (std::size_t k = 0; k < acc.f.size(); ++k) {
    out.push_back(mc_check(with_tau("f_" + std::to_string(k + 1), tau), f_fn(ctx, tau, k), acc.f[k], z_limit));
  }
  return out;
}

// Chi-square goodness of fit of the attempt counts, pooled so that every
// bin expects at least five draws, mapped to a z-score by Wilson-Hilferty.
VerifyCheck attempt_distribution_check(const AnalyticContext& ctx, const EpochAccumulator& acc, double z_limit) {
  const auto& w = ctx.plan().weights;
  const double n = acc.attempts.n;
  VerifyCheck c;
  c.name = "negbin_pmf(chi-square)";

  std::vector<double> expected;
  std::vector<double> observed;
  double e_run = 0.0;
  double o_run = 0.0;
  double e_total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    e_run += n * w[i];
    o_run += acc.attempt_counts[i];
    e_total += n * w[i];
    if (e_run >= kMinExpectedCount) {
      expected.push_back(e_run);
      observed.push_back(o_run);
      e_run = 0.0;
      o_run = 0.0;
    }
  }
  // Leftover mass, the truncated tail and overflow join the last bin.
  e_run += n - e_total;
  o_run += acc.attempt_counts.back();
  if (expected.empty()) {
    expected.push_back(e_run);
    observed.push_back(o_run);
  } else {
    expected.back() += e_run;
    observed.back() += o_run;
  }

  if (expected.size() < 2) {
    // Point mass (eps = 0): every epoch must take exactly K attempts.
    c.analytic = n;
    c.estimate = observed.front();
    c.passed = observed.front() == n;
    return c;
  }
  double chi2 = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double d = observed[i] - expected[i];
    chi2 += d * d / expected[i];
  }
  const double df = static_cast<double>(expected.size() - 1);
  const double a = 2.0 / (9.0 * df);
  c.analytic = df;
  c.estimate = chi2;
  c.z = (std::cbrt(chi2 / df) - (1.0 - a)) / std::sqrt(a);
  c.passed = c.z < z_limit;
  return c;
}

struct OuAccumulator {
  Moments diff;
  Moments sq;
  void merge(const OuAccumulator& o) {
    diff.merge(o.diff);
    sq.merge(o.sq);
  }
};

std::vector<VerifyCheck> ou_checks(const SystemConfig& cfg, std::int64_t draws, std::uint64_t seed, int chunks,
                                   double z_limit) {
  std::vector<VerifyCheck> out;
  constexpr double kDelta = 1.0;
  for (std::size_t k = 0; k < cfg.theta.size(); ++k) {
    const double theta = cfg.theta[k];
    const double sigma_sq = cfg.sigma_sq[k];
    const double x0 = 2.0 * std::sqrt(stationary_variance(theta, sigma_sq));
    const double mean = x0 * std::exp(-theta * kDelta);
    const double variance = mse_instant(theta, sigma_sq, kDelta);
    const auto acc = parallel_chunks<OuAccumulator>(
        draws, seed, 100 + k, chunks, [] { return OuAccumulator{}; },
        [&](OuAccumulator& a, std::mt19937_64& rng, std::int64_t count) {
          std::normal_distribution<double> normal;
          for (std::int64_t i = 0; i < count; ++i) {
            const double d = ou_transition(x0, theta, sigma_sq, kDelta, normal(rng)) - mean;
            a.diff.add(d);
            a.sq.add(d * d);
          }
        });
    const auto label = "ou_" + std::to_string(k + 1);
    // Centred at the analytic mean to keep the sums well conditioned.
    auto m = mc_check(label + "_mean", 0.0, acc.diff, z_limit);
    m.analytic = mean;
    m.estimate += mean;
    out.push_back(m);
    out.push_back(mc_check(label + "_variance", variance, acc.sq, z_limit));
  }
  return out;
}

// Erlang(n, rate) CDF at t, summing whichever Poisson tail is smaller.
long double erlang_cdf(int n, long double rate, long double t) {
  const long double x = rate * t;
  if (x <= 0.0L) {
    return 0.0L;
  }
  if (x < static_cast<long double>(n)) {
    long double term = std::exp(-x + n * std::log(x) - std::lgamma(static_cast<long double>(n) + 1.0L));
    long double sum = 0.0L;
    for (int j = n; term > 1e-30L * sum || j < n + 2; ++j) {
      sum += term;
      term *= x / static_cast<long double>(j + 1);
    }
    return sum;
  }
  long double term = std::exp(-x);
  long double sum = 0.0L;
  for (int j = 0; j < n; ++j) {
    sum += term;
    term *= x / static_cast<long double>(j + 1);
  }
  return 1.0L - sum;
}

std::vector<VerifyCheck> erlang_checks(const AnalyticContext& ctx, double tau, double rel_tol) {
  const auto& cfg = ctx.config();
  const int k = cfg.k;
  const long double mu = cfg.mu;
  const long double t = tau;
  std::vector<VerifyCheck> out;
  const long double cdf = erlang_cdf(k, mu, t);
  out.push_back(exact_check(with_tau("cdf_erlang", tau), epoch_service_cdf(ctx, tau), static_cast<double>(cdf),
                            rel_tol));
  const long double h = t * cdf - static_cast<long double>(k) / mu * erlang_cdf(k + 1, mu, t);
  out.push_back(exact_check(with_tau("h_erlang", tau), h_fn(ctx, tau), static_cast<double>(h), rel_tol));
  for (std::size_t i = 0; i < cfg.theta.size(); ++i) {
    const long double two_theta = 2.0L * cfg.theta[i];
    const long double f = std::exp(-two_theta * t) * cdf +
                          std::pow(mu / (mu + two_theta), k) * (1.0L - erlang_cdf(k, mu + two_theta, t));
    out.push_back(exact_check(with_tau("f_" + std::to_string(i + 1) + "_erlang", tau), f_fn(ctx, tau, i),
                              static_cast<double>(f), rel_tol));
  }
  return out;
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

std::vector<VerifyCheck> check_epoch_functionals(const AnalyticContext& ctx, double tau, std::int64_t draws,
                                                 std::uint64_t seed, double z_limit, int chunks) {
  if (draws < 2) {
    throw DomainError("verification needs at least 2 draws, got " + std::to_string(draws));
  }
  return functional_checks(ctx, tau, sample_epochs(ctx, tau, draws, seed, chunks), z_limit);
}

VerifyReport run_verify(const AnalyticContext& ctx, const VerifyOptions& options) {
  if (options.draws < 2) {
    throw DomainError("verification needs at least 2 draws, got " + std::to_string(options.draws));
  }
  const auto& cfg = ctx.config();
  VerifyReport report;
  if (options.draws < kLowPowerDraws) {
    report.warnings.push_back("only " + std::to_string(options.draws) +
                              " draws: Monte Carlo checks have low power");
  }
  std::vector<double> taus = options.taus;
  if (taus.empty()) {
    taus.push_back(mean_epoch_service(ctx));
  }

  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double tau = taus[i];
    const auto acc = sample_epochs(ctx, tau, options.draws, options.seed + i, options.chunks);
    for (auto& c : functional_checks(ctx, tau, acc, options.z_limit)) {
      report.checks.push_back(std::move(c));
    }
    if (i == 0) {
      report.checks.push_back(mc_check("mean_epoch_service", mean_epoch_service(ctx), acc.service, options.z_limit));
      report.checks.push_back(
          mc_check("mean_attempts", static_cast<double>(cfg.k) / (1.0 - cfg.eps), acc.attempts, options.z_limit));
      report.checks.push_back(attempt_distribution_check(ctx, acc, options.z_limit));
    }
  }
  for (auto& c : ou_checks(cfg, options.draws, options.seed, options.chunks, options.z_limit)) {
    report.checks.push_back(std::move(c));
  }

  if (cfg.eps == 0.0) {
    report.checks.push_back(exact_check("negbin_point_mass", ctx.plan().weights.size() == 1 ? ctx.plan().weights[0] : 0.0,
                                        1.0, options.exact_rel_tol));
    for (const double tau : taus) {
      for (auto& c : erlang_checks(ctx, tau, options.exact_rel_tol)) {
        report.checks.push_back(std::move(c));
      }
    }
  }
  return report;
}

void print_report(std::ostream& out, const VerifyReport& report) {
  for (const auto& w : report.warnings) {
    out << "warning: " << w << '\n';
  }
  char line[256];
  for (const auto& c : report.checks) {
    if (c.exact) {
      std::snprintf(line, sizeof line, "%s  %-28s analytic=%.15g closed_form=%.15g (exact)\n",
                    c.passed ? "PASS" : "FAIL", c.name.c_str(), c.analytic, c.estimate);
    } else {
      std::snprintf(line, sizeof line, "%s  %-28s analytic=%.10g estimate=%.10g se=%.3g z=%+.3f\n",
                    c.passed ? "PASS" : "FAIL", c.name.c_str(), c.analytic, c.estimate, c.stderr_, c.z);
    }
    out << line;
  }
  const auto failed = std::count_if(report.checks.begin(), report.checks.end(), [](const auto& c) { return !c.passed; });
  out << (failed == 0 ? "all " + std::to_string(report.checks.size()) + " checks passed"
                      : std::to_string(failed) + " of " + std::to_string(report.checks.size()) + " checks failed")
      << '\n';
}

}  // namespace timely::cli
