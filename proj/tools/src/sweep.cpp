#include "timely/cli/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <future>
#include <thread>

#include "timely/errors.hpp"

namespace timely::cli {

using nlohmann::json;

namespace {

std::string ctx_msg(std::string_view context, const std::string& msg) {
  return context.empty() ? msg : std::string(context) + ": " + msg;
}

std::string g12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

bool strictly_monotone(const std::vector<double>& v) {
  if (v.size() < 2) {
    return true;
  }
  const bool up = v[1] > v[0];
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (up ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::string_view to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::eps:
      return "eps";
    case SweepParameter::k:
      return "K";
    case SweepParameter::theta:
      return "theta_k";
    case SweepParameter::f_max:
      return "f_max";
  }
  return "eps";
}

SweepSpec sweep_from_json(const json& j, std::string_view context) {
  if (!j.is_object()) {
    throw ConfigError({ctx_msg(context, "sweep spec must be a JSON object")});
  }
  std::vector<std::string> errors;
  for (const auto& item : j.items()) {
    if (item.key() != "base" && item.key() != "parameter" && item.key() != "index" && item.key() != "values") {
      errors.push_back(ctx_msg(context, "unknown key \"" + item.key() + "\""));
    }
  }
  for (const char* key : {"base", "parameter", "values"}) {
    if (!j.contains(key)) {
      errors.push_back(ctx_msg(context, std::string("missing required key \"") + key + "\""));
    }
  }
  if (!errors.empty()) {
    throw ConfigError(std::move(errors));
  }

  SweepSpec spec;
  spec.base = config_from_json(j.at("base"), std::string(context) + " base");

  const auto& param = j.at("parameter");
  const std::string name = param.is_string() ? param.get<std::string>() : param.dump();
  if (name == "eps") {
    spec.parameter = SweepParameter::eps;
  } else if (name == "K") {
    spec.parameter = SweepParameter::k;
  } else if (name == "theta_k") {
    spec.parameter = SweepParameter::theta;
  } else if (name == "f_max") {
    spec.parameter = SweepParameter::f_max;
  } else {
    throw ConfigError({ctx_msg(context, "\"parameter\" must be one of eps, K, theta_k, f_max; got " + name)});
  }

  if (spec.parameter == SweepParameter::theta) {
    const auto it = j.find("index");
    if (it == j.end() || !it->is_number_integer()) {
      throw ConfigError({ctx_msg(context, "theta_k sweeps need an integer \"index\" (1-based)")});
    }
    const auto index = it->get<std::int64_t>();
    if (index < 1 || index > spec.base.config.k) {
      throw ConfigError({ctx_msg(context, "\"index\" must lie in 1.." + std::to_string(spec.base.config.k) +
                                              ", got " + std::to_string(index))});
    }
    spec.index = static_cast<int>(index - 1);
  } else if (j.contains("index")) {
    throw ConfigError({ctx_msg(context, "\"index\" only applies to theta_k sweeps")});
  }

  const auto& values = j.at("values");
  if (!values.is_array() || values.empty()) {
    throw ConfigError({ctx_msg(context, "\"values\" must be a nonempty array of numbers")});
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& v = values[i];
    const bool ok = spec.parameter == SweepParameter::k ? v.is_number_integer() : v.is_number();
    if (!ok) {
      errors.push_back(ctx_msg(context, "\"values\"[" + std::to_string(i + 1) + "] must be " +
                                            (spec.parameter == SweepParameter::k ? "an integer" : "a number") +
                                            ", got " + v.dump()));
      continue;
    }
    spec.values.push_back(v.get<double>());
  }
  if (errors.empty() && !strictly_monotone(spec.values)) {
    errors.push_back(ctx_msg(context, "\"values\" must be strictly increasing or strictly decreasing"));
  }

  if (spec.parameter == SweepParameter::k) {
    const auto& c = spec.base.config;
    const bool homogeneous = std::all_of(c.theta.begin(), c.theta.end(), [&](double t) { return t == c.theta[0]; }) &&
                             std::all_of(c.sigma_sq.begin(), c.sigma_sq.end(),
                                         [&](double s) { return s == c.sigma_sq[0]; });
    if (!homogeneous) {
      errors.push_back(ctx_msg(context, "K sweeps need a base whose processes all share theta and sigma_sq"));
    }
  }
  if (!errors.empty()) {
    throw ConfigError(std::move(errors));
  }

  for (std::size_t i = 0; i < spec.values.size(); ++i) {
    for (auto& v : validate(substitute(spec, spec.values[i]))) {
      errors.push_back(ctx_msg(context, "value " + g12(spec.values[i]) + ": " + v));
    }
  }
  if (!errors.empty()) {
    throw ConfigError(std::move(errors));
  }
  return spec;
}

SweepSpec load_sweep(const std::filesystem::path& path) {
  const auto text = read_text(path);
  return sweep_from_json(parse_json(text, path.string()), path.string());
}

SystemConfig substitute(const SweepSpec& spec, double value) {
  SystemConfig c = spec.base.config;
  switch (spec.parameter) {
    case SweepParameter::eps:
      c.eps = value;
      break;
    case SweepParameter::f_max:
      c.f_max = value;
      break;
    case SweepParameter::theta:
      c.theta.at(static_cast<std::size_t>(spec.index)) = value;
      break;
    case SweepParameter::k: {
      const auto k = static_cast<int>(std::lround(value));
      c.k = k;
      const auto n = static_cast<std::size_t>(std::max(k, 0));
      c.theta.assign(n, spec.base.config.theta.front());
      c.sigma_sq.assign(n, spec.base.config.sigma_sq.front());
      break;
    }
  }
  return c;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  const std::size_t n = spec.values.size();
  std::vector<SweepRow> rows(n);
  std::vector<std::exception_ptr> failures(n);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(n, std::thread::hardware_concurrency()));

  // Worker w handles values w, w + workers, ...
  std::vector<std::future<void>> pending;
  for (std::size_t w = 0; w < workers; ++w) {
    pending.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          rows[i].value = spec.values[i];
          rows[i].policy = solve(substitute(spec, spec.values[i]), spec.base.solver);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    }));
  }
  for (auto& f : pending) {
    f.get();
  }
  for (const auto& e : failures) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const auto& r : rows) {
    out << g12(r.value) << ',' << g12(r.policy.tau_star) << ',' << g12(r.policy.beta_star) << ','
        << g12(r.policy.tau_unconstrained) << ',' << g12(r.policy.tau_constrained) << ','
        << (r.policy.binding ? 1 : 0) << '\n';
  }
}

}  // namespace timely::cli
