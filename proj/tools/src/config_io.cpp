#include "timely/cli/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "timely/errors.hpp"

namespace timely::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kConfigKeys = {"K", "theta", "sigma_sq", "mu", "eps", "f_max", "solver"};
const std::set<std::string> kSolverKeys = {"beta_tol", "tau_tol", "series_tol", "max_iter"};

std::string prefixed(std::string_view context, const std::string& msg) {
  if (context.empty()) {
    return msg;
  }
  return std::string(context) + ": " + msg;
}

// Collects type errors instead of throwing on the first one.
class Reader {
 public:
  explicit Reader(std::string_view context) : context_(context) {}

  void number(const json& obj, const std::string& key, double& out, bool required) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) {
        fail("missing required key \"" + key + "\"");
      }
      return;
    }
    if (!it->is_number()) {
      fail("\"" + key + "\" must be a number, got " + std::string(it->type_name()));
      return;
    }
    out = it->get<double>();
  }

  void integer(const json& obj, const std::string& key, int& out, bool required) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) {
        fail("missing required key \"" + key + "\"");
      }
      return;
    }
    if (!it->is_number_integer()) {
      fail("\"" + key + "\" must be an integer, got " + it->dump());
      return;
    }
    const auto v = it->get<std::int64_t>();
    if (v < -1'000'000'000 || v > 1'000'000'000) {
      fail("\"" + key + "\" is out of range: " + it->dump());
      return;
    }
    out = static_cast<int>(v);
  }

  void numbers(const json& obj, const std::string& key, std::vector<double>& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      fail("missing required key \"" + key + "\"");
      return;
    }
    if (!it->is_array()) {
      fail("\"" + key + "\" must be an array of numbers, got " + std::string(it->type_name()));
      return;
    }
    out.clear();
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto& v = (*it)[i];
      if (!v.is_number()) {
        fail("\"" + key + "\"[" + std::to_string(i + 1) + "] must be a number, got " + v.dump());
        continue;
      }
      out.push_back(v.get<double>());
    }
  }

  void unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& item : obj.items()) {
      if (allowed.count(item.key()) == 0) {
        fail("unknown key \"" + item.key() + "\"" + where);
      }
    }
  }

  void fail(const std::string& msg) { errors_.push_back(prefixed(context_, msg)); }
  std::vector<std::string>& errors() { return errors_; }

 private:
  std::string_view context_;
  std::vector<std::string> errors_;
};

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  const std::size_t end = std::min(byte == 0 ? 0 : byte - 1, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError({path.string() + ": cannot open file"});
  }
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json parse_json(std::string_view text, std::string_view source) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, column] = line_column(text, e.byte);
    std::string what = e.what();
    // Drop nlohmann's "[json.exception.parse_error.101] parse error at line 1, column 2: " prefix.
    if (const auto pos = what.find(": "); pos != std::string::npos) {
      what = what.substr(pos + 2);
    }
    throw ConfigError({std::string(source) + ":" + std::to_string(line) + ":" + std::to_string(column) +
                       ": parse error: " + what});
  }
}

ConfigDocument config_from_json(const json& j, std::string_view context) {
  if (!j.is_object()) {
    throw ConfigError({prefixed(context, "config must be a JSON object, got " + std::string(j.type_name()))});
  }
  Reader r(context);
  ConfigDocument doc;
  r.unknown_keys(j, kConfigKeys, "");
  r.integer(j, "K", doc.config.k, true);
  r.numbers(j, "theta", doc.config.theta);
  r.numbers(j, "sigma_sq", doc.config.sigma_sq);
  r.number(j, "mu", doc.config.mu, true);
  r.number(j, "eps", doc.config.eps, true);
  r.number(j, "f_max", doc.config.f_max, true);

  bool solver_ok = true;
  if (const auto it = j.find("solver"); it != j.end()) {
    if (!it->is_object()) {
      r.fail("\"solver\" must be an object, got " + std::string(it->type_name()));
      solver_ok = false;
    } else {
      r.unknown_keys(*it, kSolverKeys, " in \"solver\"");
      r.number(*it, "beta_tol", doc.solver.beta_tol, false);
      r.number(*it, "tau_tol", doc.solver.tau_tol, false);
      r.number(*it, "series_tol", doc.solver.series_tol, false);
      r.integer(*it, "max_iter", doc.solver.max_iter, false);
    }
  }

  auto errors = std::move(r.errors());
  if (errors.empty()) {
    for (auto& v : validate(doc.config)) {
      errors.push_back(prefixed(context, v));
    }
    if (solver_ok) {
      try {
        require_valid(doc.solver);
      } catch (const ConfigError& e) {
        for (const auto& v : e.violations()) {
          errors.push_back(prefixed(context, v));
        }
      }
    }
  }
  if (!errors.empty()) {
    throw ConfigError(std::move(errors));
  }
  return doc;
}

ConfigDocument load_config(const std::filesystem::path& path) {
  const auto text = read_text(path);
  return config_from_json(parse_json(text, path.string()), path.string());
}

json to_json(const SystemConfig& config) {
  return json{{"K", config.k},   {"theta", config.theta}, {"sigma_sq", config.sigma_sq},
              {"mu", config.mu}, {"eps", config.eps},     {"f_max", config.f_max}};
}

json to_json(const SolverSettings& settings) {
  return json{{"beta_tol", settings.beta_tol},
              {"tau_tol", settings.tau_tol},
              {"series_tol", settings.series_tol},
              {"max_iter", settings.max_iter}};
}

json to_json(const ConfigDocument& doc) {
  auto j = to_json(doc.config);
  j["solver"] = to_json(doc.solver);
  return j;
}

std::uint64_t config_hash(const ConfigDocument& doc) {
  const auto text = to_json(doc).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace timely::cli
