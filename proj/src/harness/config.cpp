#include "ccge/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ccge/common/errors.hpp"
#include "ccge/envs/environment.hpp"

namespace ccge::harness {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "' as " +
                    std::string(expected));
}

double parse_double(std::string_view key, std::string_view value) {
  if (value == "inf" || value == "off") return std::numeric_limits<double>::infinity();
  const std::string text(value);
  char* end = nullptr;
  const double out = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) bad_value(key, value, "a number");
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view value) {
  Int out{};
  // Accept 1e5-style integers too.
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec == std::errc() && ptr == value.data() + value.size()) return out;
  const double d = parse_double(key, value);
  if (!std::isfinite(d) || d != std::floor(d)) bad_value(key, value, "an integer");
  if (d < static_cast<double>(std::numeric_limits<Int>::min()) ||
      d > static_cast<double>(std::numeric_limits<Int>::max())) {
    bad_value(key, value, "an integer in range");
  }
  return static_cast<Int>(d);
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  bad_value(key, value, "a boolean");
}

template <typename Int>
std::vector<Int> parse_list(std::string_view key, std::string_view value) {
  std::vector<Int> out;
  while (!value.empty()) {
    const auto comma = value.find(',');
    const std::string_view item = trim(value.substr(0, comma));
    if (item.empty()) bad_value(key, value, "a comma-separated list");
    out.push_back(parse_int<Int>(key, item));
    if (comma == std::string_view::npos) break;
    value.remove_prefix(comma + 1);
  }
  if (out.empty()) bad_value(key, value, "a non-empty list");
  return out;
}

// Seeds accept ranges: "0-9" or "0,3,5-7".
std::vector<std::uint64_t> parse_seeds(std::string_view key, std::string_view value) {
  std::vector<std::uint64_t> out;
  std::string_view rest = value;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    const auto dash = item.find('-');
    if (dash != std::string_view::npos && dash > 0) {
      const auto lo = parse_int<std::uint64_t>(key, trim(item.substr(0, dash)));
      const auto hi = parse_int<std::uint64_t>(key, trim(item.substr(dash + 1)));
      if (hi < lo) bad_value(key, value, "an ascending seed range");
      for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(parse_int<std::uint64_t>(key, item));
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.empty()) bad_value(key, value, "a seed list");
  return out;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
  return os.str();
}

}  // namespace

Algorithm parse_algorithm(std::string_view name) {
  if (name == "sac") return Algorithm::kSac;
  if (name == "ccge") return Algorithm::kCcge;
  if (name == "jsrl") return Algorithm::kJsrl;
  if (name == "dqn-study") return Algorithm::kDqnStudy;
  throw ConfigError("unknown algorithm '" + std::string(name) + "' (expected sac, ccge, jsrl or dqn-study)");
}

std::string_view to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kSac:
      return "sac";
    case Algorithm::kCcge:
      return "ccge";
    case Algorithm::kJsrl:
      return "jsrl";
    case Algorithm::kDqnStudy:
      return "dqn-study";
  }
  return "unknown";
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "algorithm",        "batch_size",          "buffer_capacity",   "buffer_mode",
      "denominator_epsilon", "ensemble_size",    "env",               "eval_episodes",
      "eval_frequency",   "explore",             "gamma",             "guidance_enabled",
      "hidden",           "initial_log_alpha",   "jsrl_max_horizon",  "lambda",
      "learning_rate",    "log_steps",           "max_grad_norm",     "oracle",
      "run_name",         "seeds",               "supervision_enabled", "sweep_interval",
      "target_entropy",   "target_update_interval", "tau",            "total_steps",
      "train_frequency",  "uncertainty_mode",    "warmup_steps",      "weight_decay",
  };
  return keys;
}

RunConfig default_config(Algorithm algorithm, std::string_view env) {
  RunConfig c;
  c.algorithm = algorithm;
  c.env = std::string(env);
  const bool pointmass = env.starts_with("pointmass");
  if (pointmass) {
    c.total_steps = 150000;
    c.eval_frequency = 10000;
  }
  c.lambda = env == "pointmass-sparse" ? 0.1 : 1.0;
  if (algorithm == Algorithm::kCcge || algorithm == Algorithm::kJsrl) c.oracle = "scripted";
  // Plain SAC carries no uncertainty head unless asked for one.
  if (algorithm == Algorithm::kSac) c.uncertainty_mode = uncertainty::Mode::kImplicit;
  if (algorithm == Algorithm::kDqnStudy) {
    c.hidden = {64, 64};
    c.learning_rate = 2.5e-4;
    c.batch_size = 256;
    c.gamma = 0.99;
    c.max_grad_norm = 0.625;
    c.explore = 0.1;
    c.target_update_interval = 1000;
    c.warmup_steps = 1000;
    c.eval_episodes = 50;
    c.eval_frequency = 10000;
    c.buffer_capacity = env == "mountaincar" ? 200000 : 100000;
    c.total_steps = env == "mountaincar" ? 1000000 : 250000;
  }
  return c;
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "env") {
    c.env = std::string(value);
  } else if (key == "algorithm") {
    c.algorithm = parse_algorithm(value);
  } else if (key == "uncertainty_mode") {
    c.uncertainty_mode = uncertainty::parse_mode(value);
  } else if (key == "oracle") {
    c.oracle = std::string(value);
  } else if (key == "lambda") {
    c.lambda = parse_double(key, value);
  } else if (key == "guidance_enabled") {
    c.guidance_enabled = parse_bool(key, value);
  } else if (key == "supervision_enabled") {
    c.supervision_enabled = parse_bool(key, value);
  } else if (key == "denominator_epsilon") {
    c.denominator_epsilon = parse_double(key, value);
  } else if (key == "jsrl_max_horizon") {
    c.jsrl_max_horizon = parse_int<int>(key, value);
  } else if (key == "buffer_capacity") {
    c.buffer_capacity = parse_int<std::size_t>(key, value);
  } else if (key == "buffer_mode") {
    c.buffer_mode = replay::parse_buffer_mode(value);
  } else if (key == "seeds") {
    c.seeds = parse_seeds(key, value);
  } else if (key == "total_steps") {
    c.total_steps = parse_int<std::int64_t>(key, value);
  } else if (key == "warmup_steps") {
    c.warmup_steps = parse_int<std::int64_t>(key, value);
  } else if (key == "eval_episodes") {
    c.eval_episodes = parse_int<int>(key, value);
  } else if (key == "eval_frequency") {
    c.eval_frequency = parse_int<std::int64_t>(key, value);
  } else if (key == "hidden") {
    c.hidden = parse_list<int>(key, value);
  } else if (key == "learning_rate") {
    c.learning_rate = parse_double(key, value);
  } else if (key == "weight_decay") {
    c.weight_decay = parse_double(key, value);
  } else if (key == "batch_size") {
    c.batch_size = parse_int<std::size_t>(key, value);
  } else if (key == "gamma") {
    c.gamma = parse_double(key, value);
  } else if (key == "tau") {
    c.tau = parse_double(key, value);
  } else if (key == "ensemble_size") {
    c.ensemble_size = parse_int<int>(key, value);
  } else if (key == "max_grad_norm") {
    c.max_grad_norm = parse_double(key, value);
  } else if (key == "initial_log_alpha") {
    c.initial_log_alpha = parse_double(key, value);
  } else if (key == "target_entropy") {
    if (value != "auto") (void)parse_double(key, value);
    c.target_entropy = std::string(value);
  } else if (key == "train_frequency") {
    c.train_frequency = parse_int<int>(key, value);
  } else if (key == "explore") {
    c.explore = parse_double(key, value);
  } else if (key == "target_update_interval") {
    c.target_update_interval = parse_int<std::int64_t>(key, value);
  } else if (key == "log_steps") {
    c.log_steps = parse_bool(key, value);
  } else if (key == "sweep_interval") {
    c.sweep_interval = parse_int<std::int64_t>(key, value);
  } else if (key == "run_name") {
    c.run_name = std::string(value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

RunConfig parse_config(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    entries.emplace_back(std::move(key), value);
  }
  Algorithm algorithm = Algorithm::kSac;
  std::string env = "pendulum";
  for (const auto& [k, v] : entries) {
    if (k == "algorithm") algorithm = parse_algorithm(v);
    if (k == "env") env = v;
  }
  RunConfig config = default_config(algorithm, env);
  for (const auto& [k, v] : entries) apply_setting(config, k, v);
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void RunConfig::validate() const {
  const auto ids = envs::env_ids();
  if (std::find(ids.begin(), ids.end(), env) == ids.end()) throw ConfigError("unknown env '" + env + "'");
  const bool discrete = env == "cartpole" || env == "mountaincar";
  if (algorithm == Algorithm::kDqnStudy && !discrete) {
    throw ConfigError("dqn-study runs on cartpole or mountaincar only");
  }
  if (algorithm != Algorithm::kDqnStudy && discrete) {
    throw ConfigError(std::string(to_string(algorithm)) + " needs a continuous-action env");
  }
  const bool needs_oracle = algorithm == Algorithm::kCcge || algorithm == Algorithm::kJsrl;
  if (needs_oracle && oracle == "none") throw ConfigError("algorithm needs an oracle");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
  if (!(denominator_epsilon > 0.0)) throw ConfigError("denominator_epsilon must be > 0");
  if (jsrl_max_horizon < 0) throw ConfigError("jsrl_max_horizon must be >= 0");
  if (buffer_capacity == 0) throw ConfigError("buffer_capacity must be positive");
  if (seeds.empty()) throw ConfigError("seeds must not be empty");
  if (total_steps < 0 || warmup_steps < 0) throw ConfigError("step counts must be >= 0");
  if (eval_episodes < 1) throw ConfigError("eval_episodes must be >= 1");
  if (eval_frequency < 1) throw ConfigError("eval_frequency must be >= 1");
  for (int h : hidden) {
    if (h < 1) throw ConfigError("hidden sizes must be positive");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
  if (ensemble_size < 1) throw ConfigError("ensemble_size must be >= 1");
  if (algorithm != Algorithm::kDqnStudy && uncertainty_mode == uncertainty::Mode::kImplicit && ensemble_size < 2) {
    throw ConfigError("implicit uncertainty needs ensemble_size >= 2");
  }
  if (!std::isfinite(initial_log_alpha)) throw ConfigError("initial_log_alpha must be finite");
  if (train_frequency < 1) throw ConfigError("train_frequency must be >= 1");
  if (!(explore >= 0.0 && explore <= 1.0)) throw ConfigError("explore must lie in [0, 1]");
  if (target_update_interval < 1) throw ConfigError("target_update_interval must be >= 1");
  if (sweep_interval < 1) throw ConfigError("sweep_interval must be >= 1");
  if (oracle != "none" && oracle != "scripted" && oracle != "bootstrap" && !oracle.starts_with("checkpoint:") &&
      !oracle.starts_with("bootstrap:")) {
    throw ConfigError("oracle must be none, scripted, bootstrap, checkpoint:<path> or bootstrap:<path>");
  }
}

std::string RunConfig::to_text(bool include_seeds) const {
  std::map<std::string, std::string> kv{
      {"algorithm", std::string(harness::to_string(algorithm))},
      {"batch_size", std::to_string(batch_size)},
      {"buffer_capacity", std::to_string(buffer_capacity)},
      {"buffer_mode", std::string(replay::to_string(buffer_mode))},
      {"denominator_epsilon", format_double(denominator_epsilon)},
      {"ensemble_size", std::to_string(ensemble_size)},
      {"env", env},
      {"eval_episodes", std::to_string(eval_episodes)},
      {"eval_frequency", std::to_string(eval_frequency)},
      {"explore", format_double(explore)},
      {"gamma", format_double(gamma)},
      {"guidance_enabled", guidance_enabled ? "true" : "false"},
      {"hidden", join(hidden)},
      {"initial_log_alpha", format_double(initial_log_alpha)},
      {"jsrl_max_horizon", std::to_string(jsrl_max_horizon)},
      {"lambda", format_double(lambda)},
      {"learning_rate", format_double(learning_rate)},
      {"log_steps", log_steps ? "true" : "false"},
      {"max_grad_norm", format_double(max_grad_norm)},
      {"oracle", oracle},
      {"run_name", run_name},
      {"supervision_enabled", supervision_enabled ? "true" : "false"},
      {"sweep_interval", std::to_string(sweep_interval)},
      {"target_entropy", target_entropy},
      {"target_update_interval", std::to_string(target_update_interval)},
      {"tau", format_double(tau)},
      {"total_steps", std::to_string(total_steps)},
      {"train_frequency", std::to_string(train_frequency)},
      {"uncertainty_mode", std::string(uncertainty::to_string(uncertainty_mode))},
      {"warmup_steps", std::to_string(warmup_steps)},
      {"weight_decay", format_double(weight_decay)},
  };
  if (include_seeds) kv["seeds"] = join(seeds);
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t RunConfig::hash() const { return fnv1a(to_text(false)); }

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

}  // namespace ccge::harness
