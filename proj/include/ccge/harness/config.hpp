#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ccge/replay/replay_buffer.hpp"
#include "ccge/uncertainty/formulas.hpp"

namespace ccge::harness {

enum class Algorithm { kSac, kCcge, kJsrl, kDqnStudy };

Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm algorithm);

// Full description of an experiment. Text form is flat `key = value` lines;
// `#` starts a comment. Keys not set in the text take the defaults of the
// chosen algorithm and environment (see README).
struct RunConfig {
  std::string env = "pendulum";
  Algorithm algorithm = Algorithm::kSac;
  uncertainty::Mode uncertainty_mode = uncertainty::Mode::kExplicit;
  std::string oracle = "none";  // none | scripted | bootstrap | checkpoint:<path> | bootstrap:<path>
  double lambda = 1.0;          // inf disables the oracle switch
  bool guidance_enabled = true;
  bool supervision_enabled = true;
  double denominator_epsilon = 1e-6;
  int jsrl_max_horizon = 100;

  std::size_t buffer_capacity = 100000;
  replay::BufferMode buffer_mode = replay::BufferMode::kFifo;

  std::vector<std::uint64_t> seeds{0};
  std::int64_t total_steps = 100000;
  std::int64_t warmup_steps = 5000;
  int eval_episodes = 10;
  std::int64_t eval_frequency = 10000;

  std::vector<int> hidden{256, 256};
  double learning_rate = 4e-4;
  double weight_decay = 1e-2;
  std::size_t batch_size = 256;
  double gamma = 0.99;
  double tau = 0.005;
  int ensemble_size = 2;
  double max_grad_norm = 1.0;
  double initial_log_alpha = 0.0;
  std::string target_entropy = "auto";  // auto = -action_dim
  int train_frequency = 1;              // environment steps per gradient step

  double explore = 0.1;                       // dqn-study
  std::int64_t target_update_interval = 1000;  // dqn-study, gradient steps

  bool log_steps = false;
  std::int64_t sweep_interval = 200000;
  std::string run_name;

  // Canonical text with every key, sorted; the hash is taken over it
  // without the seeds line.
  std::string to_text(bool include_seeds = true) const;
  std::uint64_t hash() const;
  std::string hash_hex() const;

  void validate() const;
};

// Parses key=value text. Unknown keys, malformed values and invalid
// combinations raise ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

// Applies one `key = value` override to an already built config.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

// Defaults for an (algorithm, env) pair before any user key is applied.
RunConfig default_config(Algorithm algorithm, std::string_view env);

const std::vector<std::string>& config_keys();

std::uint64_t fnv1a(std::string_view data);

}  // namespace ccge::harness
