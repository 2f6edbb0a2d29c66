#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ccge/envs/environment.hpp"
#include "ccge/harness/config.hpp"

namespace ccge::harness {

// One row of metrics.csv, written after every evaluation. Means are taken
// over the training steps (or updates) since the previous row; columns that
// do not apply to a run hold nan.
struct MetricRecord {
  std::string run_id;
  std::uint64_t seed = 0;
  std::int64_t step = 0;
  double eval_return = 0.0;
  double eval_return_iqm = 0.0;
  double eval_success = 0.0;
  double guided_ratio = 0.0;
  double mean_k = 0.0;
  double mean_uncertainty = 0.0;
  double critic_loss = 0.0;
  double uncertainty_loss = 0.0;
  double actor_loss = 0.0;
  double alpha_loss = 0.0;
  double alpha = 0.0;
  double oracle_score = 0.0;
  double episodic_mean_uncertainty = 0.0;
};

const std::vector<std::string>& metric_columns();
std::string metrics_header();
std::string format_record(const MetricRecord& record);
std::vector<MetricRecord> read_metrics(const std::filesystem::path& csv);

struct EvalResult {
  double mean_return = 0.0;
  double iqm_return = 0.0;
  double mean_success = 0.0;
  std::vector<double> returns;
};

// Runs `episodes` episodes with episode seeds drawn from `seed_rng`. The
// policy maps an observation to an action vector (discrete envs: {index}).
EvalResult evaluate(envs::Environment& env, const std::function<std::vector<double>(std::span<const double>)>& policy,
                    int episodes, Rng& seed_rng);

struct RunResult {
  std::filesystem::path dir;
  std::uint64_t seed = 0;
  std::vector<MetricRecord> records;
  bool reused = false;
};

struct RunOptions {
  int jobs = 1;
  // Reuse a seed directory whose manifest records a completed run of the
  // same config hash and seed; runs are deterministic so the files would be
  // identical.
  bool reuse_completed = false;
  bool quiet = true;
};

// Trains one seed, writing into dir: metrics.csv, manifest.json,
// checkpoint.json, timing.csv (wall-clock, kept apart so the other files are
// bitwise reproducible) and steps.csv when log_steps is set. A non-finite
// training quantity aborts the run after writing diagnostics.json with the
// last 50 steps.
RunResult run_seed(const RunConfig& config, std::uint64_t seed, const std::filesystem::path& dir);

// Directory name used for a config under an output root.
std::string run_label(const RunConfig& config);

// Runs every configured seed under out_root/run_label(config)/seed_<n> and
// writes summary.csv next to the seed directories.
std::vector<RunResult> run(const RunConfig& config, const std::filesystem::path& out_root,
                           const RunOptions& options = {});

std::optional<RunResult> load_completed(const RunConfig& config, std::uint64_t seed,
                                        const std::filesystem::path& dir);

}  // namespace ccge::harness
