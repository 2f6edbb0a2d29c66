#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccge/harness/config.hpp"
#include "ccge/harness/run.hpp"

namespace ccge::harness {

// Long-format summary: one row per (eval step, metric) with the IQM across
// runs and its 95% bootstrap interval.
struct SummaryRow {
  std::int64_t step = 0;
  std::string metric;
  double iqm = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t runs = 0;
};

const std::vector<std::string>& summary_metrics();

// Reads metrics.csv from each directory. All runs must share one eval-step
// grid; otherwise ConfigError lists the runs that disagree with the first.
// The result does not depend on the order of run_dirs.
std::vector<SummaryRow> aggregate(const std::vector<std::filesystem::path>& run_dirs);
void write_summary(const std::vector<SummaryRow>& rows, const std::filesystem::path& csv);

struct SweepRow {
  double lambda = 0.0;
  std::int64_t interval_start = 0;  // inclusive env step
  std::int64_t interval_end = 0;    // exclusive env step
  double guidance_ratio = 0.0;      // mean over seeds of the per-interval ratio
  double eval_return = 0.0;         // mean of eval rows inside the interval, over seeds
  std::size_t runs = 0;
};

// Per-interval guidance ratio (from steps.csv) and eval return (from
// metrics.csv) for the runs of one lambda.
std::vector<SweepRow> summarize_lambda(double lambda, const std::vector<std::filesystem::path>& run_dirs,
                                       std::int64_t interval, std::int64_t total_steps);

// Runs base_config for every lambda with per-step logging on, then writes
// sweep.csv under out_root.
std::vector<SweepRow> sweep_lambda(const RunConfig& base_config, const std::vector<double>& lambdas,
                                   const std::filesystem::path& out_root, const RunOptions& options = {});
void write_sweep(const std::vector<SweepRow>& rows, const std::filesystem::path& csv);

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& csv);
std::string format_number(double value);

}  // namespace ccge::harness
