#include "ccge/harness/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ccge/common/errors.hpp"
#include "ccge/harness/stats.hpp"

namespace ccge::harness {
namespace fs = std::filesystem;

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& csv) {
  std::ifstream in(csv);
  if (!in) throw std::runtime_error("cannot read " + csv.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.emplace_back();
    rows.push_back(std::move(fields));
  }
  return rows;
}

const std::vector<std::string>& summary_metrics() {
  static const std::vector<std::string> metrics = {"eval_return",  "eval_return_iqm",  "eval_success",
                                                   "guided_ratio", "mean_uncertainty", "episodic_mean_uncertainty"};
  return metrics;
}

namespace {

double metric_value(const MetricRecord& r, const std::string& metric) {
  if (metric == "eval_return") return r.eval_return;
  if (metric == "eval_return_iqm") return r.eval_return_iqm;
  if (metric == "eval_success") return r.eval_success;
  if (metric == "guided_ratio") return r.guided_ratio;
  if (metric == "mean_uncertainty") return r.mean_uncertainty;
  if (metric == "episodic_mean_uncertainty") return r.episodic_mean_uncertainty;
  throw std::invalid_argument("unknown metric " + metric);
}

}  // namespace

std::vector<SummaryRow> aggregate(const std::vector<fs::path>& run_dirs) {
  if (run_dirs.empty()) throw ConfigError("aggregate: no runs given");
  std::vector<fs::path> dirs = run_dirs;
  std::sort(dirs.begin(), dirs.end());
  std::vector<std::vector<MetricRecord>> runs;
  for (const auto& d : dirs) runs.push_back(read_metrics(d / "metrics.csv"));

  auto grid = [](const std::vector<MetricRecord>& recs) {
    std::vector<std::int64_t> steps;
    for (const auto& r : recs) steps.push_back(r.step);
    return steps;
  };
  const auto reference = grid(runs.front());
  std::vector<std::string> offending;
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (grid(runs[i]) != reference) offending.push_back(dirs[i].string());
  }
  if (!offending.empty()) {
    std::string msg = "aggregate: eval-step grid differs from " + dirs.front().string() + " in:";
    for (const auto& o : offending) msg += " " + o;
    throw ConfigError(msg);
  }

  std::vector<SummaryRow> rows;
  for (std::size_t s = 0; s < reference.size(); ++s) {
    for (std::size_t m = 0; m < summary_metrics().size(); ++m) {
      const std::string& metric = summary_metrics()[m];
      std::vector<double> values;
      for (const auto& run : runs) {
        const double v = metric_value(run[s], metric);
        if (!std::isnan(v)) values.push_back(v);
      }
      if (values.empty()) continue;
      std::sort(values.begin(), values.end());
      SummaryRow row;
      row.step = reference[s];
      row.metric = metric;
      row.runs = values.size();
      row.iqm = iqm(values);
      if (values.size() >= 2) {
        Rng rng = make_rng(static_cast<std::uint64_t>(reference[s]), static_cast<std::uint32_t>(100 + m));
        const Interval ci = bootstrap_ci(values, 0.95, kDefaultResamples, rng);
        row.ci_lo = ci.lo;
        row.ci_hi = ci.hi;
      } else {
        row.ci_lo = row.ci_hi = row.iqm;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_summary(const std::vector<SummaryRow>& rows, const fs::path& csv) {
  std::ofstream out(csv, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + csv.string());
  out << "step,metric,iqm,ci_lo,ci_hi,runs\n";
  for (const auto& r : rows) {
    out << r.step << "," << r.metric << "," << format_number(r.iqm) << "," << format_number(r.ci_lo) << ","
        << format_number(r.ci_hi) << "," << r.runs << "\n";
  }
}

std::vector<SweepRow> summarize_lambda(double lambda, const std::vector<fs::path>& run_dirs, std::int64_t interval,
                                       std::int64_t total_steps) {
  if (interval < 1) throw ConfigError("sweep interval must be positive");
  const std::int64_t count = (total_steps + interval - 1) / interval;
  std::vector<double> ratio_sum(static_cast<std::size_t>(count), 0.0);
  std::vector<double> return_sum(static_cast<std::size_t>(count), 0.0);
  std::vector<std::size_t> return_runs(static_cast<std::size_t>(count), 0);
  for (const auto& dir : run_dirs) {
    const auto rows = read_csv(dir / "steps.csv");
    std::vector<std::size_t> guided(static_cast<std::size_t>(count), 0);
    std::vector<std::size_t> steps(static_cast<std::size_t>(count), 0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto b = static_cast<std::size_t>(std::stoll(rows[i][0]) / interval);
      ++steps[b];
      guided[b] += rows[i][3] == "1" ? 1 : 0;
    }
    for (std::size_t b = 0; b < steps.size(); ++b) {
      if (steps[b] > 0) ratio_sum[b] += static_cast<double>(guided[b]) / static_cast<double>(steps[b]);
    }
    std::vector<double> ret(static_cast<std::size_t>(count), 0.0);
    std::vector<std::size_t> n(static_cast<std::size_t>(count), 0);
    for (const auto& r : read_metrics(dir / "metrics.csv")) {
      // An eval row at env step s covers the policy after s steps, i.e.
      // the interval containing step s - 1.
      const auto b = static_cast<std::size_t>((r.step - 1) / interval);
      ret[b] += r.eval_return;
      ++n[b];
    }
    for (std::size_t b = 0; b < ret.size(); ++b) {
      if (n[b] > 0) {
        return_sum[b] += ret[b] / static_cast<double>(n[b]);
        ++return_runs[b];
      }
    }
  }
  std::vector<SweepRow> out;
  for (std::int64_t b = 0; b < count; ++b) {
    const auto i = static_cast<std::size_t>(b);
    SweepRow row;
    row.lambda = lambda;
    row.interval_start = b * interval;
    row.interval_end = std::min(total_steps, (b + 1) * interval);
    row.runs = run_dirs.size();
    row.guidance_ratio = ratio_sum[i] / static_cast<double>(run_dirs.size());
    row.eval_return = return_runs[i] ? return_sum[i] / static_cast<double>(return_runs[i])
                                     : std::numeric_limits<double>::quiet_NaN();
    out.push_back(row);
  }
  return out;
}

std::vector<SweepRow> sweep_lambda(const RunConfig& base_config, const std::vector<double>& lambdas,
                                   const fs::path& out_root, const RunOptions& options) {
  if (lambdas.size() < 2) throw ConfigError("sweep-lambda needs at least two lambda values");
  std::vector<SweepRow> rows;
  const std::string base_name = run_label(base_config);
  for (double lambda : lambdas) {
    RunConfig c = base_config;
    c.lambda = lambda;
    c.log_steps = true;
    c.run_name = base_name + "_lambda" + format_number(lambda);
    const auto results = run(c, out_root, options);
    std::vector<fs::path> dirs;
    for (const auto& r : results) dirs.push_back(r.dir);
    const auto part = summarize_lambda(lambda, dirs, c.sweep_interval, c.total_steps);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  write_sweep(rows, out_root / "sweep.csv");
  return rows;
}

void write_sweep(const std::vector<SweepRow>& rows, const fs::path& csv) {
  std::ofstream out(csv, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + csv.string());
  out << "lambda,interval_start,interval_end,guidance_ratio,eval_return,runs\n";
  for (const auto& r : rows) {
    out << format_number(r.lambda) << "," << r.interval_start << "," << r.interval_end << ","
        << format_number(r.guidance_ratio) << "," << format_number(r.eval_return) << "," << r.runs << "\n";
  }
}

}  // namespace ccge::harness
