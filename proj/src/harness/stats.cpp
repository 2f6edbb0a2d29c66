#include "ccge/harness/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace ccge::harness {

double iqm(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("iqm: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t trim = sorted.size() / 4;
  double sum = 0.0;
  for (std::size_t i = trim; i < sorted.size() - trim; ++i) sum += sorted[i];
  return sum / static_cast<double>(sorted.size() - 2 * trim);
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile: no values");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto below = static_cast<std::size_t>(std::floor(pos));
  const std::size_t above = std::min(below + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(below);
  return sorted[below] + frac * (sorted[above] - sorted[below]);
}

Interval bootstrap_ci(std::span<const double> values, double level, int resamples, Rng& rng) {
  if (values.size() < 2) throw std::invalid_argument("bootstrap_ci: need at least two values");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap_ci: level must lie in (0, 1)");
  if (resamples < 1) throw std::invalid_argument("bootstrap_ci: resamples must be positive");
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> draw(values.size());
  std::vector<double> stats(static_cast<std::size_t>(resamples));
  for (auto& s : stats) {
    for (auto& d : draw) d = values[pick(rng)];
    s = iqm(draw);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = (1.0 - level) / 2.0;
  Interval out{sorted_quantile(stats, tail), sorted_quantile(stats, 1.0 - tail)};
  const double centre = iqm(values);
  out.lo = std::min(out.lo, centre);
  out.hi = std::max(out.hi, centre);
  return out;
}

}  // namespace ccge::harness
