#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ccge/common/rng.hpp"

namespace ccge::harness {

// Interquartile mean: sort, drop floor(n / 4) values from each end, average
// the rest.
double iqm(std::span<const double> values);

// Linear-interpolated quantile (q in [0, 1]) of already sorted values.
double sorted_quantile(std::span<const double> sorted, double q);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap of the IQM. The interval is widened if needed so it
// always contains iqm(values).
Interval bootstrap_ci(std::span<const double> values, double level, int resamples, Rng& rng);

inline constexpr int kDefaultResamples = 2000;

}  // namespace ccge::harness
