#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ccge/harness/config.hpp"

namespace ccge::harness {

// Guided-step counts of a frozen training snapshot: the checkpointed actor
// rolls out its stochastic policy for `steps` environment steps (it always
// keeps control, so every lambda sees the same states), and each step's k is
// scored against the config's oracle with the frozen critics.
struct SnapshotGuidance {
  std::vector<double> lambdas;
  std::vector<std::size_t> guided;  // per lambda
  std::vector<double> k;            // per visited state
};

SnapshotGuidance frozen_guidance(const RunConfig& config, const std::filesystem::path& checkpoint,
                                 const std::vector<double>& lambdas, std::size_t steps, std::uint64_t seed);

}  // namespace ccge::harness
