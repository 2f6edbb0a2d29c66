#include "ccge/envs/pointmass.hpp"

#include <cmath>

namespace ccge::envs {
namespace {

double distance(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

}  // namespace

EnvSpec PointMass::spec() const {
  const double worst = -kStepPenalty - (sparse_ ? 0.0 : kProgressScale * 1.0);
  const double best = kCaptureReward - kStepPenalty + (sparse_ ? 0.0 : kProgressScale * 1.0);
  return {sparse_ ? "pointmass-sparse" : "pointmass-dense", 8, 2, 0, kHorizon, worst, best};
}

std::vector<double> PointMass::reset_impl(Rng& rng) {
  std::uniform_real_distribution<double> coord(-kArenaHalfWidth, kArenaHalfWidth);
  track_ = WaypointTrack{};
  track_.capture_radius = kCaptureRadius;
  std::array<double, 2> previous{0.0, 0.0};
  while (static_cast<int>(track_.targets.size()) < kWaypoints) {
    std::array<double, 2> candidate{coord(rng), coord(rng)};
    if (distance(candidate, previous) <= kCaptureRadius) continue;
    track_.targets.push_back(candidate);
    previous = candidate;
  }
  position_ = {0.0, 0.0};
  velocity_ = {0.0, 0.0};
  ticks_ = 0;
  return observe();
}

double PointMass::step_impl(std::span<const double> action, bool& terminated) {
  const double before = track_.done() ? 0.0 : distance(track_.targets[track_.current], position_);
  for (int i = 0; i < 2; ++i) {
    velocity_[i] = (1.0 - kDrag) * velocity_[i] + kAccelScale * action[i] * kDt;
    position_[i] += velocity_[i] * kDt;
  }
  ++ticks_;
  double reward = -kStepPenalty;
  if (!track_.done()) {
    const double after = distance(track_.targets[track_.current], position_);
    if (!sparse_) reward += kProgressScale * (before - after);
    if (after <= track_.capture_radius) {
      reward += kCaptureReward;
      ++track_.current;
    }
  }
  terminated = track_.done();
  return reward;
}

std::vector<double> PointMass::observe() const {
  std::array<double, 2> to_target{0.0, 0.0};
  if (!track_.done()) {
    to_target = {track_.targets[track_.current][0] - position_[0], track_.targets[track_.current][1] - position_[1]};
  }
  return {position_[0],
          position_[1],
          velocity_[0],
          velocity_[1],
          to_target[0],
          to_target[1],
          static_cast<double>(track_.remaining()) / kWaypoints,
          static_cast<double>(ticks_) / kHorizon};
}

}  // namespace ccge::envs
