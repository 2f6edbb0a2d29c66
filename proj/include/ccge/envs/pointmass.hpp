#pragma once

#include <array>
#include <vector>

#include "ccge/envs/environment.hpp"

namespace ccge::envs {

struct WaypointTrack {
  std::vector<std::array<double, 2>> targets;
  double capture_radius = 0.5;
  std::size_t current = 0;  // index of the active target; == size() when done

  bool done() const { return current >= targets.size(); }
  std::size_t remaining() const { return targets.size() - current; }
};

// Planar double integrator chasing a sequence of waypoints.
//
// Per tick (dt = 0.01 s):  v <- (1 - 0.05) v + 25 * clamp(a) * dt,
//                          p <- p + v * dt.
// The agent starts at rest at the origin; four waypoints are drawn uniformly
// in [-5, 5]^2, each at least one capture radius (0.5) away from its
// predecessor. A waypoint is captured when |target - p| <= 0.5 after the
// move; the episode terminates once all are captured and truncates at 500
// ticks.
//
// Observation (8): [px, py, vx, vy, tx - px, ty - py, remaining / 4, t / 500].
//
// Sparse reward: -0.1 every tick, +100 on a capture tick (so 99.9).
// Dense reward: the sparse reward plus 10 * (distance reduction to the
// active target during the tick).
class PointMass final : public Environment {
 public:
  static constexpr double kDt = 0.01;
  static constexpr double kAccelScale = 25.0;
  static constexpr double kDrag = 0.05;
  static constexpr double kCaptureRadius = 0.5;
  static constexpr double kArenaHalfWidth = 5.0;
  static constexpr int kWaypoints = 4;
  static constexpr int kHorizon = 500;
  static constexpr double kStepPenalty = 0.1;
  static constexpr double kCaptureReward = 100.0;
  static constexpr double kProgressScale = 10.0;

  explicit PointMass(bool sparse) : sparse_(sparse) {}

  EnvSpec spec() const override;
  double success() const override { return static_cast<double>(track_.current); }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<PointMass>(*this); }

  const WaypointTrack& track() const { return track_; }
  std::array<double, 2> position() const { return position_; }
  std::array<double, 2> velocity() const { return velocity_; }
  bool sparse() const { return sparse_; }

  // Replaces the current episode's layout (tests and oracles).
  void set_track(WaypointTrack track) { track_ = std::move(track); }
  void set_kinematics(std::array<double, 2> position, std::array<double, 2> velocity) {
    position_ = position;
    velocity_ = velocity;
  }

 protected:
  std::vector<double> reset_impl(Rng& rng) override;
  double step_impl(std::span<const double> action, bool& terminated) override;
  std::vector<double> observe() const override;

 private:
  bool sparse_;
  WaypointTrack track_;
  std::array<double, 2> position_{};
  std::array<double, 2> velocity_{};
  int ticks_ = 0;
};

}  // namespace ccge::envs
