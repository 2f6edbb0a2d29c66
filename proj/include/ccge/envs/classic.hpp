#pragma once

#include <array>

#include "ccge/envs/environment.hpp"

namespace ccge::envs {

// Cart-pole balancing with the classical constants (g=9.8, cart 1.0 kg,
// pole 0.1 kg, half-length 0.5 m, force 10 N, dt=0.02 s), integrated with
// one classical Runge-Kutta step per tick.
// Observation: [x, x_dot, theta, theta_dot]. Actions: 0 push left, 1 push
// right. Reward +1 per tick; terminates when |x| > 2.4 or |theta| > 12 deg;
// truncates at 500 ticks.
class CartPole final : public Environment {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kTotalMass = kCartMass + kPoleMass;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kPoleMassLength = kPoleMass * kHalfLength;
  static constexpr double kForce = 10.0;
  static constexpr double kDt = 0.02;
  static constexpr double kThetaLimit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
  static constexpr double kXLimit = 2.4;
  static constexpr int kHorizon = 500;

  using State = std::array<double, 4>;

  // Time derivative of the state under a horizontal force.
  static State derivative(const State& s, double force);
  static State rk4_step(const State& s, double force, double dt);

  EnvSpec spec() const override;
  double success() const override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<CartPole>(*this); }

  void set_physical_state(const State& s) { s_ = s; }
  const State& physical_state() const { return s_; }

 protected:
  std::vector<double> reset_impl(Rng& rng) override;
  double step_impl(std::span<const double> action, bool& terminated) override;
  std::vector<double> observe() const override;

 private:
  State s_{};
};

// Mountain car with the classical discrete update (force 0.001, gravity
// 0.0025, speed limit 0.07). Observation: [position, velocity]. Actions:
// 0 push left, 1 no push, 2 push right. Reward -1 per tick; terminates
// when position >= 0.5; truncates at 200 ticks.
class MountainCar final : public Environment {
 public:
  static constexpr double kMinPosition = -1.2;
  static constexpr double kMaxPosition = 0.6;
  static constexpr double kMaxSpeed = 0.07;
  static constexpr double kGoalPosition = 0.5;
  static constexpr double kForce = 0.001;
  static constexpr double kGravity = 0.0025;
  static constexpr int kHorizon = 200;

  EnvSpec spec() const override;
  double success() const override { return reached_goal_ ? 1.0 : 0.0; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<MountainCar>(*this); }

 protected:
  std::vector<double> reset_impl(Rng& rng) override;
  double step_impl(std::span<const double> action, bool& terminated) override;
  std::vector<double> observe() const override;

 private:
  double position_ = 0.0;
  double velocity_ = 0.0;
  bool reached_goal_ = false;
};

// Pendulum swing-up (g=10, m=1, l=1, dt=0.05, max torque 2, max speed 8)
// with semi-implicit Euler. Observation: [cos theta, sin theta, theta_dot].
// Action in [-1, 1] scaled to torque. Reward -(theta^2 + 0.1 theta_dot^2 +
// 0.001 u^2) with theta wrapped to [-pi, pi); truncates at 200 ticks.
class Pendulum final : public Environment {
 public:
  static constexpr double kGravity = 10.0;
  static constexpr double kMass = 1.0;
  static constexpr double kLength = 1.0;
  static constexpr double kDt = 0.05;
  static constexpr double kMaxTorque = 2.0;
  static constexpr double kMaxSpeed = 8.0;
  static constexpr int kHorizon = 200;

  static double wrap_angle(double theta);

  EnvSpec spec() const override;
  double success() const override;
  std::unique_ptr<Environment> clone() const override { return std::make_unique<Pendulum>(*this); }

  double theta() const { return theta_; }
  double theta_dot() const { return theta_dot_; }

 protected:
  std::vector<double> reset_impl(Rng& rng) override;
  double step_impl(std::span<const double> action, bool& terminated) override;
  std::vector<double> observe() const override;

 private:
  double theta_ = 0.0;
  double theta_dot_ = 0.0;
};

}  // namespace ccge::envs
