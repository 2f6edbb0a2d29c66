#include "ccge/envs/classic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ccge::envs {

// ---------------------------------------------------------------- CartPole

CartPole::State CartPole::derivative(const State& s, double force) {
  const double theta = s[2];
  const double theta_dot = s[3];
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double temp = (force + kPoleMassLength * theta_dot * theta_dot * sin_t) / kTotalMass;
  const double theta_acc =
      (kGravity * sin_t - cos_t * temp) / (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_t * cos_t / kTotalMass));
  const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;
  return {s[1], x_acc, theta_dot, theta_acc};
}

CartPole::State CartPole::rk4_step(const State& s, double force, double dt) {
  auto add = [](const State& a, const State& b, double h) {
    return State{a[0] + h * b[0], a[1] + h * b[1], a[2] + h * b[2], a[3] + h * b[3]};
  };
  const State k1 = derivative(s, force);
  const State k2 = derivative(add(s, k1, dt / 2), force);
  const State k3 = derivative(add(s, k2, dt / 2), force);
  const State k4 = derivative(add(s, k3, dt), force);
  State out;
  for (int i = 0; i < 4; ++i) out[i] = s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

EnvSpec CartPole::spec() const { return {"cartpole", 4, 0, 2, kHorizon, 0.0, 1.0}; }

double CartPole::success() const { return state().step_index >= kHorizon ? 1.0 : 0.0; }

std::vector<double> CartPole::reset_impl(Rng& rng) {
  std::uniform_real_distribution<double> init(-0.05, 0.05);
  for (double& x : s_) x = init(rng);
  return observe();
}

double CartPole::step_impl(std::span<const double> action, bool& terminated) {
  const double force = action[0] >= 0.5 ? kForce : -kForce;
  s_ = rk4_step(s_, force, kDt);
  terminated = s_[0] < -kXLimit || s_[0] > kXLimit || s_[2] < -kThetaLimit || s_[2] > kThetaLimit;
  return 1.0;
}

std::vector<double> CartPole::observe() const { return {s_.begin(), s_.end()}; }

// ------------------------------------------------------------- MountainCar

EnvSpec MountainCar::spec() const { return {"mountaincar", 2, 0, 3, kHorizon, -1.0, -1.0}; }

std::vector<double> MountainCar::reset_impl(Rng& rng) {
  std::uniform_real_distribution<double> init(-0.6, -0.4);
  position_ = init(rng);
  velocity_ = 0.0;
  reached_goal_ = false;
  return observe();
}

double MountainCar::step_impl(std::span<const double> action, bool& terminated) {
  const double push = action[0] - 1.0;
  velocity_ += push * kForce + std::cos(3.0 * position_) * (-kGravity);
  velocity_ = std::clamp(velocity_, -kMaxSpeed, kMaxSpeed);
  position_ += velocity_;
  position_ = std::clamp(position_, kMinPosition, kMaxPosition);
  if (position_ == kMinPosition && velocity_ < 0.0) velocity_ = 0.0;
  terminated = position_ >= kGoalPosition;
  reached_goal_ = reached_goal_ || terminated;
  return -1.0;
}

std::vector<double> MountainCar::observe() const { return {position_, velocity_}; }

// ---------------------------------------------------------------- Pendulum

double Pendulum::wrap_angle(double theta) {
  constexpr double kPi = std::numbers::pi;
  double wrapped = std::fmod(theta + kPi, 2.0 * kPi);
  if (wrapped < 0.0) wrapped += 2.0 * kPi;
  return wrapped - kPi;
}

EnvSpec Pendulum::spec() const {
  constexpr double kPi = std::numbers::pi;
  const double worst = kPi * kPi + 0.1 * kMaxSpeed * kMaxSpeed + 0.001 * kMaxTorque * kMaxTorque;
  return {"pendulum", 3, 1, 0, kHorizon, -worst, 0.0};
}

double Pendulum::success() const { return std::abs(wrap_angle(theta_)) < 0.5 ? 1.0 : 0.0; }

std::vector<double> Pendulum::reset_impl(Rng& rng) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> speed(-1.0, 1.0);
  theta_ = angle(rng);
  theta_dot_ = speed(rng);
  return observe();
}

double Pendulum::step_impl(std::span<const double> action, bool& terminated) {
  const double u = std::clamp(action[0] * kMaxTorque, -kMaxTorque, kMaxTorque);
  const double th = wrap_angle(theta_);
  const double cost = th * th + 0.1 * theta_dot_ * theta_dot_ + 0.001 * u * u;
  double new_speed = theta_dot_ + (3.0 * kGravity / (2.0 * kLength) * std::sin(theta_) +
                                   3.0 / (kMass * kLength * kLength) * u) * kDt;
  new_speed = std::clamp(new_speed, -kMaxSpeed, kMaxSpeed);
  theta_ = theta_ + new_speed * kDt;
  theta_dot_ = new_speed;
  terminated = false;
  return -cost;
}

std::vector<double> Pendulum::observe() const { return {std::cos(theta_), std::sin(theta_), theta_dot_}; }

}  // namespace ccge::envs
