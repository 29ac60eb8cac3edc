#include "mogrpo/reacher_env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mogrpo {

namespace {

std::array<double, 2> end_effector_at(const ReacherConfig& config,
                                      double angle1, double angle2) {
  return {config.link1 * std::cos(angle1) +
              config.link2 * std::cos(angle1 + angle2),
          config.link1 * std::sin(angle1) +
              config.link2 * std::sin(angle1 + angle2)};
}

}  // namespace

std::array<std::array<double, 2>, 4> reacher_targets(double radius) {
  return {{{radius, 0.0}, {0.0, radius}, {-radius, 0.0}, {0.0, -radius}}};
}

RewardQuad reacher_rewards(const std::array<double, 2>& position,
                           const std::array<std::array<double, 2>, 4>& targets) {
  RewardQuad quad;
  double* slots[4] = {&quad.r1, &quad.r2, &quad.r3, &quad.r4};
  for (std::size_t i = 0; i < 4; ++i) {
    const double dx = position[0] - targets[i][0];
    const double dy = position[1] - targets[i][1];
    *slots[i] = 1.0 - 4.0 * (dx * dx + dy * dy);
  }
  return quad;
}

ReacherEnv::ReacherEnv(std::uint64_t seed, ReacherConfig config)
    : config_(config),
      targets_(reacher_targets(config.target_radius)),
      seed_(seed),
      rng_(seed) {
  if (config_.horizon < 1) {
    throw std::invalid_argument("ReacherEnv: horizon must be positive");
  }
  reset(seed);
}

ReacherEnv::Observation ReacherEnv::reset(std::uint64_t seed) {
  seed_ = seed;
  rng_ = Rng(seed);
  angle1_ = 0.0;
  angle2_ = 0.0;
  omega1_ = 0.0;
  omega2_ = 0.0;
  step_ = 0;
  return observation();
}

std::array<int, 2> ReacherEnv::decode_action(int action) {
  if (action < 0 || action >= kActionCount) {
    throw std::out_of_range("ReacherEnv: action index " +
                            std::to_string(action) + " out of range");
  }
  return {action / 3 - 1, action % 3 - 1};
}

ReacherEnv::Observation ReacherEnv::observation() const {
  return {std::sin(angle1_), std::cos(angle1_), std::sin(angle2_),
          std::cos(angle2_), omega1_, omega2_};
}

std::array<double, 2> ReacherEnv::end_effector() const {
  return end_effector_at(config_, angle1_, angle2_);
}

ReacherEnv::StepResult ReacherEnv::step(int action) {
  const std::array<int, 2> torque = decode_action(action);
  if (done()) {
    throw std::runtime_error("ReacherEnv: episode finished, reset first");
  }

  omega1_ = std::clamp(omega1_ + config_.torque_gain * torque[0],
                       -config_.omega_max, config_.omega_max);
  omega2_ = std::clamp(omega2_ + config_.torque_gain * torque[1],
                       -config_.omega_max, config_.omega_max);
  angle1_ += omega1_ * config_.dt;
  angle2_ += omega2_ * config_.dt;
  ++step_;

  StepResult result;
  result.observation = observation();
  result.rewards = reacher_rewards(end_effector(), targets_);
  if (config_.r1_noise_std > 0.0) {
    result.rewards.r1 += config_.r1_noise_std * rng_.normal();
  }
  result.done = done();
  return result;
}

SweepResult best_constant_velocity_sweep(const ReacherConfig& config,
                                         double grid_step) {
  if (!(grid_step > 0.0)) {
    throw std::invalid_argument("sweep: grid step must be positive");
  }
  const auto targets = reacher_targets(config.target_radius);
  SweepResult best;
  best.mean_total_reward = -1e300;

  const int half = static_cast<int>(std::llround(config.omega_max / grid_step));
  for (int i = -half; i <= half; ++i) {
    for (int j = -half; j <= half; ++j) {
      const double w1 = i * grid_step;
      const double w2 = j * grid_step;
      double total = 0.0;
      for (int t = 1; t <= config.horizon; ++t) {
        const auto p = end_effector_at(config, w1 * config.dt * t,
                                       w2 * config.dt * t);
        total += reacher_rewards(p, targets).total();
      }
      const double mean = total / static_cast<double>(config.horizon);
      if (mean > best.mean_total_reward) {
        best = {mean, w1, w2};
      }
    }
  }
  return best;
}

}  // namespace mogrpo
