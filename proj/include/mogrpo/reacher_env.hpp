#pragma once

#include <array>
#include <cstdint>

#include "mogrpo/rng.hpp"

namespace mogrpo {

struct RewardQuad {
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;
  double r4 = 0.0;

  double total() const { return r1 + r2 + r3 + r4; }
  double operator[](std::size_t i) const {
    return i == 0 ? r1 : i == 1 ? r2 : i == 2 ? r3 : r4;
  }
};

// Common radius of the four targets on the +x/+y/-x/-y axes. Calibrated once
// by the constant-velocity grid search below so that the best sweep averages
// about 1.76 total reward per step with the default kinematics.
inline constexpr double kReacherTargetRadius = 0.3530;

struct ReacherConfig {
  double link1 = 0.1;
  double link2 = 0.1;
  double torque_gain = 0.2;  // rad/step^2 per unit torque
  double omega_max = 1.0;    // rad/step
  double dt = 1.0;
  double target_radius = kReacherTargetRadius;
  int horizon = 50;
  double r1_noise_std = 0.0;  // ablation: N(0, sigma^2) added to observed r1
};

// Two-joint planar arm under first-order (velocity-integrated) dynamics.
// The nine discrete actions are torque pairs in {-1, 0, +1} x {-1, 0, +1};
// each step clamps the angular velocities, advances the joint angles, and
// scores the end-effector against the four fixed targets:
//
//   r_i = 1 - 4 * |p_arm - p_target_i|^2
//
// Observations are (sin q1, cos q1, sin q2, cos q2, w1, w2). Dynamics are
// deterministic; the seed only feeds the optional r1 reward-noise ablation.
class ReacherEnv {
 public:
  static constexpr int kActionCount = 9;
  static constexpr int kObservationSize = 6;
  static constexpr int kObjectives = 4;

  using Observation = std::array<double, kObservationSize>;

  struct StepResult {
    Observation observation{};
    RewardQuad rewards;
    bool done = false;
  };

  explicit ReacherEnv(std::uint64_t seed, ReacherConfig config = {});

  // Joints at rest pointing along +x; returns (0, 1, 0, 1, 0, 0).
  Observation reset(std::uint64_t seed);
  Observation reset() { return reset(seed_); }

  StepResult step(int action);

  Observation observation() const;
  std::array<double, 2> end_effector() const;
  const std::array<std::array<double, 2>, 4>& targets() const {
    return targets_;
  }
  int step_index() const { return step_; }
  bool done() const { return step_ >= config_.horizon; }
  const ReacherConfig& config() const { return config_; }

  // Torque pair for an action index: (action / 3 - 1, action % 3 - 1).
  static std::array<int, 2> decode_action(int action);

 private:
  ReacherConfig config_;
  std::array<std::array<double, 2>, 4> targets_;
  std::uint64_t seed_;
  Rng rng_;
  double angle1_ = 0.0;
  double angle2_ = 0.0;
  double omega1_ = 0.0;
  double omega2_ = 0.0;
  int step_ = 0;
};

// Targets on the axes at the given radius, in +x, +y, -x, -y order.
std::array<std::array<double, 2>, 4> reacher_targets(double radius);

// Reward quad for an arbitrary end-effector position (no noise).
RewardQuad reacher_rewards(const std::array<double, 2>& position,
                           const std::array<std::array<double, 2>, 4>& targets);

// Brute-force calibration baseline: grid search over constant angular
// velocities (idealized rotation, no torque ramp-up), returning the best
// mean total reward per step over one horizon.
struct SweepResult {
  double mean_total_reward = 0.0;
  double omega1 = 0.0;
  double omega2 = 0.0;
};

SweepResult best_constant_velocity_sweep(const ReacherConfig& config,
                                         double grid_step = 0.01);

}  // namespace mogrpo
