#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mogrpo/rng.hpp"

namespace mogrpo {

struct RewardTriple {
  double r1 = 0.0;
  double r2 = 0.0;
  double r3 = 0.0;

  double total() const { return r1 + r2 + r3; }
};

struct BanditConfig {
  std::size_t arms = 50;
  std::size_t episode_length = 5000;  // pulls per episode
  bool zero_noise = false;            // test hook: suppress all reward noise
};

// Stationary multi-armed bandit with three noisy reward channels per pull.
// Arm means are drawn once (i.i.d. standard normal) at construction and stay
// fixed for the whole episode. For a pulled arm with mean mu:
//
//   r1 = mu + N(0, 10^2)
//   r2 = mu + N(0, 1^2) - 0.1 * r1   (reuses the realized r1, so
//                                     Cov(r1, r2) = -0.1 * Var(r1) = -10)
//   r3 = mu + N(0, 0.1^2)
//
// Instances are single-owner mutable state; run distinct seeded instances
// for parallel work.
class BanditEnv {
 public:
  explicit BanditEnv(std::uint64_t seed, BanditConfig config = {});

  // Test hook: fixed arm means instead of random draws.
  BanditEnv(std::uint64_t seed, std::vector<double> arm_means,
            BanditConfig config = {});

  std::size_t arms() const { return means_.size(); }
  const std::vector<double>& arm_means() const { return means_; }
  std::size_t pulls() const { return pulls_; }
  std::size_t episode_length() const { return config_.episode_length; }
  bool done() const { return pulls_ >= config_.episode_length; }

  RewardTriple pull(std::size_t arm);

 private:
  BanditConfig config_;
  std::vector<double> means_;
  std::size_t pulls_ = 0;
  Rng rng_;
};

}  // namespace mogrpo
