#include "mogrpo/bandit_env.hpp"

#include <stdexcept>
#include <string>

namespace mogrpo {

namespace {

std::vector<double> draw_means(std::size_t arms, Rng& rng) {
  std::vector<double> means(arms);
  for (double& m : means) m = rng.normal();
  return means;
}

}  // namespace

BanditEnv::BanditEnv(std::uint64_t seed, BanditConfig config)
    : config_(config), rng_(Rng(seed).child(1)) {
  if (config_.arms == 0) {
    throw std::invalid_argument("BanditEnv: need at least one arm");
  }
  Rng mean_rng = Rng(seed).child(0);
  means_ = draw_means(config_.arms, mean_rng);
}

BanditEnv::BanditEnv(std::uint64_t seed, std::vector<double> arm_means,
                     BanditConfig config)
    : config_(config), means_(std::move(arm_means)), rng_(Rng(seed).child(1)) {
  if (means_.empty()) {
    throw std::invalid_argument("BanditEnv: need at least one arm");
  }
  config_.arms = means_.size();
}

RewardTriple BanditEnv::pull(std::size_t arm) {
  if (arm >= means_.size()) {
    throw std::out_of_range("BanditEnv: arm index " + std::to_string(arm) +
                            " out of range");
  }
  if (done()) {
    throw std::runtime_error("BanditEnv: episode exhausted");
  }
  ++pulls_;

  const double mu = means_[arm];
  const double n1 = config_.zero_noise ? 0.0 : rng_.normal();
  const double n2 = config_.zero_noise ? 0.0 : rng_.normal();
  const double n3 = config_.zero_noise ? 0.0 : rng_.normal();

  RewardTriple reward;
  reward.r1 = mu + 10.0 * n1;
  reward.r2 = mu + 1.0 * n2 - 0.1 * reward.r1;
  reward.r3 = mu + 0.1 * n3;
  return reward;
}

}  // namespace mogrpo
