#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mogrpo/advantage.hpp"
#include "mogrpo/bandit_env.hpp"
#include "mogrpo/policy.hpp"
#include "mogrpo/reacher_env.hpp"
#include "mogrpo/rng.hpp"

namespace mogrpo {

// One rollout under the frozen reference policy. Reference log-probabilities
// are recorded at collection time and never recomputed.
struct Trajectory {
  std::vector<std::vector<double>> states;
  std::vector<int> actions;
  std::vector<double> ref_log_probs;
  std::vector<double> returns;  // per objective, summed over the trajectory

  std::size_t length() const { return actions.size(); }
};

struct GroupSample {
  std::vector<Trajectory> trajectories;

  std::size_t size() const { return trajectories.size(); }
  std::size_t objectives() const {
    return trajectories.empty() ? 0 : trajectories.front().returns.size();
  }
};

// Uniform rollout interface over the concrete environments. Instances are
// single-owner mutable state.
class RolloutEnv {
 public:
  virtual ~RolloutEnv() = default;
  virtual std::size_t observation_size() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual std::size_t objectives() const = 0;
  virtual void begin_trajectory(Rng& rng) = 0;
  virtual std::vector<double> observation() const = 0;
  // Applies the action; returns per-objective rewards and whether the
  // trajectory ended.
  virtual std::pair<std::vector<double>, bool> step(int action, Rng& rng) = 0;
};

// The correlated-noise bandit. One pull per trajectory; the observation is
// the constant scalar 1 (the task is stateless).
struct BanditSetup {
  std::size_t arms = 50;
};

struct ReacherSetup {
  ReacherConfig config;
};

// Plain table bandit for toy problems: expected reward per arm and
// objective, plus optional independent gaussian noise per objective.
struct TableBanditSetup {
  std::vector<std::vector<double>> arm_rewards;  // arms x objectives
  std::vector<double> noise_stds;                // empty means noise-free
};

using EnvSetup = std::variant<BanditSetup, ReacherSetup, TableBanditSetup>;

// `pull_budget` caps the total number of bandit pulls for the run; the other
// environments ignore it.
std::unique_ptr<RolloutEnv> make_rollout_env(const EnvSetup& setup,
                                             std::uint64_t seed,
                                             std::size_t pull_budget);

struct TrainConfig {
  EnvSetup env;
  Estimator estimator = Estimator::MoGrpo;
  bool sqrt_k_scale = false;
  std::size_t group_size = 8;
  double clip_epsilon = 0.2;  // +infinity disables clipping
  double kl_beta = 0.04;
  std::size_t iterations = 5000;
  std::size_t updates_per_group = 1;
  AdamConfig adam;
  std::vector<std::size_t> hidden_sizes = {16, 16, 16};
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterationMetrics {
  std::size_t iteration = 0;
  std::uint64_t seed = 0;
  Estimator method = Estimator::Grpo;
  std::vector<double> reward_means;  // per objective, per step
  double total_reward = 0.0;
  double mean_advantage = 0.0;
  double kl = 0.0;    // exact KL to the iteration's reference, post-update
  double loss = 0.0;  // surrogate loss at the last inner update
};

struct MetricsLog {
  std::vector<IterationMetrics> rows;
  bool aborted = false;
  std::string abort_reason;
};

struct TrainResult {
  MetricsLog log;
  MlpParams policy;
  // Arm means of the run's bandit instance (empty for other environments);
  // lets callers compute uniform-random baselines.
  std::vector<double> bandit_arm_means;
};

// G rollouts under the frozen reference policy. Trajectory g draws its
// randomness from group_rng.child(g), so collection is independent of
// anything that happens after it.
GroupSample collect_group(RolloutEnv& env, const MlpParams& reference,
                          std::size_t group_size, const Rng& group_rng);

// G x K matrix of per-trajectory, per-objective returns, in trajectory
// order.
RewardMatrix returns_to_reward_matrix(const GroupSample& group);

struct SurrogateResult {
  double loss = 0.0;
  MlpGrads grads;
};

// Clipped-ratio surrogate with exact categorical KL penalty:
// per step, ratio = exp(logpi - ref_logp), contribution
// min(ratio * A_g, clip(ratio, 1 - eps, 1 + eps) * A_g), averaged over 1/G
// and 1/|o_g|, minus kl_beta times the mean KL(pi || pi_ref) over visited
// states. Returns the negated objective and its parameter gradient.
// Throws on non-finite ratios (policy divergence).
SurrogateResult surrogate_loss(const GroupSample& group,
                               const MlpParams& policy,
                               const MlpParams& reference,
                               const AdvantageVector& advantages,
                               double clip_epsilon, double kl_beta);

// Full training loop: snapshot reference, collect a group, compute
// advantages with the configured estimator, apply the configured number of
// surrogate updates, log per-iteration metrics. Deterministic per config.
TrainResult train(const TrainConfig& config);

}  // namespace mogrpo
