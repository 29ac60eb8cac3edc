#include "mogrpo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mogrpo {

namespace {

class BanditRolloutEnv final : public RolloutEnv {
 public:
  BanditRolloutEnv(const BanditSetup& setup, std::uint64_t seed,
                   std::size_t pull_budget) {
    BanditConfig config;
    config.arms = setup.arms;
    config.episode_length = std::max<std::size_t>(pull_budget, 1);
    env_ = std::make_unique<BanditEnv>(seed, config);
  }

  std::size_t observation_size() const override { return 1; }
  std::size_t action_count() const override { return env_->arms(); }
  std::size_t objectives() const override { return 3; }
  void begin_trajectory(Rng&) override {}
  std::vector<double> observation() const override { return {1.0}; }

  std::pair<std::vector<double>, bool> step(int action, Rng&) override {
    const RewardTriple r = env_->pull(static_cast<std::size_t>(action));
    return {{r.r1, r.r2, r.r3}, true};
  }

  const BanditEnv& env() const { return *env_; }

 private:
  std::unique_ptr<BanditEnv> env_;
};

class ReacherRolloutEnv final : public RolloutEnv {
 public:
  ReacherRolloutEnv(const ReacherSetup& setup, std::uint64_t seed)
      : env_(seed, setup.config) {}

  std::size_t observation_size() const override {
    return ReacherEnv::kObservationSize;
  }
  std::size_t action_count() const override { return ReacherEnv::kActionCount; }
  std::size_t objectives() const override { return ReacherEnv::kObjectives; }

  void begin_trajectory(Rng& rng) override {
    // Fresh noise stream per trajectory; the kinematic start is always the
    // same rest state.
    env_.reset(rng.next_u64());
  }

  std::vector<double> observation() const override {
    const auto obs = env_.observation();
    return std::vector<double>(obs.begin(), obs.end());
  }

  std::pair<std::vector<double>, bool> step(int action, Rng&) override {
    const auto result = env_.step(action);
    return {{result.rewards.r1, result.rewards.r2, result.rewards.r3,
             result.rewards.r4},
            result.done};
  }

 private:
  ReacherEnv env_;
};

class TableBanditRolloutEnv final : public RolloutEnv {
 public:
  explicit TableBanditRolloutEnv(const TableBanditSetup& setup)
      : setup_(setup) {
    if (setup_.arm_rewards.size() < 2) {
      throw std::invalid_argument("table bandit: need at least two arms");
    }
    const std::size_t k = setup_.arm_rewards.front().size();
    if (k == 0) {
      throw std::invalid_argument("table bandit: need at least one objective");
    }
    for (const auto& row : setup_.arm_rewards) {
      if (row.size() != k) {
        throw std::invalid_argument("table bandit: ragged reward table");
      }
    }
    if (!setup_.noise_stds.empty() && setup_.noise_stds.size() != k) {
      throw std::invalid_argument("table bandit: noise width mismatch");
    }
  }

  std::size_t observation_size() const override { return 1; }
  std::size_t action_count() const override { return setup_.arm_rewards.size(); }
  std::size_t objectives() const override {
    return setup_.arm_rewards.front().size();
  }
  void begin_trajectory(Rng&) override {}
  std::vector<double> observation() const override { return {1.0}; }

  std::pair<std::vector<double>, bool> step(int action, Rng& rng) override {
    if (action < 0 ||
        static_cast<std::size_t>(action) >= setup_.arm_rewards.size()) {
      throw std::out_of_range("table bandit: action out of range");
    }
    std::vector<double> rewards = setup_.arm_rewards[action];
    if (!setup_.noise_stds.empty()) {
      for (std::size_t k = 0; k < rewards.size(); ++k) {
        if (setup_.noise_stds[k] > 0.0) {
          rewards[k] += setup_.noise_stds[k] * rng.normal();
        }
      }
    }
    return {std::move(rewards), true};
  }

 private:
  TableBanditSetup setup_;
};

// Exact KL of the current policy against the reference over the states the
// group visited.
double mean_visited_kl(const GroupSample& group, const MlpParams& policy,
                       const MlpParams& reference) {
  double kl_sum = 0.0;
  std::size_t states = 0;
  for (const Trajectory& traj : group.trajectories) {
    for (const auto& state : traj.states) {
      const PolicyOutput current = policy_forward(policy, state);
      const PolicyOutput ref = policy_forward(reference, state);
      kl_sum += categorical_kl(current.probabilities, ref.probabilities);
      ++states;
    }
  }
  return states == 0 ? 0.0 : kl_sum / static_cast<double>(states);
}

}  // namespace

std::unique_ptr<RolloutEnv> make_rollout_env(const EnvSetup& setup,
                                             std::uint64_t seed,
                                             std::size_t pull_budget) {
  if (const auto* bandit = std::get_if<BanditSetup>(&setup)) {
    return std::make_unique<BanditRolloutEnv>(*bandit, seed, pull_budget);
  }
  if (const auto* reacher = std::get_if<ReacherSetup>(&setup)) {
    return std::make_unique<ReacherRolloutEnv>(*reacher, seed);
  }
  return std::make_unique<TableBanditRolloutEnv>(
      std::get<TableBanditSetup>(setup));
}

void TrainConfig::validate() const {
  if (group_size < 2) {
    throw std::invalid_argument("TrainConfig: group_size must be >= 2");
  }
  if (!(clip_epsilon > 0.0)) {
    throw std::invalid_argument("TrainConfig: clip_epsilon must be positive");
  }
  if (kl_beta < 0.0) {
    throw std::invalid_argument("TrainConfig: kl_beta must be >= 0");
  }
  if (iterations < 1 || updates_per_group < 1) {
    throw std::invalid_argument("TrainConfig: need at least one iteration and update");
  }
  if (hidden_sizes.empty()) {
    throw std::invalid_argument("TrainConfig: need at least one hidden layer");
  }
}

GroupSample collect_group(RolloutEnv& env, const MlpParams& reference,
                          std::size_t group_size, const Rng& group_rng) {
  if (group_size < 2) {
    throw std::invalid_argument("collect_group: group_size must be >= 2");
  }

  GroupSample group;
  group.trajectories.reserve(group_size);
  for (std::size_t g = 0; g < group_size; ++g) {
    Rng traj_rng = group_rng.child(g);
    env.begin_trajectory(traj_rng);

    Trajectory traj;
    bool done = false;
    while (!done) {
      std::vector<double> state = env.observation();
      const PolicyOutput out = policy_forward(reference, state);
      const auto [action, log_prob] = policy_sample(out, traj_rng);
      auto [rewards, finished] = env.step(action, traj_rng);

      traj.states.push_back(std::move(state));
      traj.actions.push_back(action);
      traj.ref_log_probs.push_back(log_prob);
      if (traj.returns.empty()) traj.returns.assign(rewards.size(), 0.0);
      for (std::size_t k = 0; k < rewards.size(); ++k) {
        traj.returns[k] += rewards[k];
      }
      done = finished;
    }
    group.trajectories.push_back(std::move(traj));
  }
  return group;
}

RewardMatrix returns_to_reward_matrix(const GroupSample& group) {
  if (group.trajectories.empty()) {
    throw std::invalid_argument("returns_to_reward_matrix: empty group");
  }
  const std::size_t k = group.objectives();
  std::vector<double> values;
  values.reserve(group.size() * k);
  for (const Trajectory& traj : group.trajectories) {
    if (traj.returns.size() != k) {
      throw std::invalid_argument(
          "returns_to_reward_matrix: inconsistent objective count");
    }
    values.insert(values.end(), traj.returns.begin(), traj.returns.end());
  }
  return RewardMatrix(group.size(), k, std::move(values));
}

SurrogateResult surrogate_loss(const GroupSample& group,
                               const MlpParams& policy,
                               const MlpParams& reference,
                               const AdvantageVector& advantages,
                               double clip_epsilon, double kl_beta) {
  if (advantages.values.size() != group.size()) {
    throw std::invalid_argument("surrogate_loss: advantage length mismatch");
  }

  std::size_t total_states = 0;
  for (const Trajectory& traj : group.trajectories) {
    total_states += traj.length();
  }
  if (total_states == 0) {
    throw std::invalid_argument("surrogate_loss: empty trajectories");
  }

  const double group_weight = 1.0 / static_cast<double>(group.size());
  const double kl_weight = kl_beta / static_cast<double>(total_states);
  const double clip_lo = 1.0 - clip_epsilon;
  const double clip_hi = 1.0 + clip_epsilon;

  double objective = 0.0;
  MlpGrads grads = MlpGrads::zeros_like(policy);
  std::vector<double> dlogits;

  for (std::size_t g = 0; g < group.size(); ++g) {
    const Trajectory& traj = group.trajectories[g];
    const double advantage = advantages.values[g];
    const double step_weight =
        group_weight / static_cast<double>(traj.length());

    for (std::size_t t = 0; t < traj.length(); ++t) {
      const PolicyOutput out = policy_forward(policy, traj.states[t]);
      const int action = traj.actions[t];
      const double ratio =
          std::exp(out.log_probabilities[action] - traj.ref_log_probs[t]);
      if (!std::isfinite(ratio)) {
        throw std::runtime_error(
            "surrogate_loss: non-finite importance ratio (policy diverged "
            "from the reference)");
      }

      const double clipped = std::clamp(ratio, clip_lo, clip_hi);
      const double unclipped_term = ratio * advantage;
      const double clipped_term = clipped * advantage;
      objective += step_weight * std::min(unclipped_term, clipped_term);
      const bool gradient_flows = unclipped_term <= clipped_term;

      dlogits.assign(out.probabilities.size(), 0.0);
      if (gradient_flows && advantage != 0.0) {
        // d(ratio * A)/dlogits = ratio * A * (onehot - p); negate for loss.
        const double coeff = -step_weight * advantage * ratio;
        for (std::size_t a = 0; a < dlogits.size(); ++a) {
          dlogits[a] = coeff * (static_cast<int>(a) == action ? 1.0 - out.probabilities[a]
                                                              : -out.probabilities[a]);
        }
      }

      if (kl_beta > 0.0) {
        const PolicyOutput ref = policy_forward(reference, traj.states[t]);
        const double kl = categorical_kl(out.probabilities, ref.probabilities);
        objective -= kl_weight * kl;
        // dKL/dlogits = p * (log(p/q) - KL); the loss adds +kl_weight * KL.
        for (std::size_t a = 0; a < dlogits.size(); ++a) {
          const double log_ratio =
              out.log_probabilities[a] -
              std::log(std::max(ref.probabilities[a], 1e-12));
          dlogits[a] += kl_weight * out.probabilities[a] * (log_ratio - kl);
        }
      }

      grads.accumulate(backprop_logits(policy, out, dlogits));
    }
  }

  return {-objective, std::move(grads)};
}

TrainResult train(const TrainConfig& config) {
  config.validate();

  const Rng master(config.seed);
  const std::size_t pull_budget = config.iterations * config.group_size;
  std::unique_ptr<RolloutEnv> env =
      make_rollout_env(config.env, master.child(1).seed(), pull_budget);

  std::vector<std::size_t> layer_sizes;
  layer_sizes.push_back(env->observation_size());
  layer_sizes.insert(layer_sizes.end(), config.hidden_sizes.begin(),
                     config.hidden_sizes.end());
  layer_sizes.push_back(env->action_count());
  MlpParams policy = policy_init(layer_sizes, master.child(0).seed());
  AdamState adam_state = AdamState::zeros_like(policy);

  TrainResult result;
  if (const auto* bandit_env =
          dynamic_cast<const BanditRolloutEnv*>(env.get())) {
    result.bandit_arm_means = bandit_env->env().arm_means();
  }
  result.log.rows.reserve(config.iterations);

  for (std::size_t iteration = 0; iteration < config.iterations; ++iteration) {
    const MlpParams reference = policy;
    const GroupSample group = collect_group(*env, reference, config.group_size,
                                            master.child(2 + iteration));
    const RewardMatrix rewards = returns_to_reward_matrix(group);
    const AdvantageVector advantages =
        compute_advantage(rewards, config.estimator, config.sqrt_k_scale);

    double last_loss = 0.0;
    bool aborted = false;
    for (std::size_t update = 0; update < config.updates_per_group; ++update) {
      SurrogateResult surrogate;
      try {
        surrogate = surrogate_loss(group, policy, reference, advantages,
                                   config.clip_epsilon, config.kl_beta);
      } catch (const std::runtime_error& error) {
        result.log.aborted = true;
        result.log.abort_reason = error.what();
        policy = reference;  // last good checkpoint
        aborted = true;
        break;
      }
      if (!std::isfinite(surrogate.loss)) {
        result.log.aborted = true;
        result.log.abort_reason = "non-finite surrogate loss";
        policy = reference;
        aborted = true;
        break;
      }
      last_loss = surrogate.loss;
      adam_step(policy, surrogate.grads, adam_state, config.adam);
    }
    if (aborted) break;

    IterationMetrics row;
    row.iteration = iteration;
    row.seed = config.seed;
    row.method = config.estimator;
    row.reward_means.assign(rewards.objectives(), 0.0);
    for (std::size_t g = 0; g < group.size(); ++g) {
      const double len =
          static_cast<double>(group.trajectories[g].length());
      for (std::size_t k = 0; k < rewards.objectives(); ++k) {
        row.reward_means[k] += rewards.at(g, k) / len;
      }
    }
    for (double& v : row.reward_means) v /= static_cast<double>(group.size());
    for (double v : row.reward_means) row.total_reward += v;

    double adv_mean = 0.0;
    for (double a : advantages.values) adv_mean += a;
    row.mean_advantage = adv_mean / static_cast<double>(group.size());
    row.kl = mean_visited_kl(group, policy, reference);
    row.loss = last_loss;
    result.log.rows.push_back(std::move(row));
  }

  result.policy = std::move(policy);
  return result;
}

}  // namespace mogrpo
