#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mogrpo/rng.hpp"

namespace mogrpo {

// One dense layer; weights are row-major fan_out x fan_in.
struct Layer {
  std::vector<double> weights;
  std::vector<double> biases;
};

// Feedforward categorical policy: tanh hidden layers, linear logit head.
struct MlpParams {
  std::vector<std::size_t> layer_sizes;  // input, hidden..., action count
  std::vector<Layer> layers;

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t action_count() const { return layer_sizes.back(); }
  std::size_t parameter_count() const;
};

// Gradient (or moment) buffers shaped like a parameter set.
struct MlpGrads {
  std::vector<Layer> layers;

  static MlpGrads zeros_like(const MlpParams& params);
  void accumulate(const MlpGrads& other, double factor = 1.0);
  void scale(double factor);
  double max_abs() const;
};

// Weights uniform in +/- 1/sqrt(fan_in), biases zero, deterministic per
// seed. Requires at least one hidden layer and nonzero sizes.
MlpParams policy_init(const std::vector<std::size_t>& layer_sizes,
                      std::uint64_t seed);

struct PolicyOutput {
  std::vector<double> logits;
  std::vector<double> probabilities;      // stabilized softmax of the logits
  std::vector<double> log_probabilities;  // logit - logsumexp
  // Post-activation value per layer (input first), kept for backward.
  std::vector<std::vector<double>> activations;
};

PolicyOutput policy_forward(const MlpParams& params,
                            const std::vector<double>& state);

// Inverse-CDF draw; returns (action, log probability of that action).
std::pair<int, double> policy_sample(const PolicyOutput& output, Rng& rng);

// Reverse accumulation from a logit-space gradient through the cached
// forward pass.
MlpGrads backprop_logits(const MlpParams& params, const PolicyOutput& output,
                         const std::vector<double>& dlogits);

// Exact gradient of log softmax(logits)[action] with respect to all
// parameters.
MlpGrads policy_grad_logprob(const MlpParams& params,
                             const std::vector<double>& state, int action);

// Sum over actions of p * log(p / q) with 0 log 0 = 0; q floored at 1e-12.
double categorical_kl(const std::vector<double>& p,
                      const std::vector<double>& q);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-8;
  double weight_decay = 0.0;  // decoupled
};

struct AdamState {
  MlpGrads first_moment;
  MlpGrads second_moment;
  long step = 0;

  static AdamState zeros_like(const MlpParams& params);
};

// Bias-corrected moment update with decoupled weight decay.
void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state,
               const AdamConfig& config);

// Plain-text checkpoint: layer sizes plus row-major values, written with
// shortest round-trip formatting.
void save_checkpoint(const MlpParams& params, const std::string& path);
MlpParams load_checkpoint(const std::string& path);

}  // namespace mogrpo
