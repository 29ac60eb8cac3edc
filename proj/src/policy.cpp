#include "mogrpo/policy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mogrpo {

namespace {

void check_shapes_match(const MlpParams& params, const MlpGrads& grads,
                        const char* who) {
  if (grads.layers.size() != params.layers.size()) {
    throw std::invalid_argument(std::string(who) + ": layer count mismatch");
  }
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    if (grads.layers[l].weights.size() != params.layers[l].weights.size() ||
        grads.layers[l].biases.size() != params.layers[l].biases.size()) {
      throw std::invalid_argument(std::string(who) + ": layer shape mismatch");
    }
  }
}

std::string format_double(double value) {
  char buffer[32];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

double parse_double(const std::string& token) {
  double value = 0.0;
  const auto result =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (result.ec != std::errc{} || result.ptr != token.data() + token.size()) {
    throw std::runtime_error("checkpoint: bad number '" + token + "'");
  }
  return value;
}

}  // namespace

std::size_t MlpParams::parameter_count() const {
  std::size_t count = 0;
  for (const Layer& layer : layers) {
    count += layer.weights.size() + layer.biases.size();
  }
  return count;
}

MlpGrads MlpGrads::zeros_like(const MlpParams& params) {
  MlpGrads grads;
  grads.layers.resize(params.layers.size());
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    grads.layers[l].weights.assign(params.layers[l].weights.size(), 0.0);
    grads.layers[l].biases.assign(params.layers[l].biases.size(), 0.0);
  }
  return grads;
}

void MlpGrads::accumulate(const MlpGrads& other, double factor) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (std::size_t i = 0; i < layers[l].weights.size(); ++i) {
      layers[l].weights[i] += factor * other.layers[l].weights[i];
    }
    for (std::size_t i = 0; i < layers[l].biases.size(); ++i) {
      layers[l].biases[i] += factor * other.layers[l].biases[i];
    }
  }
}

void MlpGrads::scale(double factor) {
  for (Layer& layer : layers) {
    for (double& w : layer.weights) w *= factor;
    for (double& b : layer.biases) b *= factor;
  }
}

double MlpGrads::max_abs() const {
  double m = 0.0;
  for (const Layer& layer : layers) {
    for (double w : layer.weights) m = std::max(m, std::abs(w));
    for (double b : layer.biases) m = std::max(m, std::abs(b));
  }
  return m;
}

MlpParams policy_init(const std::vector<std::size_t>& layer_sizes,
                      std::uint64_t seed) {
  if (layer_sizes.size() < 3) {
    throw std::invalid_argument(
        "policy_init: need at least one hidden layer (input, hidden..., output)");
  }
  for (std::size_t size : layer_sizes) {
    if (size == 0) {
      throw std::invalid_argument("policy_init: zero-width layer");
    }
  }

  Rng rng(seed);
  MlpParams params;
  params.layer_sizes = layer_sizes;
  params.layers.resize(layer_sizes.size() - 1);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const std::size_t fan_in = layer_sizes[l];
    const std::size_t fan_out = layer_sizes[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    params.layers[l].weights.resize(fan_out * fan_in);
    params.layers[l].biases.assign(fan_out, 0.0);
    for (double& w : params.layers[l].weights) {
      w = rng.uniform_in(-scale, scale);
    }
  }
  return params;
}

PolicyOutput policy_forward(const MlpParams& params,
                            const std::vector<double>& state) {
  if (state.size() != params.input_size()) {
    throw std::invalid_argument("policy_forward: state size mismatch");
  }
  for (double v : state) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("policy_forward: non-finite state");
    }
  }

  PolicyOutput out;
  out.activations.reserve(params.layers.size());
  out.activations.push_back(state);

  std::vector<double> current = state;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const Layer& layer = params.layers[l];
    const std::size_t fan_in = params.layer_sizes[l];
    const std::size_t fan_out = params.layer_sizes[l + 1];
    std::vector<double> next(fan_out);
    for (std::size_t o = 0; o < fan_out; ++o) {
      double z = layer.biases[o];
      const double* row = layer.weights.data() + o * fan_in;
      for (std::size_t i = 0; i < fan_in; ++i) z += row[i] * current[i];
      next[o] = z;
    }
    const bool is_output = l + 1 == params.layers.size();
    if (!is_output) {
      for (double& v : next) v = std::tanh(v);
      out.activations.push_back(next);
    }
    current = std::move(next);
  }

  out.logits = std::move(current);
  const double max_logit =
      *std::max_element(out.logits.begin(), out.logits.end());
  double sum = 0.0;
  out.probabilities.resize(out.logits.size());
  for (std::size_t a = 0; a < out.logits.size(); ++a) {
    out.probabilities[a] = std::exp(out.logits[a] - max_logit);
    sum += out.probabilities[a];
  }
  const double log_z = max_logit + std::log(sum);
  out.log_probabilities.resize(out.logits.size());
  for (std::size_t a = 0; a < out.logits.size(); ++a) {
    out.probabilities[a] /= sum;
    out.log_probabilities[a] = out.logits[a] - log_z;
  }
  return out;
}

std::pair<int, double> policy_sample(const PolicyOutput& output, Rng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  const std::size_t n = output.probabilities.size();
  for (std::size_t a = 0; a < n; ++a) {
    cumulative += output.probabilities[a];
    if (u < cumulative) {
      return {static_cast<int>(a), output.log_probabilities[a]};
    }
  }
  // Rounding can leave the cumulative sum a hair under 1.
  return {static_cast<int>(n - 1), output.log_probabilities[n - 1]};
}

MlpGrads backprop_logits(const MlpParams& params, const PolicyOutput& output,
                         const std::vector<double>& dlogits) {
  if (dlogits.size() != params.action_count()) {
    throw std::invalid_argument("backprop_logits: gradient size mismatch");
  }

  MlpGrads grads = MlpGrads::zeros_like(params);
  std::vector<double> delta = dlogits;
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const Layer& layer = params.layers[l];
    const std::size_t fan_in = params.layer_sizes[l];
    const std::size_t fan_out = params.layer_sizes[l + 1];
    const std::vector<double>& input = output.activations[l];

    Layer& grad = grads.layers[l];
    for (std::size_t o = 0; o < fan_out; ++o) {
      grad.biases[o] = delta[o];
      double* row = grad.weights.data() + o * fan_in;
      for (std::size_t i = 0; i < fan_in; ++i) row[i] = delta[o] * input[i];
    }

    if (l == 0) break;
    std::vector<double> prev(fan_in, 0.0);
    for (std::size_t o = 0; o < fan_out; ++o) {
      const double* row = layer.weights.data() + o * fan_in;
      for (std::size_t i = 0; i < fan_in; ++i) prev[i] += row[i] * delta[o];
    }
    // tanh'(z) = 1 - a^2 where a is the cached post-activation.
    for (std::size_t i = 0; i < fan_in; ++i) prev[i] *= 1.0 - input[i] * input[i];
    delta = std::move(prev);
  }
  return grads;
}

MlpGrads policy_grad_logprob(const MlpParams& params,
                             const std::vector<double>& state, int action) {
  const PolicyOutput output = policy_forward(params, state);
  if (action < 0 || static_cast<std::size_t>(action) >= output.probabilities.size()) {
    throw std::out_of_range("policy_grad_logprob: action out of range");
  }
  std::vector<double> dlogits(output.probabilities.size());
  for (std::size_t a = 0; a < dlogits.size(); ++a) {
    dlogits[a] = (static_cast<int>(a) == action ? 1.0 : 0.0) -
                 output.probabilities[a];
  }
  return backprop_logits(params, output, dlogits);
}

double categorical_kl(const std::vector<double>& p,
                      const std::vector<double>& q) {
  if (p.size() != q.size() || p.empty()) {
    throw std::invalid_argument("categorical_kl: dimension mismatch");
  }
  double kl = 0.0;
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (p[a] <= 0.0) continue;  // 0 log 0 = 0
    kl += p[a] * (std::log(p[a]) - std::log(std::max(q[a], 1e-12)));
  }
  return kl;
}

AdamState AdamState::zeros_like(const MlpParams& params) {
  return {MlpGrads::zeros_like(params), MlpGrads::zeros_like(params), 0};
}

void adam_step(MlpParams& params, const MlpGrads& grads, AdamState& state,
               const AdamConfig& config) {
  check_shapes_match(params, grads, "adam_step");
  check_shapes_match(params, state.first_moment, "adam_step");

  ++state.step;
  const double bias1 = 1.0 - std::pow(config.beta1, state.step);
  const double bias2 = 1.0 - std::pow(config.beta2, state.step);

  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto update = [&](std::vector<double>& values,
                            const std::vector<double>& g,
                            std::vector<double>& m, std::vector<double>& v) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        values[i] -= config.learning_rate *
                     (m_hat / (std::sqrt(v_hat) + config.epsilon) +
                      config.weight_decay * values[i]);
      }
    };
    update(params.layers[l].weights, grads.layers[l].weights,
           state.first_moment.layers[l].weights,
           state.second_moment.layers[l].weights);
    update(params.layers[l].biases, grads.layers[l].biases,
           state.first_moment.layers[l].biases,
           state.second_moment.layers[l].biases);
  }
}

void save_checkpoint(const MlpParams& params, const std::string& path) {
  std::ofstream file(path);
  if (!file) {
    throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  }
  file << "mlp-params v1\n";
  file << "sizes";
  for (std::size_t s : params.layer_sizes) file << ' ' << s;
  file << '\n';
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    file << "W" << l;
    for (double w : params.layers[l].weights) file << ' ' << format_double(w);
    file << '\n';
    file << "b" << l;
    for (double b : params.layers[l].biases) file << ' ' << format_double(b);
    file << '\n';
  }
  if (!file) {
    throw std::runtime_error("checkpoint: write to " + path + " failed");
  }
}

MlpParams load_checkpoint(const std::string& path) {
  std::ifstream file(path);
  if (!file) {
    throw std::runtime_error("checkpoint: cannot open " + path);
  }
  std::string header;
  std::getline(file, header);
  if (header != "mlp-params v1") {
    throw std::runtime_error("checkpoint: unsupported format '" + header + "'");
  }

  std::string line;
  std::getline(file, line);
  std::istringstream sizes_line(line);
  std::string tag;
  sizes_line >> tag;
  if (tag != "sizes") throw std::runtime_error("checkpoint: missing sizes line");
  std::vector<std::size_t> sizes;
  std::size_t value = 0;
  while (sizes_line >> value) sizes.push_back(value);
  if (sizes.size() < 3) throw std::runtime_error("checkpoint: bad layer sizes");

  MlpParams params;
  params.layer_sizes = sizes;
  params.layers.resize(sizes.size() - 1);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    for (const bool weights : {true, false}) {
      if (!std::getline(file, line)) {
        throw std::runtime_error("checkpoint: truncated file");
      }
      std::istringstream row(line);
      row >> tag;
      const std::string expected = (weights ? "W" : "b") + std::to_string(l);
      if (tag != expected) {
        throw std::runtime_error("checkpoint: expected " + expected +
                                 ", got " + tag);
      }
      std::vector<double>& target =
          weights ? params.layers[l].weights : params.layers[l].biases;
      const std::size_t expected_count =
          weights ? sizes[l] * sizes[l + 1] : sizes[l + 1];
      std::string token;
      while (row >> token) target.push_back(parse_double(token));
      if (target.size() != expected_count) {
        throw std::runtime_error("checkpoint: wrong value count in " + expected);
      }
    }
  }
  return params;
}

}  // namespace mogrpo
