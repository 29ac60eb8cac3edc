#include "mogrpo/advantage.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mogrpo {

namespace {

double population_std(const std::vector<double>& values, double mean) {
  double acc = 0.0;
  for (double v : values) {
    const double d = v - mean;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(values.size()));
}

void require_group(const RewardMatrix& rewards) {
  if (rewards.outputs() < 2) {
    throw std::invalid_argument(
        "advantage: need at least 2 outputs per group, got " +
        std::to_string(rewards.outputs()));
  }
}

}  // namespace

std::string_view estimator_name(Estimator e) {
  switch (e) {
    case Estimator::Grpo:
      return "grpo";
    case Estimator::DrGrpo:
      return "drgrpo";
    case Estimator::MoGrpo:
      return "mogrpo";
  }
  return "unknown";
}

Estimator estimator_from_name(std::string_view name) {
  if (name == "grpo") return Estimator::Grpo;
  if (name == "drgrpo") return Estimator::DrGrpo;
  if (name == "mogrpo") return Estimator::MoGrpo;
  throw std::invalid_argument("unknown estimator: " + std::string(name));
}

RewardMatrix::RewardMatrix(std::size_t outputs, std::size_t objectives,
                           std::vector<double> values)
    : outputs_(outputs), objectives_(objectives), values_(std::move(values)) {
  if (outputs_ < 2) {
    throw std::invalid_argument("RewardMatrix: need at least 2 outputs");
  }
  if (objectives_ < 1) {
    throw std::invalid_argument("RewardMatrix: need at least 1 objective");
  }
  if (values_.size() != outputs_ * objectives_) {
    throw std::invalid_argument("RewardMatrix: value count does not match shape");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("RewardMatrix: entries must be finite");
    }
  }
}

RewardMatrix RewardMatrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = n_rows == 0 ? 0 : rows.begin()->size();
  std::vector<double> values;
  values.reserve(n_rows * n_cols);
  for (const auto& row : rows) {
    if (row.size() != n_cols) {
      throw std::invalid_argument("RewardMatrix: ragged rows");
    }
    values.insert(values.end(), row.begin(), row.end());
  }
  return RewardMatrix(n_rows, n_cols, std::move(values));
}

double RewardMatrix::row_sum(std::size_t output) const {
  double sum = 0.0;
  for (std::size_t k = 0; k < objectives_; ++k) sum += at(output, k);
  return sum;
}

std::vector<double> RewardMatrix::column(std::size_t objective) const {
  std::vector<double> col(outputs_);
  for (std::size_t g = 0; g < outputs_; ++g) col[g] = at(g, objective);
  return col;
}

GroupStats group_stats(const RewardMatrix& rewards) {
  require_group(rewards);
  const std::size_t n = rewards.outputs();
  const std::size_t k = rewards.objectives();

  GroupStats stats;
  stats.means.resize(k);
  stats.stds.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::vector<double> col = rewards.column(j);
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(n);
    stats.means[j] = mean;
    stats.stds[j] = population_std(col, mean);
  }

  std::vector<double> sums(n);
  double total = 0.0;
  for (std::size_t g = 0; g < n; ++g) {
    sums[g] = rewards.row_sum(g);
    total += sums[g];
  }
  stats.total_mean = total / static_cast<double>(n);
  stats.total_std = population_std(sums, stats.total_mean);
  return stats;
}

AdvantageVector grpo_advantage(const RewardMatrix& rewards) {
  const GroupStats stats = group_stats(rewards);
  const double denom = stats.total_std + kStdGuard;

  AdvantageVector adv;
  adv.estimator = Estimator::Grpo;
  adv.values.resize(rewards.outputs());
  for (std::size_t g = 0; g < rewards.outputs(); ++g) {
    adv.values[g] = (rewards.row_sum(g) - stats.total_mean) / denom;
  }
  return adv;
}

AdvantageVector drgrpo_advantage(const RewardMatrix& rewards) {
  const GroupStats stats = group_stats(rewards);

  AdvantageVector adv;
  adv.estimator = Estimator::DrGrpo;
  adv.values.resize(rewards.outputs());
  for (std::size_t g = 0; g < rewards.outputs(); ++g) {
    adv.values[g] = rewards.row_sum(g) - stats.total_mean;
  }
  return adv;
}

AdvantageVector mogrpo_advantage(const RewardMatrix& rewards,
                                 bool scale_by_sqrt_k) {
  const GroupStats stats = group_stats(rewards);
  const std::size_t k = rewards.objectives();

  AdvantageVector adv;
  adv.estimator = Estimator::MoGrpo;
  adv.scaled_by_sqrt_k = scale_by_sqrt_k;
  adv.values.assign(rewards.outputs(), 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const double denom = stats.stds[j] + kStdGuard;
    for (std::size_t g = 0; g < rewards.outputs(); ++g) {
      adv.values[g] += (rewards.at(g, j) - stats.means[j]) / denom;
    }
  }
  if (scale_by_sqrt_k) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    for (double& v : adv.values) v *= scale;
  }
  return adv;
}

AdvantageVector compute_advantage(const RewardMatrix& rewards, Estimator e,
                                  bool scale_by_sqrt_k) {
  switch (e) {
    case Estimator::Grpo:
      return grpo_advantage(rewards);
    case Estimator::DrGrpo:
      return drgrpo_advantage(rewards);
    case Estimator::MoGrpo:
      return mogrpo_advantage(rewards, scale_by_sqrt_k);
  }
  throw std::logic_error("compute_advantage: bad estimator tag");
}

RewardMatrix affine_transform(const RewardMatrix& rewards,
                              const std::vector<double>& scale,
                              const std::vector<double>& shift) {
  const std::size_t k = rewards.objectives();
  if (scale.size() != k || shift.size() != k) {
    throw std::invalid_argument("affine_transform: scale/shift length mismatch");
  }
  for (double a : scale) {
    if (!(a > 0.0)) {
      throw std::invalid_argument(
          "affine_transform: scale entries must be positive");
    }
  }

  std::vector<double> values(rewards.values());
  for (std::size_t g = 0; g < rewards.outputs(); ++g) {
    for (std::size_t j = 0; j < k; ++j) {
      values[g * k + j] = scale[j] * values[g * k + j] + shift[j];
    }
  }
  return RewardMatrix(rewards.outputs(), k, std::move(values));
}

std::size_t argmax(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("argmax: empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace mogrpo
