#pragma once

#include <cstddef>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace mogrpo {

// Guard added to every standard deviation before it is used as a divisor, so
// zero-variance groups produce zero advantages instead of NaNs.
inline constexpr double kStdGuard = 1e-6;

enum class Estimator { Grpo, DrGrpo, MoGrpo };

std::string_view estimator_name(Estimator e);
Estimator estimator_from_name(std::string_view name);

// Dense row-major table of rewards for one group: G rows (outputs) by
// K columns (objectives). Shape and values are fixed after construction,
// so instances can be shared freely across threads.
class RewardMatrix {
 public:
  // `values` is row-major with outputs*objectives entries, all finite.
  RewardMatrix(std::size_t outputs, std::size_t objectives,
               std::vector<double> values);

  static RewardMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows);

  std::size_t outputs() const { return outputs_; }     // G
  std::size_t objectives() const { return objectives_; }  // K

  double at(std::size_t output, std::size_t objective) const {
    return values_[output * objectives_ + objective];
  }

  double row_sum(std::size_t output) const;
  std::vector<double> column(std::size_t objective) const;
  const std::vector<double>& values() const { return values_; }

 private:
  std::size_t outputs_;
  std::size_t objectives_;
  std::vector<double> values_;
};

// Per-group summary statistics. All spreads are population standard
// deviations (divide by G); total_* refer to the per-output reward sums.
struct GroupStats {
  std::vector<double> means;
  std::vector<double> stds;
  double total_mean = 0.0;
  double total_std = 0.0;
};

struct AdvantageVector {
  std::vector<double> values;
  Estimator estimator = Estimator::Grpo;
  bool scaled_by_sqrt_k = false;
};

// Column means/stds plus row-sum mean/std. Requires G >= 2.
GroupStats group_stats(const RewardMatrix& rewards);

// Row sums, centered by their mean and divided by (their population std
// + kStdGuard).
AdvantageVector grpo_advantage(const RewardMatrix& rewards);

// Row sums, centered only; no division.
AdvantageVector drgrpo_advantage(const RewardMatrix& rewards);

// Each column is standardized on its own (mean removed, divided by its
// population std + kStdGuard), then the columns are summed. With
// scale_by_sqrt_k the sum is divided by sqrt(K); this is a positive
// rescaling, so orderings and correlations are unchanged.
AdvantageVector mogrpo_advantage(const RewardMatrix& rewards,
                                 bool scale_by_sqrt_k = false);

AdvantageVector compute_advantage(const RewardMatrix& rewards, Estimator e,
                                  bool scale_by_sqrt_k = false);

// Column i becomes scale[i] * column + shift[i]. All scale entries must be
// strictly positive.
RewardMatrix affine_transform(const RewardMatrix& rewards,
                              const std::vector<double>& scale,
                              const std::vector<double>& shift);

// Index of the largest entry (first one on ties).
std::size_t argmax(const std::vector<double>& values);

}  // namespace mogrpo
