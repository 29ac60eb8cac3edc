#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mogrpo/advantage.hpp"

namespace mogrpo {

// Mean vector and covariance matrix of a synthetic K-objective Gaussian
// reward model. Construction validates symmetry (within 1e-12 of the larger
// entry), strictly positive diagonal, and positive semi-definiteness by
// attempting a square-root factorization; non-PSD inputs are rejected
// rather than repaired.
class CovSpec {
 public:
  CovSpec(std::vector<double> means, std::vector<std::vector<double>> cov);

  std::size_t objectives() const { return means_.size(); }
  const std::vector<double>& means() const { return means_; }
  double cov(std::size_t i, std::size_t j) const { return cov_[i][j]; }
  double variance(std::size_t i) const { return cov_[i][i]; }
  double stddev(std::size_t i) const;

  // Lower-triangular factor L with cov = L L^T (semidefinite-tolerant).
  const std::vector<std::vector<double>>& sqrt_factor() const {
    return factor_;
  }

 private:
  std::vector<double> means_;
  std::vector<std::vector<double>> cov_;
  std::vector<std::vector<double>> factor_;
};

// Closed-form correlation between objective i and the group advantage in the
// large-group limit.
//
//   grpo:    (var_i + X) / (sigma_total * sigma_i),
//            X = sum_{j != i} Cov(R_i, R_j)
//   drgrpo:  same value through the uncentered form
//            (var_i + X) / sqrt(var_i * var_total)
//   mogrpo:  (1 + Z) / sqrt(K + Y) with Z, Y built from the correlation
//            matrix; reduces to 1/sqrt(K) when objectives are uncorrelated.
double predicted_corr_grpo(const CovSpec& spec, std::size_t objective);
double predicted_corr_drgrpo(const CovSpec& spec, std::size_t objective);
double predicted_corr_mogrpo(const CovSpec& spec, std::size_t objective);
double predicted_corr(const CovSpec& spec, Estimator e, std::size_t objective);

// n independent draws from the Gaussian model, one row per draw.
// Deterministic for a fixed (spec, seed); requires n >= 2.
RewardMatrix sample_rewards(const CovSpec& spec, std::size_t n,
                            std::uint64_t seed);

struct CorrReport {
  Estimator estimator = Estimator::Grpo;
  std::vector<double> predicted;
  std::vector<double> empirical;
  std::vector<double> abs_gap;
  std::size_t samples = 0;
};

// Samples n_groups independent groups of size group_size, computes the
// chosen estimator per group, pools all (reward, advantage) pairs and
// returns per-objective Pearson correlations next to the predictions.
CorrReport empirical_corr(const CovSpec& spec, Estimator estimator,
                          std::size_t group_size, std::size_t n_groups,
                          std::uint64_t seed);

// Two-pass Pearson correlation.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Fixed counterexample showing that a positive rescaling can reverse the
// grpo preference ordering while the mogrpo ordering is unaffected.
// Advantage entries closer than tie_tolerance are treated as tied when
// comparing orderings (the mogrpo advantages of a two-output trade-off are
// exact ties, separated only by std-guard noise of order 1e-6).
struct ReversalExample {
  RewardMatrix rewards;
  std::vector<double> scale;
  std::vector<double> shift;
  std::size_t grpo_argmax_before = 0;
  std::size_t grpo_argmax_after = 0;
  bool grpo_order_reversed = false;
  bool mogrpo_order_preserved = false;
  double tie_tolerance = 0.0;
};

ReversalExample reversal_example();

// Random positive affine transforms applied to random reward matrices;
// reports how far the mogrpo advantages move and whether argmax survived.
struct AffineFuzzResult {
  int trials = 0;
  int argmax_matches = 0;
  double max_entry_gap = 0.0;
};

AffineFuzzResult affine_invariance_fuzz(int trials, std::uint64_t seed);

}  // namespace mogrpo
