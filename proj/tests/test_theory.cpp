#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "mogrpo/rng.hpp"
#include "mogrpo/theory.hpp"

using namespace mogrpo;

namespace {

CovSpec fig1_spec() { return CovSpec({1.0, 1.0}, {{1.0, 0.0}, {0.0, 25.0}}); }

CovSpec bandit_spec() {
  return CovSpec({0.0, 0.0, 0.0}, {{100.0, -10.0, 0.0},
                                   {-10.0, 2.0, 0.0},
                                   {0.0, 0.0, 0.01}});
}

CovSpec random_psd_spec(Rng& rng, std::size_t k) {
  std::vector<std::vector<double>> a(k, std::vector<double>(k));
  for (auto& row : a)
    for (double& v : row) v = rng.uniform_in(-1.0, 1.0);
  std::vector<std::vector<double>> cov(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t m = 0; m < k; ++m) cov[i][j] += a[i][m] * a[j][m];
      if (i == j) cov[i][j] += 0.05;
    }
  std::vector<double> means(k);
  for (double& m : means) m = rng.uniform_in(-2.0, 2.0);
  return CovSpec(std::move(means), std::move(cov));
}

}  // namespace

TEST_CASE("covariance validation") {
  SUBCASE("asymmetric matrices are rejected") {
    CHECK_THROWS_AS(CovSpec({0.0, 0.0}, {{1.0, 0.5}, {0.3, 1.0}}),
                    std::invalid_argument);
  }
  SUBCASE("nonpositive diagonals are rejected") {
    CHECK_THROWS_AS(CovSpec({0.0}, {{0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(CovSpec({0.0, 0.0}, {{1.0, 0.0}, {0.0, -1.0}}),
                    std::invalid_argument);
  }
  SUBCASE("indefinite matrices are rejected") {
    CHECK_THROWS_AS(CovSpec({0.0, 0.0}, {{1.0, 2.0}, {2.0, 1.0}}),
                    std::invalid_argument);
  }
  SUBCASE("rank-deficient but PSD matrices are accepted") {
    const CovSpec spec({0.0, 0.0}, {{1.0, 1.0}, {1.0, 1.0}});
    CHECK(spec.sqrt_factor()[0][0] == doctest::Approx(1.0));
  }
  SUBCASE("factor reproduces the covariance") {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
      const CovSpec spec = random_psd_spec(rng, 3);
      const auto& f = spec.sqrt_factor();
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
          double v = 0.0;
          for (std::size_t m = 0; m < 3; ++m) v += f[i][m] * f[j][m];
          CHECK(v == doctest::Approx(spec.cov(i, j)).epsilon(1e-9));
        }
    }
  }
}

TEST_CASE("grpo correlation prediction") {
  SUBCASE("two uncorrelated objectives with stds 1 and 5") {
    const CovSpec spec = fig1_spec();
    CHECK(predicted_corr_grpo(spec, 0) ==
          doctest::Approx(1.0 / std::sqrt(26.0)).epsilon(1e-12));
    CHECK(predicted_corr_grpo(spec, 1) ==
          doctest::Approx(5.0 / std::sqrt(26.0)).epsilon(1e-12));
    CHECK(predicted_corr_grpo(spec, 0) == doctest::Approx(0.1961).epsilon(1e-3));
    CHECK(predicted_corr_grpo(spec, 1) == doctest::Approx(0.9806).epsilon(1e-3));
  }
  SUBCASE("single objective is perfectly correlated") {
    const CovSpec spec({0.0}, {{4.0}});
    CHECK(predicted_corr_grpo(spec, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("negatively coupled objectives") {
    const CovSpec spec = bandit_spec();
    // Total variance 100 + 2 + 0.01 - 2*10 = 82.01.
    CHECK(predicted_corr_grpo(spec, 0) ==
          doctest::Approx(90.0 / (std::sqrt(82.01) * 10.0)).epsilon(1e-12));
    CHECK(predicted_corr_grpo(spec, 0) == doctest::Approx(0.9938).epsilon(1e-3));
    CHECK(predicted_corr_grpo(spec, 1) ==
          doctest::Approx(-0.6247).epsilon(1e-3));
    CHECK(predicted_corr_grpo(spec, 2) == doctest::Approx(0.0110).epsilon(2e-2));
  }
}

TEST_CASE("drgrpo prediction equals the grpo prediction") {
  SUBCASE("named specs") {
    for (const CovSpec& spec : {fig1_spec(), bandit_spec()}) {
      for (std::size_t j = 0; j < spec.objectives(); ++j) {
        CHECK(std::abs(predicted_corr_drgrpo(spec, j) -
                       predicted_corr_grpo(spec, j)) < 1e-12);
      }
    }
  }
  SUBCASE("random PSD specs") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      const CovSpec spec = random_psd_spec(rng, 3);
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::abs(predicted_corr_drgrpo(spec, j) -
                       predicted_corr_grpo(spec, j)) < 1e-12);
      }
    }
  }
}

TEST_CASE("mogrpo correlation prediction") {
  SUBCASE("uncorrelated objectives give exactly 1/sqrt(K)") {
    const CovSpec two = fig1_spec();
    CHECK(predicted_corr_mogrpo(two, 0) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(predicted_corr_mogrpo(two, 1) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

    const CovSpec three({0.0, 0.0, 0.0}, {{2.0, 0.0, 0.0},
                                          {0.0, 0.5, 0.0},
                                          {0.0, 0.0, 9.0}});
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(predicted_corr_mogrpo(three, j) ==
            doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
    }
  }
  SUBCASE("negatively coupled objectives") {
    const CovSpec spec = bandit_spec();
    // rho12 = -1/sqrt(2); K + Y = 3 - sqrt(2).
    const double denom = std::sqrt(3.0 - std::sqrt(2.0));
    CHECK(predicted_corr_mogrpo(spec, 0) ==
          doctest::Approx((1.0 - 1.0 / std::sqrt(2.0)) / denom).epsilon(1e-12));
    CHECK(predicted_corr_mogrpo(spec, 0) ==
          doctest::Approx(0.2326).epsilon(1e-3));
    CHECK(predicted_corr_mogrpo(spec, 1) ==
          doctest::Approx(0.2326).epsilon(1e-3));
    CHECK(predicted_corr_mogrpo(spec, 2) ==
          doctest::Approx(0.7941).epsilon(1e-3));
  }
  SUBCASE("fully anti-correlated pair is rejected") {
    const CovSpec spec({0.0, 0.0}, {{1.0, -1.0}, {-1.0, 1.0}});
    CHECK_THROWS_AS(predicted_corr_mogrpo(spec, 0), std::invalid_argument);
  }
}

TEST_CASE("predicted correlations stay in [-1, 1] for PSD specs") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const CovSpec spec = random_psd_spec(rng, 3);
    for (std::size_t j = 0; j < 3; ++j) {
      for (Estimator e :
           {Estimator::Grpo, Estimator::DrGrpo, Estimator::MoGrpo}) {
        const double c = predicted_corr(spec, e, j);
        CHECK(c >= -1.0 - 1e-12);
        CHECK(c <= 1.0 + 1e-12);
      }
    }
  }
}

TEST_CASE("sample_rewards contract") {
  SUBCASE("shape and finiteness") {
    const RewardMatrix m = sample_rewards(fig1_spec(), 2, 9);
    CHECK(m.outputs() == 2);
    CHECK(m.objectives() == 2);
    for (double v : m.values()) CHECK(std::isfinite(v));
  }
  SUBCASE("n below 2 is rejected") {
    CHECK_THROWS_AS(sample_rewards(fig1_spec(), 1, 9), std::invalid_argument);
  }
  SUBCASE("fixed seed reproduces bit-identical draws") {
    const RewardMatrix a = sample_rewards(bandit_spec(), 64, 123);
    const RewardMatrix b = sample_rewards(bandit_spec(), 64, 123);
    CHECK(a.values() == b.values());
    const RewardMatrix c = sample_rewards(bandit_spec(), 64, 124);
    CHECK(a.values() != c.values());
  }
  SUBCASE("sample moments match the generating model") {
    const CovSpec spec({1.0, -2.0, 0.5}, {{1.0, 0.0, 0.0},
                                          {0.0, 2.0, 0.0},
                                          {0.0, 0.0, 0.25}});
    const std::size_t n = 1000000;
    const RewardMatrix m = sample_rewards(spec, n, 42);

    std::vector<double> mean(3, 0.0);
    for (std::size_t row = 0; row < n; ++row)
      for (std::size_t j = 0; j < 3; ++j) mean[j] += m.at(row, j);
    for (double& v : mean) v /= static_cast<double>(n);

    std::vector<std::vector<double>> cov(3, std::vector<double>(3, 0.0));
    for (std::size_t row = 0; row < n; ++row)
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
          cov[i][j] += (m.at(row, i) - mean[i]) * (m.at(row, j) - mean[j]);

    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(mean[i] == doctest::Approx(spec.means()[i]).epsilon(0.01));
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::abs(cov[i][j] / static_cast<double>(n) - spec.cov(i, j)) <
              0.05);
      }
    }
  }
}

TEST_CASE("pearson correlation") {
  CHECK(pearson({1.0, 2.0, 3.0}, {2.0, 4.0, 6.0}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pearson({1.0, 2.0, 3.0}, {3.0, 2.0, 1.0}) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS_AS(pearson({1.0, 1.0}, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(pearson({1.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("empirical correlations match the closed forms") {
  // Pooled sample sizes above 1e6 put the Monte-Carlo error near 1e-3,
  // well inside the 0.01 gate.
  const std::size_t group_size = 1024;
  const std::size_t n_groups = 1000;

  SUBCASE("grpo on the two-objective spec") {
    const CorrReport r =
        empirical_corr(fig1_spec(), Estimator::Grpo, group_size, n_groups, 1);
    REQUIRE(r.samples >= 1000000);
    CHECK(std::abs(r.empirical[0] - 0.196116) < 0.01);
    CHECK(std::abs(r.empirical[1] - 0.980581) < 0.01);
    CHECK(r.abs_gap[0] < 0.01);
    CHECK(r.abs_gap[1] < 0.01);
  }
  SUBCASE("mogrpo on the two-objective spec") {
    const CorrReport r = empirical_corr(fig1_spec(), Estimator::MoGrpo,
                                        group_size, n_groups, 2);
    CHECK(std::abs(r.empirical[0] - 0.707107) < 0.01);
    CHECK(std::abs(r.empirical[1] - 0.707107) < 0.01);
  }
  SUBCASE("mogrpo on the negatively coupled spec") {
    const CorrReport r = empirical_corr(bandit_spec(), Estimator::MoGrpo,
                                        group_size, n_groups, 3);
    CHECK(std::abs(r.empirical[0] - 0.232588) < 0.01);
    CHECK(std::abs(r.empirical[1] - 0.232588) < 0.01);
    CHECK(std::abs(r.empirical[2] - 0.794105) < 0.01);
  }
  SUBCASE("drgrpo matches the shared prediction") {
    const CorrReport r = empirical_corr(fig1_spec(), Estimator::DrGrpo,
                                        group_size, n_groups, 4);
    CHECK(r.abs_gap[0] < 0.01);
    CHECK(r.abs_gap[1] < 0.01);
  }
}

TEST_CASE("empirical_corr input validation") {
  CHECK_THROWS_AS(empirical_corr(fig1_spec(), Estimator::Grpo, 1, 10, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(empirical_corr(fig1_spec(), Estimator::Grpo, 8, 0, 0),
                  std::invalid_argument);
}

TEST_CASE("reversal example") {
  const ReversalExample ex = reversal_example();

  CHECK(ex.rewards.at(0, 0) == doctest::Approx(1.0));
  CHECK(ex.rewards.at(1, 1) == doctest::Approx(0.9));
  // Scale ratio 2 exceeds the reversal threshold (1-0)/(0.9-0).
  CHECK(ex.scale[1] / ex.scale[0] > (1.0 - 0.0) / (0.9 - 0.0));

  CHECK(ex.grpo_argmax_before == 0);
  CHECK(ex.grpo_argmax_after == 1);
  CHECK(ex.grpo_order_reversed);
  CHECK(ex.mogrpo_order_preserved);
}

TEST_CASE("affine invariance fuzz helper") {
  const AffineFuzzResult result = affine_invariance_fuzz(1000, 99);
  CHECK(result.trials == 1000);
  CHECK(result.argmax_matches == 1000);
  CHECK(result.max_entry_gap < 1e-6);
}
