#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mogrpo/run_config.hpp"
#include "mogrpo/theory.hpp"
#include "mogrpo/trainer.hpp"

namespace mogrpo {

// Built-in defaults for every experiment knob; a parsed config file merged
// on top overrides individual keys. This is the same content as
// configs/default.ini.
RunConfig default_run_config();

// Train configs for the two experiment environments, honoring the
// [policy]/[train]/[bandit]/[reacher] sections. The bandit run budget is
// given in pulls ("steps"); iterations = steps / group_size.
TrainConfig bandit_train_config(const RunConfig& config);
TrainConfig reacher_train_config(const RunConfig& config);

// Named covariance presets for the verification command: "fig1" is the
// two-objective model with stds (1, 5); "bandit" is the three-objective
// model implied by the bandit's reward noise (including the -10
// cross-covariance).
CovSpec verify_preset(std::string_view name);

// CovSpec from a [covspec] section: means = comma list, cov_row_i = comma
// list per row.
CovSpec covspec_from_config(const RunConfig& config);

// Fraction of final iterations averaged into a run's headline score.
inline constexpr double kTailFraction = 0.1;

struct SummaryRow {
  Estimator method = Estimator::Grpo;
  std::size_t seeds = 0;
  double total_mean = 0.0;
  double total_std = 0.0;  // population std across seeds
  std::vector<double> objective_means;
  std::vector<double> objective_stds;
};

struct SummaryTable {
  std::size_t objectives = 0;
  std::vector<SummaryRow> rows;  // sorted grpo, drgrpo, mogrpo
};

struct ExperimentOptions {
  std::vector<Estimator> methods = {Estimator::Grpo, Estimator::DrGrpo,
                                    Estimator::MoGrpo};
  std::uint64_t base_seed = 100;
  std::size_t seed_count = 5;
  std::string out_dir = "out";
};

// Trains every method x seed combination of `base` (seeds expand as
// base_seed + index), writes one train_log CSV per run plus summary.csv and
// a run.meta timestamp sidecar, and returns the summary.
SummaryTable run_experiment(const TrainConfig& base, std::string_view env_name,
                            const ExperimentOptions& options,
                            std::ostream& log);

// Aggregates every train_log CSV in a directory into a summary (tail-mean
// per seed, mean +/- population std across seeds per method).
SummaryTable summarize_directory(const std::string& dir);

void write_summary_csv(const SummaryTable& table, const std::string& path);
std::string format_summary_text(const SummaryTable& table);

// Worked-example walkthrough; prints intermediate statistics for all three
// estimators and self-checks the mogrpo digits. Returns 0 on success.
int cmd_demo_advantage(std::ostream& out);

struct VerifyOptions {
  std::string preset = "fig1";    // ignored when spec_config is set
  std::string spec_config;        // path to a covspec file
  std::size_t group_size = 1024;
  std::size_t samples = 1024000;  // pooled target; groups = samples / group_size
  std::uint64_t seed = 1;
  std::string out_dir = "out";
};

// Runs empirical-vs-predicted correlation checks for all three estimators,
// the ordering-reversal example, and the affine-invariance fuzz; writes
// corr_report.csv. Returns 0 only if every check passes.
int cmd_verify(const VerifyOptions& options, std::ostream& out);

// Aggregates a directory of run CSVs, prints the aligned table, writes
// summary.csv. Returns 0 on success.
int cmd_report(const std::string& dir, std::ostream& out);

}  // namespace mogrpo
