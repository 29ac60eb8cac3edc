#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "mogrpo/csv.hpp"
#include "mogrpo/experiments.hpp"

namespace {

using namespace mogrpo;

std::vector<Estimator> parse_methods(const std::string& method) {
  if (method == "all") {
    return {Estimator::Grpo, Estimator::DrGrpo, Estimator::MoGrpo};
  }
  return {estimator_from_name(method)};
}

RunConfig load_config(const std::string& path) {
  RunConfig config = default_run_config();
  if (!path.empty()) {
    config.merge(RunConfig::from_file(path));
  }
  return config;
}

int run_training_command(const std::string& env_name,
                         const std::string& config_path,
                         const std::string& out_dir, std::uint64_t seed,
                         std::size_t seeds, const std::string& method,
                         bool sqrt_k_scale, double r1_noise_std) {
  RunConfig config = load_config(config_path);
  if (r1_noise_std > 0.0) {
    config.set("reacher.r1_noise_std", csv::format_double(r1_noise_std));
  }

  TrainConfig base = env_name == "bandit" ? bandit_train_config(config)
                                          : reacher_train_config(config);
  base.sqrt_k_scale = sqrt_k_scale;

  if (env_name == "reacher") {
    const auto& setup = std::get<ReacherSetup>(base.env);
    const SweepResult sweep = best_constant_velocity_sweep(setup.config);
    std::cout << "constant-velocity sweep baseline: "
              << sweep.mean_total_reward << " per step (w1=" << sweep.omega1
              << ", w2=" << sweep.omega2 << ")\n";
  }

  ExperimentOptions options;
  options.methods = parse_methods(method);
  options.base_seed = seed;
  options.seed_count = seeds;
  options.out_dir = out_dir;

  const SummaryTable summary =
      run_experiment(base, env_name, options, std::cout);
  std::cout << '\n' << format_summary_text(summary);
  std::cout << "wrote " << out_dir << "/summary.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Multi-objective group-relative policy optimization laboratory: "
      "advantage estimators, correlation checks, and bandit/reacher "
      "experiments"};
  app.require_subcommand(1);

  // demo-advantage
  app.add_subcommand("demo-advantage",
                     "Walk through the three-output, two-objective worked "
                     "example under all estimators");

  // verify
  auto* verify = app.add_subcommand(
      "verify", "Check empirical reward/advantage correlations against the "
                "closed-form predictions");
  VerifyOptions verify_options;
  std::string verify_config;
  verify->add_option("--preset", verify_options.preset,
                     "Built-in covariance preset (fig1 or bandit)");
  verify->add_option("--config", verify_config,
                     "Covariance spec file with a [covspec] section");
  std::size_t verify_samples = 1024000;
  verify->add_option("--samples", verify_samples,
                     "Pooled sample target (default 1024000)");
  std::uint64_t verify_seed = 1;
  verify->add_option("--seed", verify_seed, "Generator seed");
  std::string verify_out = "out";
  verify->add_option("--out", verify_out, "Output directory for the CSV");

  // run-bandit / run-reacher
  struct RunArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 100;
    std::size_t seeds = 5;
    std::string method = "all";
    bool sqrt_k_scale = false;
    double r1_noise_std = 0.0;
  };
  RunArgs bandit_args;
  bandit_args.out_dir = "out-bandit";
  auto* run_bandit = app.add_subcommand(
      "run-bandit", "Train all methods on the 50-arm three-reward bandit");
  run_bandit->add_option("--config", bandit_args.config_path,
                         "Run configuration file");
  run_bandit->add_option("--out", bandit_args.out_dir, "Output directory");
  run_bandit->add_option("--seed", bandit_args.seed, "Base seed");
  run_bandit->add_option("--seeds", bandit_args.seeds,
                         "Number of seeds (expand as base + index)");
  run_bandit->add_option("--method", bandit_args.method,
                         "grpo, drgrpo, mogrpo, or all");
  run_bandit->add_flag("--sqrt-k-scale", bandit_args.sqrt_k_scale,
                       "Divide mogrpo advantages by sqrt(K)");

  RunArgs reacher_args;
  reacher_args.out_dir = "out-reacher";
  auto* run_reacher = app.add_subcommand(
      "run-reacher",
      "Train all methods on the two-joint four-target reacher");
  run_reacher->add_option("--config", reacher_args.config_path,
                          "Run configuration file");
  run_reacher->add_option("--out", reacher_args.out_dir, "Output directory");
  run_reacher->add_option("--seed", reacher_args.seed, "Base seed");
  run_reacher->add_option("--seeds", reacher_args.seeds,
                          "Number of seeds (expand as base + index)");
  run_reacher->add_option("--method", reacher_args.method,
                          "grpo, drgrpo, mogrpo, or all");
  run_reacher->add_flag("--sqrt-k-scale", reacher_args.sqrt_k_scale,
                        "Divide mogrpo advantages by sqrt(K)");
  run_reacher->add_option("--r1-noise-std", reacher_args.r1_noise_std,
                          "Extra gaussian noise on the first reward");

  // report
  auto* report = app.add_subcommand(
      "report", "Aggregate run CSVs in a directory into a summary table");
  std::string report_dir;
  report->add_option("dir", report_dir, "Directory of run CSVs")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("demo-advantage")) {
      return mogrpo::cmd_demo_advantage(std::cout);
    }
    if (app.got_subcommand("verify")) {
      verify_options.spec_config = verify_config;
      verify_options.samples = verify_samples;
      verify_options.seed = verify_seed;
      verify_options.out_dir = verify_out;
      return mogrpo::cmd_verify(verify_options, std::cout);
    }
    if (app.got_subcommand("run-bandit")) {
      return run_training_command(
          "bandit", bandit_args.config_path, bandit_args.out_dir,
          bandit_args.seed, bandit_args.seeds, bandit_args.method,
          bandit_args.sqrt_k_scale, 0.0);
    }
    if (app.got_subcommand("run-reacher")) {
      return run_training_command(
          "reacher", reacher_args.config_path, reacher_args.out_dir,
          reacher_args.seed, reacher_args.seeds, reacher_args.method,
          reacher_args.sqrt_k_scale, reacher_args.r1_noise_std);
    }
    if (app.got_subcommand("report")) {
      return mogrpo::cmd_report(report_dir, std::cout);
    }
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << '\n';
    return 2;
  }
  return 0;
}
