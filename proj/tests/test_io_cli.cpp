#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mogrpo/csv.hpp"
#include "mogrpo/experiments.hpp"
#include "mogrpo/run_config.hpp"

using namespace mogrpo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& path) {
  std::ifstream file(path, std::ios::binary);
  std::stringstream buffer;
  buffer << file.rdbuf();
  return buffer.str();
}

void write_tiny_train_log(const fs::path& path, const std::string& method,
                          int seed, const std::vector<double>& totals) {
  csv::Writer writer(path.string(), "train_log.v1", {{"env", "bandit"}});
  writer.header({"iteration", "seed", "method", "r1_mean", "r2_mean",
                 "r3_mean", "total_reward", "mean_advantage", "kl", "loss"});
  for (std::size_t i = 0; i < totals.size(); ++i) {
    writer.row({std::to_string(i), std::to_string(seed), method,
                csv::format_double(totals[i] / 3),
                csv::format_double(totals[i] / 3),
                csv::format_double(totals[i] / 3),
                csv::format_double(totals[i]), "0", "0", "0"});
  }
  writer.close();
}

}  // namespace

TEST_CASE("run config parsing") {
  const RunConfig config = RunConfig::from_string(R"(
# comment
top = 1
[train]
learning_rate = 2e-3   # inline comment
clip_epsilon = inf
flag = true
[covspec]
means = 1, 0.5
cov_row_1 = 1,0
)");

  CHECK(config.get_int("top", 0) == 1);
  CHECK(config.get_double("train.learning_rate", 0.0) ==
        doctest::Approx(2e-3));
  CHECK(std::isinf(config.get_double("train.clip_epsilon", 0.2)));
  CHECK(config.get_bool("train.flag", false));
  CHECK(config.get_doubles("covspec.means") ==
        std::vector<double>{1.0, 0.5});
  CHECK(config.get_string("missing", "fallback") == "fallback");
  CHECK_THROWS_AS(config.get_double("train.flag", 0.0), std::runtime_error);

  CHECK_THROWS_AS(RunConfig::from_string("[open\n"), std::runtime_error);
  CHECK_THROWS_AS(RunConfig::from_string("novalue\n"), std::runtime_error);
  CHECK_THROWS_AS(RunConfig::from_file("no_such_config.ini"),
                  std::runtime_error);

  SUBCASE("merge overrides") {
    RunConfig base = RunConfig::from_string("[a]\nx = 1\ny = 2\n");
    base.merge(RunConfig::from_string("[a]\nx = 9\n"));
    CHECK(base.get_int("a.x", 0) == 9);
    CHECK(base.get_int("a.y", 0) == 2);
  }
}

TEST_CASE("checked-in default config matches the built-in defaults") {
  const RunConfig file = RunConfig::from_file(
      std::string(MOGRPO_SOURCE_DIR) + "/configs/default.ini");
  const RunConfig builtin = default_run_config();
  for (const auto& [key, value] : builtin.entries()) {
    INFO("key ", key);
    CHECK(file.has(key));
    CHECK(file.get_double(key, -1e99) ==
          doctest::Approx(builtin.get_double(key, -1e99)));
  }
}

TEST_CASE("csv round trip with schema tags") {
  TempDir dir("mogrpo_csv_test");
  const fs::path path = dir.path / "table.csv";

  csv::Writer writer(path.string(), "train_log.v1",
                     {{"env", "reacher"}, {"r1_noise_std", "2"}});
  writer.header({"a", "b"});
  writer.row({"1", csv::format_double(0.1 + 0.2)});
  writer.close();

  const csv::Table table = csv::read_file(path.string());
  CHECK(table.schema == "train_log.v1");
  CHECK(table.tags.at("env") == "reacher");
  CHECK(table.tags.at("r1_noise_std") == "2");
  CHECK(table.columns == std::vector<std::string>{"a", "b"});
  REQUIRE(table.rows.size() == 1);
  CHECK(csv::parse_double(table.rows[0][1]) == 0.1 + 0.2);

  SUBCASE("format_double round-trips exactly") {
    for (double v : {1.0 / 3.0, -1e-300, 12345.6789, 0.0, 2e17}) {
      CHECK(csv::parse_double(csv::format_double(v)) == v);
    }
  }
  SUBCASE("schema line is mandatory") {
    const fs::path bare = dir.path / "bare.csv";
    std::ofstream(bare) << "a,b\n1,2\n";
    CHECK_THROWS_AS(csv::read_file(bare.string()), std::runtime_error);
  }
  SUBCASE("row width is enforced") {
    csv::Writer bad((dir.path / "bad.csv").string(), "x.v1");
    bad.header({"a", "b"});
    CHECK_THROWS_AS(bad.row({"1"}), std::invalid_argument);
  }
  SUBCASE("missing files raise named errors") {
    try {
      csv::read_file("definitely_missing.csv");
      FAIL("expected throw");
    } catch (const std::runtime_error& error) {
      CHECK(std::string(error.what()).find("definitely_missing.csv") !=
            std::string::npos);
    }
  }
}

TEST_CASE("summary aggregation") {
  TempDir dir("mogrpo_report_test");

  SUBCASE("one method, one seed") {
    write_tiny_train_log(dir.path / "bandit_grpo_seed1.csv", "grpo", 1,
                         {4.0, 4.0, 4.0, 4.0});
    const SummaryTable table = summarize_directory(dir.str());
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0].seeds == 1);
    CHECK(table.rows[0].total_mean == doctest::Approx(4.0));
    CHECK(table.rows[0].total_std == doctest::Approx(0.0));
  }

  SUBCASE("two seeds give a population std") {
    write_tiny_train_log(dir.path / "bandit_mogrpo_seed1.csv", "mogrpo", 1,
                         {1.0, 1.0});
    write_tiny_train_log(dir.path / "bandit_mogrpo_seed2.csv", "mogrpo", 2,
                         {3.0, 3.0});
    const SummaryTable table = summarize_directory(dir.str());
    REQUIRE(table.rows.size() == 1);
    CHECK(table.rows[0].total_mean == doctest::Approx(2.0));
    CHECK(table.rows[0].total_std == doctest::Approx(1.0));
  }

  SUBCASE("rows sort grpo, drgrpo, mogrpo") {
    write_tiny_train_log(dir.path / "bandit_mogrpo_seed1.csv", "mogrpo", 1,
                         {1.0});
    write_tiny_train_log(dir.path / "bandit_grpo_seed1.csv", "grpo", 1,
                         {1.0});
    write_tiny_train_log(dir.path / "bandit_drgrpo_seed1.csv", "drgrpo", 1,
                         {1.0});
    const SummaryTable table = summarize_directory(dir.str());
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[0].method == Estimator::Grpo);
    CHECK(table.rows[1].method == Estimator::DrGrpo);
    CHECK(table.rows[2].method == Estimator::MoGrpo);

    std::ostringstream out;
    CHECK(cmd_report(dir.str(), out) == 0);
    CHECK(out.str().find("grpo") != std::string::npos);
    CHECK(fs::exists(dir.path / "summary.csv"));
    // Re-reporting skips the summary it just wrote.
    std::ostringstream again;
    CHECK(cmd_report(dir.str(), again) == 0);
    CHECK(again.str() == out.str());
  }

  SUBCASE("tail scoring uses the final ten percent") {
    std::vector<double> totals(100, 0.0);
    for (std::size_t i = 90; i < 100; ++i) totals[i] = 5.0;
    write_tiny_train_log(dir.path / "bandit_grpo_seed1.csv", "grpo", 1,
                         totals);
    const SummaryTable table = summarize_directory(dir.str());
    CHECK(table.rows[0].total_mean == doctest::Approx(5.0));
  }

  SUBCASE("unknown schema versions are rejected with the file name") {
    const fs::path odd = dir.path / "bandit_grpo_seed9.csv";
    std::ofstream(odd) << "#schema=train_log.v99\na,b\n1,2\n";
    try {
      summarize_directory(dir.str());
      FAIL("expected throw");
    } catch (const std::runtime_error& error) {
      const std::string what = error.what();
      CHECK(what.find("seed9") != std::string::npos);
      CHECK(what.find("train_log.v99") != std::string::npos);
    }
  }

  SUBCASE("empty directories are an error") {
    CHECK_THROWS_AS(summarize_directory(dir.str()), std::runtime_error);
    CHECK_THROWS_AS(summarize_directory((dir.path / "nope").string()),
                    std::runtime_error);
  }
}

TEST_CASE("experiment configs from run config") {
  RunConfig config = default_run_config();

  SUBCASE("bandit iterations derive from the pull budget") {
    const TrainConfig train = bandit_train_config(config);
    CHECK(train.iterations == 5000 / 8);
    CHECK(train.group_size == 8);
    CHECK(std::get<BanditSetup>(train.env).arms == 50);
    CHECK(train.adam.learning_rate == doctest::Approx(1e-3));
    CHECK(train.hidden_sizes == std::vector<std::size_t>{16, 16, 16});
  }
  SUBCASE("reacher config carries the ablation and geometry") {
    config.merge(RunConfig::from_string(
        "[reacher]\nr1_noise_std = 2\niterations = 77\n"));
    const TrainConfig train = reacher_train_config(config);
    CHECK(train.iterations == 77);
    const auto& setup = std::get<ReacherSetup>(train.env);
    CHECK(setup.config.r1_noise_std == doctest::Approx(2.0));
    CHECK(setup.config.target_radius == doctest::Approx(kReacherTargetRadius));
  }
}

TEST_CASE("covariance presets and file specs") {
  const CovSpec fig1 = verify_preset("fig1");
  CHECK(fig1.objectives() == 2);
  CHECK(fig1.cov(1, 1) == doctest::Approx(25.0));
  const CovSpec bandit = verify_preset("bandit");
  CHECK(bandit.cov(0, 1) == doctest::Approx(-10.0));
  CHECK_THROWS_AS(verify_preset("mystery"), std::invalid_argument);

  const RunConfig config = RunConfig::from_string(R"(
[covspec]
means = 0, 1
cov_row_1 = 2, 0.5
cov_row_2 = 0.5, 1
)");
  const CovSpec from_file = covspec_from_config(config);
  CHECK(from_file.objectives() == 2);
  CHECK(from_file.cov(0, 1) == doctest::Approx(0.5));

  CHECK_THROWS_AS(
      covspec_from_config(RunConfig::from_string("[covspec]\nmeans = 1\n")),
      std::runtime_error);
}

TEST_CASE("demo advantage walkthrough self-checks") {
  std::ostringstream out;
  CHECK(cmd_demo_advantage(out) == 0);
  CHECK(out.str().find("mogrpo") != std::string::npos);
  CHECK(out.str().find("self-check: ok") != std::string::npos);
}

TEST_CASE("verify command at reduced scale") {
  TempDir dir("mogrpo_verify_test");
  VerifyOptions options;
  options.preset = "fig1";
  options.group_size = 64;
  options.samples = 12800;
  options.seed = 7;
  options.out_dir = dir.str();

  std::ostringstream out;
  CHECK(cmd_verify(options, out) == 0);
  const csv::Table table =
      csv::read_file((dir.path / "corr_report.csv").string());
  CHECK(table.schema == "corr_report.v1");
  CHECK(table.columns ==
        std::vector<std::string>{"estimator", "objective_index", "predicted",
                                 "empirical", "abs_gap", "samples"});
  CHECK(table.rows.size() == 6);  // 3 estimators x 2 objectives
}

TEST_CASE("experiment runs write reproducible artifacts") {
  TempDir dir("mogrpo_exp_test");

  RunConfig config = default_run_config();
  config.merge(RunConfig::from_string("[bandit]\nsteps = 160\narms = 5\n"));
  const TrainConfig base = bandit_train_config(config);

  ExperimentOptions options;
  options.methods = {Estimator::Grpo, Estimator::MoGrpo};
  options.base_seed = 7;
  options.seed_count = 2;
  options.out_dir = dir.str();

  std::ostringstream log;
  const SummaryTable summary = run_experiment(base, "bandit", options, log);
  CHECK(summary.rows.size() == 2);
  CHECK(summary.rows[0].method == Estimator::Grpo);
  CHECK(summary.rows[0].seeds == 2);
  CHECK(summary.objectives == 3);

  CHECK(fs::exists(dir.path / "bandit_grpo_seed7.csv"));
  CHECK(fs::exists(dir.path / "bandit_grpo_seed8.csv"));
  CHECK(fs::exists(dir.path / "bandit_mogrpo_seed7.csv"));
  CHECK(fs::exists(dir.path / "summary.csv"));
  CHECK(fs::exists(dir.path / "run.meta"));

  const std::string first = slurp(dir.path / "bandit_grpo_seed7.csv");
  const std::string first_summary = slurp(dir.path / "summary.csv");
  std::ostringstream log2;
  run_experiment(base, "bandit", options, log2);
  CHECK(slurp(dir.path / "bandit_grpo_seed7.csv") == first);
  CHECK(slurp(dir.path / "summary.csv") == first_summary);

  // The seed column reflects base_seed + index.
  const csv::Table table =
      csv::read_file((dir.path / "bandit_grpo_seed8.csv").string());
  CHECK(table.rows.front()[table.column_index("seed")] == "8");
  CHECK(table.tags.at("env") == "bandit");
}
