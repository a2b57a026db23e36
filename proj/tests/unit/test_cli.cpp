#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "seqreview/format.hpp"

using seqreview::cli::run;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args, unsigned workers = 1) {
  setenv("SEQREVIEW_WORKERS", std::to_string(workers).c_str(), 1);
  args.insert(args.begin(), "seqreview");
  std::ostringstream out, err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(cells);
  }
  return rows;
}

double number(const std::string& s) {
  double v = 0.0;
  EXPECT_TRUE(seqreview::parse_double(s, v)) << s;
  return v;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  EXPECT_NE(it, header.end()) << name;
  return static_cast<std::size_t>(it - header.begin());
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("seqreview_cli_" + name)).string();
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

void expect_single_error_line(const Result& r, const std::string& key) {
  EXPECT_NE(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(r.err.rfind("error: " + key + ": ", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
}

}  // namespace

TEST(CliSimulate, DeterministicAcrossRunsAndWorkers) {
  const std::vector<std::string> args{"simulate", "--seed", "11", "--samples", "3000", "--n", "2..4"};
  const auto a = invoke(args, 1);
  const auto b = invoke(args, 1);
  const auto c = invoke(args, 4);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  EXPECT_EQ(parse_csv(a.out).size(), 4u);
}

TEST(CliSimulate, SequentialWithoutContinuationThresholdMatchesParallel) {
  const auto par = parse_csv(invoke({"simulate", "--seed", "5", "--samples", "2000", "--tau_acc", "0.3"}).out);
  const auto seq = parse_csv(
      invoke({"simulate", "--seed", "5", "--samples", "2000", "--mechanism", "threshold-seq", "--tau_acc", "0.3",
              "--tau_rev", "-inf"})
          .out);
  ASSERT_EQ(par.size(), 2u);
  ASSERT_EQ(seq.size(), 2u);
  for (const auto* name : {"utility", "utility_se", "burden", "avg_reviewed_quality"}) {
    const auto k = column(par[0], name);
    EXPECT_EQ(par[1][k], seq[1][k]) << name;
  }
}

TEST(CliSimulate, BurdenFallsWithPapersPerAuthor) {
  const auto rows = parse_csv(invoke({"simulate", "--seed", "9", "--samples", "4000", "--mechanism",
                                      "threshold-seq", "--tau_acc", "0", "--tau_rev", "-0.5", "--n", "2..10"})
                                  .out);
  ASSERT_EQ(rows.size(), 10u);
  const auto b = column(rows[0], "burden"), se = column(rows[0], "burden_se");
  for (std::size_t i = 2; i < rows.size(); ++i) {
    const double diff = number(rows[i][b]) - number(rows[i - 1][b]);
    const double tol = 2.0 * std::hypot(number(rows[i][se]), number(rows[i - 1][se]));
    EXPECT_LE(diff, tol) << "n row " << i;
  }
  EXPECT_LT(number(rows[9][b]), number(rows[1][b]));
}

TEST(CliSimulate, TripleMechanismsAndSoftmax) {
  for (const char* m : {"naive", "coinflip", "creditpool", "limited-creditpool", "bundle"}) {
    const auto r = invoke({"simulate", "--seed", "2", "--samples", "500", "--mechanism", m});
    ASSERT_EQ(r.code, 0) << m << ": " << r.err;
    const auto rows = parse_csv(r.out);
    ASSERT_EQ(rows.size(), 2u);
    const double burden = number(rows[1][column(rows[0], "burden")]);
    EXPECT_GT(burden, 0.0);
    EXPECT_LE(burden, 1.0);
  }
  const auto soft = invoke({"simulate", "--seed", "2", "--samples", "500", "--setting", "softmax",
                            "--paper_count_mean", "1.8,1.93", "--mechanism", "threshold-seq", "--tau_acc", "6",
                            "--tau_rev", "5"});
  ASSERT_EQ(soft.code, 0) << soft.err;
  EXPECT_EQ(parse_csv(soft.out).size(), 3u);
}

TEST(CliErrors, SingleLineNamingTheKey) {
  expect_single_error_line(invoke({"simulate", "--samples", "10"}), "seed");
  expect_single_error_line(invoke({"simulate", "--seed", "1", "--n", "0"}), "n");
  expect_single_error_line(invoke({"simulate", "--seed", "1", "--sigma_q", "-1"}), "sigma_q");
  expect_single_error_line(invoke({"simulate", "--seed", "1", "--mechanism", "bogus"}), "mechanism");
  expect_single_error_line(
      invoke({"simulate", "--seed", "1", "--mechanism", "threshold-seq", "--tau_acc", "0", "--tau_rev", "1"}),
      "tau_rev");
  expect_single_error_line(invoke({"optimize", "--seed", "1", "--tau_acc", "-1", "--tau_rev", "0"}), "tau_rev");
  expect_single_error_line(invoke({"mrs", "--seed", "1", "--probs", "0.5,0.6"}), "probs");
  expect_single_error_line(invoke({"mrs", "--seed", "1", "--probs", "0.5,0.5"}), "probs");
  expect_single_error_line(invoke({"simulate", "--seed", "1", "--setting", "softmax", "--paper_counts", "1:0.5"}),
                           "paper_counts");
  expect_single_error_line(invoke({"fit", "--seed", "1", "--data", "/nonexistent/data.jsonl"}), "data");
  expect_single_error_line(invoke({"simulate", "--seed", "1", "--out", "/nonexistent/dir/x.csv"}), "out");
}

TEST(CliConfig, FileEntriesAndFlagOverrides) {
  const auto cfg = temp_path("config.cfg");
  write_file(cfg, "# experiment\nseed = 4\nsamples = 800\nn = 3\nmechanism = threshold-seq\ntau_rev = -0.5\n");
  const auto from_file = invoke({"simulate", "--config", cfg});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  const auto rows = parse_csv(from_file.out);
  EXPECT_EQ(rows[1][column(rows[0], "n")], "3");
  EXPECT_EQ(rows[1][column(rows[0], "seed")], "4");
  EXPECT_EQ(rows[1][column(rows[0], "tau_rev")], "-0.5");
  const auto flags = invoke({"simulate", "--config", cfg, "--n", "6", "--seed", "4"});
  const auto explicit_rows = parse_csv(flags.out);
  EXPECT_EQ(explicit_rows[1][column(rows[0], "n")], "6");
  EXPECT_EQ(flags.out, invoke({"simulate", "--seed", "4", "--samples", "800", "--n", "6", "--mechanism",
                               "threshold-seq", "--tau_rev", "-0.5"})
                           .out);

  write_file(cfg, "seed = 4\ncolour = red\n");
  expect_single_error_line(invoke({"simulate", "--config", cfg}), "colour");
  write_file(cfg, "seed = 4\nseed = 5\n");
  expect_single_error_line(invoke({"simulate", "--config", cfg}), "seed");
  write_file(cfg, "just words\n");
  expect_single_error_line(invoke({"simulate", "--config", cfg}), "config");
  std::filesystem::remove(cfg);
}

TEST(CliOptimize, ReportsAllFamiliesAndRelativeUtility) {
  const auto r = invoke({"optimize", "--seed", "3", "--iterations", "4", "--samples", "300", "--final_samples",
                         "600", "--isotonic_noise_draws", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[1][0], "parallel");
  EXPECT_EQ(rows[2][0], "threshold-seq");
  EXPECT_EQ(rows[3][0], "isotonic");
  EXPECT_EQ(rows[4][0], "relative");
  EXPECT_GE(number(rows[2][1]), number(rows[2][2]));
}

TEST(CliFitSynth, RoundTripThroughFiles) {
  const auto model = temp_path("truth.model");
  const auto data = temp_path("synthetic.jsonl");
  const auto fitted = temp_path("fitted.model");
  write_file(model,
             "mu_q = 5.5\nsigma_q = 1.3\ntemperature = 0.35\npaper_count_pmf = 1:0.5,2:0.3,3:0.2\n");
  ASSERT_EQ(invoke({"synth", "--seed", "21", "--model", model, "--papers", "3000", "--out", data}).code, 0);
  const auto fit = invoke({"fit", "--seed", "0", "--data", data, "--out", fitted});
  ASSERT_EQ(fit.code, 0) << fit.err;
  const auto doc = seqreview::cli::read_config_file(fitted);
  EXPECT_NEAR(number(doc.at("mu_q")), 5.5, 0.05);
  EXPECT_NEAR(number(doc.at("sigma_q")), 1.3, 0.08);
  EXPECT_NEAR(number(doc.at("temperature")), 0.35, 0.05);
  // The fitted document drives the softmax simulation.
  const auto sim = invoke({"simulate", "--seed", "1", "--samples", "300", "--setting", "softmax", "--model", fitted});
  EXPECT_EQ(sim.code, 0) << sim.err;

  write_file(data, "");
  expect_single_error_line(invoke({"fit", "--seed", "0", "--data", data}), "data");
  for (const auto& p : {model, data, fitted}) std::filesystem::remove(p);
}

TEST(CliTruthcheck, CoinFlipSuitePassesAndBundleFoilFails) {
  const auto coin = parse_csv(invoke({"truthcheck", "--seed", "1", "--instances", "40"}).out);
  ASSERT_EQ(coin.size(), 41u);
  const auto t = column(coin[0], "truthful");
  for (std::size_t i = 1; i < coin.size(); ++i) EXPECT_EQ(coin[i][t], "true") << "instance " << i - 1;

  const auto bundle = parse_csv(invoke({"truthcheck", "--seed", "1", "--instances", "1", "--mechanism", "bundle"}).out);
  ASSERT_EQ(bundle.size(), 2u);
  EXPECT_EQ(bundle[1][t], "false");
  EXPECT_EQ(bundle[1][column(bundle[0], "truthful_utility")], "3.75");
  EXPECT_EQ(bundle[1][column(bundle[0], "best_utility")], "4");
}

TEST(CliTruthcheck, TableListsEveryPermutation) {
  const auto rows =
      parse_csv(invoke({"truthcheck", "--seed", "2", "--instances", "3", "--max_papers", "4", "--table"}).out);
  std::map<std::string, std::size_t> per_instance;
  for (std::size_t i = 1; i < rows.size(); ++i) ++per_instance[rows[i][1]];
  const std::set<std::size_t> factorials{1, 2, 6, 24};
  for (const auto& [inst, count] : per_instance) EXPECT_TRUE(factorials.count(count)) << inst << ": " << count;
  EXPECT_EQ(per_instance.size(), 3u);
}

TEST(CliMrs, CounterexampleGridAndProfile) {
  EXPECT_EQ(invoke({"mrs", "--seed", "0", "--report", "counterexample"}).out,
            "sequential_more_high,sequential_more_low,parallel_more_high,parallel_more_low,sequential_prefers_high,"
            "parallel_prefers_high\n1,0.875,1,1.5,true,false\n");
  const auto grid = parse_csv(invoke({"mrs", "--seed", "0", "--report", "grid"}).out);
  EXPECT_EQ(grid.size(), 1u + 45u);
  for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_EQ(grid[i][column(grid[0], "holds")], "true");
  const auto profile = parse_csv(invoke({"mrs", "--seed", "0", "--counts", "0,1", "--probs", "1,0.5"}).out);
  ASSERT_EQ(profile.size(), 2u);
  EXPECT_EQ(profile[1][column(profile[0], "mrs_parallel")], "2");
  EXPECT_EQ(profile[1][column(profile[0], "mrs_sequential")], "4");
}

TEST(CliDeterminism, EverySubcommandIgnoresWorkerCount) {
  const auto model = temp_path("det.model");
  const auto data = temp_path("det.jsonl");
  write_file(model, "mu_q = 5.5\nsigma_q = 1.3\ntemperature = 0.35\npaper_count_pmf = 1:0.6,2:0.4\n");
  ASSERT_EQ(invoke({"synth", "--seed", "1", "--model", model, "--papers", "300", "--out", data}).code, 0);
  const std::vector<std::vector<std::string>> commands{
      {"simulate", "--seed", "3", "--samples", "2000", "--mechanism", "isotonic", "--isotonic_noise_draws", "4"},
      {"simulate", "--seed", "3", "--samples", "1000", "--setting", "softmax", "--mechanism", "threshold-seq",
       "--tau_acc", "6", "--tau_rev", "5"},
      {"optimize", "--seed", "3", "--mechanism", "threshold-seq", "--iterations", "3", "--samples", "300",
       "--final_samples", "600"},
      {"burden", "--seed", "3", "--samples", "600", "--grid_points", "9", "--n", "2,3"},
      {"burden", "--seed", "3", "--samples", "600", "--grid_points", "9", "--setting", "softmax"},
      {"fit", "--seed", "3", "--data", data},
      {"synth", "--seed", "3", "--model", model, "--papers", "50"},
      {"truthcheck", "--seed", "3", "--instances", "10"},
      {"mrs", "--seed", "3", "--counts", "2,1,3", "--probs", "0.9,0.6,0.2", "--rewards", "2,1,1"},
  };
  for (const auto& cmd : commands) {
    const auto one = invoke(cmd, 1);
    const auto many = invoke(cmd, 3);
    ASSERT_EQ(one.code, 0) << cmd[0] << ": " << one.err;
    EXPECT_FALSE(one.out.empty());
    EXPECT_EQ(one.out, many.out) << cmd[0];
  }
  std::filesystem::remove(model);
  std::filesystem::remove(data);
}
