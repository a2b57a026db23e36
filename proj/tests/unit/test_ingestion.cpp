#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "seqreview/errors.hpp"
#include "seqreview/ingestion.hpp"

using namespace seqreview;

namespace {

Dataset parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in);
}

SubmissionRecord record(std::string id, std::vector<std::string> authors, std::vector<int> scores = {5}) {
  return {std::move(id), std::move(authors), std::move(scores)};
}

std::size_t schema_line(const std::string& text) {
  try {
    parse_text(text);
  } catch (const SchemaError& e) {
    return e.line();
  }
  return 0;
}

// Independent quadrature for the marginal likelihood: composite Simpson's
// rule over mu +/- 10 sigma with many nodes.
double simpson_log_marginal(const std::vector<int>& scores, double mu, double sigma, double t) {
  const auto model = SoftmaxScoreModel::integer_range(t, 1, 10);
  const int nodes = 40'000;
  const double lo = mu - 10.0 * sigma;
  const double h = 20.0 * sigma / nodes;
  double sum = 0.0;
  for (int i = 0; i <= nodes; ++i) {
    const double q = lo + i * h;
    const auto p = softmax_pmf(q, model);
    double f = std::exp(-0.5 * std::pow((q - mu) / sigma, 2)) / (sigma * std::sqrt(2.0 * M_PI));
    for (int s : scores) f *= p[s - 1];
    sum += f * (i == 0 || i == nodes ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0));
  }
  return std::log(sum * h / 3.0);
}

FittedModel truth_model() {
  FittedModel m;
  m.paper_count_pmf = {{1, 0.5}, {2, 0.3}, {3, 0.2}};
  m.mu_q = 5.5;
  m.sigma_q = 1.3;
  m.temperature = 0.35;
  return m;
}

}  // namespace

TEST(Parse, EmptyInput) { EXPECT_TRUE(parse_text("").records.empty()); }

TEST(Parse, OneRecordAndHeader) {
  const auto d = parse_text(
      "{\"score_min\": 1, \"score_max\": 4}\n"
      "\n"
      "{\"paper_id\": \"p1\", \"authors\": [\"a\", \"b\"], \"scores\": [1, 4, 3], \"title\": \"ignored\"}\n");
  EXPECT_EQ(d.score_min, 1);
  EXPECT_EQ(d.score_max, 4);
  ASSERT_EQ(d.records.size(), 1u);
  EXPECT_EQ(d.records[0].paper_id, "p1");
  EXPECT_EQ(d.records[0].authors, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.records[0].scores, (std::vector<int>{1, 4, 3}));
  EXPECT_EQ(d.score_set(), (std::vector<int>{1, 2, 3, 4}));
}

TEST(Parse, DefaultScoreRange) {
  const auto d = parse_text("{\"paper_id\": \"p\", \"authors\": [\"a\"], \"scores\": [10]}");
  EXPECT_EQ(d.score_min, 1);
  EXPECT_EQ(d.score_max, 10);
}

TEST(Parse, SchemaErrorsNameTheLine) {
  const std::string ok = "{\"paper_id\": \"p1\", \"authors\": [\"a\"], \"scores\": [5]}\n";
  EXPECT_EQ(schema_line(ok + "{\"paper_id\": \"p2\", \"authors\": [\"a\"], \"scores\": [11]}\n"), 2u);
  EXPECT_EQ(schema_line(ok + ok), 2u);  // duplicate id
  EXPECT_EQ(schema_line("not json\n"), 1u);
  EXPECT_EQ(schema_line("[1, 2]\n"), 1u);
  EXPECT_EQ(schema_line(ok + "\n{\"paper_id\": \"p3\", \"authors\": [], \"scores\": [5]}\n"), 3u);
  EXPECT_EQ(schema_line("{\"paper_id\": \"p\", \"authors\": [\"a\"], \"scores\": [5.5]}\n"), 1u);
  EXPECT_EQ(schema_line("{\"paper_id\": \"p\", \"authors\": [\"a\"], \"scores\": []}\n"), 1u);
  EXPECT_EQ(schema_line("{\"paper_id\": 7, \"authors\": [\"a\"], \"scores\": [1]}\n"), 1u);
  EXPECT_EQ(schema_line("{\"score_min\": 5, \"score_max\": 2}\n"), 1u);
  try {
    parse_text(ok + "{\"paper_id\": \"p2\", \"authors\": [\"a\"], \"scores\": [0]}\n");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Parse, MissingFile) { EXPECT_THROW(parse_dataset("/nonexistent/dataset.jsonl"), std::runtime_error); }

TEST(Parse, WriteRoundTrip) {
  const auto d = generate_synthetic_dataset(truth_model(), 50, 4);
  std::stringstream buffer;
  write_dataset(d, buffer);
  const auto back = parse_dataset(buffer);
  ASSERT_EQ(back.records.size(), d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    EXPECT_EQ(back.records[i].paper_id, d.records[i].paper_id);
    EXPECT_EQ(back.records[i].authors, d.records[i].authors);
    EXPECT_EQ(back.records[i].scores, d.records[i].scores);
  }
}

TEST(Assignment, LargestAuthorFirst) {
  const auto a = greedy_author_assignment({record("p1", {"A"}), record("p2", {"A", "B"})}, 0);
  EXPECT_EQ(a.paper_to_author.at("p1"), "A");
  EXPECT_EQ(a.paper_to_author.at("p2"), "A");
  ASSERT_EQ(a.selections.size(), 1u);
  EXPECT_EQ(a.selections[0], (std::pair<std::string, std::size_t>{"A", 2}));
}

TEST(Assignment, DisjointIsIdentity) {
  const auto a = greedy_author_assignment({record("p1", {"A"}), record("p2", {"B"}), record("p3", {"C"})}, 3);
  EXPECT_EQ(a.paper_to_author.at("p1"), "A");
  EXPECT_EQ(a.paper_to_author.at("p2"), "B");
  EXPECT_EQ(a.paper_to_author.at("p3"), "C");
}

TEST(Assignment, TiesAreBrokenBySeed) {
  const std::vector<SubmissionRecord> records{record("p1", {"A", "B"})};
  std::set<std::string> winners;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    const auto a = greedy_author_assignment(records, seed);
    EXPECT_EQ(a.paper_to_author.at("p1"), greedy_author_assignment(records, seed).paper_to_author.at("p1"));
    winners.insert(a.paper_to_author.at("p1"));
  }
  EXPECT_EQ(winners, (std::set<std::string>{"A", "B"}));
}

TEST(Assignment, RandomCoauthorshipProperties) {
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    CounterRng rng(trial, stream_id("coauthor-test"), 0);
    std::vector<SubmissionRecord> records;
    const std::size_t papers = 5 + rng.below(40);
    for (std::size_t p = 0; p < papers; ++p) {
      std::vector<std::string> authors;
      const std::size_t k = 1 + rng.below(3);
      for (std::size_t j = 0; j < k; ++j) authors.push_back("a" + std::to_string(rng.below(12)));
      records.push_back(record("p" + std::to_string(p), authors));
    }
    const auto a = greedy_author_assignment(records, trial);
    ASSERT_EQ(a.paper_to_author.size(), papers);
    for (const auto& r : records) {
      const auto& who = a.paper_to_author.at(r.paper_id);
      EXPECT_NE(std::find(r.authors.begin(), r.authors.end(), who), r.authors.end());
    }
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < a.selections.size(); ++i) {
      assigned += a.selections[i].second;
      if (i > 0) EXPECT_LE(a.selections[i].second, a.selections[i - 1].second);
    }
    EXPECT_EQ(assigned, papers);
    EXPECT_EQ(a.paper_to_author, greedy_author_assignment(records, trial).paper_to_author);
  }
}

TEST(Assignment, DuplicatePaperRejected) {
  EXPECT_THROW(greedy_author_assignment({record("p", {"A"}), record("p", {"B"})}, 0), ParameterError);
}

TEST(PaperCounts, Histogram) {
  const auto a = greedy_author_assignment({record("p1", {"A"}), record("p2", {"A"}), record("p3", {"B"}),
                                           record("p4", {"B"}), record("p5", {"C"}), record("p6", {"D"}),
                                           record("p7", {"E"})},
                                          0);
  const auto pmf = empirical_paper_counts(a);
  ASSERT_EQ(pmf.size(), 2u);
  EXPECT_DOUBLE_EQ(pmf.at(1), 0.6);
  EXPECT_DOUBLE_EQ(pmf.at(2), 0.4);
  const auto single = empirical_paper_counts(greedy_author_assignment({record("x", {"A"}), record("y", {"B"})}, 0));
  EXPECT_EQ(single, (std::map<int, double>{{1, 1.0}}));
}

TEST(QualityPriorFit, Arithmetic) {
  const auto flat = fit_quality_prior({record("a", {"A"}, {5, 5}), record("b", {"B"}, {5})});
  EXPECT_EQ(flat.mu_q, 5.0);
  EXPECT_EQ(flat.sigma_q, 0.0);
  EXPECT_TRUE(flat.degenerate);
  const auto two = fit_quality_prior({record("a", {"A"}, {3, 5}), record("b", {"B"}, {6})});
  EXPECT_DOUBLE_EQ(two.mu_q, 5.0);
  EXPECT_DOUBLE_EQ(two.sigma_q, std::sqrt(2.0));
  EXPECT_FALSE(two.degenerate);
  EXPECT_THROW(fit_quality_prior({}), ParameterError);
}

TEST(QualityPriorFit, RecoversGaussianMeans) {
  // Scores are stochastically rounded qualities, so each paper's mean score
  // is an unbiased estimate of its quality.
  std::vector<SubmissionRecord> records;
  for (std::size_t p = 0; p < 3000; ++p) {
    CounterRng rng(17, stream_id("prior-recovery"), p);
    const double q = rng.normal(5.5, 1.3);
    std::vector<int> scores;
    for (int k = 0; k < 10; ++k) {
      const double f = std::floor(q);
      scores.push_back(static_cast<int>(f) + (rng.uniform() < q - f ? 1 : 0));
    }
    records.push_back(record("p" + std::to_string(p), {"a" + std::to_string(p)}, scores));
  }
  const auto prior = fit_quality_prior(records);
  EXPECT_NEAR(prior.mu_q, 5.5, 0.05);
  EXPECT_NEAR(prior.sigma_q, 1.3, 0.05);
}

TEST(MarginalLikelihood, MatchesIndependentQuadrature) {
  const std::vector<SubmissionRecord> records{record("a", {"A"}, {6, 7, 6}), record("b", {"B"}, {3, 2}),
                                              record("c", {"C"}, {6, 6, 7})};
  const ScoreTally tally(records, SoftmaxScoreModel::integer_range(0.0, 1, 10).score_set);
  EXPECT_EQ(tally.groups.size(), 2u);
  for (double t : {0.1, 0.35, 1.2}) {
    const double expected = 2.0 * simpson_log_marginal({6, 7, 6}, 5.4, 1.2, t) + simpson_log_marginal({3, 2}, 5.4, 1.2, t);
    EXPECT_NEAR(marginal_log_likelihood(tally, 5.4, 1.2, t), expected, 1e-6);
  }
}

TEST(TemperatureFit, DegeneratePriorRejected) {
  QualityPrior p{5.0, 0.0, true};
  EXPECT_THROW(fit_temperature_map({record("a", {"A"})}, p, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}), ParameterError);
}

TEST(TemperatureFit, SinglePaperHasFiniteMaximizer) {
  const QualityPrior prior{5.4, 1.0, false};
  const double t = fit_temperature_map({record("a", {"A"}, {5})}, prior, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  EXPECT_TRUE(std::isfinite(t));
  EXPECT_GE(t, 0.0);
  EXPECT_LE(t, kTemperatureUpper);
  // It is a maximizer: nearby temperatures are no better.
  const ScoreTally tally({record("a", {"A"}, {5})}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  const double best = marginal_log_likelihood(tally, 5.4, 1.0, t);
  for (double probe : {0.0, 0.5 * t, std::min(kTemperatureUpper, t + 0.3)})
    EXPECT_LE(marginal_log_likelihood(tally, 5.4, 1.0, probe), best + 1e-9);
}

TEST(TemperatureFit, RecoversTemperatureUnderTruePrior) {
  const auto d = generate_synthetic_dataset(truth_model(), 3000, 8);
  const double t = fit_temperature_map(d.records, {5.5, 1.3, false}, d.score_set());
  EXPECT_NEAR(t, 0.35, 0.05);
}

TEST(FitModel, SyntheticRoundTrip) {
  const auto d = generate_synthetic_dataset(truth_model(), 3000, 12);
  const auto fit = fit_model(d, {});
  EXPECT_NEAR(fit.model.mu_q, 5.5, 0.05);
  EXPECT_NEAR(fit.model.sigma_q, 1.3, 0.08);
  EXPECT_NEAR(fit.model.temperature, 0.35, 0.05);
  EXPECT_EQ(fit.model.papers, 3000u);
  // Single-author papers: the greedy assignment recovers the generating
  // authors, so the pmf is close to the truth.
  EXPECT_NEAR(fit.model.paper_count_pmf.at(1), 0.5, 0.04);
  EXPECT_NEAR(fit.model.paper_count_pmf.at(3), 0.2, 0.04);
}

TEST(FitModel, MomentPriorIsInflatedByReviewNoise) {
  const auto d = generate_synthetic_dataset(truth_model(), 3000, 12);
  FitOptions o;
  o.prior_method = PriorMethod::kMoments;
  const auto fit = fit_model(d, o);
  EXPECT_GT(fit.model.sigma_q, 1.3 + 0.08);
  EXPECT_EQ(fit.model.prior_method, PriorMethod::kMoments);
}

TEST(FitModel, EmptyAndDegenerateDatasets) {
  EXPECT_THROW(fit_model(Dataset{}, {}), ParameterError);
  Dataset flat;
  flat.records = {record("a", {"A"}, {5}), record("b", {"B"}, {5})};
  EXPECT_THROW(fit_model(flat, {}), ParameterError);
}

TEST(FittedModelDocument, RoundTripIsExact) {
  auto m = truth_model();
  m.paper_count_pmf = {{1, 0.1 + 0.2}, {2, 1.0 - (0.1 + 0.2)}};
  m.mu_q = 5.468000000000001;
  m.papers = 17;
  m.authors = 9;
  const auto back = FittedModel::from_document(m.to_document());
  EXPECT_EQ(back.paper_count_pmf, m.paper_count_pmf);
  EXPECT_EQ(back.mu_q, m.mu_q);
  EXPECT_EQ(back.sigma_q, m.sigma_q);
  EXPECT_EQ(back.temperature, m.temperature);
  EXPECT_EQ(back.papers, 17u);
  EXPECT_EQ(back.authors, 9u);
  EXPECT_EQ(back.to_document(), m.to_document());

  const auto path = std::filesystem::temp_directory_path() / "seqreview_fitted_model_test.txt";
  write_fitted_model(m, path.string());
  EXPECT_EQ(read_fitted_model(path.string()).to_document(), m.to_document());
  std::filesystem::remove(path);
}

TEST(FittedModelDocument, ErrorsNameKeyAndLine) {
  const std::string base = "mu_q = 5\nsigma_q = 1\ntemperature = 0.3\npaper_count_pmf = 1:1\n";
  EXPECT_NO_THROW(FittedModel::from_document(base));
  try {
    FittedModel::from_document(base + "colour = red\n");
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 5u);
    EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
  }
  EXPECT_THROW(FittedModel::from_document("mu_q = 5\n"), SchemaError);
  EXPECT_THROW(FittedModel::from_document(base + "mu_q = 4\n"), SchemaError);
  EXPECT_THROW(FittedModel::from_document("mu_q = x\nsigma_q = 1\ntemperature = 0.3\npaper_count_pmf = 1:1\n"),
               SchemaError);
  EXPECT_THROW(FittedModel::from_document("mu_q = 5\nsigma_q = 1\ntemperature = 0.3\npaper_count_pmf = 1:0.5\n"),
               SchemaError);
}

TEST(FittedModelDocument, ConvertsToSoftmaxSetting) {
  const auto s = truth_model().to_setting();
  EXPECT_EQ(s.score_set.size(), 10u);
  EXPECT_EQ(s.reviews_per_paper, 3u);
  EXPECT_DOUBLE_EQ(s.temperature, 0.35);
  EXPECT_NO_THROW(s.validate());
}

TEST(Synthetic, DeterministicAndSized) {
  const auto a = generate_synthetic_dataset(truth_model(), 200, 5);
  const auto b = generate_synthetic_dataset(truth_model(), 200, 5);
  ASSERT_EQ(a.records.size(), 200u);
  for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(a.records[i].scores, b.records[i].scores);
}
