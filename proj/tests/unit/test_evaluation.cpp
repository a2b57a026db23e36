#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "seqreview/errors.hpp"
#include "seqreview/evaluation.hpp"
#include "seqreview/mechanisms.hpp"
#include "seqreview/normal.hpp"
#include "seqreview/parallel.hpp"

using namespace seqreview;

namespace {

double combined_se(const EvalReport& a, const EvalReport& b) { return std::hypot(a.std_error, b.std_error); }

// Independent softmax oracle: samples k scores per reviewed paper and gates
// on the posterior mean computed from those scores.
SoftmaxMetrics simulate_softmax(const ThresholdPolicy& policy, const SoftmaxSetting& setting, std::size_t authors,
                                std::uint64_t seed) {
  const PosteriorGrid grid(setting.mu_q, setting.sigma_q, setting.score_model());
  std::mt19937_64 gen(seed);
  std::discrete_distribution<int> count_dist;
  std::vector<int> counts;
  std::vector<double> weights;
  for (const auto& [c, p] : setting.paper_count_pmf) {
    counts.push_back(c);
    weights.push_back(p);
  }
  count_dist = std::discrete_distribution<int>(weights.begin(), weights.end());
  std::normal_distribution<double> prior(setting.mu_q, setting.sigma_q);
  RatioStats u;
  RatioStats b;
  for (std::size_t s = 0; s < authors; ++s) {
    const int n = counts[count_dist(gen)];
    std::vector<double> q(n);
    for (auto& x : q) x = prior(gen);
    std::sort(q.rbegin(), q.rend());
    double utility = 0.0;
    double reviewed = 0.0;
    for (double x : q) {
      reviewed += 1.0;
      const auto pmf = softmax_pmf(x, setting.score_model());
      std::discrete_distribution<int> score_dist(pmf.begin(), pmf.end());
      std::vector<int> scores(setting.reviews_per_paper);
      for (auto& r : scores) r = setting.score_set[score_dist(gen)];
      const double post = grid.expected_quality(scores);
      if (post >= policy.tau_acc) utility += x - setting.desirability_offset;
      if (policy.family == ThresholdFamily::kSequential && post < policy.tau_rev) break;
    }
    u.push(utility, n);
    b.push(reviewed, n);
  }
  return {{u.ratio(), u.std_error(), authors, seed}, {b.ratio(), b.std_error(), authors, seed}};
}

}  // namespace

TEST(ClosedForm, ParallelAcceptProb) {
  EXPECT_DOUBLE_EQ(parallel_accept_prob(0.7, 0.7, 1.3), 0.5);
  EXPECT_EQ(parallel_accept_prob(-50.0, -kInf, 1.0), 1.0);
  EXPECT_NEAR(parallel_accept_prob(0.0, 1.0, 1.0), 0.15865525393145707, 1e-15);
  EXPECT_THROW(parallel_accept_prob(0.0, 0.0, 0.0), ParameterError);
}

TEST(ClosedForm, SequentialAcceptProbs) {
  const std::vector<double> q{1.0, 0.0};
  const auto p = sequential_accept_probs(q, 0.0, -1.0, 1.0);
  EXPECT_NEAR(p.accept[0], 0.8413447460685429, 1e-15);
  EXPECT_NEAR(p.accept[1], 0.9772498680518208 * 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(p.review[0], 1.0);
  EXPECT_NEAR(p.review[1], 0.9772498680518208, 1e-15);
  EXPECT_THROW(sequential_accept_probs(q, 0.0, 1.0, 1.0), ParameterError);
}

TEST(ClosedForm, SequentialReducesToParallel) {
  const std::vector<double> q{2.0, 0.3, -0.4, -1.5};
  const auto p = sequential_accept_probs(q, 0.2, -kInf, 0.8);
  for (std::size_t i = 0; i < q.size(); ++i) EXPECT_EQ(p.accept[i], parallel_accept_prob(q[i], 0.2, 0.8));
  const auto single = sequential_accept_probs(std::vector<double>{0.4}, 1.0, 0.5, 2.0);
  EXPECT_EQ(single.accept[0], parallel_accept_prob(0.4, 1.0, 2.0));
}

TEST(ClosedForm, SequentialMatchesSimulation) {
  const std::vector<double> q{0.8, 0.1, -0.6};
  const double tau_acc = 0.3;
  const double tau_rev = -0.2;
  const double sigma = 0.9;
  const auto exact = sequential_accept_probs(q, tau_acc, tau_rev, sigma);
  const std::size_t runs = 1'000'000;
  std::vector<double> accepted(q.size(), 0.0);
  for (std::size_t r = 0; r < runs; ++r) {
    CounterRng rng(5, stream_id("closed-form-check"), r);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double score = q[i] + sigma * rng.normal();
      if (score >= tau_acc) accepted[i] += 1.0;
      if (score < tau_rev) break;
    }
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double p = exact.accept[i];
    EXPECT_NEAR(accepted[i] / runs, p, 4.0 * std::sqrt(p * (1.0 - p) / runs));
  }
}

TEST(Estimators, DegeneratePriorAcceptsEverything) {
  const GaussianSetting g{4, 10.0, 1e-9, 1.0};
  EXPECT_NEAR(mc_conference_utility(ThresholdPolicy::parallel(0.0), g, 1000, 1).estimate, 10.0, 1e-9);
  EXPECT_EQ(mc_conference_utility(ThresholdPolicy::parallel(kInf), g, 1000, 1).estimate, 0.0);
  EXPECT_EQ(mc_conference_utility(ThresholdPolicy::sequential(kInf, 0.0), g, 1000, 1).estimate, 0.0);
}

TEST(Estimators, UtilityMatchesFullSimulation) {
  const GaussianSetting g;
  const auto policy = ThresholdPolicy::sequential(0.5, 0.0);
  const auto analytic = evaluate_gaussian(policy, g, 20'000, 11);
  const auto sim = simulate_gaussian(policy, g, 200'000, 12);
  EXPECT_NEAR(analytic.utility.estimate, sim.utility.estimate, 4.0 * combined_se(analytic.utility, sim.utility));
  EXPECT_NEAR(analytic.burden.estimate, sim.burden.estimate, 4.0 * combined_se(analytic.burden, sim.burden));
}

TEST(Estimators, BurdenWithEqualThresholdsMatchesSimulation) {
  const GaussianSetting g;
  const auto policy = ThresholdPolicy::sequential(0.2, 0.2);
  const auto analytic = mc_review_burden(policy, g, 20'000, 3);
  const auto sim = simulate_gaussian(policy, g, 200'000, 4).burden;
  EXPECT_NEAR(analytic.estimate, sim.estimate, 4.0 * combined_se(analytic, sim));
}

TEST(Estimators, IsotonicMatchesFullSimulation) {
  const GaussianSetting g;
  const auto policy = ThresholdPolicy::isotonic(0.3);
  const auto analytic = mc_conference_utility(policy, g, 5'000, 21);
  const auto sim = simulate_gaussian(policy, g, 200'000, 22).utility;
  EXPECT_NEAR(analytic.estimate, sim.estimate, 4.0 * combined_se(analytic, sim));
}

TEST(Estimators, BurdenLimits) {
  const GaussianSetting g;
  const auto par = mc_review_burden(ThresholdPolicy::parallel(0.3), g, 1000, 2);
  EXPECT_EQ(par.estimate, 1.0);
  EXPECT_EQ(par.std_error, 0.0);
  EXPECT_DOUBLE_EQ(mc_review_burden(ThresholdPolicy::sequential(kInf, kInf), g, 1000, 2).estimate, 1.0 / 5.0);
}

TEST(Estimators, BurdenNonincreasingInReviewThreshold) {
  const GaussianSetting g;
  EvalReport prev{kInf, 0.0, 0, 0};
  for (double tau_rev = -3.0; tau_rev <= 2.0; tau_rev += 0.5) {
    const auto b = mc_review_burden(ThresholdPolicy::sequential(2.0, tau_rev), g, 10'000, 8);
    EXPECT_LE(b.estimate, prev.estimate + 2.0 * combined_se(b, prev));
    prev = b;
  }
}

TEST(Estimators, AverageReviewedQuality) {
  const GaussianSetting g;
  const auto par = avg_reviewed_quality(ThresholdPolicy::parallel(0.0), g, 10'000, 4);
  EXPECT_NEAR(par.estimate, g.mu_q, 4.0 * par.std_error);

  // Only the best paper is reviewed: the mean of the maximum of n draws,
  // estimated here by direct order-statistics sampling.
  const auto top = avg_reviewed_quality(ThresholdPolicy::sequential(kInf, kInf), g, 20'000, 5);
  std::mt19937_64 gen(99);
  std::normal_distribution<double> prior(g.mu_q, g.sigma_q);
  RunningStats max_draw;
  for (int s = 0; s < 200'000; ++s) {
    double m = -kInf;
    for (std::size_t i = 0; i < g.n; ++i) m = std::max(m, prior(gen));
    max_draw.push(m);
  }
  EXPECT_NEAR(top.estimate, max_draw.mean, 4.0 * std::hypot(top.std_error, max_draw.std_error()));

  const GaussianSetting single{1, 0.7, 1.5, 1.0};
  const auto one = avg_reviewed_quality(ThresholdPolicy::sequential(1.0, 0.5), single, 10'000, 6);
  EXPECT_NEAR(one.estimate, 0.7, 4.0 * one.std_error);
}

TEST(Estimators, ReviewThresholdAtMinusInfinityIsParallel) {
  const GaussianSetting g;
  const auto a = evaluate_gaussian(ThresholdPolicy::parallel(0.4), g, 3000, 17);
  const auto b = evaluate_gaussian(ThresholdPolicy::sequential(0.4, -kInf), g, 3000, 17);
  EXPECT_EQ(a.utility.estimate, b.utility.estimate);
  EXPECT_EQ(a.utility.std_error, b.utility.std_error);
  EXPECT_EQ(a.burden.estimate, b.burden.estimate);
  EXPECT_EQ(a.avg_reviewed_quality.estimate, b.avg_reviewed_quality.estimate);
}

TEST(Estimators, LiteralFormulaDoublesTheNoiseVariance) {
  // Plugging r = q + eps into G integrates to Pr(q + eps + eps' >= tau), the
  // standard formula with noise sd sqrt(2) sigma_r.
  const GaussianSetting g;
  EvalOptions literal;
  literal.literal_score_formula = true;
  const auto lit = mc_conference_utility(ThresholdPolicy::parallel(0.3), g, 40'000, 7, literal);
  const GaussianSetting wide{g.n, g.mu_q, g.sigma_q, g.sigma_r * std::sqrt(2.0)};
  const auto ref = mc_conference_utility(ThresholdPolicy::parallel(0.3), wide, 40'000, 8);
  EXPECT_NEAR(lit.estimate, ref.estimate, 4.0 * combined_se(lit, ref));
  const auto plain = mc_conference_utility(ThresholdPolicy::parallel(0.3), g, 40'000, 7);
  EXPECT_NE(lit.estimate, plain.estimate);
}

TEST(Estimators, IndependentOfWorkerCount) {
  const GaussianSetting g;
  EvalOptions one;
  one.workers = 1;
  EvalOptions many;
  many.workers = 4;
  for (const auto& p : {ThresholdPolicy::sequential(0.5, -0.5), ThresholdPolicy::isotonic(0.2)}) {
    const auto a = evaluate_gaussian(p, g, 2000, 13, one);
    const auto b = evaluate_gaussian(p, g, 2000, 13, many);
    EXPECT_EQ(a.utility.estimate, b.utility.estimate);
    EXPECT_EQ(a.utility.std_error, b.utility.std_error);
    EXPECT_EQ(a.burden.estimate, b.burden.estimate);
  }
}

TEST(Estimators, RejectsInvalidInput) {
  GaussianSetting g;
  g.sigma_r = 0.0;
  EXPECT_THROW(mc_conference_utility(ThresholdPolicy::parallel(0.0), g, 10, 1), ParameterError);
  EXPECT_THROW(mc_conference_utility(ThresholdPolicy::sequential(0.0, 1.0), GaussianSetting{}, 10, 1),
               ParameterError);
  EXPECT_THROW(mc_conference_utility(ThresholdPolicy::parallel(0.0), GaussianSetting{}, 0, 1), ParameterError);
  EXPECT_THROW(threshold_triple(ThresholdPolicy::isotonic(0.0)), UnsupportedMechanism);
  EXPECT_THROW(parse_family("bogus"), ParameterError);
  EXPECT_EQ(parse_family("threshold-seq"), ThresholdFamily::kSequential);
}

TEST(Optimize, PointPriorAcceptsEverything) {
  const GaussianSetting g{3, 2.0, 1e-6, 1.0};
  SGDConfig c;
  c.iterations = 40;
  c.samples = 1000;
  c.final_samples = 1000;
  const auto r = optimize_thresholds(ThresholdFamily::kParallel, g, c);
  EXPECT_LE(r.policy.tau_acc, 2.0);
  EXPECT_GT(r.utility.estimate, 2.0 - 0.01);
}

TEST(Optimize, ParallelBeatsFixedThreshold) {
  const GaussianSetting g;
  SGDConfig c;
  c.iterations = 60;
  c.seed = 5;
  const auto r = optimize_thresholds(ThresholdFamily::kParallel, g, c);
  const auto fixed = mc_conference_utility(ThresholdPolicy::parallel(0.0), g, c.final_samples, r.utility.seed);
  EXPECT_GE(r.utility.estimate, fixed.estimate - 2.0 * r.utility.std_error);
  // The optimum solves E[q | q + eps = tau] = 0, i.e. tau = -mu sigma_r^2 / sigma_q^2.
  EXPECT_NEAR(r.policy.tau_acc, 0.25, 0.15);
}

TEST(Optimize, SequentialAtLeastParallel) {
  const GaussianSetting g;
  SGDConfig c;
  c.iterations = 60;
  c.seed = 6;
  const auto par = optimize_thresholds(ThresholdFamily::kParallel, g, c);
  const auto seq = optimize_thresholds(ThresholdFamily::kSequential, g, c);
  EXPECT_GE(seq.policy.tau_acc, seq.policy.tau_rev);
  EXPECT_GE(seq.utility.estimate, par.utility.estimate - 2.0 * par.utility.std_error);
}

TEST(Optimize, NonImprovingRunKeepsStart) {
  const GaussianSetting g;
  SGDConfig c;
  c.iterations = 5;
  c.step_size = 1e-300;
  c.samples = 2000;
  c.final_samples = 2000;
  const auto start = ThresholdPolicy::parallel(0.25);
  const auto r = optimize_thresholds(ThresholdFamily::kParallel, g, c, {}, start);
  EXPECT_EQ(r.initial.tau_acc, 0.25);
  EXPECT_FALSE(r.improved);
  EXPECT_EQ(r.chosen, "initial");
  EXPECT_EQ(r.policy.tau_acc, 0.25);
}

TEST(Optimize, Deterministic) {
  const GaussianSetting g;
  SGDConfig c;
  c.iterations = 10;
  c.samples = 1000;
  c.final_samples = 2000;
  const auto a = optimize_thresholds(ThresholdFamily::kSequential, g, c);
  const auto b = optimize_thresholds(ThresholdFamily::kSequential, g, c);
  EXPECT_EQ(a.policy.tau_acc, b.policy.tau_acc);
  EXPECT_EQ(a.policy.tau_rev, b.policy.tau_rev);
  EXPECT_EQ(a.utility.estimate, b.utility.estimate);
}

TEST(RelativeUtility, Arithmetic) {
  EXPECT_DOUBLE_EQ(relative_utility(1.0, 1.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(relative_utility(1.0, 2.0, 2.0), 1.0);
  EXPECT_NEAR(relative_utility(1.0, 1.4, 2.0), 0.4, 1e-15);
  EXPECT_NEAR(relative_utility(1.0 + 7.5, 1.4 + 7.5, 2.0 + 7.5), 0.4, 1e-14);
  EXPECT_THROW(relative_utility(1.0, 1.5, 1.0), ParameterError);
}

TEST(RelativeUtility, PairedReportMatchesSeparateEstimates) {
  const GaussianSetting g;
  const auto p = ThresholdPolicy::parallel(0.25);
  const auto s = ThresholdPolicy::sequential(0.1, 0.1);
  const auto i = ThresholdPolicy::isotonic(0.15);
  const auto rel = relative_utility_report(p, s, i, g, 2000, 31);
  const double expected = relative_utility(mc_conference_utility(p, g, 2000, 31).estimate,
                                           mc_conference_utility(s, g, 2000, 31).estimate,
                                           mc_conference_utility(i, g, 2000, 31).estimate);
  EXPECT_NEAR(rel.estimate, expected, 1e-12);
  EXPECT_GT(rel.std_error, 0.0);
}

TEST(MatchedBurden, SinglePaperSavesNothing) {
  const auto r = matched_burden({1, -1.0, 2.0, 1.0}, 3);
  EXPECT_EQ(r.relative_burden, 1.0);
}

TEST(MatchedBurden, NoiselessLowQualityReviewsOnlyFirst) {
  const auto r = matched_burden({4, -5.0, 0.5, 1e-3}, 3);
  EXPECT_NEAR(r.relative_burden, 0.25, 1e-3);
}

TEST(MatchedBurden, TwoPapersSaveAtLeastTenPercent) {
  MatchedBurdenConfig c;
  c.samples = 5000;
  const auto r = matched_burden({2, -1.0, 2.0, 1.0}, 9, c);
  EXPECT_LE(r.relative_burden, 0.9);
  EXPECT_GE(r.sequential_utility, r.parallel_utility - c.z * r.gap_std_error - 1e-12);
  EXPECT_GE(r.sequential.tau_acc, r.sequential.tau_rev);
}

TEST(Posterior, UninformativeLikelihoodReturnsPriorMean) {
  const auto model = SoftmaxScoreModel::integer_range(0.0, 1, 10);
  const std::vector<int> scores{2, 9, 9};
  EXPECT_NEAR(posterior_expected_quality(scores, 5.3, 1.2, model), 5.3, 1e-9);
}

TEST(Posterior, SymmetricScoresReturnPriorMean) {
  const auto model = SoftmaxScoreModel::integer_range(0.4, 1, 10);
  const std::vector<int> scores{4, 7};
  EXPECT_NEAR(posterior_expected_quality(scores, 5.5, 1.3, model), 5.5, 1e-9);
}

TEST(Posterior, MatchesImportanceSampling) {
  const auto model = SoftmaxScoreModel::integer_range(0.35, 1, 10);
  const std::vector<int> scores{6, 6, 6};
  const double grid = posterior_expected_quality(scores, 5.5, 1.3, model);
  // Self-normalized importance sampling with the prior as proposal.
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> prior(5.5, 1.3);
  const std::size_t draws = 1'000'000;
  std::vector<double> q(draws);
  std::vector<double> w(draws);
  double sw = 0.0;
  double swq = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    q[i] = prior(gen);
    const double p6 = softmax_pmf(q[i], model)[5];
    w[i] = p6 * p6 * p6;
    sw += w[i];
    swq += w[i] * q[i];
  }
  const double est = swq / sw;
  double var = 0.0;
  for (std::size_t i = 0; i < draws; ++i) var += w[i] * w[i] * (q[i] - est) * (q[i] - est);
  const double se = std::sqrt(var) / sw;
  EXPECT_NEAR(grid, est, 3.0 * se);
}

TEST(Posterior, RejectsScoresOutsideTheSet) {
  const PosteriorGrid grid(5.0, 1.0, SoftmaxScoreModel::integer_range(0.3, 1, 10));
  const std::vector<int> bad{11};
  EXPECT_THROW(grid.expected_quality(bad), ParameterError);
}

TEST(Multisets, EnumerationAndProbabilities) {
  SoftmaxSetting s;
  const ScoreMultisets m(s);
  EXPECT_EQ(m.size(), 220u);
  EXPECT_TRUE(std::is_sorted(m.posteriors().rbegin(), m.posteriors().rend()));
  std::vector<double> probs;
  const auto pmf = softmax_pmf(6.2, s.score_model());
  m.multiset_probs(pmf, probs);
  double total = 0.0;
  for (double p : probs) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_EQ(m.count_at_least(kInf), 0u);
  EXPECT_EQ(m.count_at_least(-kInf), 220u);
}

TEST(SoftmaxEval, SinglePaperAuthorsMakeSequentialParallel) {
  SoftmaxSetting s;
  const auto par = softmax_population_eval(ThresholdPolicy::parallel(5.8), s, 3000, 4);
  const auto seq = softmax_population_eval(ThresholdPolicy::sequential(5.8, 5.6), s, 3000, 4);
  EXPECT_EQ(par.utility.estimate, seq.utility.estimate);
  EXPECT_EQ(par.burden.estimate, 1.0);
  EXPECT_EQ(seq.burden.estimate, 1.0);
}

TEST(SoftmaxEval, MatchesScoreSimulation) {
  SoftmaxSetting s;
  s.paper_count_pmf = truncated_geometric_pmf(1.93, 8);
  const auto policy = ThresholdPolicy::sequential(5.7, 5.3);
  const auto exact = softmax_population_eval(policy, s, 20'000, 10);
  const auto sim = simulate_softmax(policy, s, 100'000, 11);
  EXPECT_NEAR(exact.utility.estimate, sim.utility.estimate, 4.0 * combined_se(exact.utility, sim.utility));
  EXPECT_NEAR(exact.burden.estimate, sim.burden.estimate, 4.0 * combined_se(exact.burden, sim.burden));
  EXPECT_GT(exact.burden.estimate, 0.0);
  EXPECT_LE(exact.burden.estimate, 1.0);
  EXPECT_TRUE(std::isfinite(exact.utility.estimate));
}

TEST(SoftmaxEval, SharpReviewsApproachNoiselessGating) {
  // At a huge temperature every score equals the nearest integer to q, so
  // the posterior is a deterministic function of round(q).
  SoftmaxSetting s;
  s.temperature = 200.0;
  s.mu_q = 5.5;
  s.sigma_q = 1.5;
  const auto r = softmax_population_eval(ThresholdPolicy::parallel(6.0), s, 20'000, 3);
  const PosteriorGrid grid(s.mu_q, s.sigma_q, s.score_model());
  RunningStats oracle;
  for (std::size_t a = 0; a < 20'000; ++a) {
    const double q = draw_qualities(s.mu_q, s.sigma_q, 1, 3, a)[0];
    const int nearest = static_cast<int>(std::clamp(std::round(q), 1.0, 10.0));
    const std::vector<int> scores(3, nearest);
    oracle.push(grid.expected_quality(scores) >= 6.0 ? q - s.desirability_offset : 0.0);
  }
  EXPECT_NEAR(r.utility.estimate, oracle.mean, 2e-3);
}

TEST(SoftmaxEval, RejectsInvalidSettings) {
  SoftmaxSetting s;
  s.paper_count_pmf = {{1, 0.5}, {2, 0.4}};
  EXPECT_THROW(s.validate(), ParameterError);
  s.paper_count_pmf = {{0, 1.0}};
  EXPECT_THROW(s.validate(), ParameterError);
  s = SoftmaxSetting{};
  s.reviews_per_paper = 0;
  EXPECT_THROW(s.validate(), ParameterError);
  EXPECT_THROW(softmax_population_eval(ThresholdPolicy::isotonic(5.0), SoftmaxSetting{}, 10, 1),
               UnsupportedMechanism);
}

TEST(SoftmaxBurden, SavesReviewsWithMultiPaperAuthors) {
  SoftmaxSetting s;
  s.paper_count_pmf = truncated_geometric_pmf(1.93, 8);
  MatchedBurdenConfig c;
  c.samples = 5000;
  const auto r = matched_burden_softmax(s, 5, c);
  EXPECT_LT(r.relative_burden, 1.0);
  EXPECT_GE(r.sequential_utility, r.parallel_utility - c.z * r.gap_std_error - 1e-12);
}

TEST(PaperCounts, TruncatedGeometric) {
  for (double mean : {1.0, 1.3, 1.93, 4.5, 8.0}) {
    const auto pmf = truncated_geometric_pmf(mean, 8);
    double total = 0.0;
    double m = 0.0;
    for (const auto& [n, p] : pmf) {
      EXPECT_GE(n, 1);
      EXPECT_LE(n, 8);
      total += p;
      m += n * p;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_NEAR(m, mean, 1e-9);
  }
  EXPECT_THROW(truncated_geometric_pmf(0.5, 8), ParameterError);
  EXPECT_THROW(truncated_geometric_pmf(9.0, 8), ParameterError);
}
