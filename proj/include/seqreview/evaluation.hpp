#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqreview/framework.hpp"
#include "seqreview/model.hpp"

namespace seqreview {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// One author with n papers of quality N(mu_q, sigma_q^2) and a single review
/// score per paper, q + N(0, sigma_r^2).
struct GaussianSetting {
  std::size_t n = 5;
  double mu_q = -1.0;
  double sigma_q = 2.0;
  double sigma_r = 1.0;

  void validate() const;
};

/// Threshold mechanisms compared by the evaluation.
enum class ThresholdFamily { kParallel, kSequential, kIsotonic };

std::string family_name(ThresholdFamily family);
/// Accepts "parallel", "sequential" (or "threshold-seq") and "isotonic".
ThresholdFamily parse_family(const std::string& name);

/// A threshold mechanism: accept iff the (adjusted or posterior) score is at
/// least tau_acc; the sequential family continues iff it is at least tau_rev.
struct ThresholdPolicy {
  ThresholdFamily family = ThresholdFamily::kParallel;
  double tau_acc = 0.0;
  double tau_rev = -kInf;

  static ThresholdPolicy parallel(double tau) { return {ThresholdFamily::kParallel, tau, -kInf}; }
  static ThresholdPolicy sequential(double tau_acc, double tau_rev) {
    return {ThresholdFamily::kSequential, tau_acc, tau_rev};
  }
  static ThresholdPolicy isotonic(double tau) { return {ThresholdFamily::kIsotonic, tau, -kInf}; }

  /// Throws ParameterError on NaN thresholds or tau_acc < tau_rev.
  void validate() const;
  std::string to_string() const;
};

/// A Monte-Carlo estimate with its standard error, reproducible from the
/// inputs that produced it and `seed`.
struct EvalReport {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

struct EvalOptions {
  /// Evaluate G at the realized score r_i = q_i + eps_i instead of at q_i
  /// (the displayed formula taken literally). Threshold families only.
  bool literal_score_formula = false;
  /// Noise draws per quality sample for the isotonic family.
  std::size_t isotonic_noise_draws = 100;
  /// 0 means worker_count().
  unsigned workers = 0;
};

/// Pr(q + eps >= tau), eps ~ N(0, sigma_r^2).
double parallel_accept_prob(double quality, double tau, double sigma_r);

struct SequentialProbs {
  std::vector<double> accept;  // Pr(paper i accepted)
  std::vector<double> review;  // Pr(paper i reviewed)
};

/// Closed-form acceptance and review probabilities of the threshold
/// sequential mechanism for qualities in review order. Requires
/// tau_acc >= tau_rev.
SequentialProbs sequential_accept_probs(std::span<const double> qualities, double tau_acc, double tau_rev,
                                        double sigma_r);

/// Conference utility, review burden (both per submitted paper) and the
/// average quality of a reviewed paper.
struct GaussianMetrics {
  EvalReport utility;
  EvalReport burden;
  EvalReport avg_reviewed_quality;
};

/// Averages the analytic per-sample metrics over `samples` quality draws.
/// Sample s uses qualities from stream ("quality", s); the isotonic family
/// draws its score noise from ("isotonic-noise", s).
GaussianMetrics evaluate_gaussian(const ThresholdPolicy& policy, const GaussianSetting& setting,
                                  std::size_t samples, std::uint64_t seed, const EvalOptions& options = {});

EvalReport mc_conference_utility(const ThresholdPolicy& policy, const GaussianSetting& setting,
                                 std::size_t samples, std::uint64_t seed, const EvalOptions& options = {});
EvalReport mc_review_burden(const ThresholdPolicy& policy, const GaussianSetting& setting, std::size_t samples,
                            std::uint64_t seed, const EvalOptions& options = {});
EvalReport avg_reviewed_quality(const ThresholdPolicy& policy, const GaussianSetting& setting,
                                std::size_t samples, std::uint64_t seed, const EvalOptions& options = {});

/// Full simulation of any sequential triple in the Gaussian setting: each
/// sample draws qualities, reviews them in truthful order through
/// run_mechanism and records realized metrics. No analytic shortcut.
GaussianMetrics simulate_gaussian(const MechanismTriple& triple, const GaussianSetting& setting,
                                  std::size_t samples, std::uint64_t seed);
/// As above for a threshold policy (the isotonic family draws one noise
/// vector per sample).
GaussianMetrics simulate_gaussian(const ThresholdPolicy& policy, const GaussianSetting& setting,
                                  std::size_t samples, std::uint64_t seed);

/// The triple implementing a parallel or sequential threshold policy.
MechanismTriple threshold_triple(const ThresholdPolicy& policy);

struct SGDConfig {
  double step_size = 0.2;  // learning rate at iteration t is step_size / sqrt(t)
  double fd_step = 0.05;   // central finite-difference half width
  std::size_t iterations = 200;
  std::size_t samples = 10'000;  // quality samples per gradient estimate
  std::size_t final_samples = 100'000;
  std::uint64_t seed = 0;
  /// Start from the best point of a coarse threshold grid.
  bool warm_start = true;

  void validate() const;
};

struct OptimizeResult {
  ThresholdPolicy policy;
  EvalReport utility;  // final high-sample evaluation of `policy`
  ThresholdPolicy initial;
  EvalReport initial_utility;
  /// False when neither the last nor the averaged iterate beat the start.
  bool improved = false;
  std::string chosen;  // "initial", "last" or "average"
};

/// Stochastic gradient ascent on the Monte-Carlo utility with central
/// differences and common random numbers across the +/- evaluations.
/// Sequential iterates are projected onto tau_acc >= tau_rev.
OptimizeResult optimize_thresholds(ThresholdFamily family, const GaussianSetting& setting,
                                   const SGDConfig& config, const EvalOptions& options = {},
                                   std::optional<ThresholdPolicy> start = std::nullopt);

/// (U_s - U_p) / (U_i - U_p); throws ParameterError when U_i == U_p.
double relative_utility(double u_parallel, double u_sequential, double u_isotonic);

/// Relative utility of three policies evaluated on shared quality samples,
/// with a delta-method standard error from the paired per-sample values.
EvalReport relative_utility_report(const ThresholdPolicy& parallel, const ThresholdPolicy& sequential,
                                   const ThresholdPolicy& isotonic, const GaussianSetting& setting,
                                   std::size_t samples, std::uint64_t seed, const EvalOptions& options = {});

struct MatchedBurdenConfig {
  std::size_t samples = 10'000;
  std::size_t grid_points = 41;
  /// Sequential utility must be at least U* - z * stderr of the paired gap.
  double z = 2.0;

  void validate() const;
};

struct MatchedBurdenResult {
  double relative_burden = 1.0;
  double std_error = 0.0;
  ThresholdPolicy parallel;
  ThresholdPolicy sequential;
  double parallel_utility = 0.0;
  double sequential_utility = 0.0;
  double gap_std_error = 0.0;  // of the paired utility difference
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Optimizes the parallel threshold, then finds the sequential thresholds of
/// least review burden whose utility is within z standard errors of the
/// parallel optimum (a grid over threshold pairs with tau_acc >= tau_rev,
/// then two rounds of local grid refinement). Returns B^s / B^p.
MatchedBurdenResult matched_burden(const GaussianSetting& setting, std::uint64_t seed,
                                   const MatchedBurdenConfig& config = {});

// ---------------------------------------------------------------------------
// Softmax review model.

/// A population of authors; each paper receives k integer scores.
struct SoftmaxSetting {
  std::map<int, double> paper_count_pmf{{1, 1.0}};
  std::size_t reviews_per_paper = 3;
  double mu_q = 5.468;
  double sigma_q = 1.295;
  double temperature = 0.342;
  std::vector<int> score_set{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  /// Accepting a paper of quality q is worth q - desirability_offset to the
  /// conference, so that accepting everything is not trivially optimal.
  double desirability_offset = 5.5;

  void validate() const;
  SoftmaxScoreModel score_model() const { return {temperature, score_set}; }
  double mean_paper_count() const;
};

inline constexpr std::size_t kPosteriorGridPoints = 2001;
inline constexpr double kPosteriorGridWidth = 6.0;  // in prior standard deviations

/// Precomputed quadrature for E[q | scores] under a Gaussian prior and the
/// softmax likelihood: 2001 equally spaced nodes over mu_q +/- 6 sigma_q.
class PosteriorGrid {
 public:
  PosteriorGrid(double mu_q, double sigma_q, const SoftmaxScoreModel& model);

  /// Scores must belong to the score set.
  double expected_quality(std::span<const int> scores) const;
  /// Log of the marginal likelihood of the scores, up to a constant shared by
  /// all score vectors (the prior normalization).
  double log_marginal(std::span<const int> scores) const;

 private:
  std::size_t index_of(int score) const;
  double mu_;
  double sigma_;
  SoftmaxScoreModel model_;
  std::vector<double> nodes_;
  std::vector<double> log_prior_;
  std::vector<std::vector<double>> log_lik_;  // [score index][node]
};

double posterior_expected_quality(std::span<const int> scores, double mu_q, double sigma_q,
                                  const SoftmaxScoreModel& model);

/// Every multiset of k scores with its posterior mean, sorted by decreasing
/// posterior mean. Gate probabilities for a paper are tail sums in this order.
class ScoreMultisets {
 public:
  ScoreMultisets(const SoftmaxSetting& setting);

  std::size_t size() const { return posterior_.size(); }
  const std::vector<double>& posteriors() const { return posterior_; }
  /// Number of multisets whose posterior mean is >= tau.
  std::size_t count_at_least(double tau) const;
  /// Pr(multiset m | q) for every m in sorted order, from the score pmf.
  void multiset_probs(std::span<const double> score_pmf, std::vector<double>& out) const;

 private:
  std::vector<double> posterior_;
  std::vector<std::vector<std::pair<std::size_t, int>>> counts_;  // (score index, count)
  std::vector<double> coef_;  // multinomial coefficients
};

struct SoftmaxMetrics {
  EvalReport utility;
  EvalReport burden;
};

/// Population-normalized utility and burden of a parallel or sequential
/// policy with thresholds on the posterior mean. Author s draws its paper
/// count from stream ("paper-count", s) and qualities from ("quality", s);
/// score noise is integrated exactly over all score multisets.
SoftmaxMetrics softmax_population_eval(const ThresholdPolicy& policy, const SoftmaxSetting& setting,
                                       std::size_t authors, std::uint64_t seed, unsigned workers = 0);

/// Matched burden in the softmax model: thresholds on the posterior mean.
MatchedBurdenResult matched_burden_softmax(const SoftmaxSetting& setting, std::uint64_t seed,
                                           const MatchedBurdenConfig& config = {});

/// pmf proportional to r^(n-1) on {1..max_count} with the given mean.
std::map<int, double> truncated_geometric_pmf(double mean, int max_count);

}  // namespace seqreview
