#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "seqreview/rng.hpp"

namespace seqreview {

inline constexpr std::uint64_t kQualityStream = stream_id("quality");
inline constexpr std::uint64_t kScoreStream = stream_id("score");

struct PaperInstance {
  double quality = 0.0;        // the conference's desirability scale
  double author_signal = 0.0;  // quality + author noise
};

/// A reported ranking. Internally 0-based: rank_of(i) is the round in which
/// paper i is reviewed, paper_at(t) the paper reviewed in round t.
class Permutation {
 public:
  Permutation() = default;

  static Permutation identity(std::size_t n);
  /// Throws ParameterError unless `ranks` is a bijection on {0..n-1}.
  static Permutation from_ranks(std::vector<std::size_t> ranks);
  static Permutation from_order(std::vector<std::size_t> order);

  std::size_t size() const { return ranks_.size(); }
  std::size_t rank_of(std::size_t paper) const { return ranks_.at(paper); }
  std::size_t paper_at(std::size_t round) const { return order_.at(round); }
  const std::vector<std::size_t>& ranks() const { return ranks_; }
  const std::vector<std::size_t>& order() const { return order_; }
  bool is_identity() const;

  Permutation inverse() const;
  /// (a.then(b)).rank_of(i) == b.rank_of(a.rank_of(i)).
  Permutation then(const Permutation& b) const;

  /// 1-based ranks, e.g. "(2 1 3)".
  std::string to_string() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;
  friend auto operator<=>(const Permutation& a, const Permutation& b) { return a.ranks_ <=> b.ranks_; }

 private:
  std::vector<std::size_t> ranks_;
  std::vector<std::size_t> order_;
};

/// All n! permutations in lexicographic order of their rank vectors.
std::vector<Permutation> all_permutations(std::size_t n);

struct GaussianNoise {
  double sigma = 1.0;
};

struct DiscreteNoise {
  std::vector<double> support;
  std::vector<double> probs;
};

/// Additive noise on a quality: either Gaussian or a finite lottery.
class NoiseModel {
 public:
  static NoiseModel gaussian(double sigma);
  static NoiseModel discrete(std::vector<double> support, std::vector<double> probs);
  /// Degenerate noise at zero.
  static NoiseModel zero() { return discrete({0.0}, {1.0}); }

  bool is_discrete() const { return std::holds_alternative<DiscreteNoise>(model_); }
  const DiscreteNoise& as_discrete() const;
  const GaussianNoise& as_gaussian() const;

  double sample(CounterRng& rng) const;
  double mean() const;
  std::string to_string() const;

 private:
  explicit NoiseModel(std::variant<GaussianNoise, DiscreteNoise> m) : model_(std::move(m)) {}
  std::variant<GaussianNoise, DiscreteNoise> model_;
};

/// Integer review scores drawn with Pr(s | q) proportional to exp(-t (s - q)^2).
struct SoftmaxScoreModel {
  double temperature = 0.0;
  std::vector<int> score_set;

  /// Throws ParameterError on an empty or non-ascending score set or t < 0.
  void validate() const;
  static SoftmaxScoreModel integer_range(double temperature, int lo, int hi);
};

std::vector<double> softmax_pmf(double quality, const SoftmaxScoreModel& model);
/// Log-probabilities, stable for large temperatures.
std::vector<double> softmax_log_pmf(double quality, const SoftmaxScoreModel& model);

/// Nonnegative, nondecreasing reward on the true quality of an accepted paper.
struct RewardFunction {
  std::string name;
  std::function<double(double)> fn;

  double operator()(double quality) const { return fn(quality); }

  static RewardFunction constant_one();
  static RewardFunction identity_clamped();
  /// Step reward: values[k] on [breaks[k-1], breaks[k]); values nondecreasing.
  static RewardFunction step(std::vector<double> breaks, std::vector<double> values);

  /// Checks nonnegativity and monotonicity on a grid.
  bool valid_on(std::span<const double> grid) const;
};

/// What happened to one author's submissions. Indexed by round; `paper_order`
/// maps rounds to paper indices (empty means identity).
struct ReviewOutcome {
  std::vector<bool> reviewed;
  std::vector<bool> accepted;
  std::vector<double> scores;  // one entry per reviewed round, in round order
  std::optional<std::size_t> terminal_round;  // first unreviewed round
  std::vector<std::size_t> paper_order;

  std::size_t rounds() const { return reviewed.size(); }
  std::size_t paper_at(std::size_t round) const { return paper_order.empty() ? round : paper_order[round]; }
  std::size_t reviewed_count() const;
  std::size_t accepted_count() const;
  /// Per-paper acceptance flags.
  std::vector<bool> accepted_papers() const;

  /// Outcome built from per-paper acceptance flags (everything reviewed).
  static ReviewOutcome from_accepted_papers(const std::vector<bool>& accepted);
};

/// n i.i.d. N(mu, sigma) draws from stream (seed, "quality", index),
/// sorted descending.
std::vector<double> draw_qualities(double mu, double sigma, std::size_t n, std::uint64_t seed,
                                   std::uint64_t index = 0);

double review_score(double quality, const NoiseModel& noise, std::uint64_t seed, std::uint64_t index = 0);

double author_utility(const ReviewOutcome& outcome, std::span<const double> qualities,
                      const RewardFunction& reward);
double conference_utility(const ReviewOutcome& outcome, std::span<const double> qualities);

}  // namespace seqreview
