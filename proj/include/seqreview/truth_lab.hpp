#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "seqreview/framework.hpp"
#include "seqreview/model.hpp"

namespace seqreview {

/// The isotonic mechanism is not a sequential triple (it looks at every
/// score jointly), so the lab carries it as a separate alternative.
struct IsotonicLabMechanism {
  double tau = 0.0;
};

using LabMechanism = std::variant<MechanismTriple, IsotonicLabMechanism>;

std::string lab_mechanism_name(const LabMechanism& m);

inline constexpr std::size_t kLabMaxPapers = 8;
inline constexpr std::size_t kLabMaxSupport = 6;

/// One author's papers under finite review noise. `qualities` are the true
/// qualities when `author_noise` is empty; with author noise they seed the
/// signals drawn by signal_noise_robustness_check.
struct TruthInstance {
  std::vector<double> qualities;
  NoiseModel noise = NoiseModel::zero();
  RewardFunction reward = RewardFunction::constant_one();
  LabMechanism mechanism;
  std::optional<NoiseModel> author_noise;

  /// Throws ParameterError outside the enumeration bounds.
  void validate() const;
};

/// The joint outcomes (quality, score) of one paper with their probabilities.
struct PaperLottery {
  std::vector<double> quality;
  std::vector<double> score;
  std::vector<double> prob;
};

/// Lotteries with known qualities: score = quality + eps.
std::vector<PaperLottery> known_quality_lotteries(const TruthInstance& instance);
/// Lotteries seen by an author holding signals s: quality = s - xi and
/// score = s - xi + eps, with xi and eps independent.
std::vector<PaperLottery> signal_lotteries(std::span<const double> signals, const NoiseModel& author_noise,
                                           const NoiseModel& review_noise);

/// Ranking by decreasing value (ties keep index order).
Permutation ranking_by(std::span<const double> values);

/// Exact expected author utility of reporting `permutation`, by exhaustive
/// enumeration of the noise realizations. Sequential triples share the
/// state distribution over common realization prefixes.
double exact_expected_utility(const TruthInstance& instance, const Permutation& permutation);
double exact_expected_utility(const LabMechanism& mechanism, const std::vector<PaperLottery>& papers,
                              const RewardFunction& reward, const Permutation& permutation);

struct PermutationUtility {
  Permutation permutation;
  double utility = 0.0;
};

struct TruthWitness {
  Permutation permutation;
  double gap = 0.0;
};

struct TruthVerdict {
  bool truthful_at_instance = true;
  Permutation truthful;
  double truthful_utility = 0.0;
  double best_utility = 0.0;
  std::vector<Permutation> best_permutations;
  std::vector<PermutationUtility> utilities;  // all n! permutations, lexicographic
  std::optional<TruthWitness> witness;
};

inline constexpr double kTruthTolerance = 1e-9;

/// Enumerates every permutation; truthful iff U(truthful) >= max - 1e-9.
TruthVerdict best_response(const TruthInstance& instance);
TruthVerdict best_response(const LabMechanism& mechanism, const std::vector<PaperLottery>& papers,
                           const RewardFunction& reward, const Permutation& truthful);

/// Draws signals s = q + xi (stream "author-signal", index `draw`), then
/// checks that ranking by s is a best response given the author's view of
/// the induced quality and score noise. Zero author noise reduces to
/// best_response.
TruthVerdict signal_noise_robustness_check(const TruthInstance& instance, std::uint64_t seed,
                                           std::uint64_t draw = 0);

using MechanismGenerator = std::function<LabMechanism(CounterRng&, std::size_t index)>;
using InstanceGenerator = std::function<TruthInstance(CounterRng&, std::size_t index)>;

struct ViolationWitness {
  std::size_t instance_index = 0;
  TruthInstance instance;
  Permutation permutation;
  double truthful_utility = 0.0;
  double manipulated_utility = 0.0;
  double gap = 0.0;

  /// One-line human-readable record.
  std::string to_string() const;
};

inline constexpr double kViolationGap = 1e-6;

/// Randomized search: instance i uses streams ("lab-mechanism", i) and
/// ("lab-instance", i) under `seed`. Returns the first strict witness.
std::optional<ViolationWitness> find_violation(const MechanismGenerator& mechanisms,
                                               const InstanceGenerator& instances, std::size_t budget,
                                               std::uint64_t seed);

// Random generators. Their distributions are fixed so that a failing
// instance can be rebuilt from its seed and index.
//
//  * qualities: n uniform in [min_n, max_n], each quality U[-2, 2], sorted
//    descending;
//  * review noise: support size uniform in [1, max_support], points U[-1, 1],
//    weights proportional to U(0.05, 1);
//  * step policies: one or two breakpoints U[-1, 1], values sorted U[0, 1];
//  * credit functions: beta(r) = c + s0 r + sum_k (s_k - s_{k-1}) max(r - b_k, 0)
//    with knots b_k U[-1, 1], slopes s_k increasing in (0.1, 2.1), and
//    c U[-1, 0.5]; initial credit U[0, 1].

ScorePolicy random_monotone_step(CounterRng& rng);
std::function<double(double)> random_convex_credit(CounterRng& rng);

TruthInstance random_instance(CounterRng& rng, std::size_t min_n, std::size_t max_n, std::size_t max_support);
LabMechanism random_coin_flip(CounterRng& rng);
LabMechanism random_credit_pool(CounterRng& rng);
LabMechanism random_naive(CounterRng& rng);

/// Two near-certain papers and four borderline ones (quality 3, 3 and
/// -0.5 x 4; noise +/-1; count-accepted reward). Index 0 is exactly this;
/// later indices jitter the qualities.
TruthInstance foil_archetype_instance(CounterRng& rng, std::size_t index);
/// Bundles of two, next bundle iff at least one acceptance, threshold 0.
LabMechanism bundle_foil();
/// Credit pool capped at 2 with beta(r) = r, B1 = 0, threshold 0.
LabMechanism limited_pool_foil();

}  // namespace seqreview
