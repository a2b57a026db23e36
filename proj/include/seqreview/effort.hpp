#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "seqreview/rng.hpp"

namespace seqreview {

/// An author's portfolio: counts[i] papers written at effort level i, each
/// accepted independently with accept_probs[i] and worth rewards[i] when
/// accepted. Levels are ordered from most to least likely to be accepted.
struct EffortProfile {
  std::vector<std::size_t> counts;
  std::vector<double> accept_probs;
  std::vector<double> rewards;

  /// Binary high/low effort profile.
  static EffortProfile binary(std::size_t n_h, std::size_t n_l, double p_h, double p_l, double u_h, double u_l);

  /// Throws ParameterError unless the lengths agree, probabilities lie in
  /// (0, 1] and strictly decrease, and rewards are positive and nonincreasing.
  void validate() const;
  std::size_t levels() const { return counts.size(); }
  /// Copy with counts[level] replaced.
  EffortProfile with_count(std::size_t level, std::size_t count) const;
  /// Copy with counts[level] increased by `extra`.
  EffortProfile with_extra(std::size_t level, std::size_t extra) const;
};

/// Expected reward when every paper is reviewed: sum of n_i p_i u_i.
double parallel_utility(const EffortProfile& profile);

/// Building blocks of the naive sequential utility, with 0-based levels.
/// Papers are reviewed best level first and reviewing stops at the first
/// rejection.
struct SequentialTerms {
  /// gamma[l] = product over k < l of p_k^{n_k}; size levels + 1, gamma[0] = 1.
  std::vector<double> gamma;
  /// s[l] = p_l + p_l^2 + ... + p_l^{n_l} (equal to n_l when p_l = 1).
  std::vector<double> s;
  /// z[l] = sum over k >= l of gamma[k] s[k] u_k; size levels + 1, z[levels] = 0.
  std::vector<double> z;
  double utility = 0.0;
};

SequentialTerms sequential_terms(const EffortProfile& profile);

/// Expected reward under naive sequential review of the truthful ranking.
double sequential_utility(const EffortProfile& profile);

/// Closed-form gain from one extra paper at `level` under sequential review:
/// gamma[level + 1] p u - (1 - p) z[level + 1].
double sequential_marginal_gain(const EffortProfile& profile, std::size_t level);

enum class EffortMechanism { kParallel, kSequential };

std::string effort_mechanism_name(EffortMechanism mechanism);

/// U(profile with one extra paper at `level`) - U(profile), computed in
/// extended precision so that tiny gains deep in the ranking keep their
/// relative accuracy.
double utility_gain(EffortMechanism mechanism, const EffortProfile& profile, std::size_t level, std::size_t extra = 1);

/// Marginal rate of substitution between levels i and j:
/// gain(i) / gain(j). Throws ParameterError if gain(j) is zero.
double mrs(EffortMechanism mechanism, const EffortProfile& profile, std::size_t i, std::size_t j);

struct LambdaCheck {
  double measured = 0.0;
  double predicted = 0.0;
};

/// Ratio of the k-th to the first marginal gain at `level` under sequential
/// review, against the prediction p^{k-1}. Requires k >= 1.
LambdaCheck lambda_check(const EffortProfile& profile, std::size_t level, std::size_t k);

inline constexpr double kEffortTolerance = 1e-12;

struct DominanceVerdict {
  double mrs_parallel = 0.0;
  double mrs_sequential = 0.0;
  /// mrs_sequential - mrs_parallel.
  double gap = 0.0;
  /// gap >= -1e-12.
  bool holds = false;
  /// gap > 1e-12.
  bool strict = false;
  /// Whether some level after i has papers, the condition for strictness.
  bool tail_nonempty = false;
};

/// Compares the sequential and parallel MRS between levels i < j.
DominanceVerdict verify_mrs_dominance(const EffortProfile& profile, std::size_t i, std::size_t j);

struct SubstitutionVerdict {
  /// Utilities of (n'_i, n_j) ("more at i") and (n_i, n'_j) ("more at j").
  double parallel_more_i = 0.0;
  double parallel_more_j = 0.0;
  double sequential_more_i = 0.0;
  double sequential_more_j = 0.0;
  /// Parallel review weakly prefers the extra papers at level i.
  bool parallel_prefers_i = false;
  /// Sequential review weakly prefers them (within 1e-12).
  bool sequential_prefers_i = false;
  /// The premise holds and the conclusion fails.
  bool violated = false;
};

/// Checks that a parallel preference for adding papers at the better level i
/// carries over to sequential review. Requires i < j, new_i > counts[i] and
/// new_j > counts[j].
SubstitutionVerdict verify_substitution(const EffortProfile& base, std::size_t i, std::size_t j, std::size_t new_i,
                                        std::size_t new_j);

/// The binary quality-versus-quantity counterexample: p_h = 1, p_l = 0.5,
/// unit rewards, one high paper versus three low papers. Sequential review
/// prefers the high paper while parallel review prefers the three low ones.
SubstitutionVerdict quality_quantity_counterexample();

/// Random profile for property checks: levels drawn uniformly from
/// [min_levels, max_levels] (at most 5), counts from {0..6}, probabilities
/// from (0.05, 0.99) sorted decreasing, rewards from (0.1, 2) sorted
/// nonincreasing.
EffortProfile random_effort_profile(CounterRng& rng, std::size_t min_levels = 2, std::size_t max_levels = 5);

}  // namespace seqreview
