#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "seqreview/framework.hpp"

namespace seqreview {

/// Coin-flip mechanism: a rejected paper still grants the next review with
/// probability rho(score); an accepted one always does.
struct CoinFlipSpec {
  ScorePolicy acceptance;
  ScorePolicy rho;
};

/// Credit pool: review while the credit B is nonnegative; each reviewed
/// paper adds beta(score). With `credit_cap` set the pool is clamped at the
/// cap after every addition (the non-truthful limited variant).
struct CreditPoolSpec {
  double initial_credit = 0.0;
  std::function<double(double)> beta;
  ScorePolicy acceptance;
  std::optional<double> credit_cap;
};

/// Threshold sequential review. tau_rev = -inf gives parallel review.
struct ThresholdSeqSpec {
  double tau_acc = 0.0;
  double tau_rev = -std::numeric_limits<double>::infinity();

  void validate() const;
};

/// Papers reviewed in bundles; the next bundle is reviewed iff the current
/// one collected at least `continuation_rule` acceptances.
struct BundleSpec {
  std::size_t bundle_size = 2;
  std::size_t continuation_rule = 1;
};

MechanismTriple make_naive_sequential(ScorePolicy acceptance);
MechanismTriple make_coin_flip(CoinFlipSpec spec);
/// Coin-flip with rho = 1: every paper is reviewed.
MechanismTriple make_parallel(ScorePolicy acceptance);
MechanismTriple make_credit_pool(CreditPoolSpec spec);
MechanismTriple make_threshold_sequential(const ThresholdSeqSpec& spec);
MechanismTriple make_bundle_mechanism(const BundleSpec& spec, ScorePolicy acceptance);

/// Coin-flip states: code = 2 * alpha + gamma, so code 0 is the
/// termination state and codes 1..3 are the equivalent live states.
std::vector<ReviewState> coin_flip_states();
std::vector<ReviewState> naive_states();
std::vector<ReviewState> bundle_states(const BundleSpec& spec);

/// Every credit reachable from B1 within `rounds` transitions over the
/// score grid (clamped at the cap if any), plus the termination state.
/// Credits closer than 1e-12 are merged.
std::vector<ReviewState> credit_lattice(const CreditPoolSpec& spec, std::span<const double> score_grid,
                                        std::size_t rounds);

/// Euclidean projection of `scores` (indexed by paper) onto
/// adjusted[paper_at(0)] >= adjusted[paper_at(1)] >= ..., via
/// pool-adjacent-violators.
std::vector<double> isotonic_adjust(std::span<const double> scores, const Permutation& permutation);

/// Accept paper i iff its adjusted score is >= tau.
std::vector<bool> isotonic_mechanism_accept(std::span<const double> scores, const Permutation& permutation,
                                            double tau);

}  // namespace seqreview
