#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seqreview/model.hpp"

namespace seqreview {

/// Maps a review score to a probability (acceptance policy, continuation
/// coin, ...).
using ScorePolicy = std::function<double(double)>;

/// 1 if score >= tau, else 0. tau may be +/- infinity.
ScorePolicy threshold_policy(double tau);
ScorePolicy constant_policy(double p);
/// values[k] on [breaks[k-1], breaks[k]), like RewardFunction::step.
ScorePolicy step_policy(std::vector<double> breaks, std::vector<double> values);

/// A review state. Finite mechanisms encode their state in `code`; the
/// credit pool keeps its credit in `credit`. The termination state has
/// `terminal` set and nothing else.
struct ReviewState {
  bool terminal = false;
  std::int64_t code = 0;
  double credit = 0.0;

  static ReviewState omega() { return ReviewState{true, 0, 0.0}; }
  static ReviewState finite(std::int64_t code) { return ReviewState{false, code, 0.0}; }
  static ReviewState with_credit(double credit) { return ReviewState{false, 0, credit}; }

  friend bool operator==(const ReviewState&, const ReviewState&) = default;
  friend auto operator<=>(const ReviewState&, const ReviewState&) = default;
};

struct WeightedState {
  ReviewState state;
  double prob = 0.0;
};

using StateDistribution = std::vector<WeightedState>;

/// Merges equal states and drops zero-mass entries; keeps a sorted order so
/// that the result does not depend on insertion order.
StateDistribution normalize_distribution(StateDistribution dist);

enum class StateSpaceKind {
  kFinite,             // a finite set of codes
  kDeterministicReal,  // real-valued states with deterministic transitions
  kGeneral,            // anything else; exact chains are unavailable
};

/// A sequential review mechanism (acceptance policy, review policy, state
/// transition), plus the state ordering and the round-1 state.
///
/// The transition is given conditionally on the acceptance coin of the
/// reviewed paper, because some states record that outcome (the coin-flip
/// state remembers whether the previous paper was accepted). The marginal
/// transition in the usual sense is P_acc(r) * T(accepted) +
/// (1 - P_acc(r)) * T(rejected); see marginal_transition().
struct MechanismTriple {
  using ReviewPolicy = std::function<double(std::size_t round, const ReviewState&)>;
  using Transition =
      std::function<StateDistribution(std::size_t round, const ReviewState&, double score, bool accepted)>;
  using OrderKey = std::function<double(const ReviewState&)>;
  using Describe = std::function<std::string(const ReviewState&)>;

  std::string name;
  ScorePolicy acceptance;
  ReviewPolicy review;
  Transition transition;
  /// Total preorder on non-terminal states; equal keys mean equivalent
  /// states. The termination state is always ranked below everything.
  OrderKey order_key;
  ReviewState initial;
  StateSpaceKind kind = StateSpaceKind::kFinite;
  Describe describe;

  /// Validated accessors. They throw MechanismError when the underlying
  /// functions break the triple's contract.
  double accept_prob(double score) const;
  double review_prob(std::size_t round, const ReviewState& state) const;
  StateDistribution next_states(std::size_t round, const ReviewState& state, double score, bool accepted) const;
  StateDistribution marginal_transition(std::size_t round, const ReviewState& state, double score) const;

  /// -inf for the termination state, order_key otherwise.
  double rank(const ReviewState& state) const;
  std::weak_ordering compare(const ReviewState& a, const ReviewState& b) const;
  std::string state_name(const ReviewState& state) const;
};

/// Simulates one author: rounds follow `permutation` (round t reviews
/// paper permutation.paper_at(t)). Score noise and acceptance coins are
/// addressed by paper index; review coins and transition draws by round.
ReviewOutcome run_mechanism(const MechanismTriple& triple, std::span<const double> qualities,
                            const Permutation& permutation, const NoiseModel& noise, std::uint64_t seed);

/// As run_mechanism but with the round scores given directly (one per
/// round, in round order). Acceptance coins are addressed by round.
ReviewOutcome run_mechanism_on_scores(const MechanismTriple& triple, std::span<const double> round_scores,
                                      std::uint64_t seed);

/// One step of the exact forward recursion: probability that the round's
/// paper is reviewed, and the state distribution entering the next round.
struct ChainStep {
  double review_prob = 0.0;
  StateDistribution next;
};

ChainStep chain_step(const MechanismTriple& triple, std::size_t round, const StateDistribution& current,
                     double score);

/// Pr(round t is reviewed) for every round, given fixed round scores.
/// Throws UnsupportedMechanism for general state spaces or when the state
/// support explodes.
std::vector<double> review_chain_probabilities(const MechanismTriple& triple, std::span<const double> round_scores);

bool check_acceptance_monotone(const ScorePolicy& acceptance, std::span<const double> score_grid);

/// True iff P_rev respects the state preorder in rounds [0, rounds).
bool check_review_policy_monotone(const MechanismTriple& triple, std::span<const ReviewState> states,
                                  std::size_t rounds);

/// First-order stochastic dominance of `x` over `y` in the triple's order,
/// via tail masses.
bool fosd_dominates(const MechanismTriple& triple, const StateDistribution& x, const StateDistribution& y);

/// Two-round composition mu(mu(phi, r1), r2) without review gating.
StateDistribution two_round_transition(const MechanismTriple& triple, std::size_t round, const ReviewState& state,
                                       double r1, double r2);

struct MonotonicityReport {
  bool score_monotone = true;
  bool state_monotone = true;
  bool swap_monotone = true;        // first part of the ordering clause
  bool quadruple_monotone = true;   // second part of the ordering clause
  bool quadruple_vacuous = false;   // no quadruple met the sum constraint
  std::size_t quadruples_checked = 0;
  std::vector<std::string> witnesses;

  bool ordering_monotone() const { return swap_monotone && quadruple_monotone; }
  bool all() const { return score_monotone && state_monotone && ordering_monotone(); }
};

/// Exhaustive check of the three transition conditions over rounds
/// [0, rounds - 1), the given states and score grid.
MonotonicityReport check_transition_monotone(const MechanismTriple& triple, std::span<const ReviewState> states,
                                             std::span<const double> score_grid, std::size_t rounds);

}  // namespace seqreview
