#include "seqreview/framework.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "seqreview/errors.hpp"
#include "seqreview/format.hpp"

namespace seqreview {

namespace {

constexpr std::uint64_t kReviewStream = stream_id("review");
constexpr std::uint64_t kAcceptStream = stream_id("accept");
constexpr std::uint64_t kTransitionStream = stream_id("transition");

constexpr double kSumTolerance = 1e-12;
constexpr double kRankTolerance = 1e-9;
constexpr double kMassTolerance = 1e-12;
constexpr std::size_t kMaxSupport = 1'000'000;
constexpr std::size_t kMaxWitnesses = 8;

void check_probability(double p, const std::string& what) {
  if (!(p >= 0.0 && p <= 1.0)) throw MechanismError(what + " returned " + format_double(p) + ", outside [0,1]");
}

ReviewState sample_state(const StateDistribution& dist, CounterRng& rng) {
  if (dist.size() == 1) return dist.front().state;
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < dist.size(); ++i) {
    acc += dist[i].prob;
    if (u < acc) return dist[i].state;
  }
  return dist.back().state;
}

}  // namespace

ScorePolicy threshold_policy(double tau) {
  return [tau](double r) { return r >= tau ? 1.0 : 0.0; };
}

ScorePolicy constant_policy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("constant policy: probability must lie in [0,1]");
  return [p](double) { return p; };
}

ScorePolicy step_policy(std::vector<double> breaks, std::vector<double> values) {
  if (values.size() != breaks.size() + 1) throw ParameterError("step policy: need one more value than breakpoints");
  if (!std::is_sorted(breaks.begin(), breaks.end())) throw ParameterError("step policy: breakpoints must ascend");
  for (double v : values)
    if (!(v >= 0.0 && v <= 1.0)) throw ParameterError("step policy: values must lie in [0,1]");
  return [breaks = std::move(breaks), values = std::move(values)](double r) {
    const auto k = std::upper_bound(breaks.begin(), breaks.end(), r) - breaks.begin();
    return values[static_cast<std::size_t>(k)];
  };
}

StateDistribution normalize_distribution(StateDistribution dist) {
  std::map<ReviewState, double> merged;
  for (auto& ws : dist) {
    if (ws.state.terminal) ws.state = ReviewState::omega();
    merged[ws.state] += ws.prob;
  }
  StateDistribution out;
  out.reserve(merged.size());
  for (const auto& [state, prob] : merged)
    if (prob > 0.0) out.push_back({state, prob});
  return out;
}

double MechanismTriple::accept_prob(double score) const {
  const double p = acceptance(score);
  check_probability(p, name + ": acceptance policy");
  return p;
}

double MechanismTriple::review_prob(std::size_t round, const ReviewState& state) const {
  const double p = review(round, state);
  check_probability(p, name + ": review policy");
  if (state.terminal && p != 0.0) throw MechanismError(name + ": review policy must be 0 at the termination state");
  return p;
}

StateDistribution MechanismTriple::next_states(std::size_t round, const ReviewState& state, double score,
                                               bool accepted) const {
  StateDistribution dist = transition(round, state, score, accepted);
  double total = 0.0;
  for (const auto& ws : dist) {
    check_probability(ws.prob, name + ": transition");
    total += ws.prob;
  }
  if (std::abs(total - 1.0) > kSumTolerance)
    throw MechanismError(name + ": transition distribution sums to " + format_double(total) + ", not 1");
  dist = normalize_distribution(std::move(dist));
  if (state.terminal && !(dist.size() == 1 && dist.front().state.terminal))
    throw MechanismError(name + ": the termination state must be absorbing");
  return dist;
}

StateDistribution MechanismTriple::marginal_transition(std::size_t round, const ReviewState& state,
                                                       double score) const {
  if (state.terminal) return next_states(round, state, score, false);
  const double pa = accept_prob(score);
  StateDistribution out;
  if (pa > 0.0)
    for (const auto& ws : next_states(round, state, score, true)) out.push_back({ws.state, pa * ws.prob});
  if (pa < 1.0)
    for (const auto& ws : next_states(round, state, score, false)) out.push_back({ws.state, (1.0 - pa) * ws.prob});
  return normalize_distribution(std::move(out));
}

double MechanismTriple::rank(const ReviewState& state) const {
  if (state.terminal) return -std::numeric_limits<double>::infinity();
  return order_key(state);
}

std::weak_ordering MechanismTriple::compare(const ReviewState& a, const ReviewState& b) const {
  const double ra = rank(a);
  const double rb = rank(b);
  if (ra == rb || std::abs(ra - rb) <= kRankTolerance) return std::weak_ordering::equivalent;
  return ra < rb ? std::weak_ordering::less : std::weak_ordering::greater;
}

std::string MechanismTriple::state_name(const ReviewState& state) const {
  if (state.terminal) return "omega";
  if (describe) return describe(state);
  if (kind == StateSpaceKind::kDeterministicReal) return "B=" + format_double(state.credit);
  return "code" + std::to_string(state.code);
}

ReviewOutcome run_mechanism(const MechanismTriple& triple, std::span<const double> qualities,
                            const Permutation& permutation, const NoiseModel& noise, std::uint64_t seed) {
  if (qualities.size() != permutation.size())
    throw ParameterError("run_mechanism: qualities and permutation differ in length");
  const std::size_t n = qualities.size();
  ReviewOutcome out;
  out.reviewed.assign(n, false);
  out.accepted.assign(n, false);
  out.paper_order = permutation.order();
  ReviewState state = triple.initial;
  for (std::size_t t = 0; t < n; ++t) {
    const double pr = triple.review_prob(t, state);
    CounterRng review_rng(seed, kReviewStream, t);
    if (!(review_rng.uniform() < pr)) {
      out.terminal_round = t;
      break;
    }
    const std::size_t paper = permutation.paper_at(t);
    const double score = review_score(qualities[paper], noise, seed, paper);
    CounterRng accept_rng(seed, kAcceptStream, paper);
    const bool accepted = accept_rng.uniform() < triple.accept_prob(score);
    out.reviewed[t] = true;
    out.accepted[t] = accepted;
    out.scores.push_back(score);
    if (t + 1 < n) {
      CounterRng transition_rng(seed, kTransitionStream, t);
      state = sample_state(triple.next_states(t, state, score, accepted), transition_rng);
    }
  }
  return out;
}

ReviewOutcome run_mechanism_on_scores(const MechanismTriple& triple, std::span<const double> round_scores,
                                      std::uint64_t seed) {
  const std::size_t n = round_scores.size();
  ReviewOutcome out;
  out.reviewed.assign(n, false);
  out.accepted.assign(n, false);
  ReviewState state = triple.initial;
  for (std::size_t t = 0; t < n; ++t) {
    const double pr = triple.review_prob(t, state);
    CounterRng review_rng(seed, kReviewStream, t);
    if (!(review_rng.uniform() < pr)) {
      out.terminal_round = t;
      break;
    }
    const double score = round_scores[t];
    CounterRng accept_rng(seed, kAcceptStream, t);
    const bool accepted = accept_rng.uniform() < triple.accept_prob(score);
    out.reviewed[t] = true;
    out.accepted[t] = accepted;
    out.scores.push_back(score);
    if (t + 1 < n) {
      CounterRng transition_rng(seed, kTransitionStream, t);
      state = sample_state(triple.next_states(t, state, score, accepted), transition_rng);
    }
  }
  return out;
}

namespace {

double review_mass(const MechanismTriple& triple, std::size_t round, const StateDistribution& current) {
  double mass = 0.0;
  for (const auto& ws : current) mass += ws.prob * triple.review_prob(round, ws.state);
  return mass;
}

}  // namespace

ChainStep chain_step(const MechanismTriple& triple, std::size_t round, const StateDistribution& current,
                     double score) {
  ChainStep step;
  StateDistribution next;
  for (const auto& ws : current) {
    const double pr = triple.review_prob(round, ws.state);
    step.review_prob += ws.prob * pr;
    if (pr < 1.0) next.push_back({ReviewState::omega(), ws.prob * (1.0 - pr)});
    if (pr > 0.0)
      for (const auto& nx : triple.marginal_transition(round, ws.state, score))
        next.push_back({nx.state, ws.prob * pr * nx.prob});
  }
  step.next = normalize_distribution(std::move(next));
  if (step.next.size() > kMaxSupport)
    throw UnsupportedMechanism(triple.name + ": state support exceeds " + std::to_string(kMaxSupport));
  return step;
}

std::vector<double> review_chain_probabilities(const MechanismTriple& triple, std::span<const double> round_scores) {
  if (triple.kind == StateSpaceKind::kGeneral)
    throw UnsupportedMechanism(triple.name + ": exact review chains need a finite or deterministic state space");
  const std::size_t n = round_scores.size();
  std::vector<double> out(n, 0.0);
  StateDistribution dist{{triple.initial, 1.0}};
  for (std::size_t t = 0; t < n; ++t) {
    if (t + 1 == n) {
      out[t] = review_mass(triple, t, dist);
      break;
    }
    ChainStep step = chain_step(triple, t, dist, round_scores[t]);
    out[t] = step.review_prob;
    dist = std::move(step.next);
  }
  return out;
}

bool check_acceptance_monotone(const ScorePolicy& acceptance, std::span<const double> score_grid) {
  std::vector<double> grid(score_grid.begin(), score_grid.end());
  std::sort(grid.begin(), grid.end());
  double prev = -std::numeric_limits<double>::infinity();
  for (double r : grid) {
    const double p = acceptance(r);
    if (p < prev) return false;
    prev = p;
  }
  return true;
}

bool check_review_policy_monotone(const MechanismTriple& triple, std::span<const ReviewState> states,
                                  std::size_t rounds) {
  for (std::size_t round = 0; round < rounds; ++round) {
    for (const auto& hi : states) {
      for (const auto& lo : states) {
        if (triple.compare(hi, lo) == std::weak_ordering::less) continue;
        if (triple.review_prob(round, hi) < triple.review_prob(round, lo) - kMassTolerance) return false;
      }
    }
  }
  return true;
}

namespace {

std::vector<double> collect_ranks(const MechanismTriple& triple, std::initializer_list<const StateDistribution*> ds) {
  std::vector<double> ranks;
  for (const auto* d : ds)
    for (const auto& ws : *d) ranks.push_back(triple.rank(ws.state));
  std::sort(ranks.begin(), ranks.end());
  ranks.erase(std::unique(ranks.begin(), ranks.end(),
                          [](double a, double b) { return a == b || std::abs(a - b) <= kRankTolerance; }),
              ranks.end());
  return ranks;
}

bool at_least(double rank, double threshold) {
  return rank == threshold || rank >= threshold - kRankTolerance;
}

double tail_mass(const MechanismTriple& triple, const StateDistribution& d, double threshold) {
  double mass = 0.0;
  for (const auto& ws : d)
    if (at_least(triple.rank(ws.state), threshold)) mass += ws.prob;
  return mass;
}

struct RankPair {
  double hi;
  double lo;
  double prob;
};

std::vector<RankPair> max_min_pairs(const MechanismTriple& triple, const StateDistribution& x,
                                    const StateDistribution& y) {
  std::vector<RankPair> out;
  for (const auto& a : x) {
    for (const auto& b : y) {
      const double ra = triple.rank(a.state);
      const double rb = triple.rank(b.state);
      out.push_back({std::max(ra, rb), std::min(ra, rb), a.prob * b.prob});
    }
  }
  return out;
}

bool joint_dominates(const std::vector<RankPair>& p, const std::vector<RankPair>& q, std::span<const double> ranks) {
  for (double a : ranks) {
    for (double b : ranks) {
      double mp = 0.0;
      double mq = 0.0;
      for (const auto& e : p)
        if (at_least(e.hi, a) && at_least(e.lo, b)) mp += e.prob;
      for (const auto& e : q)
        if (at_least(e.hi, a) && at_least(e.lo, b)) mq += e.prob;
      if (mp < mq - kMassTolerance) return false;
    }
  }
  return true;
}

void add_witness(MonotonicityReport& report, std::string text) {
  if (report.witnesses.size() < kMaxWitnesses) report.witnesses.push_back(std::move(text));
}

}  // namespace

bool fosd_dominates(const MechanismTriple& triple, const StateDistribution& x, const StateDistribution& y) {
  for (double a : collect_ranks(triple, {&x, &y}))
    if (tail_mass(triple, x, a) < tail_mass(triple, y, a) - kMassTolerance) return false;
  return true;
}

StateDistribution two_round_transition(const MechanismTriple& triple, std::size_t round, const ReviewState& state,
                                       double r1, double r2) {
  StateDistribution out;
  for (const auto& mid : triple.marginal_transition(round, state, r1))
    for (const auto& end : triple.marginal_transition(round + 1, mid.state, r2))
      out.push_back({end.state, mid.prob * end.prob});
  return normalize_distribution(std::move(out));
}

MonotonicityReport check_transition_monotone(const MechanismTriple& triple, std::span<const ReviewState> states,
                                             std::span<const double> score_grid, std::size_t rounds) {
  std::vector<double> grid(score_grid.begin(), score_grid.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const std::size_t g = grid.size();
  MonotonicityReport report;

  for (std::size_t round = 0; round < rounds; ++round) {
    const std::string at = "round " + std::to_string(round + 1) + ", ";

    // Monotone in score.
    for (const auto& s : states) {
      for (std::size_t lo = 0; lo < g; ++lo) {
        for (std::size_t hi = lo + 1; hi < g; ++hi) {
          if (!fosd_dominates(triple, triple.marginal_transition(round, s, grid[hi]),
                              triple.marginal_transition(round, s, grid[lo]))) {
            report.score_monotone = false;
            add_witness(report, "score: " + at + "state " + triple.state_name(s) + ", r=" + format_double(grid[lo]) +
                                    " beats r'=" + format_double(grid[hi]));
          }
        }
      }
    }

    // Monotone in state.
    for (double r : grid) {
      for (const auto& hi : states) {
        for (const auto& lo : states) {
          if (triple.compare(hi, lo) == std::weak_ordering::less) continue;
          if (!fosd_dominates(triple, triple.marginal_transition(round, hi, r),
                              triple.marginal_transition(round, lo, r))) {
            report.state_monotone = false;
            add_witness(report, "state: " + at + "r=" + format_double(r) + ", state " + triple.state_name(lo) +
                                    " beats " + triple.state_name(hi));
          }
        }
      }
    }

    // Monotone in ordering.
    for (const auto& s : states) {
      if (s.terminal) continue;
      std::vector<std::vector<StateDistribution>> two(g, std::vector<StateDistribution>(g));
      for (std::size_t a = 0; a < g; ++a)
        for (std::size_t b = 0; b < g; ++b) two[a][b] = two_round_transition(triple, round, s, grid[a], grid[b]);

      for (std::size_t lo = 0; lo < g; ++lo) {
        for (std::size_t hi = lo + 1; hi < g; ++hi) {
          if (!fosd_dominates(triple, two[hi][lo], two[lo][hi])) {
            report.swap_monotone = false;
            add_witness(report, "swap: " + at + "state " + triple.state_name(s) + ", (r, r')=(" +
                                    format_double(grid[lo]) + ", " + format_double(grid[hi]) + ")");
          }
        }
      }

      for (std::size_t i1 = 0; i1 < g; ++i1) {
        for (std::size_t i2 = i1 + 1; i2 < g; ++i2) {
          for (std::size_t i3 = i2; i3 < g; ++i3) {
            for (std::size_t i4 = i3 + 1; i4 < g; ++i4) {
              if (std::abs(grid[i1] + grid[i4] - grid[i2] - grid[i3]) > 1e-9) continue;
              ++report.quadruples_checked;
              const auto good = max_min_pairs(triple, two[i4][i1], two[i2][i3]);
              const auto bad = max_min_pairs(triple, two[i1][i4], two[i3][i2]);
              const auto ranks = collect_ranks(triple, {&two[i4][i1], &two[i2][i3], &two[i1][i4], &two[i3][i2]});
              if (!joint_dominates(good, bad, ranks)) {
                report.quadruple_monotone = false;
                add_witness(report, "quadruple: " + at + "state " + triple.state_name(s) + ", r=(" +
                                        format_double(grid[i1]) + ", " + format_double(grid[i2]) + ", " +
                                        format_double(grid[i3]) + ", " + format_double(grid[i4]) + ")");
              }
            }
          }
        }
      }
    }
  }
  report.quadruple_vacuous = report.quadruples_checked == 0;
  return report;
}

}  // namespace seqreview
