#include "seqreview/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "seqreview/errors.hpp"
#include "seqreview/format.hpp"

namespace seqreview {

namespace {

double checked_probability(const ScorePolicy& f, double r, const char* what) {
  const double p = f(r);
  if (!(p >= 0.0 && p <= 1.0))
    throw MechanismError(std::string(what) + " returned " + format_double(p) + ", outside [0,1]");
  return p;
}

double always_review_live(std::size_t, const ReviewState& s) { return s.terminal ? 0.0 : 1.0; }

StateDistribution stay_terminal() { return {{ReviewState::omega(), 1.0}}; }

}  // namespace

void ThresholdSeqSpec::validate() const {
  if (std::isnan(tau_acc) || std::isnan(tau_rev)) throw ParameterError("threshold sequential: thresholds are NaN");
  if (tau_acc < tau_rev) throw ParameterError("threshold sequential: tau_acc must be >= tau_rev");
}

MechanismTriple make_naive_sequential(ScorePolicy acceptance) {
  if (!acceptance) throw ParameterError("naive sequential: missing acceptance policy");
  MechanismTriple m;
  m.name = "naive";
  m.acceptance = std::move(acceptance);
  m.review = always_review_live;
  m.transition = [](std::size_t, const ReviewState& s, double, bool accepted) -> StateDistribution {
    if (s.terminal || !accepted) return stay_terminal();
    return {{ReviewState::finite(1), 1.0}};
  };
  m.order_key = [](const ReviewState&) { return 1.0; };
  m.initial = ReviewState::finite(1);
  m.kind = StateSpaceKind::kFinite;
  m.describe = [](const ReviewState&) { return std::string("psi"); };
  return m;
}

MechanismTriple make_coin_flip(CoinFlipSpec spec) {
  if (!spec.acceptance || !spec.rho) throw ParameterError("coin-flip: missing acceptance policy or rho");
  MechanismTriple m;
  m.name = "coinflip";
  m.acceptance = std::move(spec.acceptance);
  m.review = always_review_live;
  m.transition = [rho = std::move(spec.rho)](std::size_t, const ReviewState& s, double r,
                                             bool accepted) -> StateDistribution {
    if (s.terminal) return stay_terminal();
    const double heads = checked_probability(rho, r, "coin-flip rho");
    if (accepted) return {{ReviewState::finite(3), heads}, {ReviewState::finite(2), 1.0 - heads}};
    return {{ReviewState::finite(1), heads}, {ReviewState::omega(), 1.0 - heads}};
  };
  m.order_key = [](const ReviewState&) { return 1.0; };
  m.initial = ReviewState::finite(2);
  m.kind = StateSpaceKind::kFinite;
  m.describe = [](const ReviewState& s) {
    return "(" + std::to_string(s.code / 2) + "," + std::to_string(s.code % 2) + ")";
  };
  return m;
}

MechanismTriple make_parallel(ScorePolicy acceptance) {
  MechanismTriple m = make_coin_flip({std::move(acceptance), constant_policy(1.0)});
  m.name = "parallel";
  return m;
}

MechanismTriple make_credit_pool(CreditPoolSpec spec) {
  if (!spec.acceptance || !spec.beta) throw ParameterError("credit pool: missing acceptance policy or beta");
  if (!(spec.initial_credit >= 0.0) || !std::isfinite(spec.initial_credit))
    throw ParameterError("credit pool: initial credit must be finite and >= 0");
  if (spec.credit_cap) {
    if (!(*spec.credit_cap >= 0.0)) throw ParameterError("credit pool: credit cap must be >= 0");
    if (spec.initial_credit > *spec.credit_cap) throw ParameterError("credit pool: initial credit exceeds the cap");
  }
  MechanismTriple m;
  m.name = spec.credit_cap ? "limited-creditpool" : "creditpool";
  m.acceptance = std::move(spec.acceptance);
  m.review = [](std::size_t, const ReviewState& s) { return !s.terminal && s.credit >= 0.0 ? 1.0 : 0.0; };
  m.transition = [beta = std::move(spec.beta), cap = spec.credit_cap](std::size_t, const ReviewState& s, double r,
                                                                      bool) -> StateDistribution {
    if (s.terminal) return stay_terminal();
    const double step = beta(r);
    if (!std::isfinite(step)) throw MechanismError("credit pool: beta returned a non-finite credit");
    double next = s.credit + step;
    if (cap) next = std::min(next, *cap);
    if (next < 0.0) return stay_terminal();
    return {{ReviewState::with_credit(next), 1.0}};
  };
  m.order_key = [](const ReviewState& s) { return s.credit; };
  m.initial = ReviewState::with_credit(spec.initial_credit);
  m.kind = StateSpaceKind::kDeterministicReal;
  return m;
}

MechanismTriple make_threshold_sequential(const ThresholdSeqSpec& spec) {
  spec.validate();
  MechanismTriple m = make_coin_flip({threshold_policy(spec.tau_acc), threshold_policy(spec.tau_rev)});
  m.name = std::isinf(spec.tau_rev) && spec.tau_rev < 0 ? "parallel" : "threshold-seq";
  return m;
}

MechanismTriple make_bundle_mechanism(const BundleSpec& spec, ScorePolicy acceptance) {
  if (spec.bundle_size < 1) throw ParameterError("bundle: bundle_size must be >= 1");
  if (spec.continuation_rule < 1 || spec.continuation_rule > spec.bundle_size)
    throw ParameterError("bundle: continuation_rule must lie in [1, bundle_size]");
  if (!acceptance) throw ParameterError("bundle: missing acceptance policy");
  const auto width = static_cast<std::int64_t>(spec.bundle_size + 1);
  const auto size = static_cast<std::int64_t>(spec.bundle_size);
  const auto rule = static_cast<std::int64_t>(spec.continuation_rule);
  MechanismTriple m;
  m.name = "bundle";
  m.acceptance = std::move(acceptance);
  m.review = always_review_live;
  m.transition = [width, size, rule](std::size_t, const ReviewState& s, double, bool accepted) -> StateDistribution {
    if (s.terminal) return stay_terminal();
    const std::int64_t pos = s.code / width + 1;
    const std::int64_t count = s.code % width + (accepted ? 1 : 0);
    if (pos < size) return {{ReviewState::finite(pos * width + count), 1.0}};
    if (count >= rule) return {{ReviewState::finite(0), 1.0}};
    return stay_terminal();
  };
  m.order_key = [width, rule](const ReviewState& s) {
    const std::int64_t pos = s.code / width;
    const std::int64_t count = s.code % width;
    return static_cast<double>(pos == 0 ? rule : std::min(count, rule));
  };
  m.initial = ReviewState::finite(0);
  m.kind = StateSpaceKind::kFinite;
  m.describe = [width](const ReviewState& s) {
    return "(pos " + std::to_string(s.code / width + 1) + ", acc " + std::to_string(s.code % width) + ")";
  };
  return m;
}

std::vector<ReviewState> coin_flip_states() {
  return {ReviewState::omega(), ReviewState::finite(1), ReviewState::finite(2), ReviewState::finite(3)};
}

std::vector<ReviewState> naive_states() { return {ReviewState::omega(), ReviewState::finite(1)}; }

std::vector<ReviewState> bundle_states(const BundleSpec& spec) {
  std::vector<ReviewState> out{ReviewState::omega()};
  const auto width = static_cast<std::int64_t>(spec.bundle_size + 1);
  for (std::int64_t pos = 0; pos < static_cast<std::int64_t>(spec.bundle_size); ++pos)
    for (std::int64_t count = 0; count <= pos; ++count) out.push_back(ReviewState::finite(pos * width + count));
  return out;
}

std::vector<ReviewState> credit_lattice(const CreditPoolSpec& spec, std::span<const double> score_grid,
                                        std::size_t rounds) {
  auto merge = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v)
      if (out.empty() || x - out.back() > 1e-12) out.push_back(x);
    return out;
  };
  std::vector<double> frontier{spec.initial_credit};
  std::vector<double> all = frontier;
  for (std::size_t step = 0; step < rounds; ++step) {
    std::vector<double> next;
    for (double c : frontier) {
      for (double r : score_grid) {
        double b = c + spec.beta(r);
        if (spec.credit_cap) b = std::min(b, *spec.credit_cap);
        if (b >= 0.0) next.push_back(b);
      }
    }
    frontier = merge(std::move(next));
    all.insert(all.end(), frontier.begin(), frontier.end());
    all = merge(std::move(all));
  }
  std::vector<ReviewState> out{ReviewState::omega()};
  for (double c : all) out.push_back(ReviewState::with_credit(c));
  return out;
}

std::vector<double> isotonic_adjust(std::span<const double> scores, const Permutation& permutation) {
  const std::size_t n = scores.size();
  if (permutation.size() != n) throw ParameterError("isotonic_adjust: scores and permutation differ in length");
  for (double s : scores)
    if (!std::isfinite(s)) throw ParameterError("isotonic_adjust: scores must be finite");

  // Blocks of pooled rounds, kept nonincreasing in their means.
  struct Block {
    double sum;
    std::size_t count;
    double mean() const { return sum / static_cast<double>(count); }
  };
  std::vector<Block> blocks;
  for (std::size_t t = 0; t < n; ++t) {
    blocks.push_back({scores[permutation.paper_at(t)], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() < blocks.back().mean()) {
      Block last = blocks.back();
      blocks.pop_back();
      blocks.back().sum += last.sum;
      blocks.back().count += last.count;
    }
  }
  std::vector<double> adjusted(n);
  std::size_t t = 0;
  for (const auto& b : blocks) {
    const double m = b.mean();
    for (std::size_t k = 0; k < b.count; ++k, ++t) adjusted[permutation.paper_at(t)] = m;
  }
  return adjusted;
}

std::vector<bool> isotonic_mechanism_accept(std::span<const double> scores, const Permutation& permutation,
                                            double tau) {
  const auto adjusted = isotonic_adjust(scores, permutation);
  std::vector<bool> out(adjusted.size());
  for (std::size_t i = 0; i < adjusted.size(); ++i) out[i] = adjusted[i] >= tau;
  return out;
}

}  // namespace seqreview
