#include "seqreview/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "seqreview/errors.hpp"
#include "seqreview/format.hpp"

namespace seqreview {

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> ranks(n);
  std::iota(ranks.begin(), ranks.end(), std::size_t{0});
  return from_ranks(std::move(ranks));
}

Permutation Permutation::from_ranks(std::vector<std::size_t> ranks) {
  const std::size_t n = ranks.size();
  std::vector<std::size_t> order(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (ranks[i] >= n || order[ranks[i]] != n) throw ParameterError("permutation: ranks are not a bijection");
    order[ranks[i]] = i;
  }
  Permutation p;
  p.ranks_ = std::move(ranks);
  p.order_ = std::move(order);
  return p;
}

Permutation Permutation::from_order(std::vector<std::size_t> order) {
  return from_ranks(std::move(order)).inverse();
}

bool Permutation::is_identity() const {
  for (std::size_t i = 0; i < ranks_.size(); ++i)
    if (ranks_[i] != i) return false;
  return true;
}

Permutation Permutation::inverse() const {
  Permutation p;
  p.ranks_ = order_;
  p.order_ = ranks_;
  return p;
}

Permutation Permutation::then(const Permutation& b) const {
  if (b.size() != size()) throw ParameterError("permutation: size mismatch in composition");
  std::vector<std::size_t> ranks(size());
  for (std::size_t i = 0; i < size(); ++i) ranks[i] = b.rank_of(rank_of(i));
  return from_ranks(std::move(ranks));
}

std::string Permutation::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < ranks_.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(ranks_[i] + 1);
  }
  return s + ")";
}

std::vector<Permutation> all_permutations(std::size_t n) {
  std::vector<std::size_t> ranks(n);
  std::iota(ranks.begin(), ranks.end(), std::size_t{0});
  std::vector<Permutation> out;
  do {
    out.push_back(Permutation::from_ranks(ranks));
  } while (std::next_permutation(ranks.begin(), ranks.end()));
  return out;
}

NoiseModel NoiseModel::gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("gaussian noise: sigma must be positive");
  return NoiseModel(GaussianNoise{sigma});
}

NoiseModel NoiseModel::discrete(std::vector<double> support, std::vector<double> probs) {
  if (support.empty() || support.size() != probs.size())
    throw ParameterError("discrete noise: support and probs must be nonempty and of equal length");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0) || !std::isfinite(support[i]))
      throw ParameterError("discrete noise: probabilities must be nonnegative and support finite");
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError("discrete noise: probabilities must sum to 1");
  return NoiseModel(DiscreteNoise{std::move(support), std::move(probs)});
}

const DiscreteNoise& NoiseModel::as_discrete() const {
  if (!is_discrete()) throw ParameterError("noise model is not discrete");
  return std::get<DiscreteNoise>(model_);
}

const GaussianNoise& NoiseModel::as_gaussian() const {
  if (is_discrete()) throw ParameterError("noise model is not gaussian");
  return std::get<GaussianNoise>(model_);
}

double NoiseModel::sample(CounterRng& rng) const {
  if (const auto* g = std::get_if<GaussianNoise>(&model_)) return g->sigma * rng.normal();
  const auto& d = std::get<DiscreteNoise>(model_);
  if (d.support.size() == 1) return d.support[0];
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < d.support.size(); ++i) {
    acc += d.probs[i];
    if (u < acc) return d.support[i];
  }
  return d.support.back();
}

double NoiseModel::mean() const {
  if (std::holds_alternative<GaussianNoise>(model_)) return 0.0;
  const auto& d = std::get<DiscreteNoise>(model_);
  double m = 0.0;
  for (std::size_t i = 0; i < d.support.size(); ++i) m += d.support[i] * d.probs[i];
  return m;
}

std::string NoiseModel::to_string() const {
  if (const auto* g = std::get_if<GaussianNoise>(&model_)) return "gaussian(" + format_double(g->sigma) + ")";
  const auto& d = std::get<DiscreteNoise>(model_);
  std::string s = "discrete{";
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    if (i) s += ", ";
    s += format_double(d.support[i]) + ":" + format_double(d.probs[i]);
  }
  return s + "}";
}

void SoftmaxScoreModel::validate() const {
  if (score_set.empty()) throw ParameterError("softmax model: score_set must be nonempty");
  for (std::size_t i = 1; i < score_set.size(); ++i)
    if (score_set[i] <= score_set[i - 1]) throw ParameterError("softmax model: score_set must be strictly ascending");
  if (!(temperature >= 0.0) || !std::isfinite(temperature))
    throw ParameterError("softmax model: temperature must be finite and nonnegative");
}

SoftmaxScoreModel SoftmaxScoreModel::integer_range(double temperature, int lo, int hi) {
  SoftmaxScoreModel m;
  m.temperature = temperature;
  for (int s = lo; s <= hi; ++s) m.score_set.push_back(s);
  m.validate();
  return m;
}

std::vector<double> softmax_log_pmf(double quality, const SoftmaxScoreModel& model) {
  model.validate();
  std::vector<double> logits(model.score_set.size());
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double d = model.score_set[i] - quality;
    logits[i] = -model.temperature * d * d;
    best = std::max(best, logits[i]);
  }
  double total = 0.0;
  for (double l : logits) total += std::exp(l - best);
  // Subtract the maximum first: the logits can be huge and nearly equal.
  const double log_total = std::log(total);
  for (double& l : logits) l = (l - best) - log_total;
  return logits;
}

std::vector<double> softmax_pmf(double quality, const SoftmaxScoreModel& model) {
  auto p = softmax_log_pmf(quality, model);
  for (double& v : p) v = std::exp(v);
  return p;
}

RewardFunction RewardFunction::constant_one() {
  return {"constant-one", [](double) { return 1.0; }};
}

RewardFunction RewardFunction::identity_clamped() {
  return {"identity-clamped", [](double q) { return std::max(q, 0.0); }};
}

RewardFunction RewardFunction::step(std::vector<double> breaks, std::vector<double> values) {
  if (values.size() != breaks.size() + 1) throw ParameterError("step reward: need one more value than breakpoints");
  if (!std::is_sorted(breaks.begin(), breaks.end()) || !std::is_sorted(values.begin(), values.end()) ||
      values.front() < 0.0)
    throw ParameterError("step reward: breakpoints and values must be nondecreasing and values nonnegative");
  std::string name = "step";
  return {name, [breaks = std::move(breaks), values = std::move(values)](double q) {
            const auto k = std::upper_bound(breaks.begin(), breaks.end(), q) - breaks.begin();
            return values[static_cast<std::size_t>(k)];
          }};
}

bool RewardFunction::valid_on(std::span<const double> grid) const {
  std::vector<double> xs(grid.begin(), grid.end());
  std::sort(xs.begin(), xs.end());
  double prev = -1.0;
  for (double x : xs) {
    const double v = fn(x);
    if (v < 0.0 || v < prev) return false;
    prev = v;
  }
  return true;
}

std::size_t ReviewOutcome::reviewed_count() const {
  return static_cast<std::size_t>(std::count(reviewed.begin(), reviewed.end(), true));
}

std::size_t ReviewOutcome::accepted_count() const {
  return static_cast<std::size_t>(std::count(accepted.begin(), accepted.end(), true));
}

std::vector<bool> ReviewOutcome::accepted_papers() const {
  std::vector<bool> out(rounds(), false);
  for (std::size_t t = 0; t < rounds(); ++t)
    if (accepted[t]) out[paper_at(t)] = true;
  return out;
}

ReviewOutcome ReviewOutcome::from_accepted_papers(const std::vector<bool>& accepted) {
  ReviewOutcome o;
  o.reviewed.assign(accepted.size(), true);
  o.accepted = accepted;
  return o;
}

std::vector<double> draw_qualities(double mu, double sigma, std::size_t n, std::uint64_t seed, std::uint64_t index) {
  if (!(sigma > 0.0)) throw ParameterError("draw_qualities: sigma_q must be positive");
  if (n == 0) throw ParameterError("draw_qualities: n must be positive");
  CounterRng rng(seed, kQualityStream, index);
  std::vector<double> q(n);
  for (double& v : q) v = rng.normal(mu, sigma);
  std::sort(q.begin(), q.end(), std::greater<>());
  return q;
}

double review_score(double quality, const NoiseModel& noise, std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(seed, kScoreStream, index);
  return quality + noise.sample(rng);
}

namespace {
template <class Value>
double sum_accepted(const ReviewOutcome& outcome, std::span<const double> qualities, Value value) {
  if (outcome.rounds() != qualities.size() || outcome.accepted.size() != qualities.size())
    throw ParameterError("utility: outcome and qualities differ in length");
  double total = 0.0;
  for (std::size_t t = 0; t < outcome.rounds(); ++t)
    if (outcome.accepted[t]) total += value(qualities[outcome.paper_at(t)]);
  return total;
}
}  // namespace

double author_utility(const ReviewOutcome& outcome, std::span<const double> qualities, const RewardFunction& reward) {
  return sum_accepted(outcome, qualities, [&](double q) { return reward(q); });
}

double conference_utility(const ReviewOutcome& outcome, std::span<const double> qualities) {
  return sum_accepted(outcome, qualities, [](double q) { return q; });
}

}  // namespace seqreview
