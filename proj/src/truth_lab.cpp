#include "seqreview/truth_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "seqreview/errors.hpp"
#include "seqreview/format.hpp"
#include "seqreview/mechanisms.hpp"
#include "seqreview/parallel.hpp"

namespace seqreview {

namespace {

constexpr std::uint64_t kLabMechanismStream = stream_id("lab-mechanism");
constexpr std::uint64_t kLabInstanceStream = stream_id("lab-instance");
constexpr std::uint64_t kAuthorSignalStream = stream_id("author-signal");

double uniform_in(CounterRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

std::size_t uniform_count(CounterRng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

// Expected utility of rounds [t, n) given the state distribution entering
// round t. Each branch fixes the realized outcome of the round-t paper.
double sequential_dfs(const MechanismTriple& m, const std::vector<PaperLottery>& papers, const RewardFunction& reward,
                      const Permutation& perm, std::size_t t, const StateDistribution& dist) {
  const std::size_t n = papers.size();
  if (t == n) return 0.0;
  if (std::all_of(dist.begin(), dist.end(), [](const WeightedState& ws) { return ws.state.terminal; })) return 0.0;
  const PaperLottery& paper = papers[perm.paper_at(t)];
  double total = 0.0;
  for (std::size_t k = 0; k < paper.prob.size(); ++k) {
    const double w = paper.prob[k];
    if (w == 0.0) continue;
    const double gain = m.accept_prob(paper.score[k]) * reward(paper.quality[k]);
    if (t + 1 == n) {
      double review = 0.0;
      for (const auto& ws : dist) review += ws.prob * m.review_prob(t, ws.state);
      total += w * review * gain;
    } else {
      const ChainStep step = chain_step(m, t, dist, paper.score[k]);
      total += w * (step.review_prob * gain + sequential_dfs(m, papers, reward, perm, t + 1, step.next));
    }
  }
  return total;
}

double isotonic_utility(const IsotonicLabMechanism& m, const std::vector<PaperLottery>& papers,
                        const RewardFunction& reward, const Permutation& perm) {
  const std::size_t n = papers.size();
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> scores(n);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      w *= papers[i].prob[idx[i]];
      scores[i] = papers[i].score[idx[i]];
    }
    if (w > 0.0) {
      const auto accepted = isotonic_mechanism_accept(scores, perm, m.tau);
      double u = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (accepted[i]) u += reward(papers[i].quality[idx[i]]);
      total += w * u;
    }
    std::size_t i = 0;
    while (i < n && ++idx[i] == papers[i].prob.size()) idx[i++] = 0;
    if (i == n) break;
  }
  return total;
}

}  // namespace

std::string lab_mechanism_name(const LabMechanism& m) {
  if (const auto* t = std::get_if<MechanismTriple>(&m)) return t->name;
  return "isotonic";
}

void TruthInstance::validate() const {
  if (qualities.empty() || qualities.size() > kLabMaxPapers)
    throw ParameterError("truth instance: need between 1 and " + std::to_string(kLabMaxPapers) + " papers");
  for (double q : qualities)
    if (!std::isfinite(q)) throw ParameterError("truth instance: qualities must be finite");
  if (!noise.is_discrete() || noise.as_discrete().support.size() > kLabMaxSupport)
    throw ParameterError("truth instance: review noise must be discrete with at most " +
                         std::to_string(kLabMaxSupport) + " points");
  if (author_noise && (!author_noise->is_discrete() || author_noise->as_discrete().support.size() > kLabMaxSupport))
    throw ParameterError("truth instance: author noise must be discrete with at most " +
                         std::to_string(kLabMaxSupport) + " points");
  if (const auto* t = std::get_if<MechanismTriple>(&mechanism); t && !t->acceptance)
    throw ParameterError("truth instance: mechanism is not set");
}

std::vector<PaperLottery> known_quality_lotteries(const TruthInstance& instance) {
  const auto& eps = instance.noise.as_discrete();
  std::vector<PaperLottery> out;
  for (double q : instance.qualities) {
    PaperLottery p;
    for (std::size_t k = 0; k < eps.support.size(); ++k) {
      p.quality.push_back(q);
      p.score.push_back(q + eps.support[k]);
      p.prob.push_back(eps.probs[k]);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PaperLottery> signal_lotteries(std::span<const double> signals, const NoiseModel& author_noise,
                                           const NoiseModel& review_noise) {
  const auto& xi = author_noise.as_discrete();
  const auto& eps = review_noise.as_discrete();
  std::vector<PaperLottery> out;
  for (double s : signals) {
    PaperLottery p;
    for (std::size_t j = 0; j < xi.support.size(); ++j) {
      for (std::size_t k = 0; k < eps.support.size(); ++k) {
        p.quality.push_back(s - xi.support[j]);
        p.score.push_back(s - xi.support[j] + eps.support[k]);
        p.prob.push_back(xi.probs[j] * eps.probs[k]);
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

Permutation ranking_by(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return Permutation::from_order(std::move(order));
}

double exact_expected_utility(const LabMechanism& mechanism, const std::vector<PaperLottery>& papers,
                              const RewardFunction& reward, const Permutation& permutation) {
  if (permutation.size() != papers.size())
    throw ParameterError("exact_expected_utility: permutation and papers differ in length");
  if (const auto* iso = std::get_if<IsotonicLabMechanism>(&mechanism))
    return isotonic_utility(*iso, papers, reward, permutation);
  const auto& m = std::get<MechanismTriple>(mechanism);
  if (m.kind == StateSpaceKind::kGeneral)
    throw UnsupportedMechanism(m.name + ": exact utilities need a finite or deterministic state space");
  return sequential_dfs(m, papers, reward, permutation, 0, {{m.initial, 1.0}});
}

double exact_expected_utility(const TruthInstance& instance, const Permutation& permutation) {
  instance.validate();
  return exact_expected_utility(instance.mechanism, known_quality_lotteries(instance), instance.reward, permutation);
}

TruthVerdict best_response(const LabMechanism& mechanism, const std::vector<PaperLottery>& papers,
                           const RewardFunction& reward, const Permutation& truthful) {
  TruthVerdict v;
  v.truthful = truthful;
  const auto perms = all_permutations(papers.size());
  std::vector<double> utils(perms.size());
  parallel_for(perms.size(), [&](std::size_t i) { utils[i] = exact_expected_utility(mechanism, papers, reward, perms[i]); });
  v.best_utility = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < perms.size(); ++i) {
    v.utilities.push_back({perms[i], utils[i]});
    v.best_utility = std::max(v.best_utility, utils[i]);
    if (perms[i] == truthful) v.truthful_utility = utils[i];
  }
  for (const auto& pu : v.utilities)
    if (pu.utility >= v.best_utility - kTruthTolerance) v.best_permutations.push_back(pu.permutation);
  v.truthful_at_instance = v.truthful_utility >= v.best_utility - kTruthTolerance;
  if (v.best_utility > v.truthful_utility) {
    const auto it = std::max_element(v.utilities.begin(), v.utilities.end(),
                                     [](const auto& a, const auto& b) { return a.utility < b.utility; });
    v.witness = TruthWitness{it->permutation, it->utility - v.truthful_utility};
  }
  return v;
}

TruthVerdict best_response(const TruthInstance& instance) {
  instance.validate();
  return best_response(instance.mechanism, known_quality_lotteries(instance), instance.reward,
                       ranking_by(instance.qualities));
}

TruthVerdict signal_noise_robustness_check(const TruthInstance& instance, std::uint64_t seed, std::uint64_t draw) {
  instance.validate();
  if (!instance.author_noise) return best_response(instance);
  CounterRng rng(seed, kAuthorSignalStream, draw);
  std::vector<double> signals;
  for (double q : instance.qualities) signals.push_back(q + instance.author_noise->sample(rng));
  return best_response(instance.mechanism, signal_lotteries(signals, *instance.author_noise, instance.noise),
                       instance.reward, ranking_by(signals));
}

std::string ViolationWitness::to_string() const {
  std::ostringstream os;
  os << "instance=" << instance_index << " mechanism=" << lab_mechanism_name(instance.mechanism) << " qualities=(";
  for (std::size_t i = 0; i < instance.qualities.size(); ++i)
    os << (i ? " " : "") << format_double(instance.qualities[i]);
  os << ") noise=" << instance.noise.to_string() << " reward=" << instance.reward.name
     << " permutation=" << permutation.to_string() << " truthful=" << format_double(truthful_utility)
     << " manipulated=" << format_double(manipulated_utility) << " gap=" << format_double(gap);
  return os.str();
}

std::optional<ViolationWitness> find_violation(const MechanismGenerator& mechanisms,
                                               const InstanceGenerator& instances, std::size_t budget,
                                               std::uint64_t seed) {
  for (std::size_t i = 0; i < budget; ++i) {
    CounterRng irng(seed, kLabInstanceStream, i);
    CounterRng mrng(seed, kLabMechanismStream, i);
    TruthInstance inst = instances(irng, i);
    inst.mechanism = mechanisms(mrng, i);
    const TruthVerdict v = best_response(inst);
    if (v.witness && v.witness->gap > kViolationGap) {
      ViolationWitness w;
      w.instance_index = i;
      w.permutation = v.witness->permutation;
      w.truthful_utility = v.truthful_utility;
      w.manipulated_utility = v.truthful_utility + v.witness->gap;
      w.gap = v.witness->gap;
      w.instance = std::move(inst);
      return w;
    }
  }
  return std::nullopt;
}

ScorePolicy random_monotone_step(CounterRng& rng) {
  const std::size_t k = uniform_count(rng, 1, 2);
  std::vector<double> breaks(k);
  std::vector<double> values(k + 1);
  for (auto& b : breaks) b = uniform_in(rng, -1.0, 1.0);
  for (auto& v : values) v = rng.uniform();
  std::sort(breaks.begin(), breaks.end());
  std::sort(values.begin(), values.end());
  return step_policy(std::move(breaks), std::move(values));
}

std::function<double(double)> random_convex_credit(CounterRng& rng) {
  const std::size_t k = uniform_count(rng, 1, 2);
  std::vector<double> knots(k);
  std::vector<double> slopes(k + 1);
  for (auto& b : knots) b = uniform_in(rng, -1.0, 1.0);
  for (auto& s : slopes) s = uniform_in(rng, 0.1, 2.1);
  std::sort(knots.begin(), knots.end());
  std::sort(slopes.begin(), slopes.end());
  const double c = uniform_in(rng, -1.0, 0.5);
  return [knots, slopes, c](double r) {
    double v = c + slopes[0] * r;
    for (std::size_t i = 0; i < knots.size(); ++i) v += (slopes[i + 1] - slopes[i]) * std::max(r - knots[i], 0.0);
    return v;
  };
}

TruthInstance random_instance(CounterRng& rng, std::size_t min_n, std::size_t max_n, std::size_t max_support) {
  if (min_n < 1 || max_n < min_n || max_n > kLabMaxPapers || max_support < 1 || max_support > kLabMaxSupport)
    throw ParameterError("random_instance: bounds outside the enumeration limits");
  TruthInstance inst;
  const std::size_t n = uniform_count(rng, min_n, max_n);
  for (std::size_t i = 0; i < n; ++i) inst.qualities.push_back(uniform_in(rng, -2.0, 2.0));
  std::sort(inst.qualities.begin(), inst.qualities.end(), std::greater<>());
  const std::size_t m = uniform_count(rng, 1, max_support);
  std::vector<double> support(m);
  std::vector<double> probs(m);
  for (auto& s : support) s = uniform_in(rng, -1.0, 1.0);
  double total = 0.0;
  for (auto& p : probs) total += (p = uniform_in(rng, 0.05, 1.0));
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i) acc += (probs[i] /= total);
  probs[m - 1] = 1.0 - acc;
  inst.noise = NoiseModel::discrete(std::move(support), std::move(probs));
  inst.reward = rng.below(2) == 0 ? RewardFunction::constant_one() : RewardFunction::identity_clamped();
  return inst;
}

LabMechanism random_coin_flip(CounterRng& rng) {
  auto pa = random_monotone_step(rng);
  auto rho = random_monotone_step(rng);
  return make_coin_flip({std::move(pa), std::move(rho)});
}

LabMechanism random_credit_pool(CounterRng& rng) {
  const double b1 = rng.uniform();
  auto beta = random_convex_credit(rng);
  auto pa = random_monotone_step(rng);
  return make_credit_pool({b1, std::move(beta), std::move(pa), std::nullopt});
}

LabMechanism random_naive(CounterRng& rng) { return make_naive_sequential(random_monotone_step(rng)); }

TruthInstance foil_archetype_instance(CounterRng& rng, std::size_t index) {
  TruthInstance inst;
  inst.qualities = {3.0, 3.0, -0.5, -0.5, -0.5, -0.5};
  if (index > 0) {
    for (std::size_t i = 0; i < 2; ++i) inst.qualities[i] = uniform_in(rng, 2.5, 3.5);
    for (std::size_t i = 2; i < 6; ++i) inst.qualities[i] = uniform_in(rng, -0.9, -0.1);
    std::sort(inst.qualities.begin(), inst.qualities.end(), std::greater<>());
  }
  inst.noise = NoiseModel::discrete({-1.0, 1.0}, {0.5, 0.5});
  inst.reward = RewardFunction::constant_one();
  return inst;
}

LabMechanism bundle_foil() { return make_bundle_mechanism({2, 1}, threshold_policy(0.0)); }

LabMechanism limited_pool_foil() {
  return make_credit_pool({0.0, [](double r) { return r; }, threshold_policy(0.0), 2.0});
}

}  // namespace seqreview
