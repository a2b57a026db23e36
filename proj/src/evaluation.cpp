#include "seqreview/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seqreview/errors.hpp"
#include "seqreview/format.hpp"
#include "seqreview/mechanisms.hpp"
#include "seqreview/normal.hpp"
#include "seqreview/parallel.hpp"

namespace seqreview {

namespace {

constexpr std::uint64_t kIsotonicNoiseStream = stream_id("isotonic-noise");
constexpr std::uint64_t kLiteralNoiseStream = stream_id("literal-noise");
constexpr std::uint64_t kPaperCountStream = stream_id("paper-count");

unsigned resolve_workers(unsigned workers) { return workers == 0 ? worker_count() : workers; }

EvalReport make_report(const RunningStats& s, std::size_t samples, std::uint64_t seed) {
  return {s.mean, s.std_error(), samples, seed};
}

EvalReport make_report(const RatioStats& s, std::size_t samples, std::uint64_t seed) {
  return {s.ratio(), s.std_error(), samples, seed};
}

// ---------------------------------------------------------------------------
// Per-sample Gaussian metrics.

struct SampleMetrics {
  double utility = 0.0;  // per paper
  double burden = 0.0;   // per paper
  double avg_quality = 0.0;
};

// Averages the isotonic mechanism over `draws` noise vectors.
SampleMetrics isotonic_sample(const std::vector<double>& q, double tau, double sigma_r, std::size_t draws,
                              std::uint64_t seed, std::uint64_t index) {
  const std::size_t n = q.size();
  CounterRng rng(seed, kIsotonicNoiseStream, index);
  const Permutation truthful = Permutation::identity(n);
  std::vector<double> scores(n);
  double total = 0.0;
  for (std::size_t d = 0; d < draws; ++d) {
    for (std::size_t i = 0; i < n; ++i) scores[i] = q[i] + sigma_r * rng.normal();
    const auto adjusted = isotonic_adjust(scores, truthful);
    for (std::size_t i = 0; i < n; ++i)
      if (adjusted[i] >= tau) total += q[i];
  }
  const double nd = static_cast<double>(n);
  return {total / (static_cast<double>(draws) * nd), 1.0,
          std::accumulate(q.begin(), q.end(), 0.0) / nd};
}

SampleMetrics gaussian_sample(const ThresholdPolicy& policy, const GaussianSetting& setting, std::uint64_t seed,
                              std::uint64_t index, const EvalOptions& options) {
  const auto q = draw_qualities(setting.mu_q, setting.sigma_q, setting.n, seed, index);
  if (policy.family == ThresholdFamily::kIsotonic)
    return isotonic_sample(q, policy.tau_acc, setting.sigma_r, options.isotonic_noise_draws, seed, index);

  // Location plugged into G: the quality, or the realized score when the
  // displayed formula is taken literally.
  std::vector<double> loc = q;
  if (options.literal_score_formula) {
    CounterRng rng(seed, kLiteralNoiseStream, index);
    for (auto& x : loc) x += setting.sigma_r * rng.normal();
  }
  const double tau_rev = policy.family == ThresholdFamily::kParallel ? -kInf : policy.tau_rev;
  double reach = 1.0;
  double utility = 0.0;
  double reviewed = 0.0;
  double reviewed_quality = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    utility += q[i] * reach * prob_score_at_least(loc[i], policy.tau_acc, setting.sigma_r);
    reviewed += reach;
    reviewed_quality += q[i] * reach;
    reach *= prob_score_at_least(loc[i], tau_rev, setting.sigma_r);
  }
  const double nd = static_cast<double>(q.size());
  return {utility / nd, reviewed / nd, reviewed_quality / reviewed};
}

struct MetricsAcc {
  RunningStats utility;
  RunningStats burden;
  RunningStats avg_quality;

  void push(const SampleMetrics& m) {
    utility.push(m.utility);
    burden.push(m.burden);
    avg_quality.push(m.avg_quality);
  }
  void merge(const MetricsAcc& o) {
    utility.merge(o.utility);
    burden.merge(o.burden);
    avg_quality.merge(o.avg_quality);
  }
};

GaussianMetrics to_metrics(const MetricsAcc& acc, std::size_t samples, std::uint64_t seed) {
  return {make_report(acc.utility, samples, seed), make_report(acc.burden, samples, seed),
          make_report(acc.avg_quality, samples, seed)};
}

void require_samples(std::size_t samples) {
  if (samples == 0) throw ParameterError("samples: must be positive");
}

// ---------------------------------------------------------------------------
// Matched-burden search, shared by the Gaussian and softmax models.
//
// A GateModel holds a fixed population of sampled authors. Each paper has a
// utility weight and a gate probability Pr(statistic >= tau) that is
// nonincreasing in tau.

class GateModel {
 public:
  virtual ~GateModel() = default;

  std::size_t samples() const { return offsets_.size() - 1; }
  std::size_t begin(std::size_t s) const { return offsets_[s]; }
  std::size_t end(std::size_t s) const { return offsets_[s + 1]; }
  std::size_t papers() const { return weights_.size(); }
  double weight(std::size_t p) const { return weights_[p]; }
  double paper_count(std::size_t s) const { return static_cast<double>(end(s) - begin(s)); }

  /// out[k] = Pr(gate passes at taus[k]) for paper p.
  virtual void gate_row(std::size_t p, std::span<const double> taus, double* out) const = 0;
  /// Thresholds to try inside [lo, hi] during refinement.
  virtual std::vector<double> thresholds_in(double lo, double hi, std::size_t count) const = 0;

 protected:
  std::vector<std::size_t> offsets_{0};
  std::vector<double> weights_;
};

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k)
    out[k] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  return out;
}

class GaussianGate final : public GateModel {
 public:
  GaussianGate(const GaussianSetting& setting, std::size_t samples, std::uint64_t seed) : sigma_r_(setting.sigma_r) {
    for (std::size_t s = 0; s < samples; ++s) {
      const auto q = draw_qualities(setting.mu_q, setting.sigma_q, setting.n, seed, s);
      weights_.insert(weights_.end(), q.begin(), q.end());
      offsets_.push_back(weights_.size());
    }
  }

  void gate_row(std::size_t p, std::span<const double> taus, double* out) const override {
    for (std::size_t k = 0; k < taus.size(); ++k) out[k] = prob_score_at_least(weights_[p], taus[k], sigma_r_);
  }

  std::vector<double> thresholds_in(double lo, double hi, std::size_t count) const override {
    return linspace(lo, hi, count);
  }

 private:
  double sigma_r_;
};

class SoftmaxGate final : public GateModel {
 public:
  SoftmaxGate(const SoftmaxSetting& setting, std::size_t authors, std::uint64_t seed)
      : multisets_(setting), model_(setting.score_model()), offset_(setting.desirability_offset) {
    const auto sizes = sample_sizes(setting, authors, seed);
    for (std::size_t s = 0; s < authors; ++s) {
      const auto q = draw_qualities(setting.mu_q, setting.sigma_q, sizes[s], seed, s);
      for (double x : q) {
        qualities_.push_back(x);
        weights_.push_back(x - offset_);
      }
      offsets_.push_back(weights_.size());
    }
  }

  static std::vector<std::size_t> sample_sizes(const SoftmaxSetting& setting, std::size_t authors,
                                               std::uint64_t seed) {
    std::vector<std::size_t> out(authors);
    for (std::size_t s = 0; s < authors; ++s) {
      CounterRng rng(seed, kPaperCountStream, s);
      const double u = rng.uniform();
      double cum = 0.0;
      int pick = setting.paper_count_pmf.rbegin()->first;
      for (const auto& [count, p] : setting.paper_count_pmf) {
        cum += p;
        if (u < cum) {
          pick = count;
          break;
        }
      }
      out[s] = static_cast<std::size_t>(pick);
    }
    return out;
  }

  void gate_row(std::size_t p, std::span<const double> taus, double* out) const override {
    thread_local std::vector<double> probs;
    thread_local std::vector<double> prefix;
    multisets_.multiset_probs(softmax_pmf(qualities_[p], model_), probs);
    prefix.assign(probs.size() + 1, 0.0);
    for (std::size_t m = 0; m < probs.size(); ++m) prefix[m + 1] = prefix[m] + probs[m];
    for (std::size_t k = 0; k < taus.size(); ++k) out[k] = prefix[multisets_.count_at_least(taus[k])];
  }

  // Only the posterior values themselves matter: any threshold is
  // equivalent to the smallest posterior value at or above it.
  std::vector<double> thresholds_in(double lo, double hi, std::size_t) const override {
    std::vector<double> out;
    for (double v : multisets_.posteriors())
      if (v >= lo && v <= hi) out.push_back(v);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  const ScoreMultisets& multisets() const { return multisets_; }

 private:
  ScoreMultisets multisets_;
  SoftmaxScoreModel model_;
  double offset_;
  std::vector<double> qualities_;
};

/// Gate probabilities of every paper at a list of thresholds.
struct GateTable {
  std::vector<double> taus;
  std::vector<double> probs;  // [paper * taus.size() + k]

  GateTable(const GateModel& model, std::vector<double> t, unsigned workers) : taus(std::move(t)) {
    const std::size_t k = taus.size();
    probs.resize(model.papers() * k);
    parallel_for(
        model.samples(),
        [&](std::size_t s) {
          for (std::size_t p = model.begin(s); p < model.end(s); ++p) model.gate_row(p, taus, &probs[p * k]);
        },
        workers);
  }
  double at(std::size_t p, std::size_t k) const { return probs[p * taus.size() + k]; }
};

/// Per-sample parallel utility (unnormalized) at every threshold of a table.
std::vector<double> parallel_utility_curve(const GateModel& model, const GateTable& table) {
  std::vector<double> total(table.taus.size(), 0.0);
  double papers = 0.0;
  for (std::size_t p = 0; p < model.papers(); ++p)
    for (std::size_t k = 0; k < table.taus.size(); ++k) total[k] += model.weight(p) * table.at(p, k);
  for (std::size_t s = 0; s < model.samples(); ++s) papers += model.paper_count(s);
  for (auto& x : total) x /= papers;
  return total;
}

struct ParallelOptimum {
  double tau = 0.0;
  double utility = 0.0;
  std::vector<double> per_sample;  // unnormalized utility per sample
};

ParallelOptimum optimize_parallel(const GateModel& model, double lo, double hi, std::size_t grid, unsigned workers) {
  double best_tau = 0.0;
  double best_u = -kInf;
  double width = (hi - lo) / static_cast<double>(grid - 1);
  std::vector<double> taus = linspace(lo, hi, grid);
  for (int round = 0; round < 3; ++round) {
    if (taus.empty()) break;
    const GateTable table(model, taus, workers);
    const auto curve = parallel_utility_curve(model, table);
    for (std::size_t k = 0; k < taus.size(); ++k) {
      if (curve[k] > best_u) {
        best_u = curve[k];
        best_tau = taus[k];
      }
    }
    taus = model.thresholds_in(best_tau - width, best_tau + width, 41);
    width /= 20.0;
  }
  ParallelOptimum out{best_tau, best_u, std::vector<double>(model.samples(), 0.0)};
  std::vector<double> row(1);
  const double tau[1] = {best_tau};
  for (std::size_t s = 0; s < model.samples(); ++s) {
    for (std::size_t p = model.begin(s); p < model.end(s); ++p) {
      model.gate_row(p, tau, row.data());
      out.per_sample[s] += model.weight(p) * row[0];
    }
  }
  return out;
}

struct PairCandidate {
  double tau_acc = 0.0;
  double tau_rev = -kInf;
  RunningStats gap;      // per-sample utility difference, sequential - parallel
  RatioStats burden;     // (reviewed, papers) per sample
  RatioStats utility;    // (utility, papers) per sample

  bool feasible(double z) const { return gap.mean >= -z * gap.std_error(); }
  double margin(double z) const { return gap.mean + z * gap.std_error(); }
};

/// Scores every pair (acc_taus[a], rev_taus[r]) with tau_acc >= tau_rev and
/// returns the feasible pair of least burden (ties: larger margin).
std::optional<PairCandidate> search_pairs(const GateModel& model, const std::vector<double>& acc_taus,
                                          const std::vector<double>& rev_taus, const std::vector<double>& base,
                                          double z, unsigned workers) {
  const GateTable acc(model, acc_taus, workers);
  const GateTable rev(model, rev_taus, workers);
  const std::size_t na = acc_taus.size();
  std::vector<std::optional<PairCandidate>> best_in_row(rev_taus.size());
  parallel_for(
      rev_taus.size(),
      [&](std::size_t r) {
        std::vector<PairCandidate> row(na);
        std::vector<double> u(na);
        for (std::size_t s = 0; s < model.samples(); ++s) {
          std::fill(u.begin(), u.end(), 0.0);
          double reach = 1.0;
          double reviewed = 0.0;
          for (std::size_t p = model.begin(s); p < model.end(s); ++p) {
            const double w = model.weight(p) * reach;
            for (std::size_t a = 0; a < na; ++a) u[a] += w * acc.at(p, a);
            reviewed += reach;
            reach *= rev.at(p, r);
          }
          const double papers = model.paper_count(s);
          for (std::size_t a = 0; a < na; ++a) {
            if (acc_taus[a] < rev_taus[r]) continue;
            row[a].gap.push(u[a] - base[s]);
            row[a].burden.push(reviewed, papers);
            row[a].utility.push(u[a], papers);
          }
        }
        for (std::size_t a = 0; a < na; ++a) {
          if (acc_taus[a] < rev_taus[r] || !row[a].feasible(z)) continue;
          row[a].tau_acc = acc_taus[a];
          row[a].tau_rev = rev_taus[r];
          auto& cur = best_in_row[r];
          if (!cur || row[a].margin(z) > cur->margin(z)) cur = row[a];
        }
      },
      workers);
  std::optional<PairCandidate> best;
  for (const auto& c : best_in_row) {
    if (!c) continue;
    const double b = c->burden.ratio();
    if (!best || b < best->burden.ratio() || (b == best->burden.ratio() && c->margin(z) > best->margin(z)))
      best = c;
  }
  return best;
}

MatchedBurdenResult run_matched_search(const GateModel& model, double lo, double hi, const MatchedBurdenConfig& config,
                                       std::uint64_t seed) {
  const unsigned workers = worker_count();
  const auto par = optimize_parallel(model, lo, hi, config.grid_points, workers);

  MatchedBurdenResult out;
  out.parallel = ThresholdPolicy::parallel(par.tau);
  out.sequential = ThresholdPolicy::sequential(par.tau, -kInf);
  out.parallel_utility = par.utility;
  out.sequential_utility = par.utility;
  out.relative_burden = 1.0;
  out.samples = model.samples();
  out.seed = seed;

  const auto grid = linspace(lo, hi, config.grid_points);
  auto best = search_pairs(model, grid, grid, par.per_sample, config.z, workers);
  double width = (hi - lo) / static_cast<double>(config.grid_points - 1);
  for (int round = 0; best && round < 2; ++round) {
    const auto acc = model.thresholds_in(best->tau_acc - width, best->tau_acc + width, 41);
    const auto rev = model.thresholds_in(best->tau_rev - width, best->tau_rev + width, 41);
    if (!acc.empty() && !rev.empty()) {
      auto refined = search_pairs(model, acc, rev, par.per_sample, config.z, workers);
      if (refined && refined->burden.ratio() <= best->burden.ratio()) best = refined;
    }
    width /= 20.0;
  }
  if (best && best->burden.ratio() < 1.0) {
    out.sequential = ThresholdPolicy::sequential(best->tau_acc, best->tau_rev);
    out.sequential_utility = best->utility.ratio();
    out.relative_burden = best->burden.ratio();
    out.std_error = best->burden.std_error();
    // Per-sample gaps are totals over an author's papers; report the
    // standard error on the per-paper scale of the utilities.
    out.gap_std_error = best->gap.std_error() * static_cast<double>(model.samples()) /
                        static_cast<double>(model.papers());
  }
  return out;
}

std::size_t binomial_count(std::size_t n, std::size_t k) {
  double c = 1.0;
  for (std::size_t i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return static_cast<std::size_t>(std::llround(c));
}

}  // namespace

// ---------------------------------------------------------------------------

void GaussianSetting::validate() const {
  if (n == 0) throw ParameterError("n: must be a positive integer");
  if (!std::isfinite(mu_q)) throw ParameterError("mu_q: must be finite");
  if (!(sigma_q > 0.0) || !std::isfinite(sigma_q)) throw ParameterError("sigma_q: must be positive");
  if (!(sigma_r > 0.0) || !std::isfinite(sigma_r)) throw ParameterError("sigma_r: must be positive");
}

std::string family_name(ThresholdFamily family) {
  switch (family) {
    case ThresholdFamily::kParallel: return "parallel";
    case ThresholdFamily::kSequential: return "sequential";
    case ThresholdFamily::kIsotonic: return "isotonic";
  }
  return "unknown";
}

ThresholdFamily parse_family(const std::string& name) {
  if (name == "parallel") return ThresholdFamily::kParallel;
  if (name == "sequential" || name == "threshold-seq") return ThresholdFamily::kSequential;
  if (name == "isotonic") return ThresholdFamily::kIsotonic;
  throw ParameterError("mechanism: unknown threshold family '" + name + "'");
}

void ThresholdPolicy::validate() const {
  if (std::isnan(tau_acc)) throw ParameterError("tau_acc: must not be NaN");
  if (std::isnan(tau_rev)) throw ParameterError("tau_rev: must not be NaN");
  if (family == ThresholdFamily::kSequential && tau_acc < tau_rev)
    throw ParameterError("tau_rev: must not exceed tau_acc");
}

std::string ThresholdPolicy::to_string() const {
  std::string out = family_name(family) + "(tau_acc=" + format_double(tau_acc);
  if (family == ThresholdFamily::kSequential) out += ", tau_rev=" + format_double(tau_rev);
  return out + ")";
}

double parallel_accept_prob(double quality, double tau, double sigma_r) {
  if (!(sigma_r > 0.0)) throw ParameterError("sigma_r: must be positive");
  return prob_score_at_least(quality, tau, sigma_r);
}

SequentialProbs sequential_accept_probs(std::span<const double> qualities, double tau_acc, double tau_rev,
                                        double sigma_r) {
  if (!(sigma_r > 0.0)) throw ParameterError("sigma_r: must be positive");
  if (tau_acc < tau_rev) throw ParameterError("tau_rev: must not exceed tau_acc");
  SequentialProbs out;
  double reach = 1.0;
  for (double q : qualities) {
    out.review.push_back(reach);
    out.accept.push_back(reach * prob_score_at_least(q, tau_acc, sigma_r));
    reach *= prob_score_at_least(q, tau_rev, sigma_r);
  }
  return out;
}

GaussianMetrics evaluate_gaussian(const ThresholdPolicy& policy, const GaussianSetting& setting,
                                  std::size_t samples, std::uint64_t seed, const EvalOptions& options) {
  setting.validate();
  policy.validate();
  require_samples(samples);
  if (policy.family == ThresholdFamily::kIsotonic && options.isotonic_noise_draws == 0)
    throw ParameterError("isotonic_noise_draws: must be positive");
  const auto acc = reduce_blocks<MetricsAcc>(
      samples,
      [&](std::size_t begin, std::size_t end) {
        MetricsAcc a;
        for (std::size_t s = begin; s < end; ++s) a.push(gaussian_sample(policy, setting, seed, s, options));
        return a;
      },
      resolve_workers(options.workers));
  return to_metrics(acc, samples, seed);
}

EvalReport mc_conference_utility(const ThresholdPolicy& policy, const GaussianSetting& setting,
                                 std::size_t samples, std::uint64_t seed, const EvalOptions& options) {
  return evaluate_gaussian(policy, setting, samples, seed, options).utility;
}

EvalReport mc_review_burden(const ThresholdPolicy& policy, const GaussianSetting& setting, std::size_t samples,
                            std::uint64_t seed, const EvalOptions& options) {
  return evaluate_gaussian(policy, setting, samples, seed, options).burden;
}

EvalReport avg_reviewed_quality(const ThresholdPolicy& policy, const GaussianSetting& setting,
                                std::size_t samples, std::uint64_t seed, const EvalOptions& options) {
  return evaluate_gaussian(policy, setting, samples, seed, options).avg_reviewed_quality;
}

MechanismTriple threshold_triple(const ThresholdPolicy& policy) {
  policy.validate();
  switch (policy.family) {
    case ThresholdFamily::kParallel: return make_threshold_sequential({policy.tau_acc, -kInf});
    case ThresholdFamily::kSequential: return make_threshold_sequential({policy.tau_acc, policy.tau_rev});
    case ThresholdFamily::kIsotonic: break;
  }
  throw UnsupportedMechanism("the isotonic mechanism is not a sequential triple");
}

GaussianMetrics simulate_gaussian(const MechanismTriple& triple, const GaussianSetting& setting,
                                  std::size_t samples, std::uint64_t seed) {
  setting.validate();
  require_samples(samples);
  const NoiseModel noise = NoiseModel::gaussian(setting.sigma_r);
  const Permutation truthful = Permutation::identity(setting.n);
  const double nd = static_cast<double>(setting.n);
  const auto acc = reduce_blocks<MetricsAcc>(samples, [&](std::size_t begin, std::size_t end) {
    MetricsAcc a;
    for (std::size_t s = begin; s < end; ++s) {
      const auto q = draw_qualities(setting.mu_q, setting.sigma_q, setting.n, seed, s);
      const auto outcome = run_mechanism(triple, q, truthful, noise, derive_seed(seed, "simulate", s));
      double reviewed_quality = 0.0;
      for (std::size_t t = 0; t < setting.n; ++t)
        if (outcome.reviewed[t]) reviewed_quality += q[outcome.paper_at(t)];
      const double reviewed = static_cast<double>(outcome.reviewed_count());
      a.push({conference_utility(outcome, q) / nd, reviewed / nd, reviewed_quality / reviewed});
    }
    return a;
  });
  return to_metrics(acc, samples, seed);
}

GaussianMetrics simulate_gaussian(const ThresholdPolicy& policy, const GaussianSetting& setting,
                                  std::size_t samples, std::uint64_t seed) {
  if (policy.family != ThresholdFamily::kIsotonic) return simulate_gaussian(threshold_triple(policy), setting, samples, seed);
  setting.validate();
  require_samples(samples);
  const Permutation truthful = Permutation::identity(setting.n);
  const double nd = static_cast<double>(setting.n);
  const auto acc = reduce_blocks<MetricsAcc>(samples, [&](std::size_t begin, std::size_t end) {
    MetricsAcc a;
    for (std::size_t s = begin; s < end; ++s) {
      const auto q = draw_qualities(setting.mu_q, setting.sigma_q, setting.n, seed, s);
      CounterRng rng(derive_seed(seed, "simulate", s), kScoreStream, 0);
      std::vector<double> scores(q.size());
      for (std::size_t i = 0; i < q.size(); ++i) scores[i] = q[i] + setting.sigma_r * rng.normal();
      const auto accepted = isotonic_mechanism_accept(scores, truthful, policy.tau_acc);
      double u = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i)
        if (accepted[i]) u += q[i];
      a.push({u / nd, 1.0, std::accumulate(q.begin(), q.end(), 0.0) / nd});
    }
    return a;
  });
  return to_metrics(acc, samples, seed);
}

// ---------------------------------------------------------------------------
// Threshold optimization.

void SGDConfig::validate() const {
  if (!(step_size > 0.0)) throw ParameterError("step_size: must be positive");
  if (!(fd_step > 0.0)) throw ParameterError("fd_step: must be positive");
  if (iterations == 0) throw ParameterError("iterations: must be positive");
  if (samples == 0) throw ParameterError("samples: must be positive");
  if (final_samples == 0) throw ParameterError("final_samples: must be positive");
}

namespace {

ThresholdPolicy policy_from(ThresholdFamily family, const std::vector<double>& x) {
  if (family == ThresholdFamily::kSequential) return ThresholdPolicy::sequential(x[0], x[1]);
  return {family, x[0], -kInf};
}

void project(ThresholdFamily family, std::vector<double>& x) {
  if (family == ThresholdFamily::kSequential && x[0] < x[1]) x[0] = x[1] = 0.5 * (x[0] + x[1]);
}

ThresholdPolicy warm_start(ThresholdFamily family, const GaussianSetting& setting, const SGDConfig& config,
                           const EvalOptions& options) {
  const double sd = std::sqrt(setting.sigma_q * setting.sigma_q + setting.sigma_r * setting.sigma_r);
  const auto grid = linspace(setting.mu_q - 3.0 * sd, setting.mu_q + 3.0 * sd, 13);
  const std::uint64_t seed = derive_seed(config.seed, "warm-start", 0);
  auto value = [&](const ThresholdPolicy& p) {
    return mc_conference_utility(p, setting, config.samples, seed, options).estimate;
  };
  ThresholdPolicy best = policy_from(family, {grid[0], setting.mu_q - 6.0 * sd});
  double best_u = -kInf;
  if (family == ThresholdFamily::kSequential) {
    std::vector<double> rev{setting.mu_q - 6.0 * sd};
    rev.insert(rev.end(), grid.begin(), grid.end());
    for (double a : grid) {
      for (double r : rev) {
        if (r > a) continue;
        const auto p = ThresholdPolicy::sequential(a, r);
        const double u = value(p);
        if (u > best_u) {
          best_u = u;
          best = p;
        }
      }
    }
  } else {
    for (double a : grid) {
      const auto p = policy_from(family, {a});
      const double u = value(p);
      if (u > best_u) {
        best_u = u;
        best = p;
      }
    }
  }
  return best;
}

}  // namespace

OptimizeResult optimize_thresholds(ThresholdFamily family, const GaussianSetting& setting, const SGDConfig& config,
                                   const EvalOptions& options, std::optional<ThresholdPolicy> start) {
  setting.validate();
  config.validate();
  if (start && start->family != family) throw ParameterError("start: policy family does not match");
  ThresholdPolicy initial = start ? *start
                            : config.warm_start
                                ? warm_start(family, setting, config, options)
                                : policy_from(family, {0.0, -kInf});
  initial.validate();

  const std::size_t dim = family == ThresholdFamily::kSequential ? 2 : 1;
  std::vector<double> x{initial.tau_acc};
  if (dim == 2) x.push_back(initial.tau_rev);
  // Points at -inf stay there; only finite coordinates move.
  std::vector<double> sum(dim, 0.0);
  std::size_t averaged = 0;
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    const std::uint64_t seed_t = derive_seed(config.seed, "sgd", t);
    const double lr = config.step_size / std::sqrt(static_cast<double>(t));
    std::vector<double> grad(dim, 0.0);
    for (std::size_t d = 0; d < dim; ++d) {
      if (!std::isfinite(x[d])) continue;
      auto plus = x;
      auto minus = x;
      plus[d] += config.fd_step;
      minus[d] -= config.fd_step;
      project(family, plus);
      project(family, minus);
      const double up = mc_conference_utility(policy_from(family, plus), setting, config.samples, seed_t, options).estimate;
      const double down =
          mc_conference_utility(policy_from(family, minus), setting, config.samples, seed_t, options).estimate;
      grad[d] = (up - down) / (2.0 * config.fd_step);
    }
    for (std::size_t d = 0; d < dim; ++d) x[d] += lr * grad[d];
    project(family, x);
    if (2 * t > config.iterations) {
      for (std::size_t d = 0; d < dim; ++d) sum[d] += x[d];
      ++averaged;
    }
  }
  std::vector<double> avg(dim);
  for (std::size_t d = 0; d < dim; ++d) avg[d] = std::isfinite(x[d]) ? sum[d] / static_cast<double>(averaged) : x[d];
  project(family, avg);

  const std::uint64_t final_seed = derive_seed(config.seed, "final", 0);
  auto evaluate = [&](const ThresholdPolicy& p) {
    return mc_conference_utility(p, setting, config.final_samples, final_seed, options);
  };
  OptimizeResult out;
  out.initial = initial;
  out.initial_utility = evaluate(initial);
  out.policy = initial;
  out.utility = out.initial_utility;
  out.chosen = "initial";
  const std::pair<const char*, ThresholdPolicy> candidates[] = {{"last", policy_from(family, x)},
                                                                {"average", policy_from(family, avg)}};
  for (const auto& [name, policy] : candidates) {
    const auto report = evaluate(policy);
    if (report.estimate > out.utility.estimate) {
      out.policy = policy;
      out.utility = report;
      out.chosen = name;
    }
  }
  out.improved = out.chosen != "initial";
  return out;
}

double relative_utility(double u_parallel, double u_sequential, double u_isotonic) {
  if (u_isotonic == u_parallel) throw ParameterError("relative_utility: upper bound equals the baseline");
  return (u_sequential - u_parallel) / (u_isotonic - u_parallel);
}

EvalReport relative_utility_report(const ThresholdPolicy& parallel, const ThresholdPolicy& sequential,
                                   const ThresholdPolicy& isotonic, const GaussianSetting& setting,
                                   std::size_t samples, std::uint64_t seed, const EvalOptions& options) {
  setting.validate();
  require_samples(samples);
  const auto acc = reduce_blocks<RatioStats>(
      samples,
      [&](std::size_t begin, std::size_t end) {
        RatioStats r;
        for (std::size_t s = begin; s < end; ++s) {
          const double up = gaussian_sample(parallel, setting, seed, s, options).utility;
          const double us = gaussian_sample(sequential, setting, seed, s, options).utility;
          const double ui = gaussian_sample(isotonic, setting, seed, s, options).utility;
          r.push(us - up, ui - up);
        }
        return r;
      },
      resolve_workers(options.workers));
  if (acc.mean_y == 0.0) throw ParameterError("relative_utility: upper bound equals the baseline");
  return make_report(acc, samples, seed);
}

void MatchedBurdenConfig::validate() const {
  if (samples < 2) throw ParameterError("samples: must be at least 2");
  if (grid_points < 3) throw ParameterError("grid_points: must be at least 3");
  if (!(z >= 0.0)) throw ParameterError("z: must be nonnegative");
}

MatchedBurdenResult matched_burden(const GaussianSetting& setting, std::uint64_t seed,
                                   const MatchedBurdenConfig& config) {
  setting.validate();
  config.validate();
  const GaussianGate model(setting, config.samples, seed);
  const double sd = std::sqrt(setting.sigma_q * setting.sigma_q + setting.sigma_r * setting.sigma_r);
  return run_matched_search(model, setting.mu_q - 4.0 * sd, setting.mu_q + 4.0 * sd, config, seed);
}

// ---------------------------------------------------------------------------
// Softmax model.

void SoftmaxSetting::validate() const {
  if (paper_count_pmf.empty()) throw ParameterError("paper_count_pmf: must not be empty");
  double total = 0.0;
  for (const auto& [count, p] : paper_count_pmf) {
    if (count < 1) throw ParameterError("paper_count_pmf: paper counts must be positive");
    if (!(p >= 0.0) || !std::isfinite(p)) throw ParameterError("paper_count_pmf: probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError("paper_count_pmf: probabilities must sum to 1");
  if (reviews_per_paper == 0) throw ParameterError("reviews_per_paper: must be positive");
  if (!std::isfinite(mu_q)) throw ParameterError("mu_q: must be finite");
  if (!(sigma_q > 0.0) || !std::isfinite(sigma_q)) throw ParameterError("sigma_q: must be positive");
  if (!std::isfinite(desirability_offset)) throw ParameterError("desirability_offset: must be finite");
  score_model().validate();
  if (binomial_count(score_set.size() + reviews_per_paper - 1, reviews_per_paper) > 1'000'000)
    throw ParameterError("reviews_per_paper: too many score multisets");
}

double SoftmaxSetting::mean_paper_count() const {
  double m = 0.0;
  for (const auto& [count, p] : paper_count_pmf) m += count * p;
  return m;
}

PosteriorGrid::PosteriorGrid(double mu_q, double sigma_q, const SoftmaxScoreModel& model)
    : mu_(mu_q), sigma_(sigma_q), model_(model) {
  if (!std::isfinite(mu_q)) throw ParameterError("mu_q: must be finite");
  if (!(sigma_q > 0.0)) throw ParameterError("sigma_q: must be positive");
  model_.validate();
  nodes_.resize(kPosteriorGridPoints);
  log_prior_.resize(kPosteriorGridPoints);
  log_lik_.assign(model_.score_set.size(), std::vector<double>(kPosteriorGridPoints));
  for (std::size_t g = 0; g < kPosteriorGridPoints; ++g) {
    const double z = -kPosteriorGridWidth +
                     2.0 * kPosteriorGridWidth * static_cast<double>(g) / static_cast<double>(kPosteriorGridPoints - 1);
    nodes_[g] = mu_ + sigma_ * z;
    log_prior_[g] = -0.5 * z * z;
    const auto lp = softmax_log_pmf(nodes_[g], model_);
    for (std::size_t j = 0; j < lp.size(); ++j) log_lik_[j][g] = lp[j];
  }
}

std::size_t PosteriorGrid::index_of(int score) const {
  const auto it = std::lower_bound(model_.score_set.begin(), model_.score_set.end(), score);
  if (it == model_.score_set.end() || *it != score)
    throw ParameterError("scores: " + std::to_string(score) + " is not in the score set");
  return static_cast<std::size_t>(it - model_.score_set.begin());
}

namespace {

// Log posterior weights on the grid and their maximum.
double log_weights(const std::vector<double>& log_prior, const std::vector<std::vector<double>>& log_lik,
                   const std::vector<std::size_t>& idx, std::vector<double>& lw) {
  lw = log_prior;
  for (std::size_t j : idx)
    for (std::size_t g = 0; g < lw.size(); ++g) lw[g] += log_lik[j][g];
  return *std::max_element(lw.begin(), lw.end());
}

}  // namespace

double PosteriorGrid::expected_quality(std::span<const int> scores) const {
  std::vector<std::size_t> idx;
  for (int s : scores) idx.push_back(index_of(s));
  std::vector<double> lw;
  const double top = log_weights(log_prior_, log_lik_, idx, lw);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t g = 0; g < lw.size(); ++g) {
    const double w = std::exp(lw[g] - top);
    num += w * nodes_[g];
    den += w;
  }
  return num / den;
}

double PosteriorGrid::log_marginal(std::span<const int> scores) const {
  std::vector<std::size_t> idx;
  for (int s : scores) idx.push_back(index_of(s));
  std::vector<double> lw;
  const double top = log_weights(log_prior_, log_lik_, idx, lw);
  double den = 0.0;
  for (double l : lw) den += std::exp(l - top);
  return top + std::log(den);
}

double posterior_expected_quality(std::span<const int> scores, double mu_q, double sigma_q,
                                  const SoftmaxScoreModel& model) {
  return PosteriorGrid(mu_q, sigma_q, model).expected_quality(scores);
}

ScoreMultisets::ScoreMultisets(const SoftmaxSetting& setting) {
  setting.validate();
  const PosteriorGrid grid(setting.mu_q, setting.sigma_q, setting.score_model());
  const std::size_t m = setting.score_set.size();
  const std::size_t k = setting.reviews_per_paper;
  struct Entry {
    double posterior;
    std::vector<std::pair<std::size_t, int>> counts;
    double coef;
  };
  std::vector<Entry> entries;
  std::vector<std::size_t> idx(k, 0);
  std::vector<int> scores(k);
  std::vector<double> log_factorial(k + 1, 0.0);
  for (std::size_t i = 1; i <= k; ++i) log_factorial[i] = log_factorial[i - 1] + std::log(static_cast<double>(i));
  while (true) {
    for (std::size_t j = 0; j < k; ++j) scores[j] = setting.score_set[idx[j]];
    Entry e{grid.expected_quality(scores), {}, 0.0};
    double log_coef = log_factorial[k];
    for (std::size_t j = 0; j < k;) {
      std::size_t c = 1;
      while (j + c < k && idx[j + c] == idx[j]) ++c;
      e.counts.emplace_back(idx[j], static_cast<int>(c));
      log_coef -= log_factorial[c];
      j += c;
    }
    e.coef = std::exp(log_coef);
    entries.push_back(std::move(e));
    // Next nondecreasing index tuple.
    std::size_t j = k;
    while (j > 0 && idx[j - 1] == m - 1) --j;
    if (j == 0) break;
    ++idx[j - 1];
    for (std::size_t t = j; t < k; ++t) idx[t] = idx[j - 1];
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.posterior > b.posterior; });
  for (auto& e : entries) {
    posterior_.push_back(e.posterior);
    counts_.push_back(std::move(e.counts));
    coef_.push_back(e.coef);
  }
}

std::size_t ScoreMultisets::count_at_least(double tau) const {
  return static_cast<std::size_t>(
      std::partition_point(posterior_.begin(), posterior_.end(), [tau](double v) { return v >= tau; }) -
      posterior_.begin());
}

void ScoreMultisets::multiset_probs(std::span<const double> score_pmf, std::vector<double>& out) const {
  out.resize(coef_.size());
  for (std::size_t m = 0; m < coef_.size(); ++m) {
    double p = coef_[m];
    for (const auto& [j, c] : counts_[m])
      for (int r = 0; r < c; ++r) p *= score_pmf[j];
    out[m] = p;
  }
}

SoftmaxMetrics softmax_population_eval(const ThresholdPolicy& policy, const SoftmaxSetting& setting,
                                       std::size_t authors, std::uint64_t seed, unsigned workers) {
  policy.validate();
  require_samples(authors);
  if (policy.family == ThresholdFamily::kIsotonic)
    throw UnsupportedMechanism("the softmax evaluation supports parallel and sequential thresholds only");
  const ScoreMultisets multisets(setting);
  const auto model = setting.score_model();
  const auto sizes = SoftmaxGate::sample_sizes(setting, authors, seed);
  const std::size_t acc_count = multisets.count_at_least(policy.tau_acc);
  const std::size_t rev_count =
      policy.family == ThresholdFamily::kParallel ? multisets.size() : multisets.count_at_least(policy.tau_rev);

  struct Acc {
    RatioStats utility;
    RatioStats burden;
    void merge(const Acc& o) {
      utility.merge(o.utility);
      burden.merge(o.burden);
    }
  };
  const auto acc = reduce_blocks<Acc>(
      authors,
      [&](std::size_t begin, std::size_t end) {
        Acc a;
        std::vector<double> probs;
        for (std::size_t s = begin; s < end; ++s) {
          const auto q = draw_qualities(setting.mu_q, setting.sigma_q, sizes[s], seed, s);
          double reach = 1.0;
          double utility = 0.0;
          double reviewed = 0.0;
          for (double x : q) {
            multisets.multiset_probs(softmax_pmf(x, model), probs);
            double pass_acc = 0.0;
            double pass_rev = 0.0;
            for (std::size_t m = 0; m < probs.size(); ++m) {
              if (m < acc_count) pass_acc += probs[m];
              if (m < rev_count) pass_rev += probs[m];
            }
            utility += (x - setting.desirability_offset) * reach * pass_acc;
            reviewed += reach;
            reach *= pass_rev;
          }
          const double papers = static_cast<double>(q.size());
          a.utility.push(utility, papers);
          a.burden.push(reviewed, papers);
        }
        return a;
      },
      resolve_workers(workers));
  return {make_report(acc.utility, authors, seed), make_report(acc.burden, authors, seed)};
}

MatchedBurdenResult matched_burden_softmax(const SoftmaxSetting& setting, std::uint64_t seed,
                                           const MatchedBurdenConfig& config) {
  setting.validate();
  config.validate();
  const SoftmaxGate model(setting, config.samples, seed);
  const auto& post = model.multisets().posteriors();
  return run_matched_search(model, post.back(), post.front(), config, seed);
}

std::map<int, double> truncated_geometric_pmf(double mean, int max_count) {
  if (max_count < 1) throw ParameterError("max_count: must be positive");
  if (!(mean >= 1.0) || !(mean <= max_count)) throw ParameterError("mean: must lie in [1, max_count]");
  auto pmf_for = [max_count](double log_r) {
    std::vector<double> w(static_cast<std::size_t>(max_count));
    // Normalize in log space around the largest term.
    const double top = log_r > 0.0 ? log_r * (max_count - 1) : 0.0;
    double total = 0.0;
    for (int n = 1; n <= max_count; ++n) total += w[n - 1] = std::exp(log_r * (n - 1) - top);
    for (auto& x : w) x /= total;
    return w;
  };
  auto mean_of = [](const std::vector<double>& w) {
    double m = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) m += static_cast<double>(i + 1) * w[i];
    return m;
  };
  std::map<int, double> out;
  if (max_count == 1 || mean == 1.0) {
    out[1] = 1.0;
    return out;
  }
  if (mean == max_count) {
    out[max_count] = 1.0;
    return out;
  }
  double lo = -60.0;
  double hi = 60.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_of(pmf_for(mid)) < mean ? lo : hi) = mid;
  }
  const auto w = pmf_for(0.5 * (lo + hi));
  for (int n = 1; n <= max_count; ++n) out[n] = w[n - 1];
  return out;
}

}  // namespace seqreview
