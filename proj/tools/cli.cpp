#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "seqreview/effort.hpp"
#include "seqreview/errors.hpp"
#include "seqreview/evaluation.hpp"
#include "seqreview/format.hpp"
#include "seqreview/ingestion.hpp"
#include "seqreview/mechanisms.hpp"
#include "seqreview/truth_lab.hpp"

namespace seqreview::cli {

namespace {

constexpr int kRuntimeFailure = 1;
constexpr int kConfigFailure = 2;

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return trim(text);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(trim(item));
  return parts;
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  if (!parse_double(text, v)) throw ConfigError(key, "expected a number, got '" + text + "'");
  return v;
}

std::vector<double> parse_number_list(const std::string& key, const std::string& text) {
  std::vector<double> values;
  for (const auto& part : split(text, ',')) values.push_back(parse_number(key, part));
  if (values.empty()) throw ConfigError(key, "expected a comma-separated list of numbers");
  return values;
}

std::size_t parse_count(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e9) throw ConfigError(key, "expected a nonnegative integer");
  return static_cast<std::size_t>(v);
}

/// "5", "2,3,5" or the inclusive range "2..10".
std::vector<std::size_t> parse_count_list(const std::string& key, const std::string& text) {
  std::vector<std::size_t> values;
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const auto lo = parse_count(key, trim(text.substr(0, dots)));
    const auto hi = parse_count(key, trim(text.substr(dots + 2)));
    if (lo > hi) throw ConfigError(key, "empty range '" + text + "'");
    for (std::size_t v = lo; v <= hi; ++v) values.push_back(v);
  } else {
    for (const auto& part : split(text, ',')) values.push_back(parse_count(key, part));
  }
  if (values.empty()) throw ConfigError(key, "expected at least one value");
  return values;
}

/// "1:0.5,2:0.5".
std::map<int, double> parse_pmf(const std::string& key, const std::string& text) {
  std::map<int, double> pmf;
  for (const auto& part : split(text, ',')) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw ConfigError(key, "expected entries of the form count:probability");
    const auto count = parse_count(key, trim(part.substr(0, colon)));
    if (count == 0 || !pmf.emplace(static_cast<int>(count), parse_number(key, trim(part.substr(colon + 1)))).second)
      throw ConfigError(key, "paper counts must be positive and distinct");
  }
  double total = 0.0;
  for (const auto& [count, p] : pmf) {
    if (!(p >= 0.0)) throw ConfigError(key, "probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ConfigError(key, "probabilities must sum to 1");
  return pmf;
}

double parse_threshold(const std::string& key, const std::string& text) {
  const double v = parse_number(key, text);
  if (std::isnan(v)) throw ConfigError(key, "threshold must not be NaN");
  return v;
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string join_numbers(const std::vector<double>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ";" : "") + format_double(values[i]);
  return s;
}

std::string join_counts(const std::vector<std::size_t>& values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? ";" : "") + std::to_string(values[i]);
  return s;
}

/// Comma-separated output with a fixed header.
class Csv {
 public:
  Csv(std::ostream& os, const std::vector<std::string>& header) : os_(os), width_(header.size()) { write(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
    write(cells);
  }

 private:
  void write(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }
  std::ostream& os_;
  std::size_t width_;
};

// ---------------------------------------------------------------------------
// Option sets.

const CLI::Validator kPositive(
    [](std::string& text) {
      double v = 0.0;
      return parse_double(text, v) && v > 0.0 ? std::string() : std::string("must be positive");
    },
    "POSITIVE");

const CLI::Validator kNonNegative(
    [](std::string& text) {
      double v = 0.0;
      return parse_double(text, v) && v >= 0.0 ? std::string() : std::string("must be nonnegative");
    },
    "NONNEGATIVE");

struct CommonOptions {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
};

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("--config", o.config, "Flat key = value file; flags override its entries");
  sub->add_option("--seed", o.seed, "Random seed (required)")->required();
  sub->add_option("--out", o.out, "Output file (default: standard output)");
}

struct GaussianOptions {
  std::string n = "5";
  std::optional<double> mu_q;
  std::optional<double> sigma_q;
  double sigma_r = 1.0;
};

void add_gaussian(CLI::App* sub, GaussianOptions& o, bool allow_list) {
  sub->add_option("--n", o.n, allow_list ? "Papers per author: a value, a list 2,3,5 or a range 2..10"
                                          : "Papers per author");
  sub->add_option("--mu_q,--mu-q", o.mu_q, "Prior mean of paper quality");
  sub->add_option("--sigma_q,--sigma-q", o.sigma_q, "Prior standard deviation of paper quality")
      ->check(kPositive);
  sub->add_option("--sigma_r,--sigma-r", o.sigma_r, "Review noise standard deviation (Gaussian setting)")
      ->check(kPositive);
}

GaussianSetting gaussian_setting(const GaussianOptions& o, std::size_t n) {
  GaussianSetting s;
  s.n = n;
  s.mu_q = o.mu_q.value_or(s.mu_q);
  s.sigma_q = o.sigma_q.value_or(s.sigma_q);
  s.sigma_r = o.sigma_r;
  if (s.n == 0) throw ConfigError("n", "must be at least 1");
  if (!std::isfinite(s.mu_q)) throw ConfigError("mu_q", "must be finite");
  return s;
}

struct SoftmaxOptions {
  std::string model;
  std::optional<double> temperature;
  std::optional<std::size_t> reviews_per_paper;
  std::string paper_counts;
  std::string paper_count_mean;
  std::size_t max_papers = 8;
  std::optional<double> desirability_offset;
  int score_min = 1;
  int score_max = 10;
};

void add_softmax(CLI::App* sub, SoftmaxOptions& o) {
  sub->add_option("--model", o.model, "Fitted model document (softmax setting)");
  sub->add_option("--temperature", o.temperature, "Softmax review temperature t_r")->check(kNonNegative);
  sub->add_option("--reviews_per_paper,--reviews-per-paper", o.reviews_per_paper, "Scores per paper")
      ->check(kPositive);
  sub->add_option("--paper_counts,--paper-counts", o.paper_counts, "Paper-count pmf, e.g. 1:0.6,2:0.4");
  sub->add_option("--paper_count_mean,--paper-count-mean", o.paper_count_mean,
                  "Mean of a truncated geometric paper-count pmf (a value or a list)");
  sub->add_option("--max_papers,--max-papers", o.max_papers, "Support bound of the truncated geometric pmf")
      ->check(CLI::Range(1, 64));
  sub->add_option("--desirability_offset,--desirability-offset", o.desirability_offset,
                  "Conference value of accepting quality q is q minus this offset");
  sub->add_option("--score_min,--score-min", o.score_min, "Lowest review score");
  sub->add_option("--score_max,--score-max", o.score_max, "Highest review score");
}

/// Softmax settings, one per requested paper-count mean (or a single one).
std::vector<SoftmaxSetting> softmax_settings(const SoftmaxOptions& o, const GaussianOptions& g) {
  SoftmaxSetting base;
  if (!o.model.empty()) {
    try {
      base = read_fitted_model(o.model).to_setting();
    } catch (const std::exception& e) {
      throw ConfigError("model", one_line(e.what()));
    }
  } else {
    if (o.score_min >= o.score_max) throw ConfigError("score_max", "must exceed score_min");
    base.score_set.clear();
    for (int s = o.score_min; s <= o.score_max; ++s) base.score_set.push_back(s);
  }
  if (g.mu_q) base.mu_q = *g.mu_q;
  if (g.sigma_q) base.sigma_q = *g.sigma_q;
  if (o.temperature) base.temperature = *o.temperature;
  if (o.reviews_per_paper) base.reviews_per_paper = *o.reviews_per_paper;
  if (o.desirability_offset) base.desirability_offset = *o.desirability_offset;
  if (!o.paper_counts.empty() && !o.paper_count_mean.empty())
    throw ConfigError("paper_count_mean", "conflicts with paper_counts");
  if (!o.paper_counts.empty()) base.paper_count_pmf = parse_pmf("paper_counts", o.paper_counts);
  std::vector<SoftmaxSetting> settings;
  if (o.paper_count_mean.empty()) {
    settings.push_back(base);
  } else {
    for (double mean : parse_number_list("paper_count_mean", o.paper_count_mean)) {
      if (!(mean >= 1.0 && mean < static_cast<double>(o.max_papers)))
        throw ConfigError("paper_count_mean", "must lie in [1, max_papers)");
      auto s = base;
      s.paper_count_pmf = truncated_geometric_pmf(mean, static_cast<int>(o.max_papers));
      settings.push_back(s);
    }
  }
  for (const auto& s : settings) {
    try {
      s.validate();
    } catch (const ParameterError& e) {
      throw ConfigError("setting", one_line(e.what()));
    }
  }
  return settings;
}

const std::vector<std::string> kMechanismNames{"parallel", "naive",   "coinflip", "creditpool", "threshold-seq",
                                               "isotonic", "bundle", "limited-creditpool"};

struct SimulateOptions {
  CommonOptions common;
  GaussianOptions gaussian;
  SoftmaxOptions softmax;
  std::string setting = "gaussian";
  std::string mechanism = "parallel";
  std::string method;
  std::string tau_acc = "0";
  std::string tau_rev = "-inf";
  std::size_t samples = 10'000;
  std::size_t isotonic_noise_draws = 100;
  double rho = 0.5;
  double initial_credit = 0.0;
  double beta_slope = 1.0;
  double beta_intercept = 0.0;
  double credit_cap = 2.0;
  std::size_t bundle_size = 2;
  std::size_t continuation = 1;
};

struct OptimizeOptions {
  CommonOptions common;
  GaussianOptions gaussian;
  std::string mechanism = "all";
  std::string tau_acc;
  std::string tau_rev;
  std::size_t iterations = 200;
  std::size_t samples = 10'000;
  std::size_t final_samples = 100'000;
  double step_size = 0.2;
  double fd_step = 0.05;
  bool warm_start = true;
  std::size_t isotonic_noise_draws = 100;
};

struct BurdenOptions {
  CommonOptions common;
  GaussianOptions gaussian;
  SoftmaxOptions softmax;
  std::string setting = "gaussian";
  std::size_t samples = 10'000;
  std::size_t grid_points = 41;
  double z = 2.0;
};

struct FitOptionsCli {
  CommonOptions common;
  std::string data;
  std::string prior_method = "marginal";
  std::size_t reviews_per_paper = 3;
};

struct SynthOptions {
  CommonOptions common;
  std::string model;
  std::size_t papers = 3000;
};

struct TruthcheckOptions {
  CommonOptions common;
  std::string mechanism = "coinflip";
  std::size_t instances = 200;
  std::size_t max_papers = 4;
  std::size_t max_support = 3;
  bool table = false;
};

struct MrsOptions {
  CommonOptions common;
  std::string report = "profile";
  std::string counts = "1,1";
  std::string probs = "0.9,0.5";
  std::string rewards = "1,1";
  double grid_step = 0.1;
};

// ---------------------------------------------------------------------------
// Subcommands.

MechanismTriple simulation_triple(const SimulateOptions& o, double tau_acc) {
  const auto acceptance = threshold_policy(tau_acc);
  if (o.mechanism == "coinflip") {
    if (!(o.rho >= 0.0 && o.rho <= 1.0)) throw ConfigError("rho", "must lie in [0, 1]");
    return make_coin_flip({acceptance, constant_policy(o.rho)});
  }
  if (o.mechanism == "creditpool" || o.mechanism == "limited-creditpool") {
    CreditPoolSpec spec;
    spec.initial_credit = o.initial_credit;
    const double slope = o.beta_slope, intercept = o.beta_intercept;
    spec.beta = [slope, intercept](double r) { return slope * r + intercept; };
    spec.acceptance = acceptance;
    if (o.mechanism == "limited-creditpool") spec.credit_cap = o.credit_cap;
    return make_credit_pool(spec);
  }
  if (o.mechanism == "bundle") {
    if (o.bundle_size == 0) throw ConfigError("bundle_size", "must be at least 1");
    if (o.continuation > o.bundle_size) throw ConfigError("continuation", "cannot exceed bundle_size");
    return make_bundle_mechanism({o.bundle_size, o.continuation}, acceptance);
  }
  throw ConfigError("mechanism", "'" + o.mechanism + "' has no simulation triple");
}

void cmd_simulate(const SimulateOptions& o, std::ostream& out) {
  const double tau_acc = parse_threshold("tau_acc", o.tau_acc);
  double tau_rev = parse_threshold("tau_rev", o.tau_rev);
  const bool threshold_family = o.mechanism == "parallel" || o.mechanism == "threshold-seq" ||
                                o.mechanism == "isotonic" || o.mechanism == "naive";
  if (o.mechanism == "naive") tau_rev = tau_acc;
  if (o.mechanism == "threshold-seq" && tau_acc < tau_rev) throw ConfigError("tau_rev", "must not exceed tau_acc");
  const std::string method = o.method.empty() ? (threshold_family ? "analytic" : "simulate") : o.method;
  if (method == "analytic" && !threshold_family)
    throw ConfigError("method", "analytic evaluation needs a threshold mechanism");

  Csv csv(out, {"setting", "mechanism", "n", "tau_acc", "tau_rev", "samples", "seed", "utility", "utility_se",
                "burden", "burden_se", "avg_reviewed_quality", "avg_reviewed_quality_se"});
  ThresholdPolicy policy;
  if (o.mechanism == "parallel") policy = ThresholdPolicy::parallel(tau_acc);
  if (o.mechanism == "isotonic") policy = ThresholdPolicy::isotonic(tau_acc);
  if (o.mechanism == "threshold-seq" || o.mechanism == "naive") policy = ThresholdPolicy::sequential(tau_acc, tau_rev);
  const std::string shown_rev = format_double(policy.family == ThresholdFamily::kSequential ? tau_rev : -kInf);

  if (o.setting == "softmax") {
    if (o.mechanism != "parallel" && o.mechanism != "threshold-seq" && o.mechanism != "naive")
      throw ConfigError("mechanism", "the softmax setting supports parallel, naive and threshold-seq");
    for (const auto& setting : softmax_settings(o.softmax, o.gaussian)) {
      const auto m = softmax_population_eval(policy, setting, o.samples, o.common.seed);
      csv.row({"softmax", o.mechanism, format_double(setting.mean_paper_count()), format_double(tau_acc), shown_rev,
               std::to_string(o.samples), std::to_string(o.common.seed), format_double(m.utility.estimate),
               format_double(m.utility.std_error), format_double(m.burden.estimate),
               format_double(m.burden.std_error), "", ""});
    }
    return;
  }

  for (std::size_t n : parse_count_list("n", o.gaussian.n)) {
    const auto setting = gaussian_setting(o.gaussian, n);
    GaussianMetrics m;
    if (threshold_family && method == "analytic") {
      EvalOptions options;
      options.isotonic_noise_draws = o.isotonic_noise_draws;
      m = evaluate_gaussian(policy, setting, o.samples, o.common.seed, options);
    } else if (threshold_family) {
      m = simulate_gaussian(policy, setting, o.samples, o.common.seed);
    } else {
      m = simulate_gaussian(simulation_triple(o, tau_acc), setting, o.samples, o.common.seed);
    }
    csv.row({"gaussian", o.mechanism, std::to_string(n), format_double(tau_acc),
             threshold_family ? shown_rev : "", std::to_string(o.samples), std::to_string(o.common.seed),
             format_double(m.utility.estimate), format_double(m.utility.std_error), format_double(m.burden.estimate),
             format_double(m.burden.std_error), format_double(m.avg_reviewed_quality.estimate),
             format_double(m.avg_reviewed_quality.std_error)});
  }
}

void cmd_optimize(const OptimizeOptions& o, std::ostream& out) {
  const auto ns = parse_count_list("n", o.gaussian.n);
  if (ns.size() != 1) throw ConfigError("n", "optimize takes a single value");
  const auto setting = gaussian_setting(o.gaussian, ns.front());
  SGDConfig config;
  config.iterations = o.iterations;
  config.samples = o.samples;
  config.final_samples = o.final_samples;
  config.step_size = o.step_size;
  config.fd_step = o.fd_step;
  config.warm_start = o.warm_start;
  config.seed = o.common.seed;
  try {
    config.validate();
  } catch (const ParameterError& e) {
    throw ConfigError("sgd", one_line(e.what()));
  }
  EvalOptions options;
  options.isotonic_noise_draws = o.isotonic_noise_draws;

  std::optional<double> start_acc, start_rev;
  if (!o.tau_acc.empty()) start_acc = parse_threshold("tau_acc", o.tau_acc);
  if (!o.tau_rev.empty()) start_rev = parse_threshold("tau_rev", o.tau_rev);
  if (start_acc && start_rev && *start_acc < *start_rev) throw ConfigError("tau_rev", "must not exceed tau_acc");
  if (start_rev && !start_acc) throw ConfigError("tau_acc", "required when tau_rev is given");

  std::vector<ThresholdFamily> families;
  if (o.mechanism == "all")
    families = {ThresholdFamily::kParallel, ThresholdFamily::kSequential, ThresholdFamily::kIsotonic};
  else
    families = {parse_family(o.mechanism)};

  Csv csv(out, {"mechanism", "tau_acc", "tau_rev", "utility", "utility_se", "initial_tau_acc", "initial_tau_rev",
                "initial_utility", "improved", "chosen"});
  std::vector<ThresholdPolicy> optimized;
  for (auto family : families) {
    std::optional<ThresholdPolicy> start;
    if (start_acc) {
      if (family == ThresholdFamily::kSequential) start = ThresholdPolicy::sequential(*start_acc, start_rev.value_or(*start_acc));
      else start = ThresholdPolicy{family, *start_acc, -kInf};
    }
    const auto r = optimize_thresholds(family, setting, config, options, start);
    optimized.push_back(r.policy);
    csv.row({family == ThresholdFamily::kSequential ? "threshold-seq" : family_name(family),
             format_double(r.policy.tau_acc), format_double(r.policy.tau_rev), format_double(r.utility.estimate),
             format_double(r.utility.std_error), format_double(r.initial.tau_acc), format_double(r.initial.tau_rev),
             format_double(r.initial_utility.estimate), bool_text(r.improved), r.chosen});
  }
  if (families.size() == 3) {
    const auto rel = relative_utility_report(optimized[0], optimized[1], optimized[2], setting, o.final_samples,
                                             o.common.seed, options);
    csv.row({"relative", "", "", format_double(rel.estimate), format_double(rel.std_error), "", "", "", "", ""});
  }
}

void cmd_burden(const BurdenOptions& o, std::ostream& out) {
  MatchedBurdenConfig config;
  config.samples = o.samples;
  config.grid_points = o.grid_points;
  config.z = o.z;
  try {
    config.validate();
  } catch (const ParameterError& e) {
    throw ConfigError("grid_points", one_line(e.what()));
  }
  Csv csv(out, {"setting", "n", "paper_count_mean", "relative_burden", "std_error", "parallel_tau",
                "sequential_tau_acc", "sequential_tau_rev", "parallel_utility", "sequential_utility",
                "gap_std_error", "samples", "seed"});
  auto emit = [&](const std::string& setting, const std::string& n, double mean, const MatchedBurdenResult& r) {
    csv.row({setting, n, format_double(mean), format_double(r.relative_burden), format_double(r.std_error),
             format_double(r.parallel.tau_acc), format_double(r.sequential.tau_acc),
             format_double(r.sequential.tau_rev), format_double(r.parallel_utility),
             format_double(r.sequential_utility), format_double(r.gap_std_error), std::to_string(r.samples),
             std::to_string(r.seed)});
  };
  if (o.setting == "softmax") {
    for (const auto& setting : softmax_settings(o.softmax, o.gaussian))
      emit("softmax", "", setting.mean_paper_count(), matched_burden_softmax(setting, o.common.seed, config));
    return;
  }
  for (std::size_t n : parse_count_list("n", o.gaussian.n)) {
    const auto setting = gaussian_setting(o.gaussian, n);
    emit("gaussian", std::to_string(n), static_cast<double>(n), matched_burden(setting, o.common.seed, config));
  }
}

void cmd_fit(const FitOptionsCli& o, std::ostream& out, std::ostream& err) {
  Dataset dataset;
  try {
    dataset = parse_dataset(o.data);
  } catch (const SchemaError& e) {
    throw ConfigError("data", one_line(e.what()));
  } catch (const std::runtime_error& e) {
    throw ConfigError("data", one_line(e.what()));
  }
  if (dataset.records.empty()) throw ConfigError("data", "dataset has no records");
  FitOptions options;
  options.prior_method = parse_prior_method(o.prior_method);
  options.seed = o.common.seed;
  options.reviews_per_paper = o.reviews_per_paper;
  const auto result = fit_model(dataset, options);
  for (const auto& w : result.warnings) err << "warning: " << one_line(w) << '\n';
  out << result.model.to_document();
}

void cmd_synth(const SynthOptions& o, std::ostream& out) {
  FittedModel model;
  try {
    model = read_fitted_model(o.model);
  } catch (const std::exception& e) {
    throw ConfigError("model", one_line(e.what()));
  }
  if (o.papers == 0) throw ConfigError("papers", "must be at least 1");
  write_dataset(generate_synthetic_dataset(model, o.papers, o.common.seed), out);
}

LabMechanism truthcheck_mechanism(const std::string& name, CounterRng& rng) {
  if (name == "coinflip") return random_coin_flip(rng);
  if (name == "creditpool") return random_credit_pool(rng);
  if (name == "naive") return random_naive(rng);
  if (name == "parallel") return make_parallel(random_monotone_step(rng));
  if (name == "threshold-seq") {
    const double a = 2.0 * rng.uniform() - 1.0, b = 2.0 * rng.uniform() - 1.0;
    return make_threshold_sequential({std::max(a, b), std::min(a, b)});
  }
  if (name == "isotonic") return IsotonicLabMechanism{2.0 * rng.uniform() - 1.0};
  if (name == "bundle") return bundle_foil();
  return limited_pool_foil();
}

void cmd_truthcheck(const TruthcheckOptions& o, std::ostream& out) {
  if (o.max_papers == 0 || o.max_papers > kLabMaxPapers)
    throw ConfigError("max_papers", "must lie in [1, " + std::to_string(kLabMaxPapers) + "]");
  if (o.max_support == 0 || o.max_support > kLabMaxSupport)
    throw ConfigError("max_support", "must lie in [1, " + std::to_string(kLabMaxSupport) + "]");
  const bool foil = o.mechanism == "bundle" || o.mechanism == "limited-creditpool";
  std::optional<Csv> summary, table;
  if (o.table)
    table.emplace(out, std::vector<std::string>{"mechanism", "instance", "permutation", "utility", "truthful_ranking",
                                                "best"});
  else
    summary.emplace(out, std::vector<std::string>{"mechanism", "instance", "papers", "truthful_utility",
                                                  "best_utility", "gap", "truthful", "best_permutation"});
  for (std::size_t i = 0; i < o.instances; ++i) {
    CounterRng irng(o.common.seed, stream_id("lab-instance"), i);
    CounterRng mrng(o.common.seed, stream_id("lab-mechanism"), i);
    TruthInstance inst = foil ? foil_archetype_instance(irng, i) : random_instance(irng, 1, o.max_papers, o.max_support);
    inst.mechanism = truthcheck_mechanism(o.mechanism, mrng);
    const auto v = best_response(inst);
    if (table) {
      for (const auto& pu : v.utilities)
        table->row({o.mechanism, std::to_string(i), pu.permutation.to_string(), format_double(pu.utility),
                    bool_text(pu.permutation == v.truthful),
                    bool_text(std::find(v.best_permutations.begin(), v.best_permutations.end(), pu.permutation) !=
                              v.best_permutations.end())});
    } else {
      summary->row({o.mechanism, std::to_string(i), std::to_string(inst.qualities.size()),
                    format_double(v.truthful_utility), format_double(v.best_utility),
                    format_double(v.best_utility - v.truthful_utility), bool_text(v.truthful_at_instance),
                    v.best_permutations.front().to_string()});
    }
  }
}

EffortProfile mrs_profile(const MrsOptions& o) {
  EffortProfile p;
  for (double c : parse_number_list("counts", o.counts)) {
    if (!(c >= 0.0) || c != std::floor(c)) throw ConfigError("counts", "counts must be nonnegative integers");
    p.counts.push_back(static_cast<std::size_t>(c));
  }
  p.accept_probs = parse_number_list("probs", o.probs);
  p.rewards = parse_number_list("rewards", o.rewards);
  if (p.accept_probs.size() != p.counts.size()) throw ConfigError("probs", "needs one entry per count");
  if (p.rewards.size() != p.counts.size()) throw ConfigError("rewards", "needs one entry per count");
  for (std::size_t l = 0; l < p.levels(); ++l) {
    if (!(p.accept_probs[l] > 0.0 && p.accept_probs[l] <= 1.0)) throw ConfigError("probs", "must lie in (0, 1]");
    if (l > 0 && !(p.accept_probs[l] < p.accept_probs[l - 1]))
      throw ConfigError("probs", "must be strictly decreasing");
    if (!(p.rewards[l] > 0.0)) throw ConfigError("rewards", "must be positive");
    if (l > 0 && p.rewards[l] > p.rewards[l - 1]) throw ConfigError("rewards", "must be nonincreasing");
  }
  return p;
}

void cmd_mrs(const MrsOptions& o, std::ostream& out) {
  if (o.report == "counterexample") {
    const auto v = quality_quantity_counterexample();
    Csv csv(out, {"sequential_more_high", "sequential_more_low", "parallel_more_high", "parallel_more_low",
                  "sequential_prefers_high", "parallel_prefers_high"});
    csv.row({format_double(v.sequential_more_i), format_double(v.sequential_more_j), format_double(v.parallel_more_i),
             format_double(v.parallel_more_j), bool_text(v.sequential_prefers_i), bool_text(v.parallel_prefers_i)});
    return;
  }
  const auto profile = mrs_profile(o);
  if (o.report == "grid") {
    if (profile.levels() != 2) throw ConfigError("counts", "the grid report needs a binary profile");
    if (!(o.grid_step > 0.0 && o.grid_step <= 0.5)) throw ConfigError("grid_step", "must lie in (0, 0.5]");
    Csv csv(out, {"p_h", "p_l", "n_h", "n_l", "mrs_parallel", "mrs_sequential", "holds", "strict"});
    const auto steps = static_cast<std::size_t>(std::floor(1.0 / o.grid_step + 1e-9));
    for (std::size_t a = 1; a <= steps; ++a)
      for (std::size_t b = 1; b < a; ++b) {
        auto p = profile;
        p.accept_probs = {static_cast<double>(a) * o.grid_step, static_cast<double>(b) * o.grid_step};
        const auto v = verify_mrs_dominance(p, 0, 1);
        csv.row({format_double(p.accept_probs[0]), format_double(p.accept_probs[1]), std::to_string(p.counts[0]),
                 std::to_string(p.counts[1]), format_double(v.mrs_parallel), format_double(v.mrs_sequential),
                 bool_text(v.holds), bool_text(v.strict)});
      }
    return;
  }
  if (profile.levels() < 2) throw ConfigError("counts", "MRS needs at least two effort levels");
  Csv csv(out, {"counts", "probs", "rewards", "parallel_utility", "sequential_utility", "i", "j", "mrs_parallel",
                "mrs_sequential", "gap", "holds", "strict", "tail_nonempty"});
  for (std::size_t i = 0; i < profile.levels(); ++i)
    for (std::size_t j = i + 1; j < profile.levels(); ++j) {
      const auto v = verify_mrs_dominance(profile, i, j);
      csv.row({join_counts(profile.counts), join_numbers(profile.accept_probs), join_numbers(profile.rewards),
               format_double(parallel_utility(profile)), format_double(sequential_utility(profile)),
               std::to_string(i + 1), std::to_string(j + 1), format_double(v.mrs_parallel),
               format_double(v.mrs_sequential), format_double(v.gap), bool_text(v.holds), bool_text(v.strict),
               bool_text(v.tail_nonempty)});
    }
}

// ---------------------------------------------------------------------------
// Argument plumbing.

/// Key named in a CLI11 message such as "--n: Value 0 not in range".
std::string key_from_message(const std::string& message) {
  const auto pos = message.find("--");
  if (pos == std::string::npos) return "arguments";
  auto end = message.find_first_of(" :,=", pos);
  std::string key = message.substr(pos + 2, end == std::string::npos ? std::string::npos : end - pos - 2);
  std::replace(key.begin(), key.end(), '-', '_');
  return key.empty() ? "arguments" : key;
}

/// Value of --config among the subcommand arguments, if any.
std::optional<std::string> find_config(const std::vector<std::string>& args) {
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ConfigError("out", "cannot open '" + path + "' for writing");
  file << text;
  if (!file) throw ConfigError("out", "failed writing '" + path + "'");
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::map<std::string, std::string> entries;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config", "line " + std::to_string(number) + ": expected key = value");
    auto key = trim(text.substr(0, eq));
    std::replace(key.begin(), key.end(), '-', '_');
    if (key.empty()) throw ConfigError("config", "line " + std::to_string(number) + ": empty key");
    if (!entries.emplace(key, trim(text.substr(eq + 1))).second)
      throw ConfigError(key, "duplicate configuration key (line " + std::to_string(number) + ")");
  }
  return entries;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequential peer review toolkit: simulation, optimization, fitting and verification"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  SimulateOptions sim;
  auto* simulate = app.add_subcommand("simulate", "Conference utility, review burden and reviewed quality");
  add_common(simulate, sim.common);
  add_gaussian(simulate, sim.gaussian, true);
  add_softmax(simulate, sim.softmax);
  simulate->add_option("--setting", sim.setting, "gaussian or softmax")
      ->check(CLI::IsMember({"gaussian", "softmax"}));
  simulate->add_option("--mechanism", sim.mechanism, "Review mechanism")->check(CLI::IsMember(kMechanismNames));
  simulate->add_option("--method", sim.method, "analytic (threshold mechanisms) or simulate")
      ->check(CLI::IsMember({"analytic", "simulate"}));
  simulate->add_option("--tau_acc,--tau-acc", sim.tau_acc, "Acceptance threshold");
  simulate->add_option("--tau_rev,--tau-rev", sim.tau_rev, "Continuation threshold (threshold-seq)");
  simulate->add_option("--samples", sim.samples, "Quality samples (authors in the softmax setting)")
      ->check(kPositive);
  simulate->add_option("--isotonic_noise_draws,--isotonic-noise-draws", sim.isotonic_noise_draws,
                       "Score-noise draws per quality sample (isotonic, analytic method)")
      ->check(kPositive);
  simulate->add_option("--rho", sim.rho, "Coin-flip continuation probability after a rejection");
  simulate->add_option("--initial_credit,--initial-credit", sim.initial_credit, "Credit pool starting credit");
  simulate->add_option("--beta_slope,--beta-slope", sim.beta_slope, "Credit per unit score");
  simulate->add_option("--beta_intercept,--beta-intercept", sim.beta_intercept, "Credit at score zero");
  simulate->add_option("--credit_cap,--credit-cap", sim.credit_cap, "Cap of the limited credit pool");
  simulate->add_option("--bundle_size,--bundle-size", sim.bundle_size, "Papers per bundle");
  simulate->add_option("--continuation", sim.continuation, "Acceptances needed to review the next bundle");

  OptimizeOptions opt;
  auto* optimize = app.add_subcommand("optimize", "Optimize thresholds by stochastic gradient ascent");
  add_common(optimize, opt.common);
  add_gaussian(optimize, opt.gaussian, false);
  optimize->add_option("--mechanism", opt.mechanism, "parallel, threshold-seq, isotonic or all")
      ->check(CLI::IsMember({"parallel", "threshold-seq", "isotonic", "all"}));
  optimize->add_option("--tau_acc,--tau-acc", opt.tau_acc, "Starting acceptance threshold");
  optimize->add_option("--tau_rev,--tau-rev", opt.tau_rev, "Starting continuation threshold");
  optimize->add_option("--iterations", opt.iterations, "Gradient steps")->check(kPositive);
  optimize->add_option("--samples", opt.samples, "Quality samples per gradient estimate")->check(kPositive);
  optimize->add_option("--final_samples,--final-samples", opt.final_samples,
                       "Quality samples for the final evaluation of each candidate")->check(kPositive);
  optimize->add_option("--step_size,--step-size", opt.step_size, "Learning rate at step t is step_size / sqrt(t)")->check(kPositive);
  optimize->add_option("--fd_step,--fd-step", opt.fd_step, "Half width of the central finite difference")->check(kPositive);
  optimize->add_flag("--warm_start,--warm-start,!--no_warm_start", opt.warm_start, "Start from a coarse grid optimum");
  optimize->add_option("--isotonic_noise_draws,--isotonic-noise-draws", opt.isotonic_noise_draws,
                       "Score-noise draws per quality sample (isotonic)")
      ->check(kPositive);

  BurdenOptions bur;
  auto* burden = app.add_subcommand("burden", "Relative review burden at matched conference utility");
  add_common(burden, bur.common);
  add_gaussian(burden, bur.gaussian, true);
  add_softmax(burden, bur.softmax);
  burden->add_option("--setting", bur.setting, "gaussian or softmax")->check(CLI::IsMember({"gaussian", "softmax"}));
  burden->add_option("--samples", bur.samples, "Quality samples (authors in the softmax setting)")
      ->check(kPositive);
  burden->add_option("--grid_points,--grid-points", bur.grid_points, "Threshold grid points per axis")->check(CLI::Range(3, 1001));
  burden->add_option("--z", bur.z, "Utility matching slack in standard errors")->check(kNonNegative);

  FitOptionsCli fitopt;
  auto* fit = app.add_subcommand("fit", "Fit the softmax population model to a review dataset");
  add_common(fit, fitopt.common);
  fit->add_option("--data", fitopt.data, "Dataset in the line-delimited JSON format")->required();
  fit->add_option("--prior_method,--prior-method", fitopt.prior_method, "marginal or moments")
      ->check(CLI::IsMember({"marginal", "moments"}));
  fit->add_option("--reviews_per_paper,--reviews-per-paper", fitopt.reviews_per_paper,
                  "Scores per paper recorded in the fitted model")->check(kPositive);

  SynthOptions syn;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset from a fitted model");
  add_common(synth, syn.common);
  synth->add_option("--model", syn.model, "Fitted model document")->required();
  synth->add_option("--papers", syn.papers, "Papers to generate")->check(kPositive);

  TruthcheckOptions tc;
  auto* truthcheck = app.add_subcommand("truthcheck", "Exact best-response checks on random instances");
  add_common(truthcheck, tc.common);
  truthcheck->add_option("--mechanism", tc.mechanism, "Mechanism family to test")
      ->check(CLI::IsMember(kMechanismNames));
  truthcheck->add_option("--instances", tc.instances, "Random instances to check");
  truthcheck->add_option("--max_papers,--max-papers", tc.max_papers, "Most papers per instance");
  truthcheck->add_option("--max_support,--max-support", tc.max_support, "Most support points per quality lottery");
  truthcheck->add_flag("--table", tc.table, "Emit the utility of every permutation");

  MrsOptions mo;
  auto* mrs_cmd = app.add_subcommand("mrs", "Marginal rates of substitution under parallel and sequential review");
  add_common(mrs_cmd, mo.common);
  mrs_cmd->add_option("--report", mo.report, "profile, grid or counterexample")
      ->check(CLI::IsMember({"profile", "grid", "counterexample"}));
  mrs_cmd->add_option("--counts", mo.counts, "Papers per effort level, e.g. 2,1");
  mrs_cmd->add_option("--probs", mo.probs, "Strictly decreasing acceptance probabilities");
  mrs_cmd->add_option("--rewards", mo.rewards, "Nonincreasing rewards");
  mrs_cmd->add_option("--grid_step,--grid-step", mo.grid_step, "Probability spacing of the grid report");

  // Config-file entries become "--key=value" tokens placed before the
  // command-line flags, which therefore win.
  std::vector<std::string> tokens(args.begin() + (args.empty() ? 0 : 1), args.end());
  try {
    if (const auto config = find_config(args)) {
      CLI::App* sub = args.size() > 1 ? app.get_subcommand_no_throw(args[1]) : nullptr;
      if (sub == nullptr) throw ConfigError("config", "must follow a subcommand");
      std::vector<std::string> injected;
      for (const auto& [key, value] : read_config_file(*config)) {
        if (key == "config" || sub->get_option_no_throw("--" + key) == nullptr)
          throw ConfigError(key, "unknown configuration key for '" + args[1] + "'");
        injected.push_back("--" + key + "=" + value);
      }
      tokens.insert(tokens.begin() + 1, injected.begin(), injected.end());
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.key() << ": " << one_line(e.what()) << '\n';
    return kConfigFailure;
  }

  try {
    std::reverse(tokens.begin(), tokens.end());
    app.parse(tokens);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    const std::string key = key_from_message(e.what());
    std::string reason = one_line(e.what());
    if (reason.rfind("--", 0) == 0 && reason.find(": ") != std::string::npos) reason = reason.substr(reason.find(": ") + 2);
    err << "error: " << key << ": " << reason << '\n';
    return kConfigFailure;
  }

  std::ostringstream buffer;
  try {
    std::string out_path;
    if (simulate->parsed()) {
      cmd_simulate(sim, buffer);
      out_path = sim.common.out;
    } else if (optimize->parsed()) {
      cmd_optimize(opt, buffer);
      out_path = opt.common.out;
    } else if (burden->parsed()) {
      cmd_burden(bur, buffer);
      out_path = bur.common.out;
    } else if (fit->parsed()) {
      cmd_fit(fitopt, buffer, err);
      out_path = fitopt.common.out;
    } else if (synth->parsed()) {
      cmd_synth(syn, buffer);
      out_path = syn.common.out;
    } else if (truthcheck->parsed()) {
      cmd_truthcheck(tc, buffer);
      out_path = tc.common.out;
    } else if (mrs_cmd->parsed()) {
      cmd_mrs(mo, buffer);
      out_path = mo.common.out;
    }
    write_output(out_path, buffer.str(), out);
  } catch (const ConfigError& e) {
    err << "error: " << e.key() << ": " << one_line(e.what()) << '\n';
    return kConfigFailure;
  } catch (const ParameterError& e) {
    err << "error: parameters: " << one_line(e.what()) << '\n';
    return kConfigFailure;
  } catch (const std::exception& e) {
    err << "error: " << app.get_subcommands().front()->get_name() << ": " << one_line(e.what()) << '\n';
    return kRuntimeFailure;
  }
  return 0;
}

}  // namespace seqreview::cli
