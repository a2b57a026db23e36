#include "seqreview/ingestion.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include "seqreview/errors.hpp"
#include "seqreview/format.hpp"
#include "seqreview/parallel.hpp"

namespace seqreview {

namespace {

constexpr std::uint64_t kTieStream = stream_id("assignment-tie");
constexpr std::uint64_t kPaperCountStream = stream_id("paper-count");

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

int json_int(const nlohmann::json& v, const char* what, std::size_t line) {
  if (!v.is_number_integer()) throw SchemaError(std::string(what) + " must be an integer", line);
  const auto x = v.get<long long>();
  if (x < -1'000'000'000LL || x > 1'000'000'000LL) throw SchemaError(std::string(what) + " is out of range", line);
  return static_cast<int>(x);
}

}  // namespace

std::vector<int> Dataset::score_set() const {
  std::vector<int> out;
  for (int s = score_min; s <= score_max; ++s) out.push_back(s);
  return out;
}

Dataset parse_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset '" + path + "'");
  return parse_dataset(in);
}

Dataset parse_dataset(std::istream& in) {
  Dataset out;
  std::string raw;
  std::size_t line = 0;
  bool seen_content = false;
  std::set<std::string> ids;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw);
    if (text.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
      throw SchemaError("not a JSON object", line);
    }
    if (!j.is_object()) throw SchemaError("not a JSON object", line);

    if (!seen_content && !j.contains("paper_id") && (j.contains("score_min") || j.contains("score_max"))) {
      seen_content = true;
      if (j.contains("score_min")) out.score_min = json_int(j["score_min"], "score_min", line);
      if (j.contains("score_max")) out.score_max = json_int(j["score_max"], "score_max", line);
      if (out.score_min > out.score_max) throw SchemaError("score_min exceeds score_max", line);
      if (out.score_max - out.score_min > 1000) throw SchemaError("score range is too wide", line);
      continue;
    }
    seen_content = true;

    SubmissionRecord r;
    if (!j.contains("paper_id") || !j["paper_id"].is_string()) throw SchemaError("paper_id must be a string", line);
    r.paper_id = j["paper_id"].get<std::string>();
    if (r.paper_id.empty()) throw SchemaError("paper_id must not be empty", line);
    if (!ids.insert(r.paper_id).second) throw SchemaError("duplicate paper_id '" + r.paper_id + "'", line);

    if (!j.contains("authors") || !j["authors"].is_array() || j["authors"].empty())
      throw SchemaError("authors must be a nonempty array", line);
    for (const auto& a : j["authors"]) {
      if (!a.is_string() || a.get<std::string>().empty())
        throw SchemaError("authors must contain nonempty strings", line);
      r.authors.push_back(a.get<std::string>());
    }

    if (!j.contains("scores") || !j["scores"].is_array() || j["scores"].empty())
      throw SchemaError("scores must be a nonempty array", line);
    for (const auto& s : j["scores"]) {
      const int v = json_int(s, "scores", line);
      if (v < out.score_min || v > out.score_max)
        throw SchemaError("score " + std::to_string(v) + " is outside [" + std::to_string(out.score_min) + ", " +
                              std::to_string(out.score_max) + "]",
                          line);
      r.scores.push_back(v);
    }
    out.records.push_back(std::move(r));
  }
  if (in.bad()) throw std::runtime_error("error while reading dataset");
  return out;
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  out << nlohmann::json{{"score_min", dataset.score_min}, {"score_max", dataset.score_max}}.dump() << '\n';
  for (const auto& r : dataset.records) {
    nlohmann::json j;
    j["paper_id"] = r.paper_id;
    j["authors"] = r.authors;
    j["scores"] = r.scores;
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------

AuthorAssignment greedy_author_assignment(const std::vector<SubmissionRecord>& records, std::uint64_t seed) {
  std::unordered_map<std::string, std::size_t> author_index;
  std::vector<std::string> author_names;
  std::vector<std::vector<std::size_t>> author_papers;
  std::vector<std::vector<std::size_t>> paper_authors(records.size());
  std::set<std::string> ids;
  for (std::size_t p = 0; p < records.size(); ++p) {
    if (!ids.insert(records[p].paper_id).second)
      throw ParameterError("records: duplicate paper_id '" + records[p].paper_id + "'");
    if (records[p].authors.empty()) throw ParameterError("records: paper '" + records[p].paper_id + "' has no authors");
    for (const auto& name : records[p].authors) {
      auto [it, fresh] = author_index.try_emplace(name, author_names.size());
      if (fresh) {
        author_names.push_back(name);
        author_papers.emplace_back();
      }
      auto& list = author_papers[it->second];
      if (list.empty() || list.back() != p) {
        list.push_back(p);
        paper_authors[p].push_back(it->second);
      }
    }
  }

  const std::size_t m = author_names.size();
  std::vector<std::size_t> remaining(m);
  std::vector<std::uint64_t> tie(m);
  // Max-heap on (remaining count, tie key); entries may be stale and are
  // re-pushed with the current count when popped.
  using Entry = std::tuple<std::size_t, std::uint64_t, std::size_t>;
  std::priority_queue<Entry> heap;
  for (std::size_t a = 0; a < m; ++a) {
    remaining[a] = author_papers[a].size();
    tie[a] = CounterRng(seed, kTieStream, a).next_u64();
    heap.emplace(remaining[a], tie[a], a);
  }
  std::vector<bool> assigned(records.size(), false);
  AuthorAssignment out;
  while (!heap.empty()) {
    const auto [count, key, a] = heap.top();
    heap.pop();
    if (remaining[a] == 0) continue;
    if (count != remaining[a]) {
      heap.emplace(remaining[a], key, a);
      continue;
    }
    out.selections.emplace_back(author_names[a], count);
    for (std::size_t p : author_papers[a]) {
      if (assigned[p]) continue;
      assigned[p] = true;
      out.paper_to_author[records[p].paper_id] = author_names[a];
      for (std::size_t other : paper_authors[p]) --remaining[other];
    }
  }
  return out;
}

std::map<int, double> empirical_paper_counts(const AuthorAssignment& assignment) {
  std::map<std::string, int> per_author;
  for (const auto& [paper, author] : assignment.paper_to_author) ++per_author[author];
  std::map<int, std::size_t> histogram;
  for (const auto& [author, count] : per_author) ++histogram[count];
  std::map<int, double> pmf;
  const double total = static_cast<double>(per_author.size());
  for (const auto& [count, authors] : histogram) pmf[count] = static_cast<double>(authors) / total;
  return pmf;
}

QualityPrior fit_quality_prior(const std::vector<SubmissionRecord>& records) {
  if (records.empty()) throw ParameterError("records: the dataset has no papers");
  RunningStats means;
  for (const auto& r : records) {
    if (r.scores.empty()) throw ParameterError("records: paper '" + r.paper_id + "' has no scores");
    double sum = 0.0;
    for (int s : r.scores) sum += s;
    means.push(sum / static_cast<double>(r.scores.size()));
  }
  QualityPrior out;
  out.mu_q = means.mean;
  out.sigma_q = std::sqrt(means.variance());
  out.degenerate = !(out.sigma_q > 0.0);
  return out;
}

ScoreTally::ScoreTally(const std::vector<SubmissionRecord>& records, std::vector<int> set)
    : score_set(std::move(set)) {
  std::map<std::vector<int>, std::size_t> groups_by_counts;
  for (const auto& r : records) {
    std::vector<int> counts(score_set.size(), 0);
    for (int s : r.scores) {
      const auto it = std::lower_bound(score_set.begin(), score_set.end(), s);
      if (it == score_set.end() || *it != s)
        throw ParameterError("records: score " + std::to_string(s) + " of paper '" + r.paper_id +
                             "' is not in the score set");
      ++counts[static_cast<std::size_t>(it - score_set.begin())];
    }
    ++groups_by_counts[counts];
  }
  groups.assign(groups_by_counts.begin(), groups_by_counts.end());
}

double marginal_log_likelihood(const ScoreTally& tally, double mu_q, double sigma_q, double temperature) {
  if (!(sigma_q > 0.0)) throw ParameterError("sigma_q: must be positive");
  if (!(temperature >= 0.0)) throw ParameterError("temperature: must be nonnegative");
  const SoftmaxScoreModel model{temperature, tally.score_set};
  const std::size_t g = kPosteriorGridPoints;
  const std::size_t m = tally.score_set.size();
  std::vector<double> log_w(g);
  std::vector<double> log_lik(g * m);
  double norm = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    const double z = -kPosteriorGridWidth + 2.0 * kPosteriorGridWidth * static_cast<double>(i) / static_cast<double>(g - 1);
    log_w[i] = -0.5 * z * z;
    norm += std::exp(log_w[i]);
    const auto lp = softmax_log_pmf(mu_q + sigma_q * z, model);
    std::copy(lp.begin(), lp.end(), log_lik.begin() + static_cast<std::ptrdiff_t>(i * m));
  }
  const double log_norm = std::log(norm);
  double total = 0.0;
  std::vector<double> terms(g);
  for (const auto& [counts, papers] : tally.groups) {
    double top = -kInf;
    for (std::size_t i = 0; i < g; ++i) {
      double t = log_w[i];
      for (std::size_t j = 0; j < m; ++j)
        if (counts[j] != 0) t += counts[j] * log_lik[i * m + j];
      terms[i] = t;
      top = std::max(top, t);
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - top);
    total += static_cast<double>(papers) * (top + std::log(sum) - log_norm);
  }
  return total;
}

namespace {

struct GslErrorGuard {
  gsl_error_handler_t* previous;
  GslErrorGuard() : previous(gsl_set_error_handler_off()) {}
  ~GslErrorGuard() { gsl_set_error_handler(previous); }
};

// Golden-section minimization of f on [lo, hi] around a bracketing guess.
template <class F>
double golden_minimize(F& f, double lo, double guess, double hi, double tol) {
  GslErrorGuard guard;
  gsl_function fn;
  fn.function = [](double x, void* p) { return (*static_cast<F*>(p))(x); };
  fn.params = &f;
  std::unique_ptr<gsl_min_fminimizer, decltype(&gsl_min_fminimizer_free)> solver(
      gsl_min_fminimizer_alloc(gsl_min_fminimizer_goldensection), gsl_min_fminimizer_free);
  if (gsl_min_fminimizer_set(solver.get(), &fn, guess, lo, hi) != GSL_SUCCESS) return guess;
  for (int it = 0; it < 200; ++it) {
    if (gsl_min_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    const double a = gsl_min_fminimizer_x_lower(solver.get());
    const double b = gsl_min_fminimizer_x_upper(solver.get());
    if (b - a < tol) break;
  }
  return gsl_min_fminimizer_x_minimum(solver.get());
}

double temperature_mle(const ScoreTally& tally, double mu_q, double sigma_q) {
  auto nll = [&](double t) { return -marginal_log_likelihood(tally, mu_q, sigma_q, t); };
  constexpr int kScan = 51;
  std::vector<double> values(kScan);
  std::size_t best = 0;
  for (int i = 0; i < kScan; ++i) {
    values[i] = nll(kTemperatureUpper * i / (kScan - 1));
    if (values[i] < values[best]) best = static_cast<std::size_t>(i);
  }
  const double step = kTemperatureUpper / (kScan - 1);
  if (best == 0 || best == kScan - 1) {
    // The maximum sits on the boundary of the search interval; refine
    // inside the first or last cell only.
    const double lo = best == 0 ? 0.0 : kTemperatureUpper - step;
    const double hi = best == 0 ? step : kTemperatureUpper;
    const double edge = best == 0 ? 0.0 : kTemperatureUpper;
    const double mid = 0.5 * (lo + hi);
    const double f_mid = nll(mid);
    if (f_mid < values[best] && f_mid < nll(best == 0 ? hi : lo)) return golden_minimize(nll, lo, mid, hi, kTemperatureTolerance);
    return edge;
  }
  const double x = step * static_cast<double>(best);
  return golden_minimize(nll, x - step, x, x + step, kTemperatureTolerance);
}

struct JointFit {
  double mu_q;
  double sigma_q;
  double temperature;
};

// Nelder-Mead on (mu, log sigma, log t) for the joint marginal likelihood.
JointFit joint_refine(const ScoreTally& tally, const JointFit& start) {
  GslErrorGuard guard;
  struct Ctx {
    const ScoreTally* tally;
  } ctx{&tally};
  gsl_multimin_function fn;
  fn.n = 3;
  fn.params = &ctx;
  fn.f = [](const gsl_vector* v, void* p) -> double {
    const auto* c = static_cast<Ctx*>(p);
    const double mu = gsl_vector_get(v, 0);
    const double sigma = std::exp(gsl_vector_get(v, 1));
    const double t = std::exp(gsl_vector_get(v, 2));
    if (!std::isfinite(sigma) || !std::isfinite(t) || sigma <= 0.0) return GSL_POSINF;
    return -marginal_log_likelihood(*c->tally, mu, sigma, t);
  };
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(3), gsl_vector_free);
  std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(3), gsl_vector_free);
  gsl_vector_set(x.get(), 0, start.mu_q);
  gsl_vector_set(x.get(), 1, std::log(start.sigma_q));
  gsl_vector_set(x.get(), 2, std::log(start.temperature));
  gsl_vector_set_all(step.get(), 0.05);
  std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> solver(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3), gsl_multimin_fminimizer_free);
  gsl_multimin_fminimizer_set(solver.get(), &fn, x.get(), step.get());
  for (int it = 0; it < 1000; ++it) {
    if (gsl_multimin_fminimizer_iterate(solver.get()) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(solver.get()), 1e-6) == GSL_SUCCESS) break;
  }
  const gsl_vector* best = gsl_multimin_fminimizer_x(solver.get());
  return {gsl_vector_get(best, 0), std::exp(gsl_vector_get(best, 1)), std::exp(gsl_vector_get(best, 2))};
}

}  // namespace

double fit_temperature_map(const std::vector<SubmissionRecord>& records, const QualityPrior& prior,
                           const std::vector<int>& score_set) {
  if (prior.degenerate || !(prior.sigma_q > 0.0))
    throw ParameterError("sigma_q: degenerate prior (zero spread); fit the prior with fit_quality_prior first");
  if (records.empty()) throw ParameterError("records: the dataset has no papers");
  const ScoreTally tally(records, score_set);
  return temperature_mle(tally, prior.mu_q, prior.sigma_q);
}

std::string prior_method_name(PriorMethod method) {
  return method == PriorMethod::kMoments ? "moments" : "marginal";
}

PriorMethod parse_prior_method(const std::string& name) {
  if (name == "moments") return PriorMethod::kMoments;
  if (name == "marginal") return PriorMethod::kMarginal;
  throw ParameterError("prior: unknown method '" + name + "'");
}

// ---------------------------------------------------------------------------

void FittedModel::validate() const {
  if (paper_count_pmf.empty()) throw ParameterError("paper_count_pmf: must not be empty");
  double total = 0.0;
  for (const auto& [count, p] : paper_count_pmf) {
    if (count < 1) throw ParameterError("paper_count_pmf: paper counts must be positive");
    if (!(p >= 0.0)) throw ParameterError("paper_count_pmf: probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError("paper_count_pmf: probabilities must sum to 1");
  if (!std::isfinite(mu_q)) throw ParameterError("mu_q: must be finite");
  if (!(sigma_q > 0.0) || !std::isfinite(sigma_q)) throw ParameterError("sigma_q: must be positive");
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) throw ParameterError("temperature: must be nonnegative");
  if (reviews_per_paper == 0) throw ParameterError("reviews_per_paper: must be positive");
  if (score_min > score_max) throw ParameterError("score_min: exceeds score_max");
}

std::string FittedModel::to_document() const {
  std::ostringstream out;
  out << "# seqreview fitted model\n";
  out << "mu_q = " << format_double(mu_q) << '\n';
  out << "sigma_q = " << format_double(sigma_q) << '\n';
  out << "temperature = " << format_double(temperature) << '\n';
  out << "reviews_per_paper = " << reviews_per_paper << '\n';
  out << "score_min = " << score_min << '\n';
  out << "score_max = " << score_max << '\n';
  out << "paper_count_pmf = ";
  bool first = true;
  for (const auto& [count, p] : paper_count_pmf) {
    out << (first ? "" : ",") << count << ':' << format_double(p);
    first = false;
  }
  out << '\n';
  out << "papers = " << papers << '\n';
  out << "authors = " << authors << '\n';
  out << "prior_method = " << prior_method_name(prior_method) << '\n';
  return out.str();
}

namespace {

std::size_t parse_count(const std::string& v, const std::string& key, std::size_t line) {
  double x = 0.0;
  if (!parse_double(v, x) || x < 0.0 || x != std::floor(x) || x > 1e15)
    throw SchemaError(key + ": expected a nonnegative integer", line);
  return static_cast<std::size_t>(x);
}

int parse_int(const std::string& v, const std::string& key, std::size_t line) {
  double x = 0.0;
  if (!parse_double(v, x) || x != std::floor(x) || std::abs(x) > 1e9)
    throw SchemaError(key + ": expected an integer", line);
  return static_cast<int>(x);
}

double parse_real(const std::string& v, const std::string& key, std::size_t line) {
  double x = 0.0;
  if (!parse_double(v, x)) throw SchemaError(key + ": expected a number", line);
  return x;
}

}  // namespace

FittedModel FittedModel::from_document(const std::string& text) {
  FittedModel m;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  std::set<std::string> seen;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw SchemaError("expected 'key = value'", line);
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (!seen.insert(key).second) throw SchemaError(key + ": duplicate key", line);
    if (key == "mu_q") {
      m.mu_q = parse_real(value, key, line);
    } else if (key == "sigma_q") {
      m.sigma_q = parse_real(value, key, line);
    } else if (key == "temperature") {
      m.temperature = parse_real(value, key, line);
    } else if (key == "reviews_per_paper") {
      m.reviews_per_paper = parse_count(value, key, line);
    } else if (key == "score_min") {
      m.score_min = parse_int(value, key, line);
    } else if (key == "score_max") {
      m.score_max = parse_int(value, key, line);
    } else if (key == "papers") {
      m.papers = parse_count(value, key, line);
    } else if (key == "authors") {
      m.authors = parse_count(value, key, line);
    } else if (key == "prior_method") {
      try {
        m.prior_method = parse_prior_method(value);
      } catch (const ParameterError&) {
        throw SchemaError(key + ": expected 'moments' or 'marginal'", line);
      }
    } else if (key == "paper_count_pmf") {
      std::istringstream items(value);
      std::string item;
      while (std::getline(items, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw SchemaError(key + ": expected 'count:probability' items", line);
        const int count = parse_int(trim(std::string_view(item).substr(0, colon)), key, line);
        const double p = parse_real(trim(std::string_view(item).substr(colon + 1)), key, line);
        if (!m.paper_count_pmf.emplace(count, p).second) throw SchemaError(key + ": repeated paper count", line);
      }
    } else {
      throw SchemaError(key + ": unknown key", line);
    }
  }
  for (const char* required : {"mu_q", "sigma_q", "temperature", "paper_count_pmf"})
    if (!seen.count(required)) throw SchemaError(std::string(required) + ": missing key");
  try {
    m.validate();
  } catch (const ParameterError& e) {
    throw SchemaError(e.what());
  }
  return m;
}

SoftmaxSetting FittedModel::to_setting() const {
  validate();
  SoftmaxSetting s;
  s.paper_count_pmf = paper_count_pmf;
  s.reviews_per_paper = reviews_per_paper;
  s.mu_q = mu_q;
  s.sigma_q = sigma_q;
  s.temperature = temperature;
  s.score_set.clear();
  for (int v = score_min; v <= score_max; ++v) s.score_set.push_back(v);
  return s;
}

FittedModel read_fitted_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fitted model '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return FittedModel::from_document(text.str());
}

void write_fitted_model(const FittedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write fitted model '" + path + "'");
  out << model.to_document();
  if (!out) throw std::runtime_error("error while writing fitted model '" + path + "'");
}

FitResult fit_model(const Dataset& dataset, const FitOptions& options) {
  if (dataset.records.empty()) throw ParameterError("dataset: no papers to fit");
  if (options.reviews_per_paper == 0) throw ParameterError("reviews_per_paper: must be positive");
  FitResult out;
  out.assignment = greedy_author_assignment(dataset.records, options.seed);
  out.model.paper_count_pmf = empirical_paper_counts(out.assignment);
  out.model.papers = dataset.records.size();
  out.model.authors = out.assignment.selections.size();
  out.model.score_min = dataset.score_min;
  out.model.score_max = dataset.score_max;
  out.model.reviews_per_paper = options.reviews_per_paper;
  out.model.prior_method = options.prior_method;

  const auto prior = fit_quality_prior(dataset.records);
  if (prior.degenerate) throw ParameterError("sigma_q: degenerate prior (every paper has the same mean score)");
  const ScoreTally tally(dataset.records, dataset.score_set());
  const double t = temperature_mle(tally, prior.mu_q, prior.sigma_q);
  out.model.mu_q = prior.mu_q;
  out.model.sigma_q = prior.sigma_q;
  out.model.temperature = t;
  if (options.prior_method == PriorMethod::kMarginal) {
    if (t > 0.0) {
      const auto joint = joint_refine(tally, {prior.mu_q, prior.sigma_q, t});
      out.model.mu_q = joint.mu_q;
      out.model.sigma_q = joint.sigma_q;
      out.model.temperature = joint.temperature;
    } else {
      out.warnings.push_back("temperature fit at 0: scores carry no information; keeping the moment prior");
    }
  }
  out.model.validate();
  return out;
}

Dataset generate_synthetic_dataset(const FittedModel& model, std::size_t papers, std::uint64_t seed) {
  model.validate();
  const SoftmaxScoreModel scores_model = model.to_setting().score_model();
  Dataset out;
  out.score_min = model.score_min;
  out.score_max = model.score_max;
  std::size_t paper = 0;
  for (std::size_t author = 0; paper < papers; ++author) {
    CounterRng count_rng(seed, kPaperCountStream, author);
    const double u = count_rng.uniform();
    double cum = 0.0;
    int n = model.paper_count_pmf.rbegin()->first;
    for (const auto& [count, p] : model.paper_count_pmf) {
      cum += p;
      if (u < cum) {
        n = count;
        break;
      }
    }
    const std::string name = "author-" + std::to_string(author);
    for (int i = 0; i < n && paper < papers; ++i, ++paper) {
      SubmissionRecord r;
      r.paper_id = "paper-" + std::to_string(paper);
      r.authors = {name};
      const double q = CounterRng(seed, kQualityStream, paper).normal(model.mu_q, model.sigma_q);
      const auto pmf = softmax_pmf(q, scores_model);
      CounterRng score_rng(seed, kScoreStream, paper);
      for (std::size_t k = 0; k < model.reviews_per_paper; ++k) {
        const double v = score_rng.uniform();
        double c = 0.0;
        std::size_t pick = pmf.size() - 1;
        for (std::size_t j = 0; j < pmf.size(); ++j) {
          c += pmf[j];
          if (v < c) {
            pick = j;
            break;
          }
        }
        r.scores.push_back(scores_model.score_set[pick]);
      }
      out.records.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace seqreview
