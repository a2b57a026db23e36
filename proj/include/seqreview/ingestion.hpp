#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "seqreview/evaluation.hpp"

namespace seqreview {

/// One submitted paper with its authors and integer review scores.
struct SubmissionRecord {
  std::string paper_id;
  std::vector<std::string> authors;
  std::vector<int> scores;
};

/// Parsed dataset. Scores lie in {score_min, ..., score_max}.
struct Dataset {
  int score_min = 1;
  int score_max = 10;
  std::vector<SubmissionRecord> records;

  std::vector<int> score_set() const;
};

/// Reads the line-delimited format documented in docs/formats.md. Throws
/// std::runtime_error when the file cannot be read and SchemaError (with the
/// 1-based line number) on malformed lines.
Dataset parse_dataset(const std::string& path);
Dataset parse_dataset(std::istream& in);

/// Serializes a dataset in the same format (header line included).
void write_dataset(const Dataset& dataset, std::ostream& out);

struct AuthorAssignment {
  std::map<std::string, std::string> paper_to_author;
  /// Selected authors in order, with their remaining paper count at selection.
  std::vector<std::pair<std::string, std::size_t>> selections;
};

/// Repeatedly picks the author with the most unassigned papers (ties broken
/// by a per-author key drawn from stream ("assignment-tie", author index)),
/// assigns all of that author's unassigned papers to them and removes them.
AuthorAssignment greedy_author_assignment(const std::vector<SubmissionRecord>& records, std::uint64_t seed);

/// Empirical distribution of papers per assigned author.
std::map<int, double> empirical_paper_counts(const AuthorAssignment& assignment);

struct QualityPrior {
  double mu_q = 0.0;
  double sigma_q = 0.0;
  /// Set when the per-paper means have no spread (sigma_q == 0).
  bool degenerate = false;
};

/// Mean and unbiased standard deviation of the per-paper mean scores.
QualityPrior fit_quality_prior(const std::vector<SubmissionRecord>& records);

/// Papers grouped by their multiset of scores: (count per score, papers).
struct ScoreTally {
  std::vector<int> score_set;
  std::vector<std::pair<std::vector<int>, std::size_t>> groups;

  ScoreTally(const std::vector<SubmissionRecord>& records, std::vector<int> score_set);
};

/// Sum over papers of log of the integral of prod Pr(r | q; t) N(q; mu, sigma)
/// on the 2001-node posterior grid.
double marginal_log_likelihood(const ScoreTally& tally, double mu_q, double sigma_q, double temperature);

inline constexpr double kTemperatureUpper = 5.0;
inline constexpr double kTemperatureTolerance = 1e-4;

/// Maximizes the marginal likelihood over t in [0, 5] (flat prior, so MAP
/// equals the MLE): a coarse scan brackets the maximum, then golden-section
/// search refines it to 1e-4. Throws ParameterError for a degenerate prior.
double fit_temperature_map(const std::vector<SubmissionRecord>& records, const QualityPrior& prior,
                           const std::vector<int>& score_set);

/// How (mu_q, sigma_q) are estimated.
enum class PriorMethod {
  /// Moments of the per-paper mean scores only.
  kMoments,
  /// Moments, then t by MAP, then (mu_q, sigma_q, t) jointly by marginal
  /// likelihood (Nelder-Mead). Removes the review-noise inflation of sigma_q.
  kMarginal,
};

std::string prior_method_name(PriorMethod method);
PriorMethod parse_prior_method(const std::string& name);

/// The fitted population model, serialized as a flat key = value document.
struct FittedModel {
  std::map<int, double> paper_count_pmf;
  double mu_q = 0.0;
  double sigma_q = 0.0;
  double temperature = 0.0;
  std::size_t reviews_per_paper = 3;
  int score_min = 1;
  int score_max = 10;
  std::size_t papers = 0;
  std::size_t authors = 0;
  PriorMethod prior_method = PriorMethod::kMarginal;

  void validate() const;
  std::string to_document() const;
  /// Throws SchemaError naming the offending line or key.
  static FittedModel from_document(const std::string& text);

  /// Softmax setting for simulation with these parameters.
  SoftmaxSetting to_setting() const;
};

FittedModel read_fitted_model(const std::string& path);
void write_fitted_model(const FittedModel& model, const std::string& path);

struct FitOptions {
  PriorMethod prior_method = PriorMethod::kMarginal;
  std::uint64_t seed = 0;  // greedy tie-breaking
  std::size_t reviews_per_paper = 3;
};

struct FitResult {
  FittedModel model;
  AuthorAssignment assignment;
  std::vector<std::string> warnings;
};

/// The whole pipeline: assignment, paper-count pmf, prior and temperature.
/// Throws ParameterError on an empty dataset.
FitResult fit_model(const Dataset& dataset, const FitOptions& options);

/// Synthetic dataset drawn from a population model: authors draw paper
/// counts from the pmf (stream "paper-count"), papers draw qualities
/// N(mu_q, sigma_q) (stream "quality") and k softmax scores (stream "score").
/// Each paper lists its own author only. Stops after `papers` papers.
Dataset generate_synthetic_dataset(const FittedModel& model, std::size_t papers, std::uint64_t seed);

}  // namespace seqreview
