#include "seqreview/effort.hpp"

#include <algorithm>
#include <cmath>

#include "seqreview/errors.hpp"

namespace seqreview {

namespace {

// Utility differences of nearby profiles cancel almost all of their digits
// when the gain sits behind a long run of earlier papers. Quad precision
// keeps those gains accurate to far better than the 1e-12 checks need.
#if defined(__SIZEOF_FLOAT128__)
using Wide = __float128;
#else
using Wide = long double;
#endif

template <typename T>
T power(T base, std::size_t exponent) {
  T result = 1;
  while (exponent > 0) {
    if (exponent & 1U) result *= base;
    base *= base;
    exponent >>= 1U;
  }
  return result;
}

template <typename T>
T geometric_sum(T p, std::size_t n) {
  if (p == T(1)) return static_cast<T>(n);
  return p * (T(1) - power(p, n)) / (T(1) - p);
}

template <typename T>
T parallel_value(const EffortProfile& profile) {
  T total = 0;
  for (std::size_t l = 0; l < profile.levels(); ++l)
    total += static_cast<T>(profile.counts[l]) * T(profile.accept_probs[l]) * T(profile.rewards[l]);
  return total;
}

template <typename T>
T sequential_value(const EffortProfile& profile) {
  T total = 0;
  T gamma = 1;
  for (std::size_t l = 0; l < profile.levels(); ++l) {
    const T p = profile.accept_probs[l];
    total += gamma * geometric_sum(p, profile.counts[l]) * T(profile.rewards[l]);
    gamma *= power(p, profile.counts[l]);
  }
  return total;
}

Wide wide_value(EffortMechanism mechanism, const EffortProfile& profile) {
  return mechanism == EffortMechanism::kParallel ? parallel_value<Wide>(profile) : sequential_value<Wide>(profile);
}

void check_level(const EffortProfile& profile, std::size_t level) {
  if (level >= profile.levels())
    throw ParameterError("effort level " + std::to_string(level) + " out of range for " +
                         std::to_string(profile.levels()) + " levels");
}

void check_pair(const EffortProfile& profile, std::size_t i, std::size_t j) {
  check_level(profile, i);
  check_level(profile, j);
  if (i >= j) throw ParameterError("effort levels must satisfy i < j");
}

}  // namespace

EffortProfile EffortProfile::binary(std::size_t n_h, std::size_t n_l, double p_h, double p_l, double u_h,
                                    double u_l) {
  EffortProfile profile{{n_h, n_l}, {p_h, p_l}, {u_h, u_l}};
  profile.validate();
  return profile;
}

void EffortProfile::validate() const {
  if (counts.empty()) throw ParameterError("effort profile needs at least one level");
  if (accept_probs.size() != counts.size() || rewards.size() != counts.size())
    throw ParameterError("effort profile counts, accept_probs and rewards must have equal lengths");
  for (std::size_t l = 0; l < counts.size(); ++l) {
    const double p = accept_probs[l];
    if (!(p > 0.0 && p <= 1.0))
      throw ParameterError("accept_probs[" + std::to_string(l) + "] must lie in (0, 1]");
    if (l > 0 && !(p < accept_probs[l - 1]))
      throw ParameterError("accept_probs must be strictly decreasing (level " + std::to_string(l) + ")");
    if (!(rewards[l] > 0.0) || !std::isfinite(rewards[l]))
      throw ParameterError("rewards[" + std::to_string(l) + "] must be positive and finite");
    if (l > 0 && rewards[l] > rewards[l - 1])
      throw ParameterError("rewards must be nonincreasing along with accept_probs (level " + std::to_string(l) +
                           ")");
  }
}

EffortProfile EffortProfile::with_count(std::size_t level, std::size_t count) const {
  check_level(*this, level);
  EffortProfile copy = *this;
  copy.counts[level] = count;
  return copy;
}

EffortProfile EffortProfile::with_extra(std::size_t level, std::size_t extra) const {
  check_level(*this, level);
  return with_count(level, counts[level] + extra);
}

double parallel_utility(const EffortProfile& profile) {
  profile.validate();
  return parallel_value<double>(profile);
}

SequentialTerms sequential_terms(const EffortProfile& profile) {
  profile.validate();
  const std::size_t m = profile.levels();
  SequentialTerms t;
  t.gamma.assign(m + 1, 1.0);
  t.s.assign(m, 0.0);
  t.z.assign(m + 1, 0.0);
  for (std::size_t l = 0; l < m; ++l) {
    t.s[l] = geometric_sum(profile.accept_probs[l], profile.counts[l]);
    t.gamma[l + 1] = t.gamma[l] * power(profile.accept_probs[l], profile.counts[l]);
  }
  for (std::size_t l = m; l-- > 0;) t.z[l] = t.z[l + 1] + t.gamma[l] * t.s[l] * profile.rewards[l];
  t.utility = t.z[0];
  return t;
}

double sequential_utility(const EffortProfile& profile) { return sequential_terms(profile).utility; }

double sequential_marginal_gain(const EffortProfile& profile, std::size_t level) {
  check_level(profile, level);
  const auto t = sequential_terms(profile);
  const double p = profile.accept_probs[level];
  return t.gamma[level + 1] * p * profile.rewards[level] - (1.0 - p) * t.z[level + 1];
}

std::string effort_mechanism_name(EffortMechanism mechanism) {
  return mechanism == EffortMechanism::kParallel ? "parallel" : "sequential";
}

double utility_gain(EffortMechanism mechanism, const EffortProfile& profile, std::size_t level, std::size_t extra) {
  profile.validate();
  const auto bigger = profile.with_extra(level, extra);
  return static_cast<double>(wide_value(mechanism, bigger) - wide_value(mechanism, profile));
}

double mrs(EffortMechanism mechanism, const EffortProfile& profile, std::size_t i, std::size_t j) {
  profile.validate();
  check_level(profile, i);
  check_level(profile, j);
  const Wide base = wide_value(mechanism, profile);
  const Wide gain_i = wide_value(mechanism, profile.with_extra(i, 1)) - base;
  const Wide gain_j = wide_value(mechanism, profile.with_extra(j, 1)) - base;
  if (gain_j == Wide(0)) throw ParameterError("degenerate profile: zero utility gain at level " + std::to_string(j));
  return static_cast<double>(gain_i / gain_j);
}

LambdaCheck lambda_check(const EffortProfile& profile, std::size_t level, std::size_t k) {
  profile.validate();
  check_level(profile, level);
  if (k == 0) throw ParameterError("lambda_check requires k >= 1");
  const auto at = [&](std::size_t extra) {
    return sequential_value<Wide>(profile.with_extra(level, extra));
  };
  const Wide first = at(1) - at(0);
  if (first == Wide(0))
    throw ParameterError("degenerate profile: zero utility gain at level " + std::to_string(level));
  const Wide kth = at(k) - at(k - 1);
  return {static_cast<double>(kth / first),
          static_cast<double>(power<Wide>(profile.accept_probs[level], k - 1))};
}

DominanceVerdict verify_mrs_dominance(const EffortProfile& profile, std::size_t i, std::size_t j) {
  check_pair(profile, i, j);
  DominanceVerdict v;
  v.mrs_parallel = mrs(EffortMechanism::kParallel, profile, i, j);
  v.mrs_sequential = mrs(EffortMechanism::kSequential, profile, i, j);
  v.gap = v.mrs_sequential - v.mrs_parallel;
  v.holds = v.gap >= -kEffortTolerance;
  v.strict = v.gap > kEffortTolerance;
  for (std::size_t k = i + 1; k < profile.levels(); ++k) v.tail_nonempty = v.tail_nonempty || profile.counts[k] > 0;
  return v;
}

SubstitutionVerdict verify_substitution(const EffortProfile& base, std::size_t i, std::size_t j, std::size_t new_i,
                                        std::size_t new_j) {
  base.validate();
  check_pair(base, i, j);
  if (new_i <= base.counts[i] || new_j <= base.counts[j])
    throw ParameterError("verify_substitution needs new_i > n_i and new_j > n_j");
  const auto more_i = base.with_count(i, new_i);
  const auto more_j = base.with_count(j, new_j);
  const Wide par_i = parallel_value<Wide>(more_i);
  const Wide par_j = parallel_value<Wide>(more_j);
  const Wide seq_i = sequential_value<Wide>(more_i);
  const Wide seq_j = sequential_value<Wide>(more_j);
  SubstitutionVerdict v;
  v.parallel_more_i = static_cast<double>(par_i);
  v.parallel_more_j = static_cast<double>(par_j);
  v.sequential_more_i = static_cast<double>(seq_i);
  v.sequential_more_j = static_cast<double>(seq_j);
  v.parallel_prefers_i = par_i >= par_j;
  v.sequential_prefers_i = static_cast<double>(seq_i - seq_j) >= -kEffortTolerance;
  v.violated = v.parallel_prefers_i && !v.sequential_prefers_i;
  return v;
}

SubstitutionVerdict quality_quantity_counterexample() {
  return verify_substitution(EffortProfile::binary(0, 0, 1.0, 0.5, 1.0, 1.0), 0, 1, 1, 3);
}

EffortProfile random_effort_profile(CounterRng& rng, std::size_t min_levels, std::size_t max_levels) {
  if (min_levels == 0 || min_levels > max_levels || max_levels > 5)
    throw ParameterError("random_effort_profile needs 1 <= min_levels <= max_levels <= 5");
  const std::size_t m = min_levels + rng.below(max_levels - min_levels + 1);
  EffortProfile profile;
  for (std::size_t l = 0; l < m; ++l) profile.counts.push_back(rng.below(7));
  do {
    profile.accept_probs.clear();
    for (std::size_t l = 0; l < m; ++l) profile.accept_probs.push_back(0.05 + 0.94 * rng.uniform_pos());
    std::sort(profile.accept_probs.begin(), profile.accept_probs.end(), std::greater<>());
  } while (std::adjacent_find(profile.accept_probs.begin(), profile.accept_probs.end()) !=
           profile.accept_probs.end());
  for (std::size_t l = 0; l < m; ++l) profile.rewards.push_back(0.1 + 1.9 * rng.uniform_pos());
  std::sort(profile.rewards.begin(), profile.rewards.end(), std::greater<>());
  return profile;
}

}  // namespace seqreview
