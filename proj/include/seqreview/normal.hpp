#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace seqreview {

/// Standard normal CDF through erfc, accurate in both tails.
inline double normal_cdf(double x) {
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Standard normal survival function, 1 - CDF, without cancellation.
inline double normal_sf(double x) { return normal_cdf(-x); }

/// Pr(q + eps >= tau) for eps ~ N(0, sigma^2).
inline double prob_score_at_least(double quality, double tau, double sigma) {
  if (tau == -std::numeric_limits<double>::infinity()) return 1.0;
  if (tau == std::numeric_limits<double>::infinity()) return 0.0;
  return normal_sf((tau - quality) / sigma);
}

}  // namespace seqreview
