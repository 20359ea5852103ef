#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace ddkit::stats {

/// exp(mean(ln xs)); every value must be positive.
inline double geometric_mean(std::span<const double> xs)
{
  if (xs.empty())
    throw std::invalid_argument("geometric_mean of an empty sample");
  double sum = 0.0;
  for (double x : xs) {
    if (!(x > 0.0))
      throw std::invalid_argument("geometric_mean needs positive values");
    sum += std::log(x);
  }
  return std::exp(sum / static_cast<double>(xs.size()));
}

struct WilcoxonResult
{
  /// min(W+, W-)
  double statistic;
  double p_value;
  double z;
  /// Pairs left after dropping zero differences.
  std::size_t n;
};

inline constexpr std::size_t wilcoxon_min_pairs = 6;

/// Two-sided Wilcoxon signed-rank test for paired samples. Zero differences
/// are dropped, tied magnitudes get average ranks, and the p-value comes from
/// the normal approximation with tie correction (no continuity correction).
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> xs, std::span<const double> ys)
{
  if (xs.size() != ys.size())
    throw std::invalid_argument("wilcoxon_signed_rank: samples must have equal length");
  std::vector<double> d;
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (double diff = xs[i] - ys[i]; diff != 0.0)
      d.push_back(diff);
  const std::size_t n = d.size();
  if (n < wilcoxon_min_pairs)
    throw std::invalid_argument("wilcoxon_signed_rank: " + std::to_string(n) +
                                " nonzero differences; the normal approximation needs at least " +
                                std::to_string(wilcoxon_min_pairs) +
                                " (exact small-sample tables are not supported)");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });

  double w_plus = 0.0, w_minus = 0.0, tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && std::abs(d[order[j]]) == std::abs(d[order[i]]))
      ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k)
      (d[order[k]] > 0 ? w_plus : w_minus) += rank;
    i = j;
  }

  const double nn = static_cast<double>(n);
  const double mean = nn * (nn + 1.0) / 4.0;
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  const double t_stat = std::min(w_plus, w_minus);
  const double z = var > 0.0 ? (t_stat - mean) / std::sqrt(var) : 0.0;
  const double p = std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0)));
  return {t_stat, p, z, n};
}

} // namespace ddkit::stats
