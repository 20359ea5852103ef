#pragma once

// Closed forms relating deletion probability and subset size when every
// element shares one probability p:
//
//   E(s)      = s (1 - p)^s                    expected reduction gain
//   s*(p)     = -1 / ln(1 - p)                 real maximizer of E
//   p_{r+1}   = p_r / (1 - (1 - p_r)^{s_r})    = p_r / (1 - 1/e)
//   s_{r+1}   = 1 / ln((1 - 1/e) / (e^{-1/s_r} - 1/e))
//
// with (1 - 1/e) s - 1 <= s_{r+1} <= (1 - 1/e) s for s >= 2.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ddkit::theory {

/// 1 - e^-1; probabilities grow by its inverse every round.
inline const double decay = -std::expm1(-1.0);
inline const double growth_factor = 1.0 / decay;
inline const double inv_e = std::exp(-1.0);

namespace detail {

inline void require_probability(double p, const char* what)
{
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error(std::string(what) + ": probability must lie in (0, 1), got " +
                            std::to_string(p));
}

} // namespace detail

/// -1 / ln(1 - p), computed with log1p so tiny p stay accurate.
inline double size_from_prob(double p)
{
  detail::require_probability(p, "size_from_prob");
  return -1.0 / std::log1p(-p);
}

/// E(s) = s (1 - p)^s.
inline double expected_gain(double s, double p)
{
  return s * std::exp(s * std::log1p(-p));
}

/// One round of growth: p / (1 - e^-1). Requires p < 1 - e^-1.
inline double next_prob(double p)
{
  if (!(p > 0.0 && p < decay))
    throw std::domain_error("next_prob: probability must lie in (0, 1 - 1/e), got " +
                            std::to_string(p));
  return p / decay;
}

/// The same step without the e^-1 simplification:
/// p / (1 - (1 - p)^{size_from_prob(p)}).
inline double next_prob_two_step(double p)
{
  const double s = size_from_prob(p);
  return p / -std::expm1(s * std::log1p(-p));
}

/// p0 / (1 - e^-1)^r, uncapped.
inline double prob_at_round(int r, double p0)
{
  detail::require_probability(p0, "prob_at_round");
  if (r < 0)
    throw std::domain_error("prob_at_round: negative round");
  return p0 * std::pow(growth_factor, r);
}

/// Integer argmax of s (1 - p)^s over s >= 1. It is always the floor or the
/// ceiling of size_from_prob(p); the two tie exactly when p == 1/ceil, and
/// ties go to the larger size. For p >= 0.5 the answer is 1.
inline std::int64_t optimal_int_size(double p)
{
  detail::require_probability(p, "optimal_int_size");
  if (p >= 0.5)
    return 1;
  const double x = size_from_prob(p);
  const auto lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(x)));
  const auto hi = std::max<std::int64_t>(lo, static_cast<std::int64_t>(std::ceil(x)));
  if (lo == hi)
    return lo;
  if (std::abs(p * static_cast<double>(hi) - 1.0) <= 1e-12)
    return hi;
  return expected_gain(static_cast<double>(hi), p) > expected_gain(static_cast<double>(lo), p)
             ? hi
             : lo;
}

/// Real-valued size after one round, as a function of the current size.
/// Requires s > 1.
inline double size_recursion(double s)
{
  if (!(s > 1.0))
    throw std::domain_error("size_recursion: size must exceed 1, got " + std::to_string(s));
  return 1.0 / std::log(decay / (std::exp(-1.0 / s) - inv_e));
}

struct BoundCheck
{
  double lower;
  double value;
  double upper;
  bool holds;
};

/// Linear band for the next size: (1 - 1/e) s - 1 <= s_next <= (1 - 1/e) s.
inline BoundCheck bound_check(std::int64_t s, double slack = 1e-9)
{
  if (s < 2)
    throw std::domain_error("bound_check: size must be at least 2");
  const double sd = static_cast<double>(s);
  BoundCheck b{decay * sd - 1.0, size_recursion(sd), decay * sd, false};
  b.holds = b.lower - slack <= b.value && b.value <= b.upper + slack;
  return b;
}

} // namespace ddkit::theory
