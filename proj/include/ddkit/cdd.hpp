#pragma once

// Counter-based delta debugging. The per-element probabilities of ProbDD stay
// uniform when rounds divide evenly, so a round counter is enough: round r uses
// the probability p0 (1 - 1/e)^-r and the subset size that maximizes the
// expected gain for it. Each round sweeps the list once in fixed-size chunks
// (remainder last) and never restarts after a successful deletion.

#include "ddkit/session.hpp"
#include "ddkit/theory.hpp"

namespace ddkit {

struct CDDParams
{
  double p0 = 0.1;
};

/// Subset size for round `r`.
inline std::size_t compute_size(int r, double p0)
{
  if (!(p0 > 0.0 && p0 < 1.0))
    throw std::invalid_argument("p0 must lie in (0, 1), got " + std::to_string(p0));
  if (r < 0)
    throw std::invalid_argument("round must be non-negative");
  const double p = theory::prob_at_round(r, p0);
  if (p >= 0.5)
    return 1;
  return static_cast<std::size_t>(theory::optimal_int_size(p));
}

/// Sizes for r = 0, 1, ... up to and including the first 1.
inline std::vector<std::size_t> size_schedule(double p0)
{
  std::vector<std::size_t> sizes;
  for (int r = 0;; ++r) {
    sizes.push_back(compute_size(r, p0));
    if (sizes.back() == 1)
      return sizes;
  }
}

inline ReductionOutcome cdd_reduce(const ElementList& input, Session& session, const CDDParams& params)
{
  if (!(params.p0 > 0.0 && params.p0 < 1.0))
    throw std::invalid_argument("p0 must lie in (0, 1), got " + std::to_string(params.p0));
  PassRecorder pass(session, "cdd");
  session.check_preconditions(input);
  ElementList current = input;
  int round = 0;
  try {
    std::size_t size;
    do {
      size = compute_size(round, params.p0);
      pass.round_log.push_back({round, size, current.size(), {}});
      for (const auto& chunk : partition(current, size)) {
        auto variant = current.without(chunk.ids());
        if (session.query(current, variant, round))
          current = std::move(variant);
      }
      ++round;
    } while (size > 1);
  } catch (const query_budget_exhausted&) {
    pass.budget_exhausted = true;
  }
  pass.rounds = static_cast<int>(pass.round_log.size());
  return pass.finish(std::move(current));
}

inline ReductionOutcome cdd_reduce(const ElementList& input, const PropertyOracle& oracle,
                                   const CDDParams& params, SessionOptions opts = {})
{
  Session session(oracle, opts);
  return cdd_reduce(input, session, params);
}

} // namespace ddkit
