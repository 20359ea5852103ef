#pragma once

// Algorithm selection and the fixpoint driver that reruns a reducer on its
// own output until the result stops shrinking.

#include "ddkit/cdd.hpp"
#include "ddkit/ddmin.hpp"
#include "ddkit/probdd.hpp"

namespace ddkit {

enum class Algorithm { ddmin, probdd, probdd_norandom, cdd };

inline std::string_view to_string(Algorithm a)
{
  switch (a) {
  case Algorithm::ddmin: return "ddmin";
  case Algorithm::probdd: return "probdd";
  case Algorithm::probdd_norandom: return "probdd-norandom";
  case Algorithm::cdd: return "cdd";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s)
{
  for (auto a : {Algorithm::ddmin, Algorithm::probdd, Algorithm::probdd_norandom, Algorithm::cdd})
    if (to_string(a) == s)
      return a;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) +
                              "' (expected ddmin, probdd, probdd-norandom or cdd)");
}

struct ReduceParams
{
  double p0 = 0.1;
  std::uint64_t seed = 0;
  TieRule tie = TieRule::strict;
};

inline ReductionOutcome run_algorithm(Algorithm alg, const ElementList& input, Session& session,
                                      const ReduceParams& params)
{
  switch (alg) {
  case Algorithm::ddmin: return ddmin_reduce(input, session);
  case Algorithm::probdd:
  case Algorithm::probdd_norandom:
    return probdd_reduce(input, session,
                         ProbDDParams{params.p0, params.seed, alg == Algorithm::probdd, params.tie});
  case Algorithm::cdd: return cdd_reduce(input, session, CDDParams{params.p0});
  }
  throw std::logic_error("unreachable");
}

/// Reruns `alg` on its own output until the element count stops decreasing or
/// `max_iterations` passes ran. Counters are summed over passes;
/// iteration_sizes lists the size after each pass.
inline ReductionOutcome fixpoint_reduce(Algorithm alg, const ElementList& input, Session& session,
                                        const ReduceParams& params, int max_iterations)
{
  if (max_iterations < 1)
    throw std::invalid_argument("max_iterations must be at least 1");
  ReductionOutcome total;
  ElementList current = input;
  for (int i = 0; i < max_iterations; ++i) {
    auto pass = run_algorithm(alg, current, session, params);
    const bool shrank = pass.final.size() < current.size();
    total.queries += pass.queries;
    total.oracle_calls += pass.oracle_calls;
    total.cache_hits += pass.cache_hits;
    total.timeouts += pass.timeouts;
    total.verification_evaluations += pass.verification_evaluations;
    total.wall_time_s += pass.wall_time_s;
    total.rounds += pass.rounds;
    total.round_log.insert(total.round_log.end(), pass.round_log.begin(), pass.round_log.end());
    total.per_query.insert(total.per_query.end(), pass.per_query.begin(), pass.per_query.end());
    total.iteration_sizes.push_back(pass.final.size());
    total.budget_exhausted = pass.budget_exhausted;
    current = std::move(pass.final);
    if (!shrank || total.budget_exhausted)
      break;
  }
  total.final = std::move(current);
  return total;
}

inline ReductionOutcome fixpoint_reduce(Algorithm alg, const ElementList& input,
                                        const PropertyOracle& oracle, const ReduceParams& params,
                                        int max_iterations, SessionOptions opts = {})
{
  Session session(oracle, opts);
  return fixpoint_reduce(alg, input, session, params, max_iterations);
}

} // namespace ddkit
