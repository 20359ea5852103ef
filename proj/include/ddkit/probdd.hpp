#pragma once

// Probabilistic delta debugging. Every element carries the probability that
// it is needed for the property. Each step deletes the prefix of the
// probability-sorted list that maximizes the expected gain
//
//   E(S) = |S| * prod_{e in S} (1 - e.p)
//
// and, when the deletion fails, raises the probabilities of S by the factor
// 1 / (1 - prod_{e in S} (1 - e.p)). An element whose lone deletion failed
// reaches p = 1 and is kept for good.

#include "ddkit/session.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace ddkit {

/// How select_subset treats a prefix whose gain equals the best so far.
enum class TieRule {
  strict, ///< stop growing (the pseudocode's `gain > currentMaxGain`)
  larger, ///< keep growing (size 4 rather than 3 at a uniform 0.25)
};

inline TieRule parse_tie_rule(std::string_view s)
{
  if (s == "strict")
    return TieRule::strict;
  if (s == "larger")
    return TieRule::larger;
  throw std::invalid_argument("unknown tie rule '" + std::string(s) + "' (expected strict or larger)");
}

struct ProbDDParams
{
  double p0 = 0.1;
  std::uint64_t seed = 0;
  bool randomized = true;
  TieRule tie = TieRule::strict;
};

using Rng = std::mt19937_64;

struct ProbState
{
  std::unordered_map<ElementId, double> probs;
  double p0 = 0.1;
  int round = 0;
  std::uint64_t rng_seed = 0;
  bool randomized = true;
  /// Live elements whose probability was updated (or tried) this round.
  std::unordered_set<ElementId> touched;

  ProbState(const ElementList& live, double initial, std::uint64_t seed, bool random)
      : p0(initial), rng_seed(seed), randomized(random)
  {
    if (!(initial > 0.0 && initial < 1.0))
      throw std::invalid_argument("p0 must lie in (0, 1)");
    for (const auto& e : live)
      probs.emplace(e.id, initial);
  }

  double operator[](ElementId id) const { return probs.at(id); }
};

namespace detail {
inline constexpr double gain_tolerance = 1e-12;
}

/// The gain-maximizing prefix of `live` sorted by ascending probability, in
/// selection order. Equal probabilities are shuffled by `rng` when the state is
/// randomized and otherwise kept in list order.
inline std::vector<ElementId> select_subset(const ProbState& state, const ElementList& live, Rng& rng,
                                            TieRule tie = TieRule::strict)
{
  struct Entry
  {
    double p;
    std::uint64_t key;
    std::size_t pos;
    ElementId id;
  };
  std::vector<Entry> order;
  order.reserve(live.size());
  for (std::size_t i = 0; i < live.size(); ++i) {
    auto id = live[i].id;
    order.push_back({state[id], state.randomized ? rng() : 0, i, id});
  }
  std::sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) {
    if (a.p != b.p)
      return a.p < b.p;
    if (a.key != b.key)
      return a.key < b.key;
    return a.pos < b.pos;
  });

  std::vector<ElementId> subset;
  double best = 0.0;
  double keep_all = 1.0;
  for (const auto& e : order) {
    keep_all *= 1.0 - e.p;
    const double gain = static_cast<double>(subset.size() + 1) * keep_all;
    const bool better = tie == TieRule::strict
                            ? gain > best * (1.0 + detail::gain_tolerance)
                            : gain > 0.0 && gain >= best * (1.0 - detail::gain_tolerance);
    if (!better)
      break;
    best = std::max(best, gain);
    subset.push_back(e.id);
  }
  if (subset.empty())
    throw std::logic_error("select_subset: every live element already has probability 1");
  return subset;
}

/// Raises the probabilities of a subset whose deletion failed.
inline void update_probabilities(ProbState& state, const std::vector<ElementId>& subset)
{
  if (subset.size() == 1) {
    state.probs.at(subset.front()) = 1.0;
    return;
  }
  double log_keep_all = 0.0;
  for (auto id : subset)
    log_keep_all += std::log1p(-state[id]);
  const double factor = 1.0 / -std::expm1(log_keep_all);
  for (auto id : subset) {
    auto& p = state.probs.at(id);
    p = std::min(1.0, p * factor);
  }
}

inline std::string_view probdd_name(const ProbDDParams& params)
{
  return params.randomized ? "probdd" : "probdd-norandom";
}

inline ReductionOutcome probdd_reduce(const ElementList& input, Session& session,
                                      const ProbDDParams& params)
{
  PassRecorder pass(session, std::string(probdd_name(params)));
  ProbState state(input, params.p0, params.seed, params.randomized);
  session.check_preconditions(input);
  Rng rng(params.seed);
  ElementList current = input;

  auto unsettled = [&] {
    return std::any_of(current.begin(), current.end(),
                       [&](const Element& e) { return state[e.id] < 1.0; });
  };
  try {
    while (unsettled()) {
      auto subset = select_subset(state, current, rng, params.tie);
      if (pass.round_log.empty() || pass.round_log.back().round != state.round) {
        RoundInfo info{state.round, subset.size(), current.size(), {}};
        for (const auto& e : current)
          info.probabilities.push_back(state[e.id]);
        pass.round_log.push_back(std::move(info));
      }

      IdSet sorted(subset.begin(), subset.end());
      std::sort(sorted.begin(), sorted.end());
      auto variant = current.without(sorted);
      if (session.query(current, variant, state.round)) {
        current = std::move(variant);
        for (auto id : subset) {
          state.probs.erase(id);
          state.touched.erase(id);
        }
      } else {
        update_probabilities(state, subset);
        state.touched.insert(subset.begin(), subset.end());
      }

      // Settled elements (p == 1) are never selected again; they do not hold
      // a round open.
      bool round_done = std::all_of(current.begin(), current.end(), [&](const Element& e) {
        return state.touched.contains(e.id) || state[e.id] >= 1.0;
      });
      if (round_done) {
        ++state.round;
        state.touched.clear();
      }
    }
  } catch (const query_budget_exhausted&) {
    pass.budget_exhausted = true;
  }
  pass.rounds = state.round;
  return pass.finish(std::move(current));
}

inline ReductionOutcome probdd_reduce(const ElementList& input, const PropertyOracle& oracle,
                                      const ProbDDParams& params, SessionOptions opts = {})
{
  Session session(oracle, opts);
  return probdd_reduce(input, session, params);
}

} // namespace ddkit
