#pragma once

// Classic ddmin with fixed-size partitions:
//
//   s = max(1, |L|/2)
//   1. keep a single chunk if it alone has the property; restart with
//      s = max(1, |chunk|/2)
//   2. delete a chunk if its complement has the property; restart step 2 on
//      the smaller list with the same s (skipped for two-chunk partitions,
//      whose complements are the step-1 variants)
//   3. halve s and go to step 1, or stop when s == 1
//
// The round number increases whenever step 3 changes s.

#include "ddkit/session.hpp"

namespace ddkit {

inline ReductionOutcome ddmin_reduce(const ElementList& input, Session& session)
{
  PassRecorder pass(session, "ddmin");
  session.check_preconditions(input);
  ElementList current = input;
  if (current.size() <= 1)
    return pass.finish(std::move(current));

  std::size_t size = std::max<std::size_t>(1, current.size() / 2);
  int round = 0;
  auto log_round = [&] { pass.round_log.push_back({round, size, current.size(), {}}); };
  log_round();
  try {
    for (;;) {
      bool kept_chunk = false;
      auto chunks = partition(current, size);
      if (chunks.size() > 1) {
        for (auto& chunk : chunks) {
          if (session.query(current, chunk, round, QueryShape::keep)) {
            current = std::move(chunk);
            kept_chunk = true;
            break;
          }
        }
      }
      if (kept_chunk) {
        if (current.size() <= 1)
          break;
        size = std::max<std::size_t>(1, current.size() / 2);
        continue;
      }

      bool removed;
      do {
        removed = false;
        chunks = partition(current, size);
        if (chunks.size() <= 2)
          break;
        for (const auto& chunk : chunks) {
          auto complement = current.without(chunk.ids());
          if (session.query(current, complement, round)) {
            current = std::move(complement);
            removed = true;
            break;
          }
        }
      } while (removed);

      if (size <= 1)
        break;
      size = std::max<std::size_t>(1, size / 2);
      ++round;
      log_round();
    }
  } catch (const query_budget_exhausted&) {
    pass.budget_exhausted = true;
  }
  pass.rounds = round + 1;
  return pass.finish(std::move(current));
}

inline ReductionOutcome ddmin_reduce(const ElementList& input, const PropertyOracle& oracle,
                                     SessionOptions opts = {})
{
  Session session(oracle, opts);
  return ddmin_reduce(input, session);
}

} // namespace ddkit
