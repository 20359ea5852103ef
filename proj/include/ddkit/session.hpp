#pragma once

// Query plumbing shared by the reducers: caching, accounting, telemetry and
// the query budget. One Session per reduction run; not thread-safe.

#include "ddkit/telemetry.hpp"

#include <chrono>

namespace ddkit {

struct SessionOptions
{
  bool use_cache = true;
  /// Stop reducing once this many queries were issued.
  std::optional<std::size_t> max_queries;
};

class query_budget_exhausted : public std::runtime_error
{
public:
  query_budget_exhausted() : std::runtime_error("query budget exhausted") {}
};

class Session
{
public:
  explicit Session(PropertyOracle oracle, SessionOptions opts = {})
      : oracle_(std::move(oracle)), opts_(opts)
  {
    if (!oracle_)
      throw std::invalid_argument("session needs an oracle");
    if (opts_.use_cache)
      cache_ = std::make_unique<QueryCache>();
  }

  const PropertyOracle& oracle() const noexcept { return oracle_; }
  QueryCache* cache() noexcept { return cache_.get(); }
  TelemetrySink& telemetry() noexcept { return telemetry_; }
  const TelemetrySink& telemetry() const noexcept { return telemetry_; }

  std::size_t queries() const noexcept { return queries_; }
  std::size_t oracle_calls() const noexcept { return oracle_calls_; }
  std::size_t cache_hits() const noexcept { return cache_hits_; }
  std::size_t timeouts() const noexcept { return timeouts_; }
  std::size_t verification_evaluations() const noexcept { return verifications_; }

  /// Starts a new reducer pass; query categories do not look across passes.
  void begin_pass(std::string algorithm)
  {
    algorithm_ = std::move(algorithm);
    classifier_.reset();
  }

  /// Asks whether `variant` (a sublist of `current`) keeps the property.
  bool query(const ElementList& current, const ElementList& variant, int round,
             QueryShape shape = QueryShape::remove)
  {
    if (opts_.max_queries && queries_ >= *opts_.max_queries)
      throw query_budget_exhausted();
    QueryRecord rec;
    rec.algorithm = algorithm_;
    rec.round = round;
    auto kept = variant.ids();
    rec.deleted_ids = set_difference(current.ids(), kept);
    rec.deleted_count = rec.deleted_ids.size();
    rec.kept_count = kept.size();
    rec.category = classifier_.classify(round, rec.deleted_ids, kept, shape);

    auto start = std::chrono::steady_clock::now();
    auto eval = evaluate(variant, oracle_, cache_.get());
    rec.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    rec.outcome = eval.verdict;
    rec.cached = eval.cached;

    ++queries_;
    if (eval.cached)
      ++cache_hits_;
    else
      ++oracle_calls_;
    if (eval.verdict == Verdict::timeout && !eval.cached)
      ++timeouts_;
    classifier_.record_outcome(holds(eval.verdict));
    last_index_ = telemetry_.add(std::move(rec));
    return holds(eval.verdict);
  }

  std::size_t last_record_index() const noexcept { return last_index_; }

  /// Evaluation outside the query count (preconditions, final re-check).
  Verdict verify(const ElementList& list)
  {
    ++verifications_;
    auto eval = evaluate(list, oracle_, cache_.get());
    if (!eval.cached)
      ++oracle_calls_;
    return eval.verdict;
  }

  /// ψ(list) must hold and ψ(∅) must fail.
  void check_preconditions(const ElementList& list)
  {
    if (!holds(verify(list)))
      throw precondition_error("the property does not hold on the initial input");
    if (holds(verify(ElementList{})))
      throw precondition_error("the property holds on the empty input");
  }

private:
  PropertyOracle oracle_;
  SessionOptions opts_;
  std::unique_ptr<QueryCache> cache_;
  TelemetrySink telemetry_;
  QueryClassifier classifier_;
  std::string algorithm_;
  std::size_t queries_ = 0;
  std::size_t oracle_calls_ = 0;
  std::size_t cache_hits_ = 0;
  std::size_t timeouts_ = 0;
  std::size_t verifications_ = 0;
  std::size_t last_index_ = 0;
};

/// Tracks one reducer pass over a session and produces its outcome.
class PassRecorder
{
public:
  PassRecorder(Session& session, std::string algorithm)
      : session_(session),
        first_record_(session.telemetry().size()),
        queries_(session.queries()),
        calls_(session.oracle_calls()),
        hits_(session.cache_hits()),
        timeouts_(session.timeouts()),
        verifications_(session.verification_evaluations()),
        start_(std::chrono::steady_clock::now())
  {
    session.begin_pass(std::move(algorithm));
  }

  std::vector<RoundInfo> round_log;
  int rounds = 0;
  bool budget_exhausted = false;

  ReductionOutcome finish(ElementList final)
  {
    if (!holds(session_.verify(final)))
      throw std::logic_error("reduced list no longer has the property (nondeterministic oracle?)");
    ReductionOutcome out;
    out.final = std::move(final);
    out.queries = session_.queries() - queries_;
    out.oracle_calls = session_.oracle_calls() - calls_;
    out.cache_hits = session_.cache_hits() - hits_;
    out.timeouts = session_.timeouts() - timeouts_;
    out.verification_evaluations = session_.verification_evaluations() - verifications_;
    out.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    out.rounds = rounds;
    out.round_log = std::move(round_log);
    for (auto i = first_record_; i < session_.telemetry().size(); ++i)
      out.per_query.push_back(i);
    out.iteration_sizes = {out.final.size()};
    out.budget_exhausted = budget_exhausted;
    return out;
  }

private:
  Session& session_;
  std::size_t first_record_, queries_, calls_, hits_, timeouts_, verifications_;
  std::chrono::steady_clock::time_point start_;
};

/// Splits `list` into consecutive chunks of `size`; the last one holds the
/// remainder.
inline std::vector<ElementList> partition(const ElementList& list, std::size_t size)
{
  std::vector<ElementList> chunks;
  for (std::size_t i = 0; i < list.size(); i += size)
    chunks.push_back(list.slice(i, std::min(size, list.size() - i)));
  return chunks;
}

} // namespace ddkit
