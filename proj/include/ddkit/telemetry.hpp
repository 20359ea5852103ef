#pragma once

// Per-query records and the Complement / Revisit / Other query taxonomy.

#include "ddkit/oracle.hpp"

#include "json.hpp"

#include <array>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace ddkit {

enum class QueryCategory { complement, revisit, other };

inline std::string_view to_string(QueryCategory c)
{
  switch (c) {
  case QueryCategory::complement: return "Complement";
  case QueryCategory::revisit: return "Revisit";
  case QueryCategory::other: return "Other";
  }
  return "?";
}

struct QueryRecord
{
  std::size_t index = 0;
  std::string algorithm;
  int round = 0;
  IdSet deleted_ids;
  std::size_t deleted_count = 0;
  std::size_t kept_count = 0;
  QueryCategory category = QueryCategory::other;
  Verdict outcome = Verdict::fails;
  bool cached = false;
  double duration_s = 0.0;
};

/// How the reducer phrased a query: delete a subset, or keep only a subset.
enum class QueryShape { remove, keep };

/// Assigns each query its category as the run goes.
///
/// A query's "subset" is the set the reducer named: the kept elements for a
/// keep-shaped query, the deleted ones otherwise.
///   - Complement: keeps a subset smaller than the rest (deletes a strict
///     majority by removing the subset's complement).
///   - Revisit: its subset was already queried earlier in the same round and a
///     successful query happened since (a re-attempt caused by a restart).
///   - Other: everything else.
/// Complement takes precedence over Revisit.
class QueryClassifier
{
public:
  QueryCategory classify(int round, const IdSet& deleted, const IdSet& kept,
                         QueryShape shape = QueryShape::remove)
  {
    if (round != round_) {
      round_ = round;
      first_seen_.clear();
    }
    const std::size_t seq = next_++;
    const bool complement = shape == QueryShape::keep && deleted.size() > kept.size();
    const IdSet& subset = shape == QueryShape::keep ? kept : deleted;
    auto [it, inserted] = first_seen_.try_emplace(subset, seq);
    if (complement)
      return QueryCategory::complement;
    if (!inserted && last_success_ && *last_success_ > it->second)
      return QueryCategory::revisit;
    return QueryCategory::other;
  }

  /// Must follow every classify() call.
  void record_outcome(bool success)
  {
    if (success)
      last_success_ = next_ - 1;
  }

  /// Forget all history (new reduction pass).
  void reset()
  {
    round_ = std::numeric_limits<int>::min();
    first_seen_.clear();
    last_success_.reset();
  }

private:
  int round_ = std::numeric_limits<int>::min();
  std::size_t next_ = 0;
  std::optional<std::size_t> last_success_;
  std::map<IdSet, std::size_t> first_seen_;
};

struct CategoryStats
{
  std::size_t total = 0;
  std::size_t successes = 0;

  double success_rate() const noexcept
  {
    return total == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(total);
  }
};

struct RunStats
{
  std::array<CategoryStats, 3> by_category{};
  std::size_t total = 0;
  std::size_t successes = 0;

  const CategoryStats& operator[](QueryCategory c) const
  {
    return by_category[static_cast<std::size_t>(c)];
  }

  RunStats& merge(const RunStats& o)
  {
    for (std::size_t i = 0; i < by_category.size(); ++i) {
      by_category[i].total += o.by_category[i].total;
      by_category[i].successes += o.by_category[i].successes;
    }
    total += o.total;
    successes += o.successes;
    return *this;
  }
};

template <typename Records>
RunStats summarize(const Records& records)
{
  RunStats s;
  for (const QueryRecord& r : records) {
    auto& c = s.by_category[static_cast<std::size_t>(r.category)];
    ++c.total;
    ++s.total;
    if (holds(r.outcome)) {
      ++c.successes;
      ++s.successes;
    }
  }
  return s;
}

inline nlohmann::json to_json(const RunStats& s)
{
  nlohmann::json j;
  for (auto c : {QueryCategory::complement, QueryCategory::revisit, QueryCategory::other}) {
    const auto& cs = s[c];
    j[std::string(to_string(c))] = {
        {"total", cs.total}, {"successes", cs.successes}, {"success_rate", cs.success_rate()}};
  }
  j["total"] = s.total;
  j["successes"] = s.successes;
  return j;
}

inline nlohmann::json to_json(const QueryRecord& r)
{
  nlohmann::json ids = nlohmann::json::array();
  for (auto id : r.deleted_ids)
    ids.push_back(to_index(id));
  return {{"index", r.index},
          {"algorithm", r.algorithm},
          {"round", r.round},
          {"deleted_ids", std::move(ids)},
          {"deleted_count", r.deleted_count},
          {"kept_count", r.kept_count},
          {"category", to_string(r.category)},
          {"outcome", to_string(r.outcome)},
          {"cached", r.cached},
          {"duration_s", r.duration_s}};
}

/// Owned by one reduction run.
class TelemetrySink
{
public:
  std::size_t add(QueryRecord r)
  {
    r.index = records_.size();
    records_.push_back(std::move(r));
    return records_.size() - 1;
  }

  const std::vector<QueryRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  RunStats stats() const { return summarize(records_); }

  /// Appends another sink's records, renumbering indices.
  void merge(const TelemetrySink& other)
  {
    for (const auto& r : other.records_)
      add(r);
  }

  /// {algorithm, input, records:[...], stats:{...}}
  nlohmann::json to_json(std::string_view algorithm, std::string_view input) const
  {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& r : records_)
      recs.push_back(ddkit::to_json(r));
    return {{"algorithm", algorithm},
            {"input", input},
            {"records", std::move(recs)},
            {"stats", ddkit::to_json(stats())}};
  }

  /// One row per query; deleted ids space-separated.
  void write_csv(std::ostream& out) const
  {
    out << "index,algorithm,round,deleted_count,kept_count,category,outcome,cached,duration_s,"
           "deleted_ids\n";
    for (const auto& r : records_) {
      out << r.index << ',' << r.algorithm << ',' << r.round << ',' << r.deleted_count << ','
          << r.kept_count << ',' << to_string(r.category) << ',' << to_string(r.outcome) << ','
          << (r.cached ? 1 : 0) << ',' << r.duration_s << ',';
      for (std::size_t i = 0; i < r.deleted_ids.size(); ++i)
        out << (i ? " " : "") << to_index(r.deleted_ids[i]);
      out << '\n';
    }
  }

private:
  std::vector<QueryRecord> records_;
};

} // namespace ddkit
