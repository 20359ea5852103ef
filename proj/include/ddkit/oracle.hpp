#pragma once

#include "ddkit/core.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>

namespace ddkit {

/// A timeout counts as a failing verdict but stays distinguishable in
/// telemetry.
enum class Verdict { holds, fails, timeout };

constexpr bool holds(Verdict v) noexcept { return v == Verdict::holds; }

inline std::string_view to_string(Verdict v)
{
  switch (v) {
  case Verdict::holds: return "holds";
  case Verdict::fails: return "fails";
  case Verdict::timeout: return "timeout";
  }
  return "?";
}

/// The oracle could not be run at all (missing executable, fork failure...).
class oracle_unavailable : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Type-erased property ψ over element lists. Must be deterministic: equal
/// content gives equal verdicts within one run.
class PropertyOracle
{
public:
  using Fn = std::function<Verdict(const ElementList&)>;

  PropertyOracle() = default;
  PropertyOracle(Fn fn, std::string description)
      : fn_(std::move(fn)), description_(std::move(description))
  {
  }

  Verdict operator()(const ElementList& list) const { return fn_(list); }
  const std::string& description() const noexcept { return description_; }
  explicit operator bool() const noexcept { return static_cast<bool>(fn_); }

private:
  Fn fn_;
  std::string description_;
};

/// Adapts a boolean predicate.
template <typename Pred>
PropertyOracle make_oracle(Pred pred, std::string description)
{
  return PropertyOracle(
      [p = std::move(pred)](const ElementList& l) { return p(l) ? Verdict::holds : Verdict::fails; },
      std::move(description));
}

/// ψ(v) holds iff every kernel id survives in v. Monotone.
inline PropertyOracle planted_oracle(IdSet kernel)
{
  if (kernel.empty())
    throw precondition_error("planted oracle needs a nonempty kernel");
  std::sort(kernel.begin(), kernel.end());
  kernel.erase(std::unique(kernel.begin(), kernel.end()), kernel.end());
  auto desc = "planted(" + std::to_string(kernel.size()) + ")";
  return make_oracle([k = std::move(kernel)](const ElementList& l) { return includes(l.ids(), k); },
                     std::move(desc));
}

/// ψ(v) holds iff ids(v) is exactly one of `holding_sets`. `universe` is the
/// id set of the initial list; it must hold and ∅ must not.
inline PropertyOracle table_oracle(std::vector<IdSet> holding_sets, IdSet universe)
{
  std::set<IdSet> table;
  for (auto& s : holding_sets) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    table.insert(std::move(s));
  }
  std::sort(universe.begin(), universe.end());
  if (!table.contains(universe))
    throw precondition_error("table oracle: the full id set must be a holding set");
  if (table.contains(IdSet{}))
    throw precondition_error("table oracle: the empty set must not hold");
  auto desc = "table(" + std::to_string(table.size()) + ")";
  return make_oracle([t = std::move(table)](const ElementList& l) { return t.contains(l.ids()); },
                     std::move(desc));
}

/// Content-addressed verdict memo. Insert-once; safe for concurrent use.
class QueryCache
{
public:
  std::optional<Verdict> lookup(const Digest& d)
  {
    std::lock_guard lock(mutex_);
    auto it = map_.find(d);
    if (it == map_.end()) {
      ++misses_;
      return std::nullopt;
    }
    ++hits_;
    return it->second;
  }

  /// Returns the stored verdict, which is `v` unless one was already present.
  Verdict insert(const Digest& d, Verdict v)
  {
    std::lock_guard lock(mutex_);
    return map_.try_emplace(d, v).first->second;
  }

  std::size_t hits() const
  {
    std::lock_guard lock(mutex_);
    return hits_;
  }
  std::size_t misses() const
  {
    std::lock_guard lock(mutex_);
    return misses_;
  }
  std::size_t size() const
  {
    std::lock_guard lock(mutex_);
    return map_.size();
  }

private:
  mutable std::mutex mutex_;
  std::unordered_map<Digest, Verdict, DigestHash> map_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

struct Evaluation
{
  Verdict verdict;
  bool cached;
};

/// Evaluates through `cache` when given; a cached result never calls ψ.
inline Evaluation evaluate(const ElementList& list, const PropertyOracle& oracle, QueryCache* cache)
{
  if (!cache)
    return {oracle(list), false};
  auto digest = content_digest(list);
  if (auto hit = cache->lookup(digest))
    return {*hit, true};
  return {cache->insert(digest, oracle(list)), false};
}

struct OneMinimalReport
{
  bool is_one_minimal = true;
  IdSet removable_ids;
  /// Single-element deletion probes issued (always |l|).
  std::size_t probes = 0;
};

/// Tries every single-element deletion. Throws if ψ(l) does not hold.
inline OneMinimalReport check_one_minimal(const ElementList& list, const PropertyOracle& oracle,
                                          QueryCache* cache = nullptr)
{
  if (!holds(evaluate(list, oracle, cache).verdict))
    throw precondition_error("check_one_minimal: the property does not hold on the input");
  OneMinimalReport report;
  for (const auto& e : list) {
    ++report.probes;
    if (holds(evaluate(list.without({e.id}), oracle, cache).verdict))
      report.removable_ids.push_back(e.id);
  }
  report.is_one_minimal = report.removable_ids.empty();
  return report;
}

} // namespace ddkit
