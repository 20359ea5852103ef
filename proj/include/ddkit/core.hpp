#pragma once

// Elements, segmentation/reassembly, content digests and the outcome record
// shared by every reducer in ddkit.

#include <openssl/evp.h>

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace ddkit {

/// Identity of one element. Assigned in input order at segmentation and
/// never reused, so ids of any surviving list are strictly increasing.
enum class ElementId : std::uint32_t {};

constexpr std::uint32_t to_index(ElementId id) noexcept
{
  return static_cast<std::uint32_t>(id);
}

/// Sorted, duplicate-free set of element ids.
using IdSet = std::vector<ElementId>;

struct Element
{
  ElementId id;
  std::string payload;

  friend bool operator==(const Element&, const Element&) = default;
};

class precondition_error : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

/// Ordered sequence of elements. Reduction only ever removes elements, so the
/// stored order is always the original input order restricted to survivors.
class ElementList
{
public:
  ElementList() = default;
  explicit ElementList(std::vector<Element> elements) : elements_(std::move(elements)) {}

  std::size_t size() const noexcept { return elements_.size(); }
  bool empty() const noexcept { return elements_.empty(); }

  const Element& operator[](std::size_t i) const { return elements_[i]; }
  auto begin() const noexcept { return elements_.begin(); }
  auto end() const noexcept { return elements_.end(); }
  const std::vector<Element>& elements() const noexcept { return elements_; }

  IdSet ids() const
  {
    IdSet out;
    out.reserve(elements_.size());
    for (const auto& e : elements_)
      out.push_back(e.id);
    return out;
  }

  std::size_t byte_size() const noexcept
  {
    std::size_t n = 0;
    for (const auto& e : elements_)
      n += e.payload.size();
    return n;
  }

  /// Copy of the list with every element whose id is in `removed` dropped.
  ElementList without(const IdSet& removed) const
  {
    std::unordered_set<ElementId> drop(removed.begin(), removed.end());
    std::vector<Element> out;
    out.reserve(elements_.size());
    for (const auto& e : elements_)
      if (!drop.contains(e.id))
        out.push_back(e);
    return ElementList{std::move(out)};
  }

  /// Copy of the list restricted to ids in `kept`.
  ElementList only(const IdSet& kept) const
  {
    std::unordered_set<ElementId> keep(kept.begin(), kept.end());
    std::vector<Element> out;
    for (const auto& e : elements_)
      if (keep.contains(e.id))
        out.push_back(e);
    return ElementList{std::move(out)};
  }

  /// Elements [first, first + count) as a new list.
  ElementList slice(std::size_t first, std::size_t count) const
  {
    auto b = elements_.begin() + static_cast<std::ptrdiff_t>(first);
    return ElementList{std::vector<Element>(b, b + static_cast<std::ptrdiff_t>(count))};
  }

  friend bool operator==(const ElementList&, const ElementList&) = default;

private:
  std::vector<Element> elements_;
};

/// True when every id of `sub` occurs in `super` in the same relative order.
inline bool is_subsequence(const ElementList& sub, const ElementList& super)
{
  std::size_t j = 0;
  for (const auto& e : super)
    if (j < sub.size() && sub[j] == e)
      ++j;
  return j == sub.size();
}

/// Sorted union/difference helpers for id sets.
inline IdSet set_difference(const IdSet& a, const IdSet& b)
{
  IdSet out;
  std::size_t j = 0;
  for (auto id : a) {
    while (j < b.size() && b[j] < id)
      ++j;
    if (j == b.size() || b[j] != id)
      out.push_back(id);
  }
  return out;
}

inline bool includes(const IdSet& super, const IdSet& sub)
{
  std::size_t j = 0;
  for (auto id : super)
    if (j < sub.size() && sub[j] == id)
      ++j;
  return j == sub.size();
}

enum class Granularity { line, word, character };

inline std::string_view to_string(Granularity g)
{
  switch (g) {
  case Granularity::line: return "line";
  case Granularity::word: return "word";
  case Granularity::character: return "char";
  }
  return "?";
}

inline Granularity parse_granularity(std::string_view s)
{
  if (s == "line")
    return Granularity::line;
  if (s == "word")
    return Granularity::word;
  if (s == "char")
    return Granularity::character;
  throw std::invalid_argument("unknown granularity '" + std::string(s) +
                              "' (expected line, word or char)");
}

namespace detail {

inline bool is_space(char c)
{
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

inline std::vector<std::string> split_lines(std::string_view in)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < in.size()) {
    auto nl = in.find('\n', start);
    auto end = nl == std::string_view::npos ? in.size() : nl + 1;
    out.emplace_back(in.substr(start, end - start));
    start = end;
  }
  return out;
}

// Each token carries the whitespace run that follows it; whitespace before
// the first token is glued to the front of that token.
inline std::vector<std::string> split_words(std::string_view in)
{
  std::vector<std::string> out;
  std::size_t i = 0;
  std::size_t lead = 0;
  while (lead < in.size() && is_space(in[lead]))
    ++lead;
  if (lead == in.size()) {
    if (!in.empty())
      out.emplace_back(in);
    return out;
  }
  std::size_t start = 0;
  i = lead;
  while (i < in.size()) {
    while (i < in.size() && !is_space(in[i]))
      ++i;
    while (i < in.size() && is_space(in[i]))
      ++i;
    out.emplace_back(in.substr(start, i - start));
    start = i;
  }
  return out;
}

} // namespace detail

/// Splits `input` into elements. Concatenating the payloads gives back the
/// input byte for byte at every granularity.
inline ElementList segment(std::string_view input, Granularity g)
{
  std::vector<std::string> pieces;
  switch (g) {
  case Granularity::line: pieces = detail::split_lines(input); break;
  case Granularity::word: pieces = detail::split_words(input); break;
  case Granularity::character:
    pieces.reserve(input.size());
    for (char c : input)
      pieces.emplace_back(1, c);
    break;
  }
  std::vector<Element> elements;
  elements.reserve(pieces.size());
  std::uint32_t next = 1;
  for (auto& p : pieces)
    elements.push_back(Element{ElementId{next++}, std::move(p)});
  return ElementList{std::move(elements)};
}

/// Builds a list from explicit payloads, ids 1..n.
inline ElementList make_list(const std::vector<std::string>& payloads)
{
  std::vector<Element> elements;
  std::uint32_t next = 1;
  for (const auto& p : payloads)
    elements.push_back(Element{ElementId{next++}, p});
  return ElementList{std::move(elements)};
}

inline std::string reassemble(const ElementList& list)
{
  std::string out;
  out.reserve(list.byte_size());
  for (const auto& e : list)
    out += e.payload;
  return out;
}

using Digest = std::array<std::uint8_t, 32>;

inline Digest sha256(std::string_view bytes)
{
  Digest d{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), d.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != d.size())
    throw std::runtime_error("SHA-256 evaluation failed");
  return d;
}

/// SHA-256 of the reassembled bytes.
inline Digest content_digest(const ElementList& list)
{
  return sha256(reassemble(list));
}

inline std::string to_hex(const Digest& d)
{
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (auto b : d) {
    s += digits[b >> 4];
    s += digits[b & 0xF];
  }
  return s;
}

struct DigestHash
{
  std::size_t operator()(const Digest& d) const noexcept
  {
    std::size_t h = 0;
    for (std::size_t i = 0; i < sizeof(std::size_t); ++i)
      h = (h << 8) | d[i];
    return h;
  }
};

/// One round of a reducer: the subset size used and the live count at its
/// start. ProbDD also snapshots the live probabilities.
struct RoundInfo
{
  int round = 0;
  std::size_t subset_size = 0;
  std::size_t live = 0;
  std::vector<double> probabilities;
};

struct ReductionOutcome
{
  ElementList final;
  /// Every oracle evaluation a reducer asks
  /// for, including those answered from the cache.
  std::size_t queries = 0;
  /// Evaluations that actually reached the oracle (process spawns for an
  /// external oracle).
  std::size_t oracle_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t timeouts = 0;
  /// Precondition and final re-verification evaluations, not queries.
  std::size_t verification_evaluations = 0;
  double wall_time_s = 0.0;
  int rounds = 0;
  std::vector<RoundInfo> round_log;
  /// Indices into the session's telemetry records.
  std::vector<std::size_t> per_query;
  /// Element count after each pass (fixpoint iteration); a single run has one.
  std::vector<std::size_t> iteration_sizes;
  bool budget_exhausted = false;
};

} // namespace ddkit
