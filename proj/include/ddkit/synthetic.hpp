#pragma once

// Seeded generators for desk-scale experiments: planted-kernel lists and small
// truth-table oracles with exhaustively computed ground truth.

#include "ddkit/oracle.hpp"

#include <random>

namespace ddkit {

/// Unbiased draw from [0, bound) using only raw engine output, so sequences do
/// not depend on the standard library's distribution implementations.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound)
{
  if (bound == 0)
    throw std::invalid_argument("uniform_below: empty range");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

/// Uniform double in [0, 1) from the top 53 bits.
inline double uniform_unit(std::mt19937_64& rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct PlantedCase
{
  ElementList list;
  IdSet kernel;

  PropertyOracle oracle() const { return planted_oracle(kernel); }
};

/// n lines "e1\n" ... "en\n" and a kernel of k ids drawn without replacement.
inline PlantedCase gen_planted(std::size_t n, std::size_t k, std::uint64_t seed)
{
  if (k < 1 || k > n)
    throw std::invalid_argument("gen_planted: need 1 <= k <= n");
  std::vector<std::string> payloads;
  for (std::size_t i = 1; i <= n; ++i)
    payloads.push_back("e" + std::to_string(i) + "\n");
  PlantedCase c{make_list(payloads), {}};

  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> pool(n);
  for (std::size_t i = 0; i < n; ++i)
    pool[i] = static_cast<std::uint32_t>(i + 1);
  for (std::size_t i = 0; i < k; ++i)
    std::swap(pool[i], pool[i + uniform_below(rng, n - i)]);
  for (std::size_t i = 0; i < k; ++i)
    c.kernel.push_back(ElementId{pool[i]});
  std::sort(c.kernel.begin(), c.kernel.end());
  return c;
}

struct TruthTable
{
  ElementList list;
  std::vector<IdSet> holding;
  /// Every holding set from which no single deletion keeps the property.
  std::vector<IdSet> one_minimal;

  PropertyOracle oracle() const { return table_oracle(holding, list.ids()); }

  bool holds_on(const IdSet& ids) const
  {
    return std::find(holding.begin(), holding.end(), ids) != holding.end();
  }
};

inline constexpr std::size_t max_table_elements = 8;

namespace detail {

inline IdSet ids_of_mask(const ElementList& list, std::uint32_t mask)
{
  IdSet ids;
  for (std::size_t i = 0; i < list.size(); ++i)
    if (mask & (1u << i))
      ids.push_back(list[i].id);
  return ids;
}

} // namespace detail

/// Builds a table over `list` (at most 8 elements) and enumerates its
/// 1-minimal holding sets over all 2^n subsets.
inline TruthTable make_truth_table(ElementList list, std::vector<IdSet> holding)
{
  if (list.size() > max_table_elements)
    throw std::invalid_argument("truth tables are limited to 8 elements");
  for (auto& s : holding)
    std::sort(s.begin(), s.end());
  std::sort(holding.begin(), holding.end());
  holding.erase(std::unique(holding.begin(), holding.end()), holding.end());
  TruthTable t{std::move(list), std::move(holding), {}};
  table_oracle(t.holding, t.list.ids()); // validates the constraints

  const auto n = static_cast<std::uint32_t>(t.list.size());
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    auto ids = detail::ids_of_mask(t.list, mask);
    if (!t.holds_on(ids))
      continue;
    bool minimal = true;
    for (std::uint32_t bit = 0; bit < n && minimal; ++bit)
      if (mask & (1u << bit))
        minimal = !t.holds_on(detail::ids_of_mask(t.list, mask & ~(1u << bit)));
    if (minimal)
      t.one_minimal.push_back(std::move(ids));
  }
  return t;
}

/// Random table over n <= 8 elements named "a".."h": each nonempty proper
/// subset holds with probability `density`; the full set always holds and the
/// empty set never does.
inline TruthTable gen_truth_table(std::size_t n, std::uint64_t seed, double density = 0.3)
{
  if (n < 1 || n > max_table_elements)
    throw std::invalid_argument("gen_truth_table: need 1 <= n <= 8");
  std::vector<std::string> payloads;
  for (std::size_t i = 0; i < n; ++i)
    payloads.push_back(std::string(1, static_cast<char>('a' + i)) + "\n");
  auto list = make_list(payloads);

  std::mt19937_64 rng(seed);
  const std::uint32_t full = (1u << n) - 1;
  std::vector<IdSet> holding{list.ids()};
  for (std::uint32_t mask = 1; mask < full; ++mask)
    if (uniform_unit(rng) < density)
      holding.push_back(detail::ids_of_mask(list, mask));
  return make_truth_table(std::move(list), std::move(holding));
}

} // namespace ddkit
