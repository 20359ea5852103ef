#pragma once

// Helpers shared by the test suites. The brute-force routines here are the
// independent oracles the library is checked against; they must not call
// into the code paths they verify.

#include "ddkit/ddkit.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>

namespace ddkit::testing {

inline IdSet ids(std::initializer_list<std::uint32_t> xs)
{
  IdSet out;
  for (auto x : xs)
    out.push_back(ElementId{x});
  return out;
}

inline ElementList letters(std::size_t n)
{
  std::vector<std::string> p;
  for (std::size_t i = 0; i < n; ++i)
    p.push_back(std::string(1, static_cast<char>('a' + i)) + "\n");
  return make_list(p);
}

/// Wraps an oracle and counts raw evaluations.
struct CountingOracle
{
  PropertyOracle inner;
  std::shared_ptr<std::size_t> calls = std::make_shared<std::size_t>(0);

  PropertyOracle oracle() const
  {
    return PropertyOracle(
        [in = inner, c = calls](const ElementList& l) {
          ++*c;
          return in(l);
        },
        inner.description());
  }
};

/// The 8-element running example: every element but e5 is required.
inline ElementList running_example() { return gen_planted(8, 1, 0).list; }
inline IdSet running_example_kernel() { return ids({1, 2, 3, 4, 6, 7, 8}); }

/// The 3-element table {{a,b,c},{a,c},{c}}.
inline TruthTable abc_table()
{
  return make_truth_table(letters(3), {ids({1, 2, 3}), ids({1, 3}), ids({3})});
}

/// Argmax of s (1-p)^s by direct scan over s in [1, 10 ceil(-1/ln(1-p))],
/// with pow() on 1-p; near-equal maxima resolve to the larger s.
inline std::int64_t brute_force_argmax(double p)
{
  const double x = -1.0 / std::log(1.0 - p);
  const auto limit = static_cast<std::int64_t>(10.0 * std::ceil(x));
  double best = -1.0;
  std::int64_t arg = 0;
  for (std::int64_t s = 1; s <= std::max<std::int64_t>(limit, 2); ++s) {
    const double v = static_cast<double>(s) * std::pow(1.0 - p, static_cast<double>(s));
    if (v > best * (1.0 + 1e-13)) {
      best = v;
      arg = s;
    } else if (v >= best * (1.0 - 1e-13)) {
      best = std::max(best, v);
      arg = s;
    }
  }
  return arg;
}

/// Writes an executable shell script into a fresh directory.
class ScriptDir
{
public:
  ScriptDir()
  {
    auto pattern = (std::filesystem::temp_directory_path() / "ddkit-test-XXXXXX").string();
    if (!::mkdtemp(pattern.data()))
      throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~ScriptDir()
  {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScriptDir(const ScriptDir&) = delete;
  ScriptDir& operator=(const ScriptDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path write(const std::string& name, const std::string& body, bool executable = false) const
  {
    auto p = path_ / name;
    std::ofstream(p, std::ios::binary) << body;
    if (executable)
      std::filesystem::permissions(p, std::filesystem::perms::owner_all, std::filesystem::perm_options::add);
    return p;
  }

  std::string read(const std::string& name) const
  {
    std::ifstream in(path_ / name, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

private:
  std::filesystem::path path_;
};

} // namespace ddkit::testing
