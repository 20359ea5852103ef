#include "support.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace ddkit;
using namespace ddkit::testing;

namespace {

using stats::geometric_mean;
using stats::wilcoxon_signed_rank;

double gm(std::vector<double> xs) { return geometric_mean(xs); }

TEST(GeometricMean, Examples)
{
  EXPECT_DOUBLE_EQ(gm({4}), 4.0);
  EXPECT_NEAR(gm({1, 100}), 10.0, 1e-12);
  EXPECT_NEAR(gm({2, 8, 4}), 4.0, 1e-12);
}

TEST(GeometricMean, ScaleEquivariant)
{
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> xs, scaled;
    const double c = 0.01 + 100 * uniform_unit(rng);
    for (int j = 0; j < 10; ++j) {
      xs.push_back(0.1 + 1000 * uniform_unit(rng));
      scaled.push_back(c * xs.back());
    }
    ASSERT_NEAR(gm(scaled), c * gm(xs), 1e-9 * c * gm(xs));
  }
}

TEST(GeometricMean, RejectsEmptyAndNonPositive)
{
  EXPECT_THROW(gm({}), std::invalid_argument);
  EXPECT_THROW(gm({1, 0}), std::invalid_argument);
  EXPECT_THROW(gm({2, -1}), std::invalid_argument);
}

std::vector<double> iota_from(double start, int n)
{
  std::vector<double> v;
  for (int i = 0; i < n; ++i)
    v.push_back(start + i);
  return v;
}

TEST(Wilcoxon, ShiftedByOne)
{
  auto xs = iota_from(1, 20);
  auto ys = iota_from(2, 20);
  auto r = wilcoxon_signed_rank(xs, ys);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_NEAR(r.p_value, 7.74421643104407e-06, 1e-12);
  EXPECT_LT(r.p_value, 0.001);
  EXPECT_EQ(r.n, 20u);
}

TEST(Wilcoxon, ReferenceWithTiesAndZeros)
{
  std::vector<double> a{125, 115, 130, 140, 140, 115, 140, 125, 140, 135, 110, 132};
  std::vector<double> b{110, 122, 125, 120, 140, 124, 123, 137, 135, 145, 118, 130};
  auto r = wilcoxon_signed_rank(a, b);
  EXPECT_DOUBLE_EQ(r.statistic, 30.0);
  EXPECT_NEAR(r.p_value, 0.7895735542519725, 1e-12);
  EXPECT_EQ(r.n, 11u);
}

TEST(Wilcoxon, ReferenceFractional)
{
  std::vector<double> a{1.5, 2.0, 3.25, 4.0, 5.5, 6.0, 7.0, 8.5};
  std::vector<double> b{1.0, 2.5, 3.0, 3.0, 5.0, 7.0, 6.0, 8.0};
  auto r = wilcoxon_signed_rank(a, b);
  EXPECT_DOUBLE_EQ(r.statistic, 10.5);
  EXPECT_NEAR(r.p_value, 0.28520227984324287, 1e-12);
}

TEST(Wilcoxon, SymmetricInArguments)
{
  std::vector<double> a{3, 1, 4, 1, 5, 9, 2, 6, 5, 3};
  std::vector<double> b{2, 7, 1, 8, 2, 8, 1, 8, 2, 8};
  auto ab = wilcoxon_signed_rank(a, b);
  auto ba = wilcoxon_signed_rank(b, a);
  EXPECT_DOUBLE_EQ(ab.p_value, ba.p_value);
  EXPECT_DOUBLE_EQ(ab.statistic, ba.statistic);
}

TEST(Wilcoxon, Errors)
{
  auto xs = iota_from(1, 10);
  EXPECT_THROW(wilcoxon_signed_rank(xs, xs), std::invalid_argument);
  auto ys = xs;
  ys[0] += 1;
  ys[1] += 1;
  EXPECT_THROW(wilcoxon_signed_rank(xs, ys), std::invalid_argument);
  EXPECT_THROW(wilcoxon_signed_rank(xs, iota_from(1, 9)), std::invalid_argument);
}

TEST(Wilcoxon, SameDistributionRarelyRejects)
{
  std::mt19937_64 rng(12345);
  int accepted = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> xs, ys;
    for (int i = 0; i < 20; ++i) {
      xs.push_back(uniform_unit(rng));
      ys.push_back(uniform_unit(rng));
    }
    auto r = wilcoxon_signed_rank(xs, ys);
    ASSERT_GE(r.p_value, 0.0);
    ASSERT_LE(r.p_value, 1.0);
    accepted += r.p_value > 0.05;
  }
  EXPECT_GE(accepted, 90);
}

nlohmann::json planted_manifest(int reps, std::vector<std::string> algs, int benches = 1)
{
  nlohmann::json j;
  j["algorithms"] = algs;
  j["repetitions"] = reps;
  j["base_seed"] = 7;
  j["parallelism"] = 3;
  for (int b = 0; b < benches; ++b)
    j["benchmarks"].push_back({{"name", "p" + std::to_string(b)},
                               {"planted", {{"n", 60 + 7 * b}, {"k", 3 + b % 4}, {"seed", b}}},
                               {"p0", 0.1}});
  return j;
}

TEST(Manifest, ParsesBothBenchmarkKinds)
{
  auto j = nlohmann::json::parse(R"({
    "benchmarks": [
      {"name": "ext", "input_path": "in.c", "oracle_cmd": "sh check.sh", "granularity": "word",
       "timeout": 5, "p0": 0.2},
      {"name": "syn", "planted": {"n": 10, "k": 2, "seed": 3}}
    ],
    "algorithms": ["ddmin", "probdd-norandom", "cdd"],
    "repetitions": 3, "base_seed": 11, "parallelism": 2, "probdd_tie": "larger", "cache": false
  })");
  auto m = parse_manifest(j, "/base");
  ASSERT_EQ(m.benchmarks.size(), 2u);
  EXPECT_EQ(m.benchmarks[0].input_path, std::filesystem::path("/base/in.c"));
  EXPECT_EQ(m.benchmarks[0].oracle_cmd, (std::vector<std::string>{"sh", "check.sh"}));
  EXPECT_EQ(m.benchmarks[0].granularity, Granularity::word);
  EXPECT_DOUBLE_EQ(m.benchmarks[0].timeout_s, 5.0);
  EXPECT_DOUBLE_EQ(m.benchmarks[0].p0, 0.2);
  ASSERT_TRUE(m.benchmarks[1].planted);
  EXPECT_EQ(m.benchmarks[1].planted->k, 2u);
  EXPECT_DOUBLE_EQ(m.benchmarks[1].p0, 0.1);
  EXPECT_EQ(m.algorithms,
            (std::vector<Algorithm>{Algorithm::ddmin, Algorithm::probdd_norandom, Algorithm::cdd}));
  EXPECT_EQ(m.repetitions, 3);
  EXPECT_EQ(m.base_seed, 11u);
  EXPECT_EQ(m.tie, TieRule::larger);
  EXPECT_FALSE(m.use_cache);
}

TEST(Manifest, RejectsBadValues)
{
  auto j = planted_manifest(1, {"cdd"});
  j["repetitions"] = 0;
  EXPECT_THROW(parse_manifest(j), std::invalid_argument);
  j = planted_manifest(1, {"zeller"});
  EXPECT_THROW(parse_manifest(j), std::invalid_argument);
  j = planted_manifest(1, {"cdd"});
  j["benchmarks"][0]["p0"] = 1.0;
  EXPECT_THROW(parse_manifest(j), std::invalid_argument);
}

TEST(RunMatrix, SingleCellEqualsRawRun)
{
  auto m = parse_manifest(planted_manifest(1, {"cdd"}));
  auto r = run_matrix(m);
  ASSERT_EQ(r.rows.size(), 1u);
  auto c = gen_planted(60, 3, 0);
  auto raw = cdd_reduce(c.list, c.oracle(), CDDParams{0.1});
  EXPECT_TRUE(r.rows[0].ok);
  EXPECT_DOUBLE_EQ(r.rows[0].final_size_gm, static_cast<double>(raw.final.size()));
  EXPECT_DOUBLE_EQ(r.rows[0].queries_gm, static_cast<double>(raw.queries));
  EXPECT_TRUE(r.pvalues.empty());
}

TEST(RunMatrix, DeterministicRepetitionsKeepTheValue)
{
  auto m = parse_manifest(planted_manifest(5, {"ddmin", "probdd-norandom"}));
  auto r = run_matrix(m);
  for (const auto& row : r.rows) {
    const auto& first = *std::find_if(r.runs.begin(), r.runs.end(), [&](const RunRecord& x) {
      return x.algorithm == row.algorithm;
    });
    EXPECT_NEAR(row.queries_gm, static_cast<double>(first.queries), 1e-9);
    EXPECT_NEAR(row.final_size_gm, static_cast<double>(first.final_size), 1e-9);
  }
}

TEST(RunMatrix, Reproducible)
{
  auto m = parse_manifest(planted_manifest(3, {"ddmin", "probdd", "cdd"}, 7));
  auto a = run_matrix(m);
  auto b = run_matrix(m);
  ASSERT_EQ(a.runs.size(), b.runs.size());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].queries, b.runs[i].queries);
    EXPECT_EQ(a.runs[i].final_size, b.runs[i].final_size);
    EXPECT_EQ(a.runs[i].seed, 7u + static_cast<std::uint64_t>(a.runs[i].repetition));
  }
  for (std::size_t i = 0; i < a.pvalues.size(); ++i) {
    if (a.pvalues[i].metric == "time")
      continue;
    ASSERT_EQ(a.pvalues[i].test.has_value(), b.pvalues[i].test.has_value());
    if (a.pvalues[i].test) {
      EXPECT_EQ(a.pvalues[i].test->p_value, b.pvalues[i].test->p_value);
    }
  }
  // 7 benchmarks give 7 pairs per comparison.
  auto* q = a.pvalue("queries", Algorithm::ddmin, Algorithm::cdd);
  ASSERT_NE(q, nullptr);
  EXPECT_EQ(q->pairs, 7u);
}

TEST(RunMatrix, FailingBenchmarkBecomesFailedRow)
{
  ScriptDir dir;
  dir.write("in.txt", "one\ntwo\n");
  dir.write("reject.sh", "#!/bin/sh\nexit 1\n", true);
  auto j = planted_manifest(1, {"ddmin"});
  j["benchmarks"].push_back({{"name", "bad"},
                             {"input_path", (dir.path() / "in.txt").string()},
                             {"oracle_cmd", (dir.path() / "reject.sh").string()}});
  j["benchmarks"].push_back({{"name", "missing"},
                             {"input_path", (dir.path() / "nope.txt").string()},
                             {"oracle_cmd", "true"}});
  auto r = run_matrix(parse_manifest(j));
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_TRUE(r.row("p0", Algorithm::ddmin)->ok);
  EXPECT_FALSE(r.row("bad", Algorithm::ddmin)->ok);
  EXPECT_FALSE(r.row("missing", Algorithm::ddmin)->ok);
  std::ostringstream csv;
  r.write_results_csv(csv);
  EXPECT_NE(csv.str().find("bad,ddmin,,,,failed"), std::string::npos);
}

TEST(RunMatrix, ExternalOracleBenchmark)
{
  ScriptDir dir;
  dir.write("in.txt", "a\nb\nkeep\nc\n");
  dir.write("check.sh", "#!/bin/sh\ngrep -q keep \"$DD_CANDIDATE\"\n", true);
  nlohmann::json j;
  j["algorithms"] = {"cdd"};
  // The oracle runs in a scratch directory, so the script path is absolute.
  j["benchmarks"] = {{{"name", "ext"},
                      {"input_path", "in.txt"},
                      {"oracle_cmd", {"sh", (dir.path() / "check.sh").string()}}}};
  std::ofstream(dir.path() / "m.json") << j.dump();
  auto r = run_matrix(load_manifest(dir.path() / "m.json"));
  ASSERT_TRUE(r.rows[0].ok) << r.rows[0].error;
  EXPECT_DOUBLE_EQ(r.rows[0].final_size_gm, 1.0);
}

TEST(RunMatrix, WritesOutputs)
{
  ScriptDir dir;
  auto r = run_matrix(parse_manifest(planted_manifest(2, {"ddmin", "cdd"}, 6)));
  write_matrix(r, dir.path() / "out");
  auto results = dir.read("out/results.csv");
  EXPECT_EQ(results.substr(0, results.find('\n')),
            "benchmark,algorithm,final_size_gm,time_gm,queries_gm,status");
  auto pvalues = dir.read("out/pvalues.csv");
  EXPECT_EQ(pvalues.substr(0, pvalues.find('\n')), "metric,algorithm_a,algorithm_b,pairs,statistic,p_value");
  auto j = nlohmann::json::parse(dir.read("out/results.json"));
  EXPECT_EQ(j["results"].size(), 12u);
  EXPECT_EQ(j["pvalues"].size(), 3u);
  auto tel = nlohmann::json::parse(dir.read("out/telemetry/p0__cdd__1.json"));
  EXPECT_EQ(tel["algorithm"], "cdd");
  EXPECT_TRUE(tel.contains("records"));
}

} // namespace
