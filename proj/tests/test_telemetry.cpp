#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace ddkit;
using namespace ddkit::testing;

namespace {

IdSet range_ids(std::uint32_t lo, std::uint32_t hi)
{
  IdSet out;
  for (auto i = lo; i <= hi; ++i)
    out.push_back(ElementId{i});
  return out;
}

TEST(Classifier, MinorityKeepIsComplement)
{
  QueryClassifier c;
  EXPECT_EQ(c.classify(0, range_ids(1, 7), ids({8}), QueryShape::keep), QueryCategory::complement);
}

TEST(Classifier, ExactHalfIsOther)
{
  QueryClassifier c;
  EXPECT_EQ(c.classify(0, range_ids(1, 4), range_ids(5, 8), QueryShape::keep), QueryCategory::other);
}

TEST(Classifier, MajorityDeletionOfANamedSubsetIsNotComplement)
{
  QueryClassifier c;
  EXPECT_EQ(c.classify(0, range_ids(1, 10), ids({11, 12})), QueryCategory::other);
}

TEST(Classifier, RepeatWithoutInterveningSuccessIsOther)
{
  QueryClassifier c;
  EXPECT_EQ(c.classify(2, ids({1}), range_ids(2, 8)), QueryCategory::other);
  c.record_outcome(false);
  EXPECT_EQ(c.classify(2, ids({1}), range_ids(2, 8)), QueryCategory::other);
}

TEST(Classifier, RepeatAfterSuccessIsRevisit)
{
  QueryClassifier c;
  EXPECT_EQ(c.classify(2, ids({1}), range_ids(2, 8)), QueryCategory::other);
  c.record_outcome(false);
  EXPECT_EQ(c.classify(2, ids({5}), ids({1, 2, 3, 4, 6, 7, 8})), QueryCategory::other);
  c.record_outcome(true);
  EXPECT_EQ(c.classify(2, ids({1}), ids({2, 3, 4, 6, 7, 8})), QueryCategory::revisit);
}

TEST(Classifier, SubsetSeenAsKeptThenDeletedAfterSuccess)
{
  // Keeping {6} alone and later deleting {6} after a restart both target the
  // subset {6}.
  QueryClassifier c;
  EXPECT_EQ(c.classify(3, ids({1, 2, 3, 4, 5, 7, 8}), ids({6}), QueryShape::keep), QueryCategory::complement);
  c.record_outcome(false);
  EXPECT_EQ(c.classify(3, ids({5}), ids({1, 2, 3, 4, 6, 7, 8})), QueryCategory::other);
  c.record_outcome(true);
  EXPECT_EQ(c.classify(3, ids({6}), ids({1, 2, 3, 4, 7, 8})), QueryCategory::revisit);
}

TEST(Classifier, NewRoundForgetsHistory)
{
  QueryClassifier c;
  c.classify(0, ids({1}), ids({2, 3, 4}));
  c.record_outcome(true);
  EXPECT_EQ(c.classify(1, ids({1}), ids({2, 3, 4})), QueryCategory::other);
}

TEST(Classifier, ComplementTakesPrecedence)
{
  QueryClassifier c;
  c.classify(0, ids({1, 2, 3}), ids({4}), QueryShape::keep);
  c.record_outcome(true);
  EXPECT_EQ(c.classify(0, ids({1, 2, 3}), ids({4}), QueryShape::keep), QueryCategory::complement);
}

TEST(Summarize, EmptyIsAllZero)
{
  auto s = summarize(std::vector<QueryRecord>{});
  EXPECT_EQ(s.total, 0u);
  for (auto c : {QueryCategory::complement, QueryCategory::revisit, QueryCategory::other}) {
    EXPECT_EQ(s[c].total, 0u);
    EXPECT_EQ(s[c].success_rate(), 0.0);
  }
}

TEST(Summarize, RatesAndMerge)
{
  std::vector<QueryRecord> recs(4);
  recs[0].category = QueryCategory::other;
  recs[0].outcome = Verdict::holds;
  recs[1].category = QueryCategory::other;
  recs[2].category = QueryCategory::revisit;
  recs[3].category = QueryCategory::complement;
  recs[3].outcome = Verdict::timeout;
  auto s = summarize(recs);
  EXPECT_EQ(s.total, 4u);
  EXPECT_EQ(s.successes, 1u);
  EXPECT_DOUBLE_EQ(s[QueryCategory::other].success_rate(), 0.5);
  auto m = s;
  m.merge(s);
  EXPECT_EQ(m[QueryCategory::other].total, 4u);
  EXPECT_EQ(m.total, 8u);
}

TEST(TableOneReplay, CategoryCounts)
{
  Session session(planted_oracle(running_example_kernel()), SessionOptions{false, std::nullopt});
  ddmin_reduce(running_example(), session);
  const auto& recs = session.telemetry().records();
  ASSERT_EQ(recs.size(), 30u);
  auto stats = session.telemetry().stats();
  EXPECT_EQ(stats[QueryCategory::revisit].total, 7u);
  EXPECT_EQ(stats[QueryCategory::revisit].successes, 0u);
  // v3..v6 keep two of eight, v11..v18 keep one.
  EXPECT_EQ(stats[QueryCategory::complement].total, 12u);
  EXPECT_EQ(stats[QueryCategory::complement].successes, 0u);
  EXPECT_EQ(stats[QueryCategory::other].total, 11u);
  for (std::size_t i = 23; i < 30; ++i)
    EXPECT_EQ(recs[i].category, QueryCategory::revisit) << "v" << i + 1;
  for (const auto& r : recs)
    EXPECT_EQ(r.deleted_count + r.kept_count, r.index < 23 ? 8u : 7u);
}

TEST(Telemetry, CategoriesPartitionTheQueryStream)
{
  auto c = gen_planted(64, 6, 5);
  Session session(c.oracle());
  ddmin_reduce(c.list, session);
  auto s = session.telemetry().stats();
  std::size_t sum = 0;
  for (const auto& cs : s.by_category)
    sum += cs.total;
  EXPECT_EQ(sum, s.total);
  EXPECT_EQ(s.total, session.telemetry().size());
}

TEST(Telemetry, DdminComplementNeverSucceedsWhenKernelExceedsHalf)
{
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 8 + rng() % 40;
    const std::size_t k = n / 2 + 1 + rng() % (n - n / 2);
    auto c = gen_planted(n, std::min(k, n), rng());
    Session session(c.oracle());
    ddmin_reduce(c.list, session);
    EXPECT_EQ(session.telemetry().stats()[QueryCategory::complement].successes, 0u);
  }
}

TEST(Telemetry, JsonAndCsvShapes)
{
  Session session(planted_oracle(running_example_kernel()));
  ddmin_reduce(running_example(), session);
  auto j = session.telemetry().to_json("ddmin", "example.txt");
  EXPECT_EQ(j["algorithm"], "ddmin");
  EXPECT_EQ(j["input"], "example.txt");
  EXPECT_EQ(j["records"].size(), 30u);
  EXPECT_EQ(j["records"][22]["outcome"], "holds");
  EXPECT_EQ(j["records"][22]["deleted_ids"], nlohmann::json::array({5}));
  EXPECT_EQ(j["stats"]["Revisit"]["total"], 7);
  std::ostringstream csv;
  session.telemetry().write_csv(csv);
  std::size_t lines = 0;
  for (char ch : csv.str())
    lines += ch == '\n';
  EXPECT_EQ(lines, 31u);
}

} // namespace
