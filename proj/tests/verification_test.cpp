// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "blocknet/verification.hpp"

using namespace blocknet;

namespace {

using B = Block<TestKey>;

Network load(const std::string& name) {
  std::ifstream in(std::string(BLOCKNET_TEST_DATA) + "/" + name);
  return read_network(in);
}

std::size_t key_count(const BlockFrame<TestKey>& f) {
  std::size_t n = 0;
  for (const auto& b : f) n += b.size();
  return n;
}

AgglomerationOptions space(std::size_t domain, std::size_t lo, std::size_t hi, bool equal = false) {
  AgglomerationOptions o;
  o.space = FrameSpace{domain, lo, hi, equal};
  return o;
}

}  // namespace

TEST(ZeroOne, GeneratedNetworksPass) {
  for (unsigned l = 0; l <= 4; ++l) {
    const auto b = verify_zero_one(bitonic_network(l));
    EXPECT_TRUE(b.passed()) << b.text();
    EXPECT_EQ(b.cases, std::uint64_t{1} << (1u << l));
    EXPECT_TRUE(verify_zero_one(odd_even_merge_network(l)).passed());
  }
}

TEST(ZeroOne, FourWire) {
  const auto r = verify_zero_one(four_wire_network());
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.cases, 16u);
}

TEST(ZeroOne, BrokenNetworkGivesWitness) {
  const auto r = verify_zero_one(load("four_wire_broken.net"), "broken");
  EXPECT_FALSE(r.passed());
  ASSERT_FALSE(r.failures.empty());
  // Without the last comparator, wires 1 and 2 stay inverted exactly when
  // each input pair holds one 1: 0101, 0110, 1001, 1010.
  EXPECT_EQ(r.failure_count, 4u);
  EXPECT_EQ(r.failures[0].input.size(), 4u);
  EXPECT_NE(r.text().find("broken: FAIL"), std::string::npos);
}

TEST(ZeroOne, RejectsOversizedOrInvalid) {
  EXPECT_THROW(verify_zero_one(Network{25, {}}), error);
  EXPECT_THROW(verify_zero_one(Network{2, {Stage{{{1, 1, Direction::Ascending}}}}}), error);
}

TEST(ZeroOne, CertifiedNetworksSortRandomIntegers) {
  std::mt19937_64 rng(17);
  for (const auto& n : {bitonic_network(4), odd_even_merge_network(4)}) {
    ASSERT_TRUE(verify_zero_one(n).passed());
    for (int trial = 0; trial < 1000; ++trial) {
      BlockFrame<TestKey> f(n.width);
      for (auto& b : f) b.push_back(static_cast<TestKey>(rng() % 1000));
      const auto r = run_sequential(n, MergeSplit{}, f);
      EXPECT_EQ(check_frame_result(f, r.frame), FrameClause::None);
    }
  }
}

TEST(FrameResult, Clauses) {
  const BlockFrame<TestKey> in{{1, 2}, {0}};
  EXPECT_EQ(check_frame_result(in, BlockFrame<TestKey>{{0}, {1, 2}}), FrameClause::None);
  EXPECT_EQ(check_frame_result(in, BlockFrame<TestKey>{{2, 1}, {0}}), FrameClause::BlockUnsorted);
  EXPECT_EQ(check_frame_result(in, BlockFrame<TestKey>{{1, 2}, {0}}), FrameClause::LaneOrder);
  EXPECT_EQ(check_frame_result(in, BlockFrame<TestKey>{{0}, {1, 3}}), FrameClause::Permutation);
  // An empty lane between two inverted ones still counts as out of order.
  EXPECT_EQ(check_frame_result(BlockFrame<TestKey>{{1}, {}, {0}}, BlockFrame<TestKey>{{1}, {}, {0}}),
            FrameClause::LaneOrder);
}

TEST(Agglomeration, OrderOneAllThirtySixFrames) {
  const auto r = verify_agglomeration(bitonic_network(1), space(2, 0, 2));
  EXPECT_TRUE(r.passed()) << r.text();
  EXPECT_EQ(r.cases, 36u);
  EXPECT_TRUE(r.exhaustive);
}

// Frozen from an independent brute force: balanced merge_split fails on
// frames whose blocks differ in size.
TEST(Agglomeration, OrderTwoMixedSizesFrozenCounts) {
  const auto r = verify_agglomeration(bitonic_network(2), space(3, 0, 2));
  EXPECT_EQ(r.cases, 10000u);
  EXPECT_TRUE(r.exhaustive);
  EXPECT_EQ(r.failure_count, 676u);

  const auto nonempty = verify_agglomeration(bitonic_network(2), space(3, 1, 2));
  EXPECT_EQ(nonempty.cases, 6561u);
  EXPECT_EQ(nonempty.failure_count, 94u);

  const auto d4 = verify_agglomeration(bitonic_network(2), space(4, 0, 2));
  EXPECT_EQ(d4.cases, 50625u);
  EXPECT_EQ(d4.failure_count, 3108u);
}

TEST(Agglomeration, EqualSizeFramesPass) {
  for (const auto& n : {bitonic_network(1), bitonic_network(2), odd_even_merge_network(2), four_wire_network()}) {
    auto o = space(3, 0, 3, true);
    o.check_balance = true;
    const auto r = verify_agglomeration(n, o);
    EXPECT_TRUE(r.passed()) << r.text();
    EXPECT_TRUE(r.exhaustive);
  }
  auto o = space(3, 1, 3, true);
  o.budget = 20000;
  o.check_balance = true;
  const auto r = verify_agglomeration(bitonic_network(3), o);
  EXPECT_FALSE(r.exhaustive);
  EXPECT_EQ(r.cases, 20000u);
  EXPECT_TRUE(r.passed()) << r.text();
}

TEST(Agglomeration, CapacitySplitPassesMixedSizes) {
  const auto r = verify_agglomeration_with(bitonic_network(2), CapacityMergeSplit{2}, space(3, 0, 2));
  EXPECT_TRUE(r.passed()) << r.text();
  const auto oe = verify_agglomeration_with(odd_even_merge_network(2), CapacityMergeSplit{2}, space(3, 0, 2));
  EXPECT_TRUE(oe.passed()) << oe.text();
}

TEST(Agglomeration, SeededAndWorkerIndependent) {
  auto o = space(3, 0, 2);
  o.budget = 5000;
  o.seed = 0;
  const auto a = verify_agglomeration(bitonic_network(3), o);
  o.workers = 4;
  const auto b = verify_agglomeration(bitonic_network(3), o);
  EXPECT_FALSE(a.exhaustive);
  EXPECT_EQ(a.cases, 5000u);
  EXPECT_EQ(a.failure_count, b.failure_count);
  EXPECT_EQ(a.text(), b.text());
  o.seed = 1;
  const auto c = verify_agglomeration(bitonic_network(3), o);
  EXPECT_EQ(c.cases, 5000u);
}

TEST(Counterexample, NaiveSwapSmallestWitness) {
  const auto w = find_counterexample(bitonic_network(2), NaiveSwap{}, FrameSpace{4, 0, 2});
  ASSERT_TRUE(w);
  EXPECT_EQ(key_count(w->input), 2u);
  EXPECT_NE(w->clause, FrameClause::None);
  const auto rerun = run_sequential(bitonic_network(2), NaiveSwap{}, w->input);
  EXPECT_EQ(rerun.frame, w->output);

  const auto nonempty = find_counterexample(bitonic_network(2), NaiveSwap{}, FrameSpace{4, 1, 2});
  ASSERT_TRUE(nonempty);
  EXPECT_EQ(key_count(nonempty->input), 5u);
}

TEST(Counterexample, MergeSplitWitnessOnMixedSizes) {
  const auto w = find_counterexample(bitonic_network(2), MergeSplit{}, FrameSpace{4, 0, 2});
  ASSERT_TRUE(w);
  EXPECT_EQ(key_count(w->input), 3u);
  const auto nonempty = find_counterexample(bitonic_network(2), MergeSplit{}, FrameSpace{3, 1, 2});
  ASSERT_TRUE(nonempty);
  EXPECT_EQ(key_count(nonempty->input), 6u);
}

TEST(Counterexample, NoneOnEqualSizesOrSingletons) {
  for (const auto& n : {bitonic_network(2), odd_even_merge_network(2), four_wire_network()})
    EXPECT_FALSE(find_counterexample(n, MergeSplit{}, FrameSpace{4, 0, 2, true}));
  for (unsigned l = 0; l <= 3; ++l)
    EXPECT_FALSE(find_counterexample(bitonic_network(l), MergeSplit{}, FrameSpace{2, 1, 1}));
  EXPECT_FALSE(find_counterexample(bitonic_network(2), CapacityMergeSplit{2}, FrameSpace{4, 0, 2}));
}

TEST(DirectRelations, ClausesNotRelyingOnLimitsHold) {
  for (int c : {1, 4, 5, 6}) {
    const auto r = check_direct_relation(c, 10000, 3);
    EXPECT_TRUE(r.passed()) << r.text();
    EXPECT_EQ(r.cases, 10000u);
  }
  EXPECT_THROW(check_direct_relation(0, 1), error);
  EXPECT_THROW(check_direct_relation(7, 1), error);
}

// Clauses 2 and 3 go through the lb/ub limits; with unequal sizes the
// balanced split can keep a key above ub in the lower output.
TEST(DirectRelations, LimitClausesFailOnlyWithUnequalSizes) {
  for (int c : {2, 3}) {
    const auto r = check_direct_relation(c, 10000, 3);
    EXPECT_GT(r.failure_count, 0u);
    EXPECT_TRUE(check_direct_relation(c, 10000, 3, true).passed());
  }
  const auto all = check_direct_relations(1000, 0, true);
  EXPECT_EQ(all.cases, 6000u);
  EXPECT_TRUE(all.passed()) << all.text();
  // Clause 2 by hand: [6] precedes [8], yet the lower output keeps 11 and 15.
  const auto [o1, o2] = merge_split(B{6, 11, 15, 17, 19, 19}, B{6}, Direction::Ascending);
  EXPECT_EQ(o1, (B{6, 6, 11, 15}));
  EXPECT_FALSE(precedes(o1, B{8}));
}

TEST(DirectRelations, Reproducible) {
  EXPECT_EQ(check_direct_relations(500, 9).text(), check_direct_relations(500, 9).text());
}

TEST(DirectRelations, LiteralExamples) {
  std::mt19937_64 rng(0);
  std::uniform_int_distribution<TestKey> key(1, 9);
  auto block = [&] {
    B b(1 + rng() % 5);
    for (auto& k : b) k = key(rng);
    std::sort(b.begin(), b.end());
    return b;
  };
  const B low{0}, high{10};
  for (int i = 0; i < 1000; ++i) {
    const B a1 = block(), a2 = block();
    ASSERT_TRUE(precedes(low, a1) && precedes(low, a2));
    const auto [o1, o2] = merge_split(a1, a2, Direction::Ascending);
    EXPECT_TRUE(precedes(low, o1));
    EXPECT_TRUE(precedes(o2, high));
  }
}

TEST(CheckReport, Rendering) {
  CheckReport r;
  r.subject = "demo";
  r.cases = 3;
  std::ostringstream csv;
  r.write_csv(csv);
  EXPECT_EQ(csv.str(), "case_id,verdict,clause,witness\nall,pass,,\n");
  EXPECT_EQ(r.text(), "demo: PASS (3 cases, exhaustive, 0 failures)\n");

  r.add_failure({7, "lane-order", "[[1],[0]]", "[[1],[0]]"});
  r.add_failure({2, "permutation", "[[0]]", "[[1]]"});
  EXPECT_EQ(r.failures.front().case_id, 2u);
  std::ostringstream csv2;
  r.write_csv(csv2, false);
  EXPECT_EQ(csv2.str(), "2,fail,permutation,\"[[0]] -> [[1]]\"\n7,fail,lane-order,\"[[1],[0]] -> [[1],[0]]\"\n");

  CheckReport many;
  for (std::uint64_t i = 100; i > 0; --i) many.add_failure({i, "x", "", ""});
  EXPECT_EQ(many.failure_count, 100u);
  EXPECT_EQ(many.failures.size(), CheckReport::kKeptFailures);
  EXPECT_EQ(many.failures.front().case_id, 1u);
}

TEST(CheckReport, Formatting) {
  EXPECT_EQ(format_block(B{}), "[]");
  EXPECT_EQ(format_frame(BlockFrame<TestKey>{{1, 2}, {}, {3}}), "[[1,2],[],[3]]");
}
