// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "blocknet/hybrid.hpp"

using namespace blocknet;

namespace {

std::vector<std::int64_t> random_keys(std::size_t n, std::uint64_t seed, std::int64_t range = 1'000'000) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> key(-range, range);
  std::vector<std::int64_t> xs(n);
  for (auto& x : xs) x = key(rng);
  return xs;
}

std::vector<std::int64_t> sorted_copy(std::vector<std::int64_t> xs) {
  std::sort(xs.begin(), xs.end());
  return xs;
}

template <class K>
std::vector<K> flatten(const BlockFrame<K>& f) {
  return concat(f);
}

}  // namespace

TEST(InnerSorter, AllSort) {
  for (const auto& inner : {std_sort<std::int64_t>(), merge_sort<std::int64_t>(), insertion_sort<std::int64_t>()})
    for (std::size_t n : {0, 1, 2, 15, 16, 17, 300}) {
      auto xs = random_keys(n, n, 20);
      const auto expected = sorted_copy(xs);
      inner.sort(std::span<std::int64_t>(xs));
      EXPECT_EQ(xs, expected) << inner.name << " n=" << n;
    }
}

TEST(SplitBlockwise, ContiguousAndBalanced) {
  const std::vector<int> xs{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto f = split_blockwise<int>(xs, 4);
  EXPECT_EQ(f, (BlockFrame<int>{{1, 2, 3}, {4, 5, 6}, {7, 8}, {9, 10}}));
  EXPECT_EQ(concat(f), xs);
  EXPECT_EQ(split_blockwise<int>(std::vector<int>{1}, 4), (BlockFrame<int>{{1}, {}, {}, {}}));
}

TEST(LaneOrder, PowersOfTwo) {
  EXPECT_EQ(lane_order(1), 0u);
  EXPECT_EQ(lane_order(16), 4u);
  EXPECT_THROW(lane_order(0), error);
  EXPECT_THROW(lane_order(6), error);
}

TEST(HybridSort, Example) {
  const std::vector<int> xs{5, 3, 8, 1, 9, 2, 7, 4};
  for (auto kind : {NetworkKind::Bitonic, NetworkKind::OddEven}) {
    HybridPlan<int> plan{4, insertion_sort<int>(), kind, 2};
    EXPECT_EQ(hybrid_sort(xs, plan), (std::vector<int>{1, 2, 3, 4, 5, 7, 8, 9}));
  }
}

TEST(HybridSort, MatchesReferenceAcrossMatrix) {
  for (std::size_t n : {0, 1, 2, 3, 100, 1000, 1001, 4097})
    for (std::size_t lanes : {1, 2, 4, 8, 16})
      for (auto kind : {NetworkKind::Bitonic, NetworkKind::OddEven})
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
          const auto xs = random_keys(n, seed * 131 + n, n < 50 ? 3 : 1'000'000);
          HybridPlan<std::int64_t> plan{lanes, merge_sort<std::int64_t>(), kind, 1 + seed};
          EXPECT_EQ(hybrid_sort(xs, plan), sorted_copy(xs)) << "n=" << n << " lanes=" << lanes;
        }
}

TEST(HybridSort, SortedAndAllEqualInputsAreFixedPoints) {
  std::vector<std::int64_t> sorted(777);
  std::iota(sorted.begin(), sorted.end(), -300);
  const std::vector<std::int64_t> same(513, 42);
  for (std::size_t lanes : {1, 2, 8, 16}) {
    HybridPlan<std::int64_t> plan{lanes, std_sort<std::int64_t>(), NetworkKind::Bitonic, 4};
    EXPECT_EQ(hybrid_sort(sorted, plan), sorted);
    EXPECT_EQ(hybrid_sort(same, plan), same);
  }
}

TEST(HybridSort, SingleLaneIsInnerSort) {
  const auto xs = random_keys(500, 3);
  HybridPlan<std::int64_t> plan{1, merge_sort<std::int64_t>(), NetworkKind::Bitonic, 1};
  const auto r = hybrid_sort_detailed<std::int64_t>(xs, plan);
  EXPECT_EQ(r.keys, sorted_copy(xs));
  EXPECT_EQ(r.network.comparator_applications, 0u);
}

TEST(HybridSort, FloatingPointKeys) {
  const std::vector<double> xs{2.5, -1.0, 3.25, 0.0, -7.5, 2.5};
  HybridPlan<double> plan{2, std_sort<double>(), NetworkKind::OddEven, 2};
  EXPECT_EQ(hybrid_sort(xs, plan), (std::vector<double>{-7.5, -1.0, 0.0, 2.5, 2.5, 3.25}));
}

TEST(HybridSort, PlanErrors) {
  const std::vector<int> xs{1, 2, 3};
  EXPECT_THROW(hybrid_sort(xs, HybridPlan<int>{3, std_sort<int>(), NetworkKind::Bitonic, 1}), error);
  EXPECT_THROW(hybrid_sort(xs, HybridPlan<int>{2, std_sort<int>(), NetworkKind::Bitonic, 0}), error);
}

// Merging uneven blocks with the balanced rule is where the network breaks.
TEST(HybridSort, BalancedMergeSplitFailsOnUnevenBlocks) {
  const auto xs = random_keys(1001, 7);
  auto lanes = split_blockwise<std::int64_t>(xs, 16);
  for (auto& l : lanes) std::sort(l.begin(), l.end());
  const auto r = run_sequential(bitonic_network(4), MergeSplit{}, lanes);
  const auto out = concat(r.frame);
  EXPECT_FALSE(std::is_sorted(out.begin(), out.end()));
}

TEST(HybridSort, NaiveSwapBreaksTheNetwork) {
  // Overlapping sorted blocks: whole-block swaps cannot interleave them.
  const BlockFrame<int> lanes{{0, 3}, {1, 2}, {4, 7}, {5, 6}};
  const auto r = run_sequential(bitonic_network(2), NaiveSwap{}, lanes);
  const auto out = concat(r.frame);
  EXPECT_FALSE(std::is_sorted(out.begin(), out.end()));
}

TEST(MergesortBaseline, DepthZeroIsInnerSort) {
  const auto xs = random_keys(1000, 2);
  const auto r = parallel_mergesort_detailed<std::int64_t>(xs, 0, 4, merge_sort<std::int64_t>());
  EXPECT_EQ(r.keys, sorted_copy(xs));
  EXPECT_EQ(r.keys_exchanged, 0u);
}

TEST(MergesortBaseline, MatchesReferenceAndHybrid) {
  const auto xs = random_keys(100'000, 9);
  const auto expected = sorted_copy(xs);
  const auto r = parallel_mergesort_detailed<std::int64_t>(xs, 3, 4);
  EXPECT_EQ(r.keys, expected);
  EXPECT_EQ(r.keys_exchanged, 3 * xs.size());
  HybridPlan<std::int64_t> plan{8, std_sort<std::int64_t>(), NetworkKind::Bitonic, 4};
  EXPECT_EQ(hybrid_sort(xs, plan), r.keys);
  for (std::size_t n : {0, 1, 5})
    EXPECT_EQ(parallel_mergesort_baseline<std::int64_t>(random_keys(n, n), 4, 2), sorted_copy(random_keys(n, n)));
}

TEST(Psrs, SingleLaneNoExchange) {
  const auto xs = random_keys(1000, 4);
  const auto r = psrs_baseline<std::int64_t>({xs}, 1);
  ASSERT_EQ(r.lanes.size(), 1u);
  EXPECT_EQ(r.lanes[0], sorted_copy(xs));
  EXPECT_EQ(r.keys_exchanged, 0u);
}

TEST(Psrs, FourLanesRegularityBound) {
  const std::size_t p = 4, per = 10'000;
  BlockFrame<std::int64_t> lanes;
  std::vector<std::int64_t> all;
  for (std::size_t i = 0; i < p; ++i) {
    lanes.push_back(random_keys(per, 100 + i));
    all.insert(all.end(), lanes.back().begin(), lanes.back().end());
  }
  const auto r = psrs_baseline(lanes, 4);
  EXPECT_EQ(flatten(r.lanes), sorted_copy(all));
  for (const auto& l : r.lanes) EXPECT_LT(l.size(), 2 * all.size() / p);
  EXPECT_GT(r.keys_exchanged, 0u);
  EXPECT_LE(r.keys_exchanged, all.size());
}

TEST(Psrs, EdgeInputs) {
  EXPECT_THROW(psrs_baseline(BlockFrame<int>{}, 1), error);
  EXPECT_THROW(psrs_baseline(BlockFrame<int>{{1}}, 0), error);
  const auto empty = psrs_baseline(BlockFrame<int>{{}, {}, {}}, 2);
  EXPECT_TRUE(concat(empty.lanes).empty());
  const auto some = psrs_baseline(BlockFrame<int>{{3, 1}, {}, {2, 2, 2}, {0}}, 3);
  EXPECT_EQ(concat(some.lanes), (std::vector<int>{0, 1, 2, 2, 2, 3}));
  const auto dup = psrs_baseline(BlockFrame<int>{std::vector<int>(50, 7), std::vector<int>(50, 7)}, 2);
  EXPECT_EQ(concat(dup.lanes), std::vector<int>(100, 7));
}

TEST(Psrs, ExchangeGrowsWithLanes) {
  const auto xs = random_keys(1 << 16, 12);
  std::size_t previous = 0;
  for (std::size_t p : {2, 4, 8, 16}) {
    const auto r = psrs_baseline(split_blockwise<std::int64_t>(xs, p), 2);
    EXPECT_EQ(concat(r.lanes), sorted_copy(xs));
    EXPECT_GT(r.keys_exchanged, previous);
    previous = r.keys_exchanged;
  }
}
