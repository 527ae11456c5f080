// SPDX-License-Identifier: Apache-2.0
//
// Hybrid sorting: any inner sort for the blocks, a sorting network with
// merge-split as the parallel merging stage. Also the two baselines used for
// comparison, a divide-and-conquer parallel mergesort and PSRS.

#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "comparators.hpp"
#include "executor.hpp"
#include "network.hpp"

namespace blocknet {

template <Key K>
struct InnerSorter {
  std::string name;
  LocalSort<K> sort;
};

namespace detail {

template <Key K>
void merge_sort_rec(std::span<K> xs, std::span<K> buf) {
  const std::size_t n = xs.size();
  if (n < 2) return;
  if (n <= 16) {
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = i; j > 0 && xs[j] < xs[j - 1]; --j) std::swap(xs[j], xs[j - 1]);
    return;
  }
  const std::size_t mid = n / 2;
  merge_sort_rec(xs.first(mid), buf.first(mid));
  merge_sort_rec(xs.subspan(mid), buf.subspan(mid));
  if (!(xs[mid] < xs[mid - 1])) return;
  std::merge(xs.begin(), xs.begin() + mid, xs.begin() + mid, xs.end(), buf.begin());
  std::copy(buf.begin(), buf.begin() + n, xs.begin());
}

}  // namespace detail

/// The standard library's comparison sort.
template <Key K>
InnerSorter<K> std_sort() {
  return {"std", [](std::span<K> xs) { std::sort(xs.begin(), xs.end()); }};
}

/// Top-down mergesort with one scratch buffer.
template <Key K>
InnerSorter<K> merge_sort() {
  return {"merge", [](std::span<K> xs) {
            std::vector<K> buf(xs.size());
            detail::merge_sort_rec(xs, std::span<K>(buf));
          }};
}

/// Quadratic; only for small inputs in tests.
template <Key K>
InnerSorter<K> insertion_sort() {
  return {"insertion", [](std::span<K> xs) {
            for (std::size_t i = 1; i < xs.size(); ++i)
              for (std::size_t j = i; j > 0 && xs[j] < xs[j - 1]; --j) std::swap(xs[j], xs[j - 1]);
          }};
}

enum class NetworkKind { Bitonic, OddEven };

inline Network make_network(NetworkKind kind, unsigned order) {
  return kind == NetworkKind::Bitonic ? bitonic_network(order) : odd_even_merge_network(order);
}

template <Key K>
struct HybridPlan {
  std::size_t lanes = 1;  // power of two
  InnerSorter<K> inner = std_sort<K>();
  NetworkKind network = NetworkKind::Bitonic;
  std::size_t workers = 1;
};

inline unsigned lane_order(std::size_t lanes) {
  if (lanes == 0 || !std::has_single_bit(lanes)) throw error("lane count must be a power of two");
  return static_cast<unsigned>(std::countr_zero(lanes));
}

/// Contiguous blocks whose sizes differ by at most one; the first
/// (size % lanes) blocks get the extra key.
template <Key K>
BlockFrame<K> split_blockwise(std::span<const K> xs, std::size_t lanes) {
  if (lanes == 0) throw error("split_blockwise: zero lanes");
  BlockFrame<K> out(lanes);
  const std::size_t base = xs.size() / lanes, extra = xs.size() % lanes;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < lanes; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    out[i].assign(xs.begin() + pos, xs.begin() + pos + len);
    pos += len;
  }
  return out;
}

template <Key K>
std::vector<K> concat(const BlockFrame<K>& f) {
  std::size_t total = 0;
  for (const auto& b : f) total += b.size();
  std::vector<K> out;
  out.reserve(total);
  for (const auto& b : f) out.insert(out.end(), b.begin(), b.end());
  return out;
}

template <Key K>
struct HybridResult {
  std::vector<K> keys;
  std::uint64_t local_sort_ns = 0;
  std::uint64_t merge_ns = 0;
  RunMetrics network;
};

/// Sorts each lane locally, merges across lanes with the network. Takes the
/// input already split into lanes (nothing is timed before the local sort).
/// Blocks may differ in size by one, so the merge step is CapacityMergeSplit
/// sized to the largest lane; balanced merge_split does not sort such frames.
template <Key K>
HybridResult<K> hybrid_sort_lanes(BlockFrame<K> lanes, const HybridPlan<K>& plan) {
  if (lanes.size() != plan.lanes) throw error("hybrid_sort: lane count does not match plan");
  if (plan.workers == 0) throw error("hybrid_sort: workers must be positive");
  const Network net = make_network(plan.network, lane_order(plan.lanes));

  HybridResult<K> r;
  const auto t0 = detail::clock::now();
  parallel_for(lanes.size(), plan.workers, [&](std::size_t i) { plan.inner.sort(std::span<K>(lanes[i])); });
  const auto t1 = detail::clock::now();
  const CapacityMergeSplit ce{detail::largest(lanes)};
  auto run = run_parallel(net, ce, std::move(lanes), plan.workers);
  const auto t2 = detail::clock::now();
  r.local_sort_ns = detail::elapsed_ns(t0, t1);
  r.merge_ns = detail::elapsed_ns(t1, t2);
  r.network = std::move(run.metrics);
  r.keys = concat(run.frame);
  return r;
}

template <Key K>
HybridResult<K> hybrid_sort_detailed(std::span<const K> xs, const HybridPlan<K>& plan) {
  lane_order(plan.lanes);
  return hybrid_sort_lanes(split_blockwise(xs, plan.lanes), plan);
}

template <Key K>
std::vector<K> hybrid_sort(std::span<const K> xs, const HybridPlan<K>& plan) {
  return hybrid_sort_detailed(xs, plan).keys;
}

template <Key K>
std::vector<K> hybrid_sort(const std::vector<K>& xs, const HybridPlan<K>& plan) {
  return hybrid_sort(std::span<const K>(xs), plan);
}

// -- divide-and-conquer mergesort baseline -----------------------------------

template <Key K>
struct BaselineResult {
  std::vector<K> keys;
  std::uint64_t local_sort_ns = 0;
  std::uint64_t merge_ns = 0;
  std::size_t keys_exchanged = 0;
};

/// 2^depth contiguous leaves sorted with `inner`, then pairwise merges up the
/// tree. Merges at the same level run in parallel; each merge is sequential.
template <Key K>
BaselineResult<K> parallel_mergesort_detailed(std::span<const K> xs, unsigned depth, std::size_t workers,
                                             const InnerSorter<K>& inner = std_sort<K>()) {
  if (workers == 0) throw error("parallel_mergesort: workers must be positive");
  if (depth >= 8 * sizeof(std::size_t) - 1) throw error("parallel_mergesort: depth too large");
  const std::size_t leaves = std::size_t{1} << depth;

  BaselineResult<K> r;
  std::vector<K> data(xs.begin(), xs.end());
  std::vector<K> scratch(data.size());
  // Leaf boundaries as in split_blockwise.
  std::vector<std::size_t> bounds(leaves + 1, 0);
  const std::size_t base = data.size() / leaves, extra = data.size() % leaves;
  for (std::size_t i = 0; i < leaves; ++i) bounds[i + 1] = bounds[i] + base + (i < extra ? 1 : 0);

  const auto t0 = detail::clock::now();
  parallel_for(leaves, workers, [&](std::size_t i) {
    inner.sort(std::span<K>(data).subspan(bounds[i], bounds[i + 1] - bounds[i]));
  });
  const auto t1 = detail::clock::now();
  for (std::size_t width = 1; width < leaves; width *= 2) {
    const std::size_t merges = leaves / (2 * width);
    parallel_for(merges, workers, [&](std::size_t m) {
      const std::size_t lo = bounds[2 * m * width], mid = bounds[(2 * m + 1) * width],
                        hi = bounds[(2 * m + 2) * width];
      std::merge(data.begin() + lo, data.begin() + mid, data.begin() + mid, data.begin() + hi,
                 scratch.begin() + lo);
    });
    std::swap(data, scratch);
    r.keys_exchanged += data.size();
  }
  const auto t2 = detail::clock::now();
  r.local_sort_ns = detail::elapsed_ns(t0, t1);
  r.merge_ns = detail::elapsed_ns(t1, t2);
  r.keys = std::move(data);
  return r;
}

template <Key K>
std::vector<K> parallel_mergesort_baseline(std::span<const K> xs, unsigned depth, std::size_t workers,
                                           const InnerSorter<K>& inner = std_sort<K>()) {
  return parallel_mergesort_detailed(xs, depth, workers, inner).keys;
}

// -- PSRS baseline ------------------------------------------------------------

template <Key K>
struct PsrsResult {
  BlockFrame<K> lanes;
  std::uint64_t local_sort_ns = 0;
  std::uint64_t merge_ns = 0;  // sampling, exchange and final merges
  std::size_t keys_exchanged = 0;
};

/// Parallel Sorting by Regular Sampling over already distributed lanes.
/// Lane i samples its sorted keys at positions floor(j * n_i / p), the p*p
/// samples are sorted and pivots taken at j*p + p/2 - 1 for j in [1, p).
/// A key equal to a pivot goes to the lower partition.
template <Key K>
PsrsResult<K> psrs_baseline(BlockFrame<K> lanes, std::size_t workers,
                            const InnerSorter<K>& inner = std_sort<K>()) {
  const std::size_t p = lanes.size();
  if (p == 0) throw error("psrs: need at least one lane");
  if (workers == 0) throw error("psrs: workers must be positive");

  PsrsResult<K> r;
  const auto t0 = detail::clock::now();
  parallel_for(p, workers, [&](std::size_t i) { inner.sort(std::span<K>(lanes[i])); });
  const auto t1 = detail::clock::now();
  if (p == 1) {
    r.local_sort_ns = detail::elapsed_ns(t0, t1);
    r.lanes = std::move(lanes);
    return r;
  }

  std::vector<K> samples;
  samples.reserve(p * p);
  for (const auto& lane : lanes) {
    if (lane.empty()) continue;
    for (std::size_t j = 0; j < p; ++j) samples.push_back(lane[j * lane.size() / p]);
  }
  std::sort(samples.begin(), samples.end());
  std::vector<K> pivots;
  // Empty lanes contribute no samples; positions are rescaled to what exists.
  if (!samples.empty())
    for (std::size_t j = 1; j < p; ++j) pivots.push_back(samples[(j * p + p / 2 - 1) * samples.size() / (p * p)]);

  // cuts[i][k]..cuts[i][k+1] is the part of lane i destined for lane k.
  std::vector<std::vector<std::size_t>> cuts(p, std::vector<std::size_t>(p + 1, 0));
  parallel_for(p, workers, [&](std::size_t i) {
    const auto& lane = lanes[i];
    auto& c = cuts[i];
    c[p] = lane.size();
    for (std::size_t k = 1; k < p; ++k)
      c[k] = pivots.empty() ? lane.size()
                            : static_cast<std::size_t>(
                                  std::upper_bound(lane.begin(), lane.end(), pivots[k - 1]) - lane.begin());
  });

  BlockFrame<K> out(p);
  parallel_for(p, workers, [&](std::size_t k) {
    std::size_t total = 0;
    for (std::size_t i = 0; i < p; ++i) total += cuts[i][k + 1] - cuts[i][k];
    auto& dst = out[k];
    dst.reserve(total);
    // Successive two-way merges of the p received runs.
    for (std::size_t i = 0; i < p; ++i) {
      const auto first = lanes[i].begin() + cuts[i][k], last = lanes[i].begin() + cuts[i][k + 1];
      const auto mid = dst.size();
      dst.insert(dst.end(), first, last);
      std::inplace_merge(dst.begin(), dst.begin() + mid, dst.end());
    }
  });
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < p; ++k)
      if (k != i) r.keys_exchanged += cuts[i][k + 1] - cuts[i][k];
  const auto t2 = detail::clock::now();

  r.local_sort_ns = detail::elapsed_ns(t0, t1);
  r.merge_ns = detail::elapsed_ns(t1, t2);
  r.lanes = std::move(out);
  return r;
}

}  // namespace blocknet
