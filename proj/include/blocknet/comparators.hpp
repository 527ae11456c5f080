// SPDX-License-Identifier: Apache-2.0
//
// Comparison elements: the scalar one, the block merge-split, and a
// deliberately invalid block swap used to show why the split limits matter.

#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <iterator>
#include <optional>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "network.hpp"

namespace blocknet {

/// Keys need a total order. Floating-point keys are accepted by the type but
/// must be finite; ingestion paths check with `is_admissible_key`.
template <class K>
concept Key = std::totally_ordered<K> && std::copyable<K>;

template <Key K>
constexpr bool is_admissible_key(const K& k) noexcept {
  if constexpr (std::is_floating_point_v<K>) return std::isfinite(k);
  else return true;
}

/// A block is a sorted (non-decreasing) run of keys on one wire. Empty
/// blocks are allowed.
template <Key K>
using Block = std::vector<K>;

template <Key K>
using BlockPair = std::pair<Block<K>, Block<K>>;

/// A comparison element for blocks: (Block, Block, Direction) -> (Block, Block).
template <class F, class K>
concept BlockComparator = Key<K> && requires(F f, const Block<K>& a, const Block<K>& b, Direction d) {
  { f(a, b, d) } -> std::convertible_to<BlockPair<K>>;
};

template <Key K>
constexpr std::pair<K, K> scalar_compare(const K& a1, const K& a2, Direction dir) {
  const bool swap = (dir == Direction::Ascending) ? (a2 < a1) : (a1 < a2);
  return swap ? std::pair<K, K>{a2, a1} : std::pair<K, K>{a1, a2};
}

/// a ⪯ b: every key of `a` is <= every key of `b`. Vacuous for empty blocks.
template <Key K>
bool precedes(const Block<K>& a, const Block<K>& b) {
  return a.empty() || b.empty() || !(b.front() < a.back());
}

/// Merges two sorted blocks and splits the result: the lower ceil(t/2) keys
/// and the upper floor(t/2) keys. Descending exchanges the two outputs.
/// Equal keys are taken from `a1` first.
///
/// Empty inputs follow the same merge-then-split rule.
template <Key K>
BlockPair<K> merge_split(const Block<K>& a1, const Block<K>& a2, Direction dir) {
  const std::size_t total = a1.size() + a2.size();
  const std::size_t lower_size = (total + 1) / 2;

  Block<K> lower, upper;
  lower.reserve(lower_size);
  upper.reserve(total - lower_size);

  auto i = a1.begin(), j = a2.begin();
  auto take = [&](Block<K>& out) {
    if (j == a2.end() || (i != a1.end() && !(*j < *i))) out.push_back(*i++);
    else out.push_back(*j++);
  };
  while (lower.size() < lower_size) take(lower);
  while (upper.size() < total - lower_size) take(upper);

  if (dir == Direction::Descending) return {std::move(upper), std::move(lower)};
  return {std::move(lower), std::move(upper)};
}

struct MergeSplit {
  template <Key K>
  BlockPair<K> operator()(const Block<K>& a1, const Block<K>& a2, Direction dir) const {
    return merge_split(a1, a2, dir);
  }
};

/// Merge-split for lanes of unequal size. Every block is treated as if it
/// were padded with +inf up to `capacity` keys, so the lower output takes
/// min(capacity, t) keys and the upper output the rest; no padding keys are
/// stored. When both inputs hold exactly `capacity` keys this is merge_split.
///
/// Balanced merge_split alone does not sort frames whose blocks differ in
/// size (e.g. bitonic width 4 on [[0],[0],[0,0],[1,1]]), which is why the
/// hybrid pipelines use this comparator.
struct CapacityMergeSplit {
  std::size_t capacity = 0;

  template <Key K>
  BlockPair<K> operator()(const Block<K>& a1, const Block<K>& a2, Direction dir) const {
    Block<K> merged;
    merged.reserve(a1.size() + a2.size());
    std::merge(a1.begin(), a1.end(), a2.begin(), a2.end(), std::back_inserter(merged));
    const auto cut = merged.begin() + static_cast<std::ptrdiff_t>(std::min(capacity, merged.size()));
    Block<K> lower(merged.begin(), cut), upper(cut, merged.end());
    if (dir == Direction::Descending) return {std::move(upper), std::move(lower)};
    return {std::move(lower), std::move(upper)};
  }
};

/// Swaps whole blocks by their minima and never moves keys between blocks.
/// This is not a valid block comparator whenever the blocks overlap. An
/// empty operand never triggers a swap.
template <Key K>
BlockPair<K> naive_swap(const Block<K>& a1, const Block<K>& a2, Direction dir) {
  bool swap = !a1.empty() && !a2.empty() && a2.front() < a1.front();
  if (dir == Direction::Descending) swap = !swap;
  return swap ? BlockPair<K>{a2, a1} : BlockPair<K>{a1, a2};
}

struct NaiveSwap {
  template <Key K>
  BlockPair<K> operator()(const Block<K>& a1, const Block<K>& a2, Direction dir) const {
    return naive_swap(a1, a2, dir);
  }
};

// -- validity of a block comparison step -------------------------------------

template <Key K>
struct BlockBounds {
  K lb;  // max of the two minima
  K ub;  // min of the two maxima
};

template <Key K>
std::optional<BlockBounds<K>> block_bounds(const Block<K>& a1, const Block<K>& a2) {
  if (a1.empty() || a2.empty()) return std::nullopt;
  return BlockBounds<K>{std::max(a1.front(), a2.front()), std::min(a1.back(), a2.back())};
}

enum class ValidityClause {
  None,
  Conservation,   // output multiset differs from input multiset
  Order,          // out1 is not ⪯ out2
  BelowLowerLimit,  // some key < lb did not land in out1
  AboveUpperLimit,  // some key > ub did not land in out2
  EmptyInput,     // limits undefined
};

constexpr std::string_view to_string(ValidityClause c) noexcept {
  switch (c) {
    case ValidityClause::None: return "none";
    case ValidityClause::Conservation: return "conservation";
    case ValidityClause::Order: return "order";
    case ValidityClause::BelowLowerLimit: return "below-lb";
    case ValidityClause::AboveUpperLimit: return "above-ub";
    case ValidityClause::EmptyInput: return "empty-input";
  }
  return "?";
}

namespace detail {

template <Key K, class Pred>
std::vector<K> sorted_filter(const Block<K>& a, const Block<K>& b, Pred keep) {
  std::vector<K> out;
  for (const auto& k : a) if (keep(k)) out.push_back(k);
  for (const auto& k : b) if (keep(k)) out.push_back(k);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Checks one step (a1, a2) -> (out1, out2) against the validity definition.
/// Returns the first failed clause, or ValidityClause::None. Both inputs must
/// be non-empty; otherwise EmptyInput is returned.
template <Key K>
ValidityClause check_block_step(const Block<K>& a1, const Block<K>& a2, const Block<K>& out1,
                                const Block<K>& out2) {
  const auto bounds = block_bounds(a1, a2);
  if (!bounds) return ValidityClause::EmptyInput;

  auto all = [](const K&) { return true; };
  if (detail::sorted_filter(a1, a2, all) != detail::sorted_filter(out1, out2, all))
    return ValidityClause::Conservation;
  if (!precedes(out1, out2)) return ValidityClause::Order;

  auto below = [&](const K& k) { return k < bounds->lb; };
  auto above = [&](const K& k) { return bounds->ub < k; };
  const Block<K> none;
  if (detail::sorted_filter(a1, a2, below) != detail::sorted_filter(out1, none, below))
    return ValidityClause::BelowLowerLimit;
  if (detail::sorted_filter(a1, a2, above) != detail::sorted_filter(none, out2, above))
    return ValidityClause::AboveUpperLimit;
  return ValidityClause::None;
}

template <Key K>
bool is_valid_block_step(const Block<K>& a1, const Block<K>& a2, const Block<K>& out1,
                         const Block<K>& out2) {
  return check_block_step(a1, a2, out1, out2) == ValidityClause::None;
}

}  // namespace blocknet
