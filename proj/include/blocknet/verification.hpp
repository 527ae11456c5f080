// SPDX-License-Identifier: Apache-2.0
//
// Empirical checks: zero-one verification of networks, exhaustive or seeded
// random checks of networks running over blocks, counterexample search for
// invalid block comparators, and the direct-relation clauses a valid block
// comparator must preserve.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string_view>
#include <tuple>
#include <string>
#include <vector>

#include "comparators.hpp"
#include "executor.hpp"
#include "network.hpp"

namespace blocknet {

using TestKey = std::int64_t;

struct CheckFailure {
  std::uint64_t case_id = 0;
  std::string clause;
  std::string input;
  std::string output;
};

struct CheckReport {
  std::string subject;
  std::uint64_t cases = 0;
  bool exhaustive = true;
  std::uint64_t failure_count = 0;
  std::vector<CheckFailure> failures;  // first few, ordered by case id

  static constexpr std::size_t kKeptFailures = 32;

  bool passed() const noexcept { return failure_count == 0; }

  void add_failure(CheckFailure f) {
    ++failure_count;
    failures.push_back(std::move(f));
    std::sort(failures.begin(), failures.end(),
              [](const CheckFailure& a, const CheckFailure& b) { return a.case_id < b.case_id; });
    if (failures.size() > kKeptFailures) failures.pop_back();
  }

  void merge(const CheckReport& other) {
    cases += other.cases;
    exhaustive = exhaustive && other.exhaustive;
    const auto count = failure_count + other.failure_count;
    for (const auto& f : other.failures) add_failure(f);
    failure_count = count;
  }

  std::string text() const {
    std::ostringstream os;
    os << subject << ": " << (passed() ? "PASS" : "FAIL") << " (" << cases << " cases, "
       << (exhaustive ? "exhaustive" : "randomized") << ", " << failure_count << " failures)\n";
    for (const auto& f : failures)
      os << "  case " << f.case_id << " [" << f.clause << "] input " << f.input << " -> output " << f.output << '\n';
    return os.str();
  }

  /// One row per recorded failure; a passing report writes one summary row.
  void write_csv(std::ostream& os, bool header = true) const {
    if (header) os << "case_id,verdict,clause,witness\n";
    if (passed()) {
      os << "all," << "pass,," << '\n';
      return;
    }
    for (const auto& f : failures)
      os << f.case_id << ",fail," << f.clause << ",\"" << f.input << " -> " << f.output << "\"\n";
  }
};

template <Key K>
std::string format_block(const Block<K>& b) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < b.size(); ++i) os << (i ? "," : "") << b[i];
  os << ']';
  return os.str();
}

template <Key K>
std::string format_frame(const BlockFrame<K>& f) {
  std::string s = "[";
  for (std::size_t i = 0; i < f.size(); ++i) s += (i ? "," : "") + format_block(f[i]);
  return s + "]";
}

// -- zero-one ----------------------------------------------------------------

inline constexpr std::size_t kMaxZeroOneWidth = 24;

/// Runs the network with the scalar comparator on all 2^width binary inputs.
inline CheckReport verify_zero_one(const Network& n, std::string subject = "zero-one") {
  if (n.width > kMaxZeroOneWidth)
    throw error("verify_zero_one: width " + std::to_string(n.width) + " exceeds " +
                std::to_string(kMaxZeroOneWidth));
  if (auto v = validate_network(n)) throw error("verify_zero_one: " + v->describe());

  CheckReport rep;
  rep.subject = std::move(subject);
  const std::uint64_t total = std::uint64_t{1} << n.width;
  std::vector<std::uint8_t> wires(n.width);
  for (std::uint64_t c = 0; c < total; ++c) {
    for (std::size_t w = 0; w < n.width; ++w) wires[w] = (c >> w) & 1u;
    for (const auto& st : n.stages)
      for (const auto& cmp : st.comparators)
        std::tie(wires[cmp.lo], wires[cmp.hi]) = scalar_compare(wires[cmp.lo], wires[cmp.hi], cmp.dir);
    if (!std::is_sorted(wires.begin(), wires.end())) {
      std::ostringstream in, out;
      for (std::size_t w = 0; w < n.width; ++w) in << ((c >> w) & 1u);
      for (auto b : wires) out << int(b);
      rep.add_failure({c, "unsorted", in.str(), out.str()});
    }
  }
  rep.cases = total;
  return rep;
}

// -- frames of blocks ---------------------------------------------------------

/// Frames of sorted blocks with keys in [0, domain) and sizes in
/// [min_block, max_block].
struct FrameSpace {
  std::size_t domain = 2;
  std::size_t min_block = 0;
  std::size_t max_block = 2;
  // Only frames whose blocks all have the same size.
  bool equal_sizes = false;
};

enum class FrameClause { None, LaneOrder, Permutation, BlockUnsorted };

constexpr std::string_view to_string(FrameClause c) noexcept {
  switch (c) {
    case FrameClause::None: return "none";
    case FrameClause::LaneOrder: return "lane-order";
    case FrameClause::Permutation: return "permutation";
    case FrameClause::BlockUnsorted: return "block-unsorted";
  }
  return "?";
}

/// Checks a network run: blocks sorted, adjacent lanes ⪯-ordered, and the
/// concatenation a permutation of the input concatenation.
template <Key K>
FrameClause check_frame_result(const BlockFrame<K>& input, const BlockFrame<K>& output) {
  for (const auto& b : output)
    if (!std::is_sorted(b.begin(), b.end())) return FrameClause::BlockUnsorted;
  // ⪯ is not transitive across empty blocks, so compare every pair.
  for (std::size_t i = 0; i < output.size(); ++i)
    for (std::size_t j = i + 1; j < output.size(); ++j)
      if (!precedes(output[i], output[j])) return FrameClause::LaneOrder;
  std::vector<K> a, b;
  for (const auto& x : input) a.insert(a.end(), x.begin(), x.end());
  for (const auto& x : output) b.insert(b.end(), x.begin(), x.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b ? FrameClause::None : FrameClause::Permutation;
}

namespace detail {

// All non-decreasing sequences of length `len` over [0, domain), in
// lexicographic order.
inline std::vector<Block<TestKey>> sorted_blocks(std::size_t domain, std::size_t len) {
  std::vector<Block<TestKey>> out;
  if (len > 0 && domain == 0) return out;
  Block<TestKey> b(len, 0);
  while (true) {
    out.push_back(b);
    std::size_t i = len;
    while (i > 0 && b[i - 1] == static_cast<TestKey>(domain) - 1) --i;
    if (i == 0) break;
    const TestKey v = b[i - 1] + 1;
    std::fill(b.begin() + static_cast<std::ptrdiff_t>(i - 1), b.end(), v);
  }
  return out;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Case c is either the c-th frame of the space in mixed radix (blocks of
// one group per lane; one group per size when sizes must be equal, else a
// single group of all blocks), or a frame drawn from a generator seeded by
// (seed, c) when the space exceeds the budget.
class FrameSource {
 public:
  FrameSource(std::size_t width, const FrameSpace& fs, std::uint64_t budget, std::uint64_t seed)
      : width_(width), fs_(fs), seed_(seed) {
    if (fs.min_block > fs.max_block) throw error("frame space: min_block > max_block");
    if (fs.equal_sizes) {
      for (std::size_t len = fs.min_block; len <= fs.max_block; ++len) groups_.push_back(sorted_blocks(fs.domain, len));
    } else {
      groups_.emplace_back();
      for (std::size_t len = fs.min_block; len <= fs.max_block; ++len)
        for (auto& b : sorted_blocks(fs.domain, len)) groups_.back().push_back(std::move(b));
    }
    std::uint64_t total = 0;
    for (const auto& g : groups_) {
      std::uint64_t count = 1;
      for (std::size_t i = 0; i < width && exhaustive_; ++i) {
        if (g.empty()) { count = 0; break; }
        if (count > budget / g.size()) exhaustive_ = false;
        else count *= g.size();
      }
      group_cases_.push_back(count);
      total += count;
      if (total > budget) exhaustive_ = false;
    }
    cases_ = exhaustive_ ? total : budget;
  }

  bool exhaustive() const noexcept { return exhaustive_; }
  std::uint64_t cases() const noexcept { return cases_; }

  BlockFrame<TestKey> frame(std::uint64_t c) const {
    BlockFrame<TestKey> f(width_);
    if (exhaustive_) {
      std::size_t g = 0;
      while (c >= group_cases_[g]) c -= group_cases_[g++];
      const auto& blocks = groups_[g];
      for (std::size_t w = 0; w < width_; ++w) {
        f[w] = blocks[c % blocks.size()];
        c /= blocks.size();
      }
      return f;
    }
    std::mt19937_64 rng(splitmix64(seed_ ^ splitmix64(c)));
    std::uniform_int_distribution<std::size_t> size(fs_.min_block, fs_.max_block);
    std::uniform_int_distribution<TestKey> key(0, static_cast<TestKey>(std::max<std::size_t>(fs_.domain, 1)) - 1);
    const std::size_t common = size(rng);
    for (auto& b : f) {
      b.resize(fs_.equal_sizes ? common : size(rng));
      for (auto& k : b) k = key(rng);
      std::sort(b.begin(), b.end());
    }
    return f;
  }

 private:
  std::size_t width_;
  FrameSpace fs_;
  std::uint64_t seed_;
  std::vector<std::vector<Block<TestKey>>> groups_;
  std::vector<std::uint64_t> group_cases_;
  bool exhaustive_ = true;
  std::uint64_t cases_ = 0;
};

// Splits [0, cases) into contiguous chunks, one per worker, and merges the
// per-chunk results in chunk order.
template <class Fn>
CheckReport enumerate_cases(std::uint64_t cases, std::size_t workers, Fn&& per_case) {
  workers = std::max<std::size_t>(1, std::min<std::uint64_t>(workers, std::max<std::uint64_t>(cases, 1)));
  std::vector<CheckReport> parts(workers);
  parallel_for(workers, workers, [&](std::size_t w) {
    const std::uint64_t lo = cases * w / workers, hi = cases * (w + 1) / workers;
    for (std::uint64_t c = lo; c < hi; ++c) per_case(c, parts[w]);
    parts[w].cases = hi - lo;
  });
  CheckReport total;
  total.cases = 0;
  for (const auto& p : parts) total.merge(p);
  return total;
}

}  // namespace detail

struct AgglomerationOptions {
  FrameSpace space{};
  std::uint64_t budget = 1'000'000;  // exhaustive up to this many frames
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  // Also require max block size to stay at the initial size on every stage
  // whenever all initial blocks have equal size.
  bool check_balance = false;
};

/// Runs `ce` over every frame of the space (or `budget` random frames) and
/// records frames whose result violates lane order, permutation or block
/// sortedness.
template <class CE>
  requires BlockComparator<CE, TestKey>
CheckReport verify_agglomeration_with(const Network& n, CE&& ce, const AgglomerationOptions& opt,
                                      std::string subject = "agglomeration") {
  const detail::FrameSource src(n.width, opt.space, opt.budget, opt.seed);
  ExecOptions exec;
  exec.debug_checks = false;
  auto rep = detail::enumerate_cases(src.cases(), opt.workers, [&](std::uint64_t c, CheckReport& r) {
    auto in = src.frame(c);
    auto res = run_sequential(n, ce, in, exec);
    std::string clause{to_string(check_frame_result(in, res.frame))};
    if (clause == "none" && opt.check_balance) {
      const bool equal = std::all_of(in.begin(), in.end(), [&](const auto& b) { return b.size() == in[0].size(); });
      if (equal)
        for (const auto& s : res.metrics.stages)
          if (s.max_block != in[0].size()) clause = "balance";
    }
    if (clause != "none") r.add_failure({c, clause, format_frame(in), format_frame(res.frame)});
  });
  rep.subject = std::move(subject);
  rep.exhaustive = src.exhaustive();
  return rep;
}

inline CheckReport verify_agglomeration(const Network& n, const AgglomerationOptions& opt,
                                        std::string subject = "agglomeration") {
  return verify_agglomeration_with(n, MergeSplit{}, opt, std::move(subject));
}

struct Witness {
  std::uint64_t case_id = 0;
  BlockFrame<TestKey> input;
  BlockFrame<TestKey> output;
  FrameClause clause = FrameClause::None;
};

/// Searches the frame space for an input on which the network with `ce`
/// fails. Returns the witness with the fewest keys (lowest case id on ties).
template <class CE>
  requires BlockComparator<CE, TestKey>
std::optional<Witness> find_counterexample(const Network& n, CE&& ce, const FrameSpace& space,
                                           std::uint64_t budget = 1'000'000, std::uint64_t seed = 0) {
  const detail::FrameSource src(n.width, space, budget, seed);
  ExecOptions exec;
  exec.debug_checks = false;
  std::optional<Witness> best;
  std::size_t best_keys = std::numeric_limits<std::size_t>::max();
  for (std::uint64_t c = 0; c < src.cases(); ++c) {
    auto in = src.frame(c);
    std::size_t keys = 0;
    for (const auto& b : in) keys += b.size();
    if (keys >= best_keys) continue;
    auto res = run_sequential(n, ce, in, exec);
    const auto clause = check_frame_result(in, res.frame);
    if (clause != FrameClause::None) {
      best = Witness{c, std::move(in), std::move(res.frame), clause};
      best_keys = keys;
    }
  }
  return best;
}

// -- direct relations preserved by a valid block comparator --------------------

inline constexpr int kDirectRelationClauses = 6;

/// Randomized premise construction for one clause; the conclusion is checked
/// on merge_split's outputs. Block sizes are drawn independently from 1..6
/// unless `equal_sizes`, where A_1 and A_2 share one size. Clauses 2 and 3
/// rest on the lb/ub limits, which balanced merge_split only respects for
/// equal sizes. Clauses:
///   1  out1 ⪯ out2
///   2  A_i ⪯ B  =>  out1 ⪯ B
///   3  B ⪯ A_i  =>  B ⪯ out2
///   4  B ⪯ A_1, B ⪯ A_2  =>  B ⪯ out1
///   5  A_1 ⪯ B, A_2 ⪯ B  =>  out2 ⪯ B
///   6  L ⪯ A_i ⪯ A_j ⪯ U  =>  L ⪯ out1, out2 ⪯ U
inline CheckReport check_direct_relation(int clause, std::size_t samples, std::uint64_t seed = 0,
                                         bool equal_sizes = false) {
  if (clause < 1 || clause > kDirectRelationClauses) throw error("relation clause must be in 1..6");
  using B = Block<TestKey>;
  std::mt19937_64 rng(detail::splitmix64(seed * 7919 + static_cast<std::uint64_t>(clause)));
  std::uniform_int_distribution<std::size_t> size(1, 6);
  auto block = [&](TestKey lo, TestKey hi, std::size_t len = 0) {
    std::uniform_int_distribution<TestKey> key(lo, hi);
    B b(len ? len : size(rng));
    for (auto& k : b) k = key(rng);
    std::sort(b.begin(), b.end());
    return b;
  };
  auto coin = [&] { return std::uniform_int_distribution<int>(0, 1)(rng) == 1; };

  CheckReport rep;
  rep.subject = "direct-relation-" + std::to_string(clause) + (equal_sizes ? "-equal-sizes" : "");
  rep.exhaustive = false;
  rep.cases = samples;
  for (std::size_t c = 0; c < samples; ++c) {
    const std::size_t common = equal_sizes ? size(rng) : 0;
    B a1 = block(0, 20, common), a2 = block(0, 20, common);
    B bound_lo, bound_hi;
    switch (clause) {
      case 2: bound_hi = block((coin() ? a1 : a2).back(), 30); break;
      case 3: bound_lo = block(-10, (coin() ? a1 : a2).front()); break;
      case 4: bound_lo = block(-10, std::min(a1.front(), a2.front())); break;
      case 5: bound_hi = block(std::max(a1.back(), a2.back()), 30); break;
      case 6: {
        const TestKey split = std::uniform_int_distribution<TestKey>(0, 20)(rng);
        B lower = block(0, split, common), upper = block(split, 20, common);
        bound_lo = block(-10, lower.front());
        bound_hi = block(upper.back(), 30);
        if (coin()) { a1 = std::move(lower); a2 = std::move(upper); }
        else { a1 = std::move(upper); a2 = std::move(lower); }
        break;
      }
      default: break;
    }
    const auto [o1, o2] = merge_split(a1, a2, Direction::Ascending);
    bool ok = true;
    switch (clause) {
      case 1: ok = precedes(o1, o2); break;
      case 2: ok = precedes(o1, bound_hi); break;
      case 3: ok = precedes(bound_lo, o2); break;
      case 4: ok = precedes(bound_lo, o1); break;
      case 5: ok = precedes(o2, bound_hi); break;
      case 6: ok = precedes(bound_lo, o1) && precedes(o2, bound_hi); break;
    }
    if (!ok)
      rep.add_failure({c, rep.subject,
                       format_frame(BlockFrame<TestKey>{bound_lo, a1, a2, bound_hi}),
                       format_frame(BlockFrame<TestKey>{o1, o2})});
  }
  return rep;
}

/// All six clauses, `samples` configurations each.
inline CheckReport check_direct_relations(std::size_t samples, std::uint64_t seed = 0, bool equal_sizes = false) {
  CheckReport rep;
  rep.subject = "direct-relations";
  rep.exhaustive = false;
  for (int c = 1; c <= kDirectRelationClauses; ++c) rep.merge(check_direct_relation(c, samples, seed, equal_sizes));
  return rep;
}

}  // namespace blocknet
