// SPDX-License-Identifier: Apache-2.0
//
// Comparator networks as plain data, plus the Batcher generators.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace blocknet {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Direction : std::uint8_t { Ascending, Descending };

constexpr Direction opposite(Direction d) noexcept {
  return d == Direction::Ascending ? Direction::Descending : Direction::Ascending;
}

/// One comparison element with fixed wires. `lo` always receives the minimum
/// for Ascending and the maximum for Descending.
struct Comparator {
  std::size_t lo = 0;
  std::size_t hi = 0;
  Direction dir = Direction::Ascending;

  friend bool operator==(const Comparator&, const Comparator&) = default;
};

/// Comparators with pairwise-disjoint wires; they may run concurrently.
struct Stage {
  std::vector<Comparator> comparators;

  std::size_t size() const noexcept { return comparators.size(); }
  friend bool operator==(const Stage&, const Stage&) = default;
};

struct Network {
  std::size_t width = 1;
  std::vector<Stage> stages;

  std::size_t comparator_count() const noexcept {
    std::size_t n = 0;
    for (const auto& s : stages) n += s.size();
    return n;
  }

  friend bool operator==(const Network&, const Network&) = default;
};

namespace detail {

// Places comparators, given in a valid sequential order, into the earliest
// stage after every previous comparator touching the same wires. Stages end
// up sorted by `lo`, which is the canonical form used for equality.
class StageBuilder {
 public:
  explicit StageBuilder(std::size_t width) : width_(width), next_free_(width, 0) {}

  void add(std::size_t a, std::size_t b, Direction dir) {
    if (a > b) std::swap(a, b);
    const std::size_t s = std::max(next_free_[a], next_free_[b]);
    if (s >= stages_.size()) stages_.resize(s + 1);
    stages_[s].comparators.push_back({a, b, dir});
    next_free_[a] = next_free_[b] = s + 1;
  }

  Network finish() && {
    for (auto& st : stages_) {
      std::sort(st.comparators.begin(), st.comparators.end(),
                [](const Comparator& x, const Comparator& y) { return x.lo < y.lo; });
    }
    return Network{width_, std::move(stages_)};
  }

 private:
  std::size_t width_;
  std::vector<std::size_t> next_free_;
  std::vector<Stage> stages_;
};

inline void bitonic_merge(StageBuilder& b, std::size_t first, std::size_t count, Direction dir) {
  if (count < 2) return;
  const std::size_t half = count / 2;
  for (std::size_t i = 0; i < half; ++i) b.add(first + i, first + i + half, dir);
  bitonic_merge(b, first, half, dir);
  bitonic_merge(b, first + half, half, dir);
}

// First half ascending, second half descending gives a bitonic sequence,
// which the merger then sorts in direction `dir`.
inline void bitonic_sort(StageBuilder& b, std::size_t first, std::size_t count, Direction dir) {
  if (count < 2) return;
  const std::size_t half = count / 2;
  bitonic_sort(b, first, half, Direction::Ascending);
  bitonic_sort(b, first + half, half, Direction::Descending);
  bitonic_merge(b, first, count, dir);
}

// Merges the two sorted halves of the wires first, first+stride, ... within
// [first, first+count).
inline void odd_even_merge(StageBuilder& b, std::size_t first, std::size_t count,
                           std::size_t stride) {
  const std::size_t step = stride * 2;
  if (step < count) {
    odd_even_merge(b, first, count, step);
    odd_even_merge(b, first + stride, count, step);
    for (std::size_t i = first + stride; i + stride < first + count; i += step)
      b.add(i, i + stride, Direction::Ascending);
  } else {
    b.add(first, first + stride, Direction::Ascending);
  }
}

inline void odd_even_sort(StageBuilder& b, std::size_t first, std::size_t count) {
  if (count < 2) return;
  const std::size_t half = count / 2;
  odd_even_sort(b, first, half);
  odd_even_sort(b, first + half, half);
  odd_even_merge(b, first, count, 1);
}

inline std::size_t width_for_order(unsigned order) {
  if (order >= 8 * sizeof(std::size_t) - 1) throw error("network order too large");
  return std::size_t{1} << order;
}

}  // namespace detail

/// Batcher's bitonic sorter of width 2^order, ascending overall.
inline Network bitonic_network(unsigned order) {
  const std::size_t width = detail::width_for_order(order);
  detail::StageBuilder b(width);
  detail::bitonic_sort(b, 0, width, Direction::Ascending);
  return std::move(b).finish();
}

/// Batcher's odd-even mergesort network of width 2^order.
inline Network odd_even_merge_network(unsigned order) {
  const std::size_t width = detail::width_for_order(order);
  detail::StageBuilder b(width);
  detail::odd_even_sort(b, 0, width);
  return std::move(b).finish();
}

/// The classic 4-input, 5-comparator network: two parallel pairs, two
/// parallel cross comparisons, one final comparison of the middle wires.
inline Network four_wire_network() {
  return Network{4,
                 {Stage{{{0, 1, Direction::Ascending}, {2, 3, Direction::Ascending}}},
                  Stage{{{0, 2, Direction::Ascending}, {1, 3, Direction::Ascending}}},
                  Stage{{{1, 2, Direction::Ascending}}}}};
}

// -- round-robin distribution -------------------------------------------------

/// Element i goes to part i mod k.
template <class T>
std::vector<std::vector<T>> unshuffle(std::size_t k, const std::vector<T>& xs) {
  if (k == 0) throw error("unshuffle: k must be positive");
  std::vector<std::vector<T>> parts(k);
  for (auto& p : parts) p.reserve(xs.size() / k + 1);
  for (std::size_t i = 0; i < xs.size(); ++i) parts[i % k].push_back(xs[i]);
  return parts;
}

/// Round-robin interleave; inverse of unshuffle. Ragged parts are allowed,
/// exhausted parts are skipped.
template <class T>
std::vector<T> shuffle(const std::vector<std::vector<T>>& parts) {
  std::size_t total = 0, longest = 0;
  for (const auto& p : parts) {
    total += p.size();
    longest = std::max(longest, p.size());
  }
  std::vector<T> out;
  out.reserve(total);
  for (std::size_t r = 0; r < longest; ++r)
    for (const auto& p : parts)
      if (r < p.size()) out.push_back(p[r]);
  return out;
}

// -- validation ---------------------------------------------------------------

struct NetworkViolation {
  enum class Kind { WireOutOfRange, LoNotBelowHi, DuplicateWire, ZeroWidth };
  Kind kind;
  std::size_t stage = 0;
  Comparator comparator{};

  std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::ZeroWidth: return "network width is zero";
      case Kind::WireOutOfRange: os << "wire out of range"; break;
      case Kind::LoNotBelowHi: os << "lo >= hi"; break;
      case Kind::DuplicateWire: os << "wire used twice in one stage"; break;
    }
    os << " at stage " << stage << " (" << comparator.lo << ":" << comparator.hi << ")";
    return os.str();
  }
};

/// Returns the first violated invariant, or nullopt for a well-formed network.
inline std::optional<NetworkViolation> validate_network(const Network& n) {
  using K = NetworkViolation::Kind;
  if (n.width == 0) return NetworkViolation{K::ZeroWidth};
  std::vector<std::size_t> seen(n.width, static_cast<std::size_t>(-1));
  for (std::size_t s = 0; s < n.stages.size(); ++s) {
    for (const auto& c : n.stages[s].comparators) {
      if (c.lo >= n.width || c.hi >= n.width) return NetworkViolation{K::WireOutOfRange, s, c};
      if (c.lo >= c.hi) return NetworkViolation{K::LoNotBelowHi, s, c};
      if (seen[c.lo] == s || seen[c.hi] == s) return NetworkViolation{K::DuplicateWire, s, c};
      seen[c.lo] = seen[c.hi] = s;
    }
  }
  return std::nullopt;
}

// -- text format --------------------------------------------------------------
//
//   width=<w> stages=<s>
//   lo:hi:A lo:hi:D ...      (one line per stage)

inline void write_network(std::ostream& os, const Network& n) {
  os << "width=" << n.width << " stages=" << n.stages.size() << '\n';
  for (const auto& st : n.stages) {
    bool first = true;
    for (const auto& c : st.comparators) {
      if (!first) os << ' ';
      first = false;
      os << c.lo << ':' << c.hi << ':' << (c.dir == Direction::Ascending ? 'A' : 'D');
    }
    os << '\n';
  }
}

inline std::string to_text(const Network& n) {
  std::ostringstream os;
  write_network(os, n);
  return os.str();
}

/// Parses the text format. Throws blocknet::error on malformed input; does not
/// check network invariants (see validate_network).
inline Network read_network(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw error("network: missing header");
  std::size_t width = 0, count = 0;
  {
    std::istringstream hs(line);
    std::string w, s;
    hs >> w >> s;
    if (w.rfind("width=", 0) != 0 || s.rfind("stages=", 0) != 0)
      throw error("network: bad header '" + line + "'");
    try {
      width = std::stoull(w.substr(6));
      count = std::stoull(s.substr(7));
    } catch (const std::exception&) {
      throw error("network: bad header '" + line + "'");
    }
  }
  Network n{width, {}};
  n.stages.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(is, line)) throw error("network: expected " + std::to_string(count) + " stages");
    Stage st;
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      const auto p1 = tok.find(':');
      const auto p2 = tok.find(':', p1 == std::string::npos ? p1 : p1 + 1);
      if (p1 == std::string::npos || p2 == std::string::npos || p2 + 2 != tok.size())
        throw error("network: bad comparator '" + tok + "'");
      Comparator c;
      try {
        std::size_t used = 0;
        c.lo = std::stoull(tok.substr(0, p1), &used);
        if (used != p1) throw error("");
        c.hi = std::stoull(tok.substr(p1 + 1, p2 - p1 - 1), &used);
        if (used != p2 - p1 - 1) throw error("");
      } catch (const std::exception&) {
        throw error("network: bad comparator '" + tok + "'");
      }
      const char d = tok.back();
      if (d == 'A') c.dir = Direction::Ascending;
      else if (d == 'D') c.dir = Direction::Descending;
      else throw error("network: bad direction in '" + tok + "'");
      st.comparators.push_back(c);
    }
    n.stages.push_back(std::move(st));
  }
  return n;
}

inline Network network_from_text(const std::string& text) {
  std::istringstream is(text);
  return read_network(is);
}

}  // namespace blocknet
