// SPDX-License-Identifier: Apache-2.0
//
// Runs a comparator network over a frame of blocks.
//
// run_sequential is the reference engine. run_parallel assigns every
// comparator to a worker by its row (position within its stage) and moves
// blocks between comparators over single-slot point-to-point channels, one
// per (comparator, input side). There is no central dispatcher: a comparator
// fires as soon as both of its operands have arrived, so later stages can
// overlap earlier ones.

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "comparators.hpp"
#include "network.hpp"

namespace blocknet {

template <Key K>
using BlockFrame = std::vector<Block<K>>;

struct StageMetrics {
  std::size_t comparators = 0;
  std::uint64_t wall_ns = 0;
  std::size_t keys_crossed = 0;
  std::size_t max_block = 0;
};

struct RunMetrics {
  std::vector<StageMetrics> stages;
  std::size_t comparator_applications = 0;
  // Largest |a1| + |a2| any worker held while applying one comparator.
  std::size_t peak_worker_residency = 0;
  std::size_t initial_max_block = 0;
  std::size_t workers = 1;
  std::uint64_t total_ns = 0;

  std::size_t total_keys_crossed() const noexcept {
    std::size_t n = 0;
    for (const auto& s : stages) n += s.keys_crossed;
    return n;
  }

  std::size_t max_block() const noexcept {
    std::size_t m = initial_max_block;
    for (const auto& s : stages) m = std::max(m, s.max_block);
    return m;
  }

  void write_csv(std::ostream& os) const {
    os << "stage,comparators,wall_ns,keys_crossed,max_block\n";
    for (std::size_t i = 0; i < stages.size(); ++i) {
      const auto& s = stages[i];
      os << i << ',' << s.comparators << ',' << s.wall_ns << ',' << s.keys_crossed << ','
         << s.max_block << '\n';
    }
  }
};

/// Raised when a comparison element breaks key conservation or block
/// sortedness while debug checks are on, or when a worker fails.
struct run_error : error {
  using error::error;
};

inline bool debug_checks_from_env() {
  const char* v = std::getenv("BLOCKNET_DEBUG_CHECKS");
  return v != nullptr && std::string(v) == "1";
}

struct ExecOptions {
  bool debug_checks = debug_checks_from_env();
  // Called for every comparator application. Only run_sequential honours it.
  std::function<void(std::size_t stage, const Comparator&)> trace;
};

template <Key K>
struct RunResult {
  BlockFrame<K> frame;
  RunMetrics metrics;
};

namespace detail {

using clock = std::chrono::steady_clock;

inline std::uint64_t elapsed_ns(clock::time_point a, clock::time_point b) {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count());
}

// Size of the multiset intersection of two sorted blocks.
template <Key K>
std::size_t common_keys(const Block<K>& a, const Block<K>& b) {
  std::size_t n = 0;
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else { ++n; ++i; ++j; }
  }
  return n;
}

template <Key K>
std::size_t crossed_into(const Block<K>& before, const Block<K>& after) {
  if (std::is_sorted(before.begin(), before.end()) && std::is_sorted(after.begin(), after.end()))
    return after.size() - common_keys(before, after);
  Block<K> b = before, a = after;
  std::sort(b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a.size() - common_keys(b, a);
}

template <Key K>
void check_step(const Block<K>& a1, const Block<K>& a2, const Block<K>& o1, const Block<K>& o2,
                std::size_t stage) {
  if (!std::is_sorted(o1.begin(), o1.end()) || !std::is_sorted(o2.begin(), o2.end()))
    throw run_error("stage " + std::to_string(stage) + ": comparator produced an unsorted block");
  Block<K> in(a1), out(o1);
  in.insert(in.end(), a2.begin(), a2.end());
  out.insert(out.end(), o2.begin(), o2.end());
  std::sort(in.begin(), in.end());
  std::sort(out.begin(), out.end());
  if (in != out) throw run_error("stage " + std::to_string(stage) + ": keys not conserved");
}

inline void require_width(const Network& n, std::size_t lanes) {
  if (lanes != n.width)
    throw error("frame has " + std::to_string(lanes) + " lanes, network width is " +
                std::to_string(n.width));
}

template <Key K>
std::size_t largest(const BlockFrame<K>& f) {
  std::size_t m = 0;
  for (const auto& b : f) m = std::max(m, b.size());
  return m;
}

// Per-wire block sizes after each stage; wires a stage does not touch keep
// their previous size.
class SizeTracker {
 public:
  SizeTracker(std::size_t stages, std::vector<std::size_t> initial)
      : width_(initial.size()), sizes_(stages * initial.size(), kUnset), initial_(std::move(initial)) {}

  void set(std::size_t stage, std::size_t wire, std::size_t size) { sizes_[stage * width_ + wire] = size; }

  void fill(std::vector<StageMetrics>& stages) {
    std::vector<std::size_t> cur = initial_;
    for (std::size_t s = 0; s < stages.size(); ++s) {
      std::size_t m = 0;
      for (std::size_t w = 0; w < width_; ++w) {
        if (sizes_[s * width_ + w] != kUnset) cur[w] = sizes_[s * width_ + w];
        m = std::max(m, cur[w]);
      }
      stages[s].max_block = m;
    }
  }

 private:
  static constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  std::size_t width_;
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> initial_;
};

template <Key K>
std::vector<std::size_t> lane_sizes(const BlockFrame<K>& f) {
  std::vector<std::size_t> s;
  s.reserve(f.size());
  for (const auto& b : f) s.push_back(b.size());
  return s;
}

}  // namespace detail

/// Applies the stages in order, comparators in canonical order.
template <Key K, class CE>
  requires BlockComparator<CE, K>
RunResult<K> run_sequential(const Network& n, CE&& ce, BlockFrame<K> frame, const ExecOptions& opt = {}) {
  detail::require_width(n, frame.size());
  RunMetrics m;
  m.stages.resize(n.stages.size());
  m.initial_max_block = detail::largest(frame);
  detail::SizeTracker sizes(n.stages.size(), detail::lane_sizes(frame));

  const auto run_start = detail::clock::now();
  std::vector<BlockPair<K>> out;
  for (std::size_t s = 0; s < n.stages.size(); ++s) {
    const auto& st = n.stages[s];
    out.clear();
    out.reserve(st.size());
    const auto t0 = detail::clock::now();
    for (const auto& c : st.comparators) {
      if (opt.trace) opt.trace(s, c);
      out.push_back(ce(frame[c.lo], frame[c.hi], c.dir));
    }
    const auto t1 = detail::clock::now();

    auto& sm = m.stages[s];
    sm.comparators = st.size();
    sm.wall_ns = detail::elapsed_ns(t0, t1);
    for (std::size_t i = 0; i < st.size(); ++i) {
      const auto& c = st.comparators[i];
      auto& [o1, o2] = out[i];
      if (opt.debug_checks) detail::check_step(frame[c.lo], frame[c.hi], o1, o2, s);
      m.peak_worker_residency = std::max(m.peak_worker_residency, frame[c.lo].size() + frame[c.hi].size());
      sm.keys_crossed += detail::crossed_into(frame[c.lo], o1) + detail::crossed_into(frame[c.hi], o2);
      sizes.set(s, c.lo, o1.size());
      sizes.set(s, c.hi, o2.size());
      frame[c.lo] = std::move(o1);
      frame[c.hi] = std::move(o2);
    }
    m.comparator_applications += st.size();
  }
  m.total_ns = detail::elapsed_ns(run_start, detail::clock::now());
  sizes.fill(m.stages);
  return {std::move(frame), std::move(m)};
}

namespace detail {

// Static wiring of a network: which channel each comparator output feeds.
// Channel 2t / 2t+1 are the lo / hi inputs of comparator t (stage-major
// numbering); channel 2T + w is the final output of wire w.
struct Wiring {
  struct Task {
    std::size_t stage;
    Comparator cmp;
    std::size_t out_lo;
    std::size_t out_hi;
  };
  std::vector<Task> tasks;
  std::vector<std::size_t> entry;  // first channel of each wire
  std::vector<std::vector<std::size_t>> by_worker;
  std::size_t channels = 0;

  Wiring(const Network& n, std::size_t workers) {
    const std::size_t width = n.width;
    std::size_t total = 0;
    for (const auto& st : n.stages) total += st.size();
    channels = 2 * total + width;

    tasks.reserve(total);
    by_worker.resize(workers);
    for (std::size_t s = 0; s < n.stages.size(); ++s) {
      const auto& st = n.stages[s];
      for (std::size_t row = 0; row < st.size(); ++row) {
        by_worker[row % workers].push_back(tasks.size());
        tasks.push_back({s, st.comparators[row], 0, 0});
      }
    }
    // Walk backwards so each wire knows its next consumer.
    std::vector<std::size_t> next(width);
    for (std::size_t w = 0; w < width; ++w) next[w] = 2 * total + w;
    for (std::size_t t = total; t-- > 0;) {
      auto& task = tasks[t];
      task.out_lo = next[task.cmp.lo];
      task.out_hi = next[task.cmp.hi];
      next[task.cmp.lo] = 2 * t;
      next[task.cmp.hi] = 2 * t + 1;
    }
    entry = std::move(next);
  }
};

template <Key K>
class Channel {
 public:
  void put(Block<K> b) {
    {
      std::lock_guard lk(m_);
      value_ = std::move(b);
    }
    cv_.notify_one();
  }

  // Blocks until a value arrives; nullopt when the run was cancelled.
  std::optional<Block<K>> take(const std::atomic<bool>& cancelled) {
    std::unique_lock lk(m_);
    cv_.wait(lk, [&] { return value_.has_value() || cancelled.load(); });
    if (!value_) return std::nullopt;
    std::optional<Block<K>> v = std::move(value_);
    value_.reset();
    return v;
  }

  void wake() {
    { std::lock_guard lk(m_); }
    cv_.notify_all();
  }

 private:
  std::mutex m_;
  std::condition_variable cv_;
  std::optional<Block<K>> value_;
};

struct TaskRecord {
  clock::time_point start, end;
  std::size_t crossed = 0;
  std::size_t residency = 0;
  std::size_t out_lo = 0, out_hi = 0;
};

}  // namespace detail

/// Parallel engine; produces the same frame as run_sequential for any
/// worker count. Worker count is capped at the largest stage size.
template <Key K, class CE>
  requires BlockComparator<CE, K>
RunResult<K> run_parallel(const Network& n, CE&& ce, BlockFrame<K> frame, std::size_t workers,
                          const ExecOptions& opt = {}) {
  detail::require_width(n, frame.size());
  if (workers == 0) throw error("run_parallel: workers must be positive");
  std::size_t widest = 1;
  for (const auto& st : n.stages) widest = std::max(widest, st.size());
  workers = std::min(workers, widest);

  const detail::Wiring wiring(n, workers);
  std::vector<detail::Channel<K>> channels(wiring.channels);
  std::vector<detail::TaskRecord> records(wiring.tasks.size());
  std::atomic<bool> cancelled{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  RunMetrics m;
  m.workers = workers;
  m.stages.resize(n.stages.size());
  m.initial_max_block = detail::largest(frame);
  const auto initial_sizes = detail::lane_sizes(frame);

  const auto run_start = detail::clock::now();
  for (std::size_t w = 0; w < n.width; ++w) channels[wiring.entry[w]].put(std::move(frame[w]));

  auto cancel_all = [&](std::exception_ptr e) {
    {
      std::lock_guard lk(failure_mutex);
      if (!failure) failure = e;
    }
    cancelled = true;
    for (auto& ch : channels) ch.wake();
  };

  auto work = [&](std::size_t id) {
    try {
      for (std::size_t t : wiring.by_worker[id]) {
        const auto& task = wiring.tasks[t];
        auto a1 = channels[2 * t].take(cancelled);
        if (!a1) return;
        auto a2 = channels[2 * t + 1].take(cancelled);
        if (!a2) return;
        auto& rec = records[t];
        rec.start = detail::clock::now();
        auto [o1, o2] = ce(*a1, *a2, task.cmp.dir);
        rec.end = detail::clock::now();
        if (opt.debug_checks) detail::check_step(*a1, *a2, o1, o2, task.stage);
        rec.residency = a1->size() + a2->size();
        rec.crossed = detail::crossed_into(*a1, o1) + detail::crossed_into(*a2, o2);
        rec.out_lo = o1.size();
        rec.out_hi = o2.size();
        channels[task.out_lo].put(std::move(o1));
        channels[task.out_hi].put(std::move(o2));
      }
    } catch (...) {
      cancel_all(std::current_exception());
    }
  };

  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work, i);
  }

  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const run_error&) {
      throw;
    } catch (const std::exception& e) {
      throw run_error(std::string("worker failed: ") + e.what());
    } catch (...) {
      throw run_error("worker failed");
    }
  }

  const std::size_t total = wiring.tasks.size();
  for (std::size_t w = 0; w < n.width; ++w) frame[w] = *channels[2 * total + w].take(cancelled);
  m.total_ns = detail::elapsed_ns(run_start, detail::clock::now());

  detail::SizeTracker sizes(n.stages.size(), initial_sizes);
  std::vector<detail::clock::time_point> first(n.stages.size(), detail::clock::time_point::max());
  std::vector<detail::clock::time_point> last(n.stages.size(), detail::clock::time_point::min());
  for (std::size_t t = 0; t < total; ++t) {
    const auto& task = wiring.tasks[t];
    const auto& rec = records[t];
    auto& sm = m.stages[task.stage];
    ++sm.comparators;
    sm.keys_crossed += rec.crossed;
    first[task.stage] = std::min(first[task.stage], rec.start);
    last[task.stage] = std::max(last[task.stage], rec.end);
    m.peak_worker_residency = std::max(m.peak_worker_residency, rec.residency);
    sizes.set(task.stage, task.cmp.lo, rec.out_lo);
    sizes.set(task.stage, task.cmp.hi, rec.out_hi);
  }
  for (std::size_t s = 0; s < n.stages.size(); ++s)
    if (m.stages[s].comparators > 0) m.stages[s].wall_ns = detail::elapsed_ns(first[s], last[s]);
  m.comparator_applications = total;
  sizes.fill(m.stages);
  return {std::move(frame), std::move(m)};
}

// -- helpers shared with the hybrid pipelines --------------------------------

/// Runs fn(i) for i in [0, count) on at most `workers` threads. The first
/// exception thrown by any call is rethrown.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < count;) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lk(mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
  }
  if (failure) std::rethrow_exception(failure);
}

template <Key K>
using LocalSort = std::function<void(std::span<K>)>;

// -- distributed mode ---------------------------------------------------------

/// Loads one lane. Throwing signals an unreadable source.
template <Key K>
using LaneSource = std::function<std::vector<K>()>;

template <Key K>
using LaneSink = std::function<void(std::size_t lane, const Block<K>&)>;

struct DistributedMetrics {
  std::uint64_t io_ns = 0;
  std::uint64_t local_sort_ns = 0;
  std::uint64_t merge_ns = 0;
  RunMetrics network;
};

template <Key K>
struct DistributedResult {
  BlockFrame<K> lanes;
  DistributedMetrics metrics;
};

namespace detail {

// `make_ce(largest_lane)` builds the comparison element once every lane is
// loaded.
template <Key K, class MakeCE>
DistributedResult<K> distributed(const Network& n, MakeCE&& make_ce, const std::vector<LaneSource<K>>& sources,
                                 std::size_t workers, const LocalSort<K>& local_sort, const LaneSink<K>& sink,
                                 const ExecOptions& opt) {
  if (sources.size() != n.width)
    throw error("run_distributed: " + std::to_string(sources.size()) + " sources for width " +
                std::to_string(n.width));
  if (workers == 0) throw error("run_distributed: workers must be positive");

  DistributedResult<K> r;
  r.lanes.resize(n.width);

  auto t0 = clock::now();
  parallel_for(n.width, workers, [&](std::size_t i) {
    auto keys = sources[i]();
    for (const auto& k : keys)
      if (!is_admissible_key(k)) throw error("lane " + std::to_string(i) + ": non-finite key");
    r.lanes[i] = std::move(keys);
  });
  auto t1 = clock::now();
  parallel_for(n.width, workers, [&](std::size_t i) {
    auto& lane = r.lanes[i];
    if (local_sort) local_sort(std::span<K>(lane));
    else if (!std::is_sorted(lane.begin(), lane.end()))
      throw error("lane " + std::to_string(i) + " is unsorted and no local sort was given");
  });
  auto t2 = clock::now();
  auto&& ce = make_ce(largest(r.lanes));
  auto run = run_parallel(n, std::forward<decltype(ce)>(ce), std::move(r.lanes), workers, opt);
  auto t3 = clock::now();
  r.lanes = std::move(run.frame);
  if (sink)
    for (std::size_t i = 0; i < n.width; ++i) sink(i, r.lanes[i]);
  auto t4 = clock::now();

  r.metrics.io_ns = elapsed_ns(t0, t1) + elapsed_ns(t3, t4);
  r.metrics.local_sort_ns = elapsed_ns(t1, t2);
  r.metrics.merge_ns = elapsed_ns(t2, t3);
  r.metrics.network = std::move(run.metrics);
  return r;
}

}  // namespace detail

/// Sorts data that lives in `width` separate lanes. Each lane is loaded and
/// sorted locally by its own task, then the network merges across lanes with
/// run_parallel. `local_sort` may be empty when every source yields sorted
/// keys. If `sink` is set, each output lane is handed to it (and counted as
/// I/O).
template <Key K, class CE>
  requires BlockComparator<CE, K>
DistributedResult<K> run_distributed(const Network& n, CE&& ce, const std::vector<LaneSource<K>>& sources,
                                     std::size_t workers, const LocalSort<K>& local_sort = {},
                                     const LaneSink<K>& sink = {}, const ExecOptions& opt = {}) {
  return detail::distributed<K>(
      n, [&](std::size_t) -> CE&& { return std::forward<CE>(ce); }, sources, workers, local_sort, sink, opt);
}

/// run_distributed with CapacityMergeSplit sized to the largest loaded lane,
/// so the concatenation of the output lanes is sorted for any lane sizes.
template <Key K>
DistributedResult<K> distributed_sort(const Network& n, const std::vector<LaneSource<K>>& sources,
                                      std::size_t workers, const LocalSort<K>& local_sort = {},
                                      const LaneSink<K>& sink = {}, const ExecOptions& opt = {}) {
  return detail::distributed<K>(
      n, [](std::size_t cap) { return CapacityMergeSplit{cap}; }, sources, workers, local_sort, sink, opt);
}

}  // namespace blocknet
