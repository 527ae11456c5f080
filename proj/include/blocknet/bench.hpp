// SPDX-License-Identifier: Apache-2.0
//
// Benchmark grid: hybrid network sorts against parallel mergesort, PSRS and
// a sequential sort. Every run is checked against a reference sort before
// its timing is recorded.

#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "executor.hpp"
#include "hybrid.hpp"
#include "verification.hpp"

namespace blocknet::bench {

using BenchKey = std::int64_t;

enum class Algorithm { HybridBitonic, HybridOddEven, ParMergesort, Psrs, Sequential };

constexpr std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::HybridBitonic: return "hybrid-bitonic";
    case Algorithm::HybridOddEven: return "hybrid-oddeven";
    case Algorithm::ParMergesort: return "par-mergesort";
    case Algorithm::Psrs: return "psrs";
    case Algorithm::Sequential: return "sequential";
  }
  return "?";
}

inline std::optional<Algorithm> parse_algorithm(std::string_view s) {
  for (auto a : {Algorithm::HybridBitonic, Algorithm::HybridOddEven, Algorithm::ParMergesort, Algorithm::Psrs,
                 Algorithm::Sequential})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

inline std::size_t hardware_workers() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

struct BenchConfig {
  std::vector<Algorithm> algorithms{Algorithm::HybridBitonic, Algorithm::HybridOddEven, Algorithm::ParMergesort,
                                    Algorithm::Psrs, Algorithm::Sequential};
  std::vector<std::size_t> sizes{std::size_t{1} << 18, std::size_t{1} << 20, std::size_t{1} << 22};
  std::vector<std::size_t> lanes{4, 8};
  std::vector<std::size_t> workers{1, 2, 4, hardware_workers()};
  std::size_t repetitions = 3;
  std::uint64_t seed = 0;
  // Inputs are pre-split into lanes and only sorting is timed.
  bool distributed = false;
  bool merge_sort_inner = false;

  void validate() const {
    if (algorithms.empty()) throw error("bench: no algorithms");
    if (sizes.empty() || lanes.empty() || workers.empty()) throw error("bench: empty grid");
    if (repetitions == 0) throw error("bench: repetitions must be >= 1");
    for (auto l : lanes)
      if (l == 0 || !std::has_single_bit(l)) throw error("bench: lane count " + std::to_string(l) + " is not a power of two");
    for (auto w : workers)
      if (w == 0) throw error("bench: worker count must be >= 1");
  }
};

struct BenchRecord {
  Algorithm algorithm{};
  std::size_t n = 0;
  std::size_t lanes = 1;
  std::size_t workers = 1;
  std::size_t repetition = 0;
  std::uint64_t local_sort_ns = 0;
  std::uint64_t merge_ns = 0;
  std::uint64_t total_ns = 0;
  std::size_t keys_exchanged = 0;
};

struct BenchSummary {
  Algorithm algorithm{};
  std::size_t n = 0;
  std::size_t lanes = 1;
  std::size_t workers = 1;
  std::uint64_t min_ns = 0;
  double mean_ns = 0;
  double stddev_ns = 0;
  std::size_t keys_exchanged = 0;
  double speedup = 0;  // best sequential min / this min
};

/// Same seed and size give the same input for every algorithm.
inline std::vector<BenchKey> make_input(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(n)));
  std::vector<BenchKey> xs(n);
  for (auto& x : xs) x = static_cast<BenchKey>(rng());
  return xs;
}

namespace detail {

struct Timing {
  std::vector<BenchKey> keys;
  std::uint64_t local_ns = 0, merge_ns = 0, total_ns = 0;
  std::size_t exchanged = 0;
};

inline Timing run_one(Algorithm alg, const std::vector<BenchKey>& xs, std::size_t lanes, std::size_t workers,
                      const BenchConfig& cfg) {
  using blocknet::detail::clock;
  using blocknet::detail::elapsed_ns;
  const auto inner = cfg.merge_sort_inner ? merge_sort<BenchKey>() : std_sort<BenchKey>();
  Timing t;
  switch (alg) {
    case Algorithm::HybridBitonic:
    case Algorithm::HybridOddEven: {
      HybridPlan<BenchKey> plan{lanes, inner,
                                alg == Algorithm::HybridBitonic ? NetworkKind::Bitonic : NetworkKind::OddEven,
                                workers};
      auto split = split_blockwise(std::span<const BenchKey>(xs), lanes);
      const auto t0 = clock::now();
      auto r = hybrid_sort_lanes(std::move(split), plan);
      const auto t1 = clock::now();
      t.local_ns = r.local_sort_ns;
      t.merge_ns = r.merge_ns;
      t.total_ns = cfg.distributed ? r.local_sort_ns + r.merge_ns : elapsed_ns(t0, t1);
      t.exchanged = r.network.total_keys_crossed();
      t.keys = std::move(r.keys);
      break;
    }
    case Algorithm::ParMergesort: {
      const auto t0 = clock::now();
      auto r = parallel_mergesort_detailed(std::span<const BenchKey>(xs),
                                           static_cast<unsigned>(std::countr_zero(lanes)), workers, inner);
      const auto t1 = clock::now();
      t.local_ns = r.local_sort_ns;
      t.merge_ns = r.merge_ns;
      t.total_ns = elapsed_ns(t0, t1);
      t.exchanged = r.keys_exchanged;
      t.keys = std::move(r.keys);
      break;
    }
    case Algorithm::Psrs: {
      auto split = split_blockwise(std::span<const BenchKey>(xs), lanes);
      auto r = psrs_baseline(std::move(split), workers, inner);
      t.local_ns = r.local_sort_ns;
      t.merge_ns = r.merge_ns;
      t.total_ns = r.local_sort_ns + r.merge_ns;
      t.exchanged = r.keys_exchanged;
      t.keys = concat(r.lanes);
      break;
    }
    case Algorithm::Sequential: {
      t.keys = xs;
      const auto t0 = clock::now();
      inner.sort(std::span<BenchKey>(t.keys));
      t.total_ns = t.local_ns = elapsed_ns(t0, clock::now());
      break;
    }
  }
  return t;
}

}  // namespace detail

/// Runs the grid. Sequential runs once per size (lanes = workers = 1) and is
/// always included since it is the speedup reference. Throws if any output
/// differs from the reference sort.
inline std::vector<BenchRecord> run_bench(const BenchConfig& cfg, std::ostream* progress = nullptr) {
  cfg.validate();
  std::vector<BenchRecord> out;
  for (std::size_t n : cfg.sizes) {
    const auto xs = make_input(n, cfg.seed);
    auto reference = xs;
    std::sort(reference.begin(), reference.end());

    auto record = [&](Algorithm alg, std::size_t lanes, std::size_t workers) {
      for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        auto t = detail::run_one(alg, xs, lanes, workers, cfg);
        if (t.keys != reference)
          throw error("bench: " + std::string(to_string(alg)) + " produced a wrong result at n=" + std::to_string(n));
        out.push_back({alg, n, lanes, workers, rep, t.local_ns, t.merge_ns, t.total_ns, t.exchanged});
      }
      if (progress)
        *progress << to_string(alg) << " n=" << n << " lanes=" << lanes << " workers=" << workers << " done\n";
    };

    record(Algorithm::Sequential, 1, 1);
    for (auto alg : cfg.algorithms) {
      if (alg == Algorithm::Sequential) continue;
      for (auto lanes : cfg.lanes)
        for (auto workers : cfg.workers) record(alg, lanes, workers);
    }
  }
  return out;
}

inline std::vector<BenchSummary> summarize(const std::vector<BenchRecord>& records) {
  using GridKey = std::tuple<std::size_t, int, std::size_t, std::size_t>;
  std::map<GridKey, std::vector<const BenchRecord*>> groups;
  for (const auto& r : records) groups[{r.n, static_cast<int>(r.algorithm), r.lanes, r.workers}].push_back(&r);

  std::map<std::size_t, std::uint64_t> best_sequential;
  std::vector<BenchSummary> out;
  for (const auto& [key, rs] : groups) {
    BenchSummary s;
    s.n = std::get<0>(key);
    s.algorithm = static_cast<Algorithm>(std::get<1>(key));
    s.lanes = std::get<2>(key);
    s.workers = std::get<3>(key);
    s.min_ns = rs.front()->total_ns;
    double sum = 0;
    for (const auto* r : rs) {
      s.min_ns = std::min(s.min_ns, r->total_ns);
      sum += static_cast<double>(r->total_ns);
    }
    s.mean_ns = sum / static_cast<double>(rs.size());
    double var = 0;
    for (const auto* r : rs) var += std::pow(static_cast<double>(r->total_ns) - s.mean_ns, 2);
    s.stddev_ns = rs.size() > 1 ? std::sqrt(var / static_cast<double>(rs.size() - 1)) : 0.0;
    s.keys_exchanged = rs.front()->keys_exchanged;
    if (s.algorithm == Algorithm::Sequential) {
      auto [it, inserted] = best_sequential.emplace(s.n, s.min_ns);
      if (!inserted) it->second = std::min(it->second, s.min_ns);
    }
    out.push_back(s);
  }
  for (auto& s : out) {
    auto it = best_sequential.find(s.n);
    if (it != best_sequential.end() && s.min_ns > 0)
      s.speedup = static_cast<double>(it->second) / static_cast<double>(s.min_ns);
  }
  return out;
}

inline void write_records_csv(std::ostream& os, const std::vector<BenchRecord>& records) {
  os << "algorithm,n,lanes,workers,repetition,local_sort_ns,merge_ns,total_ns,keys_exchanged\n";
  for (const auto& r : records)
    os << to_string(r.algorithm) << ',' << r.n << ',' << r.lanes << ',' << r.workers << ',' << r.repetition << ','
       << r.local_sort_ns << ',' << r.merge_ns << ',' << r.total_ns << ',' << r.keys_exchanged << '\n';
}

inline void write_summary_csv(std::ostream& os, const std::vector<BenchSummary>& summary) {
  os << "algorithm,n,lanes,workers,min_total_ns,mean_total_ns,stddev_total_ns,keys_exchanged,speedup\n";
  os << std::fixed << std::setprecision(3);
  for (const auto& s : summary)
    os << to_string(s.algorithm) << ',' << s.n << ',' << s.lanes << ',' << s.workers << ',' << s.min_ns << ','
       << s.mean_ns << ',' << s.stddev_ns << ',' << s.keys_exchanged << ',' << s.speedup << '\n';
}

/// One block per input size; a row per (algorithm, lanes), a column per
/// worker count, cells are absolute speedups.
inline void write_speedup_table(std::ostream& os, const std::vector<BenchSummary>& summary) {
  std::map<std::size_t, std::vector<const BenchSummary*>> by_n;
  for (const auto& s : summary) by_n[s.n].push_back(&s);
  os << std::fixed << std::setprecision(2);
  for (const auto& [n, rows] : by_n) {
    std::vector<std::size_t> cols;
    for (const auto* s : rows)
      if (std::find(cols.begin(), cols.end(), s->workers) == cols.end()) cols.push_back(s->workers);
    std::sort(cols.begin(), cols.end());
    os << "# speedup, n=" << n << "\nalgorithm lanes";
    for (auto w : cols) os << " w=" << w;
    os << '\n';
    std::map<std::pair<int, std::size_t>, std::map<std::size_t, double>> cells;
    for (const auto* s : rows) cells[{static_cast<int>(s->algorithm), s->lanes}][s->workers] = s->speedup;
    for (const auto& [rk, cw] : cells) {
      os << to_string(static_cast<Algorithm>(rk.first)) << ' ' << rk.second;
      for (auto w : cols) {
        auto it = cw.find(w);
        if (it == cw.end()) os << " -";
        else os << ' ' << it->second;
      }
      os << '\n';
    }
  }
}

}  // namespace blocknet::bench
