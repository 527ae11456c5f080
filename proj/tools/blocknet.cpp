// SPDX-License-Identifier: Apache-2.0
//
// blocknet: dump networks, run the verification suites, sort key files and
// run the benchmark grid. Exit codes: 0 pass, 1 verification failure,
// 2 usage or I/O error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "blocknet/blocknet.hpp"

namespace fs = std::filesystem;
using namespace blocknet;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct usage_error : error {
  using error::error;
};

struct NetworkArgs {
  std::string kind = "bitonic";
  unsigned order = 3;
  std::string file;

  void add(CLI::App* cmd) {
    cmd->add_option("--network", kind, "bitonic | oddeven | four-wire")
        ->check(CLI::IsMember({"bitonic", "oddeven", "four-wire"}));
    cmd->add_option("--order", order, "log2 of the network width")->check(CLI::Range(0u, 20u));
  }

  void add_file(CLI::App* cmd) { cmd->add_option("--network-file", file, "network in text format"); }

  Network make() const {
    if (!file.empty()) {
      std::ifstream in(file);
      if (!in) throw io_error("cannot open " + file);
      auto n = read_network(in);
      if (auto v = validate_network(n)) throw usage_error(file + ": " + v->describe());
      return n;
    }
    if (kind == "four-wire") return four_wire_network();
    return kind == "oddeven" ? odd_even_merge_network(order) : bitonic_network(order);
  }

  std::string label() const {
    if (!file.empty()) return file;
    return kind == "four-wire" ? kind : kind + "(" + std::to_string(order) + ")";
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot create " + path);
  return out;
}

// -- dump-network ---------------------------------------------------------------

struct DumpArgs {
  NetworkArgs net;
  std::string out;
};

int cmd_dump(const DumpArgs& a) {
  const auto n = a.net.make();
  if (a.out.empty()) {
    write_network(std::cout, n);
  } else {
    auto os = open_out(a.out);
    write_network(os, n);
  }
  return kPass;
}

// -- verify -----------------------------------------------------------------------

struct VerifyArgs {
  NetworkArgs net;
  std::string comparator = "merge-split";
  std::size_t domain = 3;
  std::size_t min_block = 0;
  std::size_t max_block = 2;
  bool mixed_sizes = false;
  std::uint64_t budget = 1'000'000;
  std::uint64_t seed = 0;
  std::size_t relations = 0;
  std::size_t workers = bench::hardware_workers();
  std::string csv;
};

template <class CE>
CheckReport agglomeration_report(const Network& n, CE&& ce, const VerifyArgs& a, const std::string& subject,
                                 bool check_balance = false) {
  AgglomerationOptions o;
  o.space = FrameSpace{a.domain, a.min_block, a.max_block, !a.mixed_sizes};
  o.budget = a.budget;
  o.seed = a.seed;
  o.workers = a.workers;
  o.check_balance = check_balance;
  auto rep = verify_agglomeration_with(n, ce, o, subject);
  if (!rep.passed()) {
    if (auto w = find_counterexample(n, ce, o.space, a.budget, a.seed))
      std::cout << "smallest witness: " << format_frame(w->input) << " -> " << format_frame(w->output) << " ["
                << to_string(w->clause) << "]\n";
  }
  return rep;
}

int cmd_verify(const VerifyArgs& a) {
  if (a.min_block > a.max_block) throw usage_error("--min-block exceeds --max-block");
  if (a.workers == 0) throw usage_error("--workers must be positive");
  const auto n = a.net.make();
  std::vector<CheckReport> reports;

  if (n.width <= kMaxZeroOneWidth) reports.push_back(verify_zero_one(n, "zero-one " + a.net.label()));
  else std::cout << "zero-one: skipped, width " << n.width << " exceeds " << kMaxZeroOneWidth << '\n';

  const std::string subject = "agglomeration " + a.net.label() + " " + a.comparator +
                              (a.mixed_sizes ? " mixed sizes" : " equal sizes");
  if (a.comparator == "naive-swap") reports.push_back(agglomeration_report(n, NaiveSwap{}, a, subject));
  else if (a.comparator == "capacity")
    reports.push_back(agglomeration_report(n, CapacityMergeSplit{a.max_block}, a, subject));
  else reports.push_back(agglomeration_report(n, MergeSplit{}, a, subject, true));

  if (a.relations > 0) {
    for (int c = 1; c <= kDirectRelationClauses; ++c) reports.push_back(check_direct_relation(c, a.relations, a.seed, !a.mixed_sizes));
  }

  bool ok = true;
  for (const auto& r : reports) {
    std::cout << r.text();
    ok = ok && r.passed();
  }
  if (!a.csv.empty()) {
    auto os = open_out(a.csv);
    os << "subject,case_id,verdict,clause,witness\n";
    for (const auto& r : reports) {
      std::ostringstream rows;
      r.write_csv(rows, false);
      std::string line;
      std::istringstream in(rows.str());
      while (std::getline(in, line)) os << '"' << r.subject << "\"," << line << '\n';
    }
  }
  std::cout << (ok ? "verify: PASS\n" : "verify: FAIL\n");
  return ok ? kPass : kFail;
}

// -- sort -------------------------------------------------------------------------

struct SortArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  bool distributed = false;
  std::size_t lanes = 4;
  std::size_t workers = bench::hardware_workers();
  std::string network = "bitonic";
  std::string format;  // empty: by extension
  std::string keys = "int";
  std::string inner = "std";
  std::string metrics;
};

template <FileKey K>
int sort_files(const SortArgs& a) {
  auto fmt = [&](const std::string& path) {
    if (a.format.empty()) return format_for_path(path);
    return a.format == "bin" ? KeyFormat::Binary : KeyFormat::Text;
  };
  const auto inner = a.inner == "merge" ? merge_sort<K>() : std_sort<K>();
  const auto kind = a.network == "oddeven" ? NetworkKind::OddEven : NetworkKind::Bitonic;
  RunMetrics metrics;

  if (a.distributed) {
    const std::size_t p = a.inputs.size();
    if (p == 0 || !std::has_single_bit(p)) throw usage_error("--distributed needs a power-of-two number of inputs");
    if (a.outputs.size() != p) throw usage_error("--distributed needs one --output per --input");
    std::vector<LaneSource<K>> sources;
    for (const auto& in : a.inputs) sources.push_back([&, in] { return read_keys<K>(in, fmt(in)); });
    const LaneSink<K> sink = [&](std::size_t i, const Block<K>& lane) {
      write_keys<K>(a.outputs[i], std::span<const K>(lane), fmt(a.outputs[i]));
    };
    const auto r = distributed_sort<K>(make_network(kind, lane_order(p)), sources, a.workers, inner.sort, sink);
    std::cerr << "io_ns=" << r.metrics.io_ns << " local_sort_ns=" << r.metrics.local_sort_ns
              << " merge_ns=" << r.metrics.merge_ns << '\n';
    metrics = r.metrics.network;
  } else {
    if (a.inputs.size() != 1 || a.outputs.size() != 1)
      throw usage_error("sort takes one --input and one --output (or --distributed)");
    const auto xs = read_keys<K>(a.inputs[0], fmt(a.inputs[0]));
    HybridPlan<K> plan{a.lanes, inner, kind, a.workers};
    const auto r = hybrid_sort_detailed<K>(xs, plan);
    write_keys<K>(a.outputs[0], std::span<const K>(r.keys), fmt(a.outputs[0]));
    std::cerr << "local_sort_ns=" << r.local_sort_ns << " merge_ns=" << r.merge_ns << '\n';
    metrics = r.network;
  }
  if (!a.metrics.empty()) {
    auto os = open_out(a.metrics);
    metrics.write_csv(os);
  }
  return kPass;
}

int cmd_sort(const SortArgs& a) {
  if (a.workers == 0) throw usage_error("--workers must be positive");
  if (!a.distributed) lane_order(a.lanes);
  return a.keys == "float" ? sort_files<double>(a) : sort_files<std::int64_t>(a);
}

// -- bench ------------------------------------------------------------------------

struct BenchArgs {
  std::vector<std::string> algorithms;
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> lanes;
  std::vector<std::size_t> workers;
  std::size_t reps = 3;
  std::uint64_t seed = 0;
  bool distributed = false;
  std::string inner = "std";
  std::string csv;
  std::string summary;
  bool quiet = false;
};

int cmd_bench(const BenchArgs& a) {
  bench::BenchConfig cfg;
  if (!a.algorithms.empty()) {
    cfg.algorithms.clear();
    for (const auto& s : a.algorithms) {
      auto alg = bench::parse_algorithm(s);
      if (!alg) throw usage_error("unknown algorithm " + s);
      cfg.algorithms.push_back(*alg);
    }
  }
  if (!a.sizes.empty()) cfg.sizes = a.sizes;
  if (!a.lanes.empty()) cfg.lanes = a.lanes;
  if (!a.workers.empty()) cfg.workers = a.workers;
  cfg.repetitions = a.reps;
  cfg.seed = a.seed;
  cfg.distributed = a.distributed;
  cfg.merge_sort_inner = a.inner == "merge";
  try {
    cfg.validate();
  } catch (const error& e) {
    throw usage_error(e.what());
  }

  const auto records = bench::run_bench(cfg, a.quiet ? nullptr : &std::cerr);
  const auto summary = bench::summarize(records);
  if (!a.csv.empty()) {
    auto os = open_out(a.csv);
    bench::write_records_csv(os, records);
  }
  if (!a.summary.empty()) {
    auto os = open_out(a.summary);
    bench::write_summary_csv(os, summary);
  }
  bench::write_speedup_table(std::cout, summary);
  return kPass;
}

// -- gen --------------------------------------------------------------------------

struct GenArgs {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  bool sorted = false;
  std::string output;
  std::string format;
};

// Same keys as the benchmark inputs.
int cmd_gen(const GenArgs& a) {
  auto xs = bench::make_input(a.count, a.seed);
  if (a.sorted) std::sort(xs.begin(), xs.end());
  const auto fmt = a.format.empty() ? format_for_path(a.output)
                                    : (a.format == "bin" ? KeyFormat::Binary : KeyFormat::Text);
  write_keys<std::int64_t>(a.output, std::span<const std::int64_t>(xs), fmt);
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block sorting networks: verification, sorting and benchmarks"};
  app.require_subcommand(1);

  DumpArgs dump;
  auto* dump_cmd = app.add_subcommand("dump-network", "print a network in text format");
  dump.net.add(dump_cmd);
  dump_cmd->add_option("--out", dump.out, "write to a file instead of stdout");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "zero-one, agglomeration and relation checks");
  verify.net.add(verify_cmd);
  verify.net.add_file(verify_cmd);
  verify_cmd->add_option("--comparator", verify.comparator, "merge-split | naive-swap | capacity")
      ->check(CLI::IsMember({"merge-split", "naive-swap", "capacity"}));
  verify_cmd->add_option("--domain", verify.domain, "keys are drawn from [0, domain)")->check(CLI::Range(1, 16));
  verify_cmd->add_option("--min-block", verify.min_block, "smallest block size");
  verify_cmd->add_option("--max-block", verify.max_block, "largest block size")->check(CLI::Range(0, 8));
  verify_cmd->add_flag("--mixed-sizes", verify.mixed_sizes,
                       "let block sizes differ within a frame and within relation samples");
  verify_cmd->add_option("--budget", verify.budget, "exhaustive up to this many frames, else random");
  verify_cmd->add_option("--seed", verify.seed);
  verify_cmd->add_option("--relations", verify.relations, "also check the direct relations on N samples per clause");
  verify_cmd->add_option("--workers", verify.workers);
  verify_cmd->add_option("--csv", verify.csv, "write the reports as CSV");

  SortArgs sort;
  auto* sort_cmd = app.add_subcommand("sort", "sort key files");
  sort_cmd->add_option("--input", sort.inputs, "input file (repeat with --distributed)")->required();
  sort_cmd->add_option("--output", sort.outputs, "output file (repeat with --distributed)")->required();
  sort_cmd->add_flag("--distributed", sort.distributed, "one input and one output file per lane");
  sort_cmd->add_option("--lanes", sort.lanes, "lane count (power of two)");
  sort_cmd->add_option("--workers", sort.workers);
  sort_cmd->add_option("--network", sort.network)->check(CLI::IsMember({"bitonic", "oddeven"}));
  sort_cmd->add_option("--format", sort.format, "bin | txt (default: by extension)")
      ->check(CLI::IsMember({"bin", "txt"}));
  sort_cmd->add_option("--keys", sort.keys, "int | float")->check(CLI::IsMember({"int", "float"}));
  sort_cmd->add_option("--inner", sort.inner, "std | merge")->check(CLI::IsMember({"std", "merge"}));
  sort_cmd->add_option("--metrics", sort.metrics, "write per-stage network metrics as CSV");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "run the benchmark grid");
  bench_cmd->add_option("--algorithms", bench_args.algorithms,
                        "hybrid-bitonic hybrid-oddeven par-mergesort psrs sequential")
      ->delimiter(',');
  bench_cmd->add_option("--sizes", bench_args.sizes)->delimiter(',');
  bench_cmd->add_option("--lanes", bench_args.lanes)->delimiter(',');
  bench_cmd->add_option("--workers", bench_args.workers)->delimiter(',');
  bench_cmd->add_option("--reps", bench_args.reps);
  bench_cmd->add_option("--seed", bench_args.seed);
  bench_cmd->add_flag("--distributed", bench_args.distributed, "time sorting only, inputs pre-split into lanes");
  bench_cmd->add_option("--inner", bench_args.inner)->check(CLI::IsMember({"std", "merge"}));
  bench_cmd->add_option("--csv", bench_args.csv, "per-repetition records");
  bench_cmd->add_option("--summary", bench_args.summary, "min/mean/stddev and speedup per grid point");
  bench_cmd->add_flag("--quiet", bench_args.quiet);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "write random int64 keys");
  gen_cmd->add_option("--count", gen.count)->required();
  gen_cmd->add_option("--seed", gen.seed);
  gen_cmd->add_flag("--sorted", gen.sorted, "write them sorted");
  gen_cmd->add_option("--output", gen.output)->required();
  gen_cmd->add_option("--format", gen.format)->check(CLI::IsMember({"bin", "txt"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*dump_cmd) return cmd_dump(dump);
    if (*verify_cmd) return cmd_verify(verify);
    if (*sort_cmd) return cmd_sort(sort);
    if (*bench_cmd) return cmd_bench(bench_args);
    if (*gen_cmd) return cmd_gen(gen);
  } catch (const run_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFail;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
