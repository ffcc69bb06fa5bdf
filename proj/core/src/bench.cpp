#include "agrisk/bench.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include "agrisk/random.hpp"

namespace agrisk {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
constexpr std::uint64_t kProbeDomain = 0x70726f6265ULL;
constexpr double kBeatMargin = 0.05;

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t word) noexcept {
  for (int i = 0; i < 8; ++i) {
    h ^= (word >> (8 * i)) & 0xffu;
    h *= kFnvPrime;
  }
  return h;
}

double median_of(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t");
  const auto last = s.find_last_not_of(" \t");
  return first == std::string::npos ? std::string{} : s.substr(first, last - first + 1);
}

struct Timed {
  double median = 0.0;
  double min = 0.0;
  std::uint64_t checksum = 0;
  std::uint64_t events = 0;
  AnalysisResult last;
};

// Runs `config` options.repetitions times (plus a discarded warm-up) and
// requires every run to reproduce `expected` when given.
Timed time_runs(const Workload& w, const RunConfig& config, const BenchOptions& options,
                const std::string& label, const std::uint64_t* expected) {
  if (options.warmup) (void)run_analysis(w.portfolio, w.yet, w.elts, config);
  Timed out;
  std::vector<double> seconds;
  for (unsigned r = 0; r < options.repetitions; ++r) {
    AnalysisResult result = run_analysis(w.portfolio, w.yet, w.elts, config);
    const std::uint64_t sum = ylt_checksum(result);
    const std::uint64_t want = (expected != nullptr) ? *expected : (r == 0 ? sum : out.checksum);
    if (sum != want) {
      std::ostringstream msg;
      msg << label << ": YLT checksum " << std::hex << sum << " differs from baseline " << want;
      throw ChecksumMismatch(msg.str());
    }
    out.checksum = sum;
    out.events = result.timing.trial_events;
    seconds.push_back(result.timing.compute_seconds);
    out.last = std::move(result);
  }
  out.median = median_of(seconds);
  out.min = *std::min_element(seconds.begin(), seconds.end());
  return out;
}

BenchRow row_from(const std::string& label, const RunConfig& config, const Timed& t) {
  BenchRow row;
  row.config = label;
  row.workers = config.workers;
  row.threads_per_slot = config.threads_per_worker_slot;
  row.chunk_size = config.chunk_size;
  row.layout = config.layout;
  row.precision = config.precision;
  row.median_seconds = t.median;
  row.min_seconds = t.min;
  row.throughput = t.median > 0.0 ? static_cast<double>(t.events) / t.median : 0.0;
  row.checksum = t.checksum;
  return row;
}

// Fills speedup, efficiency and beats_baseline against rows.front().
void finish(BenchReport& report) {
  if (report.rows.empty()) return;
  const BenchRow& base = report.rows.front();
  for (auto& row : report.rows) {
    row.speedup = row.median_seconds > 0.0 ? base.median_seconds / row.median_seconds : 0.0;
    const double scale = static_cast<double>(row.workers) / static_cast<double>(base.workers);
    row.efficiency = row.speedup / scale;
    row.beats_baseline = row.median_seconds < (1.0 - kBeatMargin) * base.median_seconds;
  }
  report.rows.front().speedup = 1.0;
  report.rows.front().efficiency = 1.0;
  report.rows.front().beats_baseline = false;
}

BenchReport start(const char* experiment, const Workload& w, const BenchOptions& options) {
  options.validate();
  BenchReport report;
  report.experiment = experiment;
  report.workload = w.description;
  report.machine = detect_machine();
  report.repetitions = options.repetitions;
  return report;
}

template <class T>
void require_nonempty(std::span<const T> xs, const char* what) {
  if (xs.empty()) throw InvalidArgument(std::string(what) + ": parameter list is empty");
}

}  // namespace

MachineInfo detect_machine() {
  MachineInfo info;
  info.logical_cores = std::max(1u, std::thread::hardware_concurrency());
  std::ifstream cpuinfo("/proc/cpuinfo");
  std::set<std::pair<std::string, std::string>> cores;
  std::string physical_id = "0";
  std::string line;
  while (std::getline(cpuinfo, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = trim(line.substr(0, colon));
    const std::string value = trim(line.substr(colon + 1));
    if (key == "physical id") {
      physical_id = value;
    } else if (key == "core id") {
      cores.emplace(physical_id, value);
    } else if (key == "model name" && info.cpu_model.empty()) {
      info.cpu_model = value;
    } else if (key == "cpu MHz" && info.clock_mhz == 0.0) {
      std::istringstream(value) >> info.clock_mhz;
    }
  }
  info.physical_cores = cores.empty() ? info.logical_cores : static_cast<unsigned>(cores.size());
  info.physical_cores = std::min(info.physical_cores, info.logical_cores);
  return info;
}

Workload make_workload(const GenSpec& spec, std::size_t elts_per_layer) {
  Workload w;
  GeneratedPortfolio gp = generate_portfolio(spec, 1, 1, elts_per_layer);
  w.portfolio = std::move(gp.portfolio);
  w.elts = std::move(gp.elts);
  w.yet = generate_yet(spec);
  std::ostringstream d;
  d << spec.num_trials << " trials x " << spec.events_min << "-" << spec.events_max
    << " events x " << elts_per_layer << " ELTs x " << spec.elt_entry_count
    << " entries, catalog " << spec.catalog_size << ", seed " << spec.seed;
  w.description = d.str();
  return w;
}

std::uint64_t ylt_checksum(const AnalysisResult& result) {
  std::uint64_t h = kFnvOffset;
  auto absorb = [&](const YearLossTable& ylt) {
    h = fnv1a(h, ylt.size());
    for (double v : ylt.losses) h = fnv1a(h, std::bit_cast<std::uint64_t>(v));
  };
  for (const auto& layer : result.layers) absorb(layer);
  absorb(result.total);
  return h;
}

void BenchOptions::validate() const {
  if (repetitions < 3) throw InvalidArgument("repetitions must be >= 3");
  base.validate();
}

bool BenchReport::any_beats_baseline() const noexcept {
  return std::any_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.beats_baseline; });
}

BenchReport bench_scaling(const Workload& w, std::span<const unsigned> worker_counts,
                          const BenchOptions& options) {
  require_nonempty(worker_counts, "bench_scaling");
  BenchReport report = start("scaling", w, options);
  std::uint64_t baseline = 0;
  for (std::size_t i = 0; i < worker_counts.size(); ++i) {
    RunConfig config = options.base;
    config.workers = worker_counts[i];
    config.threads_per_worker_slot = 1;
    const std::string label = "workers=" + std::to_string(config.workers);
    const Timed t = time_runs(w, config, options, label, i == 0 ? nullptr : &baseline);
    if (i == 0) baseline = t.checksum;
    report.rows.push_back(row_from(label, config, t));
  }
  finish(report);
  return report;
}

BenchReport bench_oversubscription(const Workload& w, std::span<const unsigned> slots,
                                   const BenchOptions& options) {
  require_nonempty(slots, "bench_oversubscription");
  BenchReport report = start("oversubscription", w, options);
  std::uint64_t baseline = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    RunConfig config = options.base;
    config.threads_per_worker_slot = slots[i];
    const std::string label = "workers=" + std::to_string(config.workers) +
                              " threads/slot=" + std::to_string(slots[i]);
    const Timed t = time_runs(w, config, options, label, i == 0 ? nullptr : &baseline);
    if (i == 0) baseline = t.checksum;
    report.rows.push_back(row_from(label, config, t));
  }
  finish(report);
  return report;
}

BenchReport bench_layouts(const Workload& w, std::span<const LayoutKind> kinds,
                          const BenchOptions& options) {
  require_nonempty(kinds, "bench_layouts");
  BenchReport report = start("layouts", w, options);
  std::vector<const EventLossTable*> covered;
  for (const auto& elt : w.elts) covered.push_back(&elt);
  std::uint64_t baseline = 0;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    RunConfig config = options.base;
    config.layout = kinds[i];
    const std::string label = "layout=" + std::string(to_string(kinds[i]));
    const Timed t = time_runs(w, config, options, label, i == 0 ? nullptr : &baseline);
    if (i == 0) baseline = t.checksum;
    BenchRow row = row_from(label, config, t);
    row.footprint_bytes = memory_footprint(build_layout(
        std::span<const EventLossTable* const>(covered), w.yet.catalog_size(), kinds[i],
        config.precision));
    report.rows.push_back(std::move(row));
  }
  finish(report);
  return report;
}

BenchReport bench_chunk_sweep(const Workload& w, std::span<const std::size_t> chunk_sizes,
                              const BenchOptions& options) {
  require_nonempty(chunk_sizes, "bench_chunk_sweep");
  BenchReport report = start("chunks", w, options);
  std::uint64_t baseline = 0;
  for (std::size_t i = 0; i < chunk_sizes.size(); ++i) {
    RunConfig config = options.base;
    config.chunk_size = chunk_sizes[i];
    const std::string label = "chunk=" + std::to_string(chunk_sizes[i]);
    const Timed t = time_runs(w, config, options, label, i == 0 ? nullptr : &baseline);
    if (i == 0) baseline = t.checksum;
    report.rows.push_back(row_from(label, config, t));
  }
  finish(report);
  return report;
}

BenchReport bench_precision(const Workload& w, const BenchOptions& options) {
  BenchReport report = start("precision", w, options);
  RunConfig config = options.base;
  config.precision = Precision::wide;
  const Timed wide = time_runs(w, config, options, "precision=wide", nullptr);
  report.rows.push_back(row_from("precision=wide", config, wide));
  config.precision = Precision::narrow;
  const Timed narrow = time_runs(w, config, options, "precision=narrow", nullptr);
  BenchRow row = row_from("precision=narrow", config, narrow);
  row.max_rel_diff = max_relative_difference(wide.last.total, narrow.last.total);
  for (std::size_t l = 0; l < wide.last.layers.size(); ++l) {
    row.max_rel_diff = std::max(
        row.max_rel_diff, max_relative_difference(wide.last.layers[l], narrow.last.layers[l]));
  }
  report.rows.push_back(std::move(row));
  finish(report);
  return report;
}

BenchReport bench_lookup_latency(std::uint32_t catalog_size,
                                 std::span<const std::size_t> entry_counts, LayoutKind layout,
                                 std::size_t probes, const BenchOptions& options,
                                 std::uint64_t seed) {
  require_nonempty(entry_counts, "bench_lookup_latency");
  if (probes < 1) throw InvalidArgument("bench_lookup_latency: probes must be >= 1");
  options.validate();
  BenchReport report;
  report.experiment = "latency";
  report.machine = detect_machine();
  report.repetitions = options.repetitions;
  std::ostringstream d;
  d << "1 ELT, catalog " << catalog_size << ", " << probes << " uniform probes, layout "
    << to_string(layout) << ", seed " << seed;
  report.workload = d.str();

  std::vector<std::uint32_t> ids(probes);
  Xoshiro256 rng(derive_seed(seed, kProbeDomain, 0));
  for (auto& id : ids) id = static_cast<std::uint32_t>(rng.uniform_int(1, catalog_size));

  for (const std::size_t entries : entry_counts) {
    GenSpec spec;
    spec.seed = seed;
    spec.catalog_size = catalog_size;
    spec.elt_entry_count = entries;
    spec.num_trials = 1;
    spec.events_min = 1;
    spec.events_max = 1;
    const EventLossTable elt = generate_elt(spec, 1);
    const LossLookup lookup = build_layout(std::span<const EventLossTable>(&elt, 1), catalog_size,
                                           layout, options.base.precision);

    auto sweep = [&] {
      return std::visit(
          [&](const auto& typed) {
            return std::visit(
                [&](const auto& table) {
                  // Each probe id depends on the previous load, so loads
                  // cannot overlap and the loop measures latency.
                  double sum = 0.0;
                  std::uint32_t carry = 0;
                  for (const auto id : ids) {
                    std::uint32_t probe = id + carry;
                    if (probe > catalog_size) probe -= catalog_size;
                    const auto v = table.loss(probe, 0);
                    carry = static_cast<std::uint32_t>(std::bit_cast<std::uint64_t>(
                                static_cast<double>(v)) & 1u);
                    sum += static_cast<double>(v);
                  }
                  return sum;
                },
                typed);
          },
          lookup.variant());
    };

    if (options.warmup) (void)sweep();
    std::vector<double> seconds;
    std::uint64_t checksum = 0;
    for (unsigned r = 0; r < options.repetitions; ++r) {
      const auto t0 = Clock::now();
      const double sum = sweep();
      seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
      const std::uint64_t bits = std::bit_cast<std::uint64_t>(sum);
      if (r > 0 && bits != checksum) {
        throw ChecksumMismatch("latency: probe sum changed between repetitions");
      }
      checksum = bits;
    }
    BenchRow row;
    row.config = "entries=" + std::to_string(entries);
    row.layout = layout;
    row.precision = options.base.precision;
    row.median_seconds = median_of(seconds);
    row.min_seconds = *std::min_element(seconds.begin(), seconds.end());
    row.throughput = row.median_seconds > 0.0 ? static_cast<double>(probes) / row.median_seconds
                                              : 0.0;
    row.ns_per_lookup = row.median_seconds * 1e9 / static_cast<double>(probes);
    row.checksum = checksum;
    row.footprint_bytes = memory_footprint(lookup);
    report.rows.push_back(std::move(row));
  }
  finish(report);
  return report;
}

namespace {

const char* const kColumns[] = {"config",     "workers",        "threads_per_slot", "chunk_size",
                                "layout",     "precision",      "median_s",         "min_s",
                                "speedup",    "efficiency",     "throughput",       "checksum",
                                "footprint_bytes", "ns_per_lookup", "max_rel_diff", "beats_baseline"};

std::vector<std::string> cells(const BenchRow& r) {
  auto num = [](double v, int digits) {
    std::ostringstream s;
    s << std::setprecision(digits) << v;
    return s.str();
  };
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0') << r.checksum;
  return {r.config,
          std::to_string(r.workers),
          std::to_string(r.threads_per_slot),
          std::to_string(r.chunk_size),
          std::string(to_string(r.layout)),
          std::string(to_string(r.precision)),
          num(r.median_seconds, 6),
          num(r.min_seconds, 6),
          num(r.speedup, 4),
          num(r.efficiency, 4),
          num(r.throughput, 6),
          hex.str(),
          std::to_string(r.footprint_bytes),
          num(r.ns_per_lookup, 4),
          num(r.max_rel_diff, 4),
          r.beats_baseline ? "yes" : "no"};
}

}  // namespace

void write_report_csv(const BenchReport& report, std::ostream& out) {
  out << "# experiment=" << report.experiment << "\n";
  out << "# workload=" << report.workload << "\n";
  out << "# machine=" << report.machine.cpu_model << "; logical_cores="
      << report.machine.logical_cores << "; physical_cores=" << report.machine.physical_cores
      << "; clock_mhz=" << report.machine.clock_mhz << "\n";
  out << "# repetitions=" << report.repetitions << "\n";
  for (std::size_t c = 0; c < std::size(kColumns); ++c) out << (c ? "," : "") << kColumns[c];
  out << "\n";
  for (const auto& row : report.rows) {
    const auto cs = cells(row);
    for (std::size_t c = 0; c < cs.size(); ++c) out << (c ? "," : "") << cs[c];
    out << "\n";
  }
}

void write_report_table(const BenchReport& report, std::ostream& out) {
  out << report.experiment << ": " << report.workload << "\n";
  out << report.machine.cpu_model << ", " << report.machine.physical_cores << " physical / "
      << report.machine.logical_cores << " logical cores, " << report.repetitions
      << " repetitions (median)\n";
  std::vector<std::vector<std::string>> grid;
  grid.emplace_back(std::begin(kColumns), std::end(kColumns));
  for (const auto& row : report.rows) grid.push_back(cells(row));
  std::vector<std::size_t> width(grid.front().size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  }
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      out << (c ? "  " : "") << std::left << std::setw(static_cast<int>(width[c])) << line[c];
    }
    out << "\n";
  }
}

}  // namespace agrisk
