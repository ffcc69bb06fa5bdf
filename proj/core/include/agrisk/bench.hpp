#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "agrisk/datagen.hpp"
#include "agrisk/engine.hpp"
#include "agrisk/model.hpp"

namespace agrisk {

struct MachineInfo {
  unsigned logical_cores = 0;
  unsigned physical_cores = 0;
  std::string cpu_model;
  double clock_mhz = 0.0;  // as reported by the OS, 0 if unknown
};

/// Reads /proc/cpuinfo when present; falls back to hardware_concurrency.
[[nodiscard]] MachineInfo detect_machine();

/// A portfolio, YET and ELT set to benchmark against.
struct Workload {
  std::string description;
  Portfolio portfolio;
  YearEventTable yet;
  std::vector<EventLossTable> elts;
};

/// One program with one layer covering `elts_per_layer` ELTs.
[[nodiscard]] Workload make_workload(const GenSpec& spec, std::size_t elts_per_layer);

/// FNV-1a over the bit patterns of every layer YLT and the total.
[[nodiscard]] std::uint64_t ylt_checksum(const AnalysisResult& result);

/// A run disagreed with the baseline; no timing is reported for it.
class ChecksumMismatch : public Error {
 public:
  using Error::Error;
};

struct BenchOptions {
  unsigned repetitions = 3;  // timed runs per row, at least 3
  bool warmup = true;        // one discarded run before timing
  RunConfig base;            // fields not varied by the experiment

  void validate() const;
};

struct BenchRow {
  std::string config;
  unsigned workers = 1;
  unsigned threads_per_slot = 1;
  std::size_t chunk_size = kDefaultChunkSize;
  LayoutKind layout = LayoutKind::direct;
  Precision precision = Precision::wide;
  double median_seconds = 0.0;
  double min_seconds = 0.0;
  double speedup = 1.0;     // baseline median / this median
  double efficiency = 1.0;  // speedup / (workers / baseline workers)
  double throughput = 0.0;  // events per second at the median
  std::uint64_t checksum = 0;
  std::size_t footprint_bytes = 0;  // lookup memory, layouts experiment only
  double ns_per_lookup = 0.0;       // lookup latency experiment only
  double max_rel_diff = 0.0;        // precision experiment only
  bool beats_baseline = false;      // median more than 5% below baseline
};

struct BenchReport {
  std::string experiment;
  std::string workload;
  MachineInfo machine;
  unsigned repetitions = 0;
  std::vector<BenchRow> rows;  // rows.front() is the baseline

  [[nodiscard]] bool any_beats_baseline() const noexcept;
};

// Every experiment throws ChecksumMismatch if a run's checksum differs from
// the baseline row's, and InvalidArgument on an empty parameter list.

[[nodiscard]] BenchReport bench_scaling(const Workload& w, std::span<const unsigned> worker_counts,
                                        const BenchOptions& options = {});

/// workers fixed at options.base.workers; `slots` varies threads per slot.
[[nodiscard]] BenchReport bench_oversubscription(const Workload& w,
                                                 std::span<const unsigned> slots,
                                                 const BenchOptions& options = {});

[[nodiscard]] BenchReport bench_layouts(const Workload& w, std::span<const LayoutKind> kinds,
                                        const BenchOptions& options = {});

[[nodiscard]] BenchReport bench_chunk_sweep(const Workload& w,
                                            std::span<const std::size_t> chunk_sizes,
                                            const BenchOptions& options = {});

/// Wide then narrow. Each precision is checked against its own first run;
/// max_rel_diff of the narrow row is measured against the wide YLTs.
[[nodiscard]] BenchReport bench_precision(const Workload& w, const BenchOptions& options = {});

/// Random-probe latency of one ELT in `layout` for each entry count at a
/// fixed catalog size. The checksum is the probe sum's bit pattern.
[[nodiscard]] BenchReport bench_lookup_latency(std::uint32_t catalog_size,
                                               std::span<const std::size_t> entry_counts,
                                               LayoutKind layout, std::size_t probes,
                                               const BenchOptions& options = {},
                                               std::uint64_t seed = 7);

/// Names accepted by the CLI's --experiment flag.
inline constexpr const char* kExperimentNames[] = {"scaling", "oversubscription", "layouts",
                                                   "chunks", "precision", "latency"};

void write_report_csv(const BenchReport& report, std::ostream& out);
void write_report_table(const BenchReport& report, std::ostream& out);

}  // namespace agrisk
