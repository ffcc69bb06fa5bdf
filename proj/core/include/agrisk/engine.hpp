#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "agrisk/lookup.hpp"
#include "agrisk/model.hpp"

namespace agrisk {

inline constexpr std::size_t kDefaultChunkSize = 256;

struct RunConfig {
  /// Contiguous trial blocks processed concurrently; 1 runs on the caller's thread.
  unsigned workers = 1;
  /// Threads per worker slot. Values above 1 oversubscribe the machine on
  /// purpose, for the one-vs-many-threads-per-core experiment.
  unsigned threads_per_worker_slot = 1;
  /// Events per processing block. Never changes results.
  std::size_t chunk_size = kDefaultChunkSize;
  Precision precision = Precision::wide;
  LayoutKind layout = LayoutKind::direct;
  /// Verify per-event and per-trial bounds while computing; throws RunError.
  bool checked = false;

  [[nodiscard]] unsigned total_threads() const noexcept {
    return workers * threads_per_worker_slot;
  }
  void validate() const;
};

struct RunTiming {
  double load_seconds = 0.0;     // lookup construction
  double compute_seconds = 0.0;  // trial loop
  std::uint64_t trial_events = 0;  // events processed, summed over layers
  [[nodiscard]] double events_per_second() const noexcept {
    return compute_seconds > 0.0 ? static_cast<double>(trial_events) / compute_seconds : 0.0;
  }
};

struct AnalysisResult {
  std::vector<YearLossTable> layers;  // program order, then layer order
  YearLossTable total;                // per-trial sum over layers
  RunTiming timing;
};

/// A worker failed; names the trial block it was processing.
class RunError : public Error {
 public:
  RunError(std::uint64_t first_trial, std::uint64_t last_trial, const std::string& what);
  [[nodiscard]] std::uint64_t first_trial() const noexcept { return first_; }
  [[nodiscard]] std::uint64_t last_trial() const noexcept { return last_; }

 private:
  std::uint64_t first_;
  std::uint64_t last_;
};

/// Loss of one trial under one layer: per event, sum FT1-net losses over the
/// layer's ELTs, apply occurrence terms, accumulate; apply aggregate terms
/// once to the trial total. The lookup must have been built from
/// layer.elt_refs in order; its precision selects the arithmetic.
[[nodiscard]] double analyze_trial(const TrialView& trial, const Layer& layer,
                                   const LossLookup& lookup,
                                   std::size_t chunk_size = kDefaultChunkSize);

/// Full analysis. Results are bitwise independent of workers,
/// threads_per_worker_slot and chunk_size at a fixed precision.
[[nodiscard]] AnalysisResult run_analysis(const Portfolio& portfolio, const YearEventTable& yet,
                                          std::span<const EventLossTable> elts,
                                          const RunConfig& config = {});

/// |a - b| / max(|a|, |b|), falling back to |a - b| when both are below 1.
[[nodiscard]] double relative_difference(double a, double b) noexcept;
/// Elementwise max of relative_difference; tables must have equal length.
[[nodiscard]] double max_relative_difference(const YearLossTable& a, const YearLossTable& b);

struct PrecisionComparison {
  AnalysisResult wide;
  AnalysisResult narrow;
  double max_relative_diff = 0.0;  // over every layer YLT and the total
};

/// Runs `config` once per precision, same traversal order.
[[nodiscard]] PrecisionComparison run_precision_comparison(const Portfolio& portfolio,
                                                           const YearEventTable& yet,
                                                           std::span<const EventLossTable> elts,
                                                           RunConfig config = {});

}  // namespace agrisk
