#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "agrisk/model.hpp"

namespace agrisk {

/// Sampling ranges for one level of financial terms, in multiples of
/// GenSpec::loss_scale. `unlimited_share` is the probability that the
/// limit is drawn as +infinity instead of from [limit_lo, limit_hi].
struct TermRanges {
  double retention_lo = 0.0;
  double retention_hi = 0.0;
  double limit_lo = 1.0;
  double limit_hi = 1.0;
  double unlimited_share = 0.0;
};

/// Parameters of a synthetic workload. Defaults follow the experimental
/// shape: 800-1500 events per trial over a 1e6-event catalog, ELTs of
/// 10,000 entries.
struct GenSpec {
  std::uint64_t seed = 7;
  std::size_t num_trials = 100'000;
  std::size_t events_min = 800;
  std::size_t events_max = 1500;
  std::uint32_t catalog_size = 1'000'000;
  std::size_t elt_entry_count = 10'000;
  double loss_scale = 1.0e5;  // mean of the per-entry loss distribution
  double loss_sigma = 1.0;    // log-space standard deviation
  TermRanges elt_terms{0.0, 0.1, 5.0, 20.0, 0.25};
  TermRanges occurrence_terms{0.0, 0.5, 3.0, 20.0, 0.1};
  TermRanges aggregate_terms{0.0, 5.0, 100.0, 400.0, 0.1};

  /// Throws InvalidArgument describing the first broken invariant.
  void validate() const;
};

[[nodiscard]] YearEventTable generate_yet(const GenSpec& spec);

/// ELT with exactly spec.elt_entry_count distinct events, log-normal
/// losses, and FT1 terms drawn from spec.elt_terms.
[[nodiscard]] EventLossTable generate_elt(const GenSpec& spec, std::uint32_t elt_id);

struct GeneratedPortfolio {
  Portfolio portfolio;
  std::vector<EventLossTable> elts;
};

/// Builds a portfolio tree with distinct ELTs per layer, numbered 1..N
/// in program/layer order.
[[nodiscard]] GeneratedPortfolio generate_portfolio(const GenSpec& spec, std::size_t num_programs,
                                                    std::size_t layers_per_program,
                                                    std::size_t elts_per_layer);

}  // namespace agrisk
