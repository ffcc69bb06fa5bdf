#include "agrisk/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "agrisk/random.hpp"

namespace agrisk {

namespace {
__extension__ typedef unsigned __int128 uint128;
}  // namespace

std::uint64_t Xoshiro256::uniform_int(std::uint64_t lo, std::uint64_t hi) noexcept {
  const std::uint64_t range = hi - lo;
  if (range == ~std::uint64_t{0}) return (*this)();
  const std::uint64_t s = range + 1;
  uint128 m = static_cast<uint128>((*this)()) * s;
  auto low = static_cast<std::uint64_t>(m);
  if (low < s) {
    const std::uint64_t threshold = (0 - s) % s;
    while (low < threshold) {
      m = static_cast<uint128>((*this)()) * s;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return lo + static_cast<std::uint64_t>(m >> 64);
}

double Xoshiro256::normal() noexcept {
  const double u1 = uniform01_open_low();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

// Stream domains; changing these changes every generated file.
constexpr std::uint64_t kYetDomain = 1;
constexpr std::uint64_t kEltDomain = 2;
constexpr std::uint64_t kEltTermsDomain = 3;
constexpr std::uint64_t kLayerTermsDomain = 4;

void check_range(const TermRanges& r, const char* name) {
  const std::string n(name);
  if (!(r.retention_lo >= 0.0) || r.retention_hi < r.retention_lo) {
    throw InvalidArgument(n + ": retention range must satisfy 0 <= lo <= hi");
  }
  if (!(r.limit_lo > 0.0) || r.limit_hi < r.limit_lo) {
    throw InvalidArgument(n + ": limit range must satisfy 0 < lo <= hi");
  }
  if (!(r.unlimited_share >= 0.0 && r.unlimited_share <= 1.0)) {
    throw InvalidArgument(n + ": unlimited_share must be in [0, 1]");
  }
}

template <class Terms>
Terms draw_terms(Xoshiro256& rng, const TermRanges& r, double scale) {
  Terms t;
  t.retention = scale * rng.uniform(r.retention_lo, r.retention_hi);
  const bool unlimited = rng.uniform01() < r.unlimited_share;
  const double limit = scale * rng.uniform(r.limit_lo, r.limit_hi);
  t.limit = unlimited ? kUnlimited : limit;
  return t;
}

}  // namespace

void GenSpec::validate() const {
  if (num_trials < 1) throw InvalidArgument("num_trials must be >= 1");
  if (events_min < 1 || events_min > events_max) {
    throw InvalidArgument("events per trial must satisfy 1 <= min <= max");
  }
  if (events_max > 0xffffffffULL) throw InvalidArgument("events_max exceeds 2^32 - 1");
  if (catalog_size < 1) throw InvalidArgument("catalog_size must be >= 1");
  if (elt_entry_count > catalog_size) {
    throw InvalidArgument("elt_entry_count (" + std::to_string(elt_entry_count) +
                          ") exceeds catalog_size (" + std::to_string(catalog_size) + ")");
  }
  if (!(loss_scale > 0.0) || !std::isfinite(loss_scale)) {
    throw InvalidArgument("loss_scale must be positive and finite");
  }
  if (!(loss_sigma >= 0.0) || !std::isfinite(loss_sigma)) {
    throw InvalidArgument("loss_sigma must be >= 0 and finite");
  }
  check_range(elt_terms, "elt_terms");
  check_range(occurrence_terms, "occurrence_terms");
  check_range(aggregate_terms, "aggregate_terms");
}

YearEventTable generate_yet(const GenSpec& spec) {
  spec.validate();
  YearEventTable yet(spec.catalog_size);
  yet.reserve(spec.num_trials, spec.num_trials * ((spec.events_min + spec.events_max) / 2));

  std::vector<std::uint32_t> events;
  std::vector<float> stamps;
  for (std::size_t i = 0; i < spec.num_trials; ++i) {
    Xoshiro256 rng(derive_seed(spec.seed, kYetDomain, i));
    const auto count = static_cast<std::size_t>(rng.uniform_int(spec.events_min, spec.events_max));
    events.resize(count);
    stamps.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
      events[k] = static_cast<std::uint32_t>(rng.uniform_int(1, spec.catalog_size));
      stamps[k] = rng.uniform01f();
    }
    std::sort(stamps.begin(), stamps.end());
    yet.add_trial(i + 1, events, stamps);
  }
  return yet;
}

EventLossTable generate_elt(const GenSpec& spec, std::uint32_t elt_id) {
  spec.validate();
  Xoshiro256 rng(derive_seed(spec.seed, kEltDomain, elt_id));

  // Floyd's sampling without replacement over [1, catalog_size].
  const std::uint64_t n = spec.catalog_size;
  const std::uint64_t k = spec.elt_entry_count;
  std::vector<bool> chosen(n + 1, false);
  for (std::uint64_t j = n - k + 1; j <= n && k > 0; ++j) {
    const std::uint64_t t = rng.uniform_int(1, j);
    chosen[chosen[t] ? j : t] = true;
  }

  const double sigma = spec.loss_sigma;
  const double mu = std::log(spec.loss_scale) - 0.5 * sigma * sigma;
  std::vector<EventLoss> entries;
  entries.reserve(k);
  for (std::uint64_t e = 1; e <= n; ++e) {
    if (!chosen[e]) continue;
    double loss = std::exp(mu + sigma * rng.normal());
    if (!(loss > 0.0)) loss = std::numeric_limits<double>::min();
    entries.push_back({static_cast<std::uint32_t>(e), loss});
  }

  Xoshiro256 terms_rng(derive_seed(spec.seed, kEltTermsDomain, elt_id));
  auto terms = draw_terms<EltTerms>(terms_rng, spec.elt_terms, spec.loss_scale);
  return EventLossTable(elt_id, std::move(entries), terms);
}

GeneratedPortfolio generate_portfolio(const GenSpec& spec, std::size_t num_programs,
                                      std::size_t layers_per_program,
                                      std::size_t elts_per_layer) {
  spec.validate();
  if (num_programs < 1 || num_programs > kMaxProgramsPerPortfolio) {
    throw InvalidArgument("num_programs must be in [1, " +
                          std::to_string(kMaxProgramsPerPortfolio) + "]");
  }
  if (layers_per_program < 1) throw InvalidArgument("layers_per_program must be >= 1");
  if (elts_per_layer < 1 || elts_per_layer > kMaxEltsPerLayer) {
    throw InvalidArgument("elts_per_layer must be in [1, " + std::to_string(kMaxEltsPerLayer) +
                          "]");
  }

  GeneratedPortfolio out;
  out.portfolio.portfolio_id = 1;
  std::uint32_t next_elt = 1;
  for (std::size_t p = 0; p < num_programs; ++p) {
    Program program;
    program.program_id = static_cast<std::uint32_t>(p + 1);
    for (std::size_t l = 0; l < layers_per_program; ++l) {
      Layer layer;
      layer.layer_id = static_cast<std::uint32_t>(l + 1);
      Xoshiro256 rng(derive_seed(spec.seed, kLayerTermsDomain, (p << 32) | l));
      layer.occurrence = draw_terms<OccurrenceTerms>(rng, spec.occurrence_terms, spec.loss_scale);
      layer.aggregate = draw_terms<AggregateTerms>(rng, spec.aggregate_terms, spec.loss_scale);
      for (std::size_t j = 0; j < elts_per_layer; ++j) {
        layer.elt_refs.push_back(next_elt);
        out.elts.push_back(generate_elt(spec, next_elt));
        ++next_elt;
      }
      program.layers.push_back(std::move(layer));
    }
    out.portfolio.programs.push_back(std::move(program));
  }
  validate_portfolio(out.portfolio);
  return out;
}

}  // namespace agrisk
