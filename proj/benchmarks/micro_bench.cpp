// Micro benchmarks for the per-event inner loop: lookup layouts across ELT
// densities, wide vs narrow arithmetic, and chunk sizes. Whole-run
// experiments with checksum gating live in `agrisk bench`.

#include <benchmark/benchmark.h>

#include <vector>

#include "agrisk/datagen.hpp"
#include "agrisk/engine.hpp"
#include "agrisk/lookup.hpp"
#include "agrisk/random.hpp"

namespace {

using namespace agrisk;

constexpr std::uint32_t kCatalog = 1'000'000;

GenSpec spec_for(std::size_t entries) {
  GenSpec spec;
  spec.catalog_size = kCatalog;
  spec.elt_entry_count = entries;
  spec.num_trials = 64;
  spec.events_min = 800;
  spec.events_max = 1500;
  return spec;
}

std::vector<std::uint32_t> random_ids(std::size_t n) {
  Xoshiro256 rng(11);
  std::vector<std::uint32_t> ids(n);
  for (auto& id : ids) id = static_cast<std::uint32_t>(rng.uniform_int(1, kCatalog));
  return ids;
}

// Single-ELT lookup: args are (layout index, entries).
void BM_Lookup(benchmark::State& state) {
  const auto kind = kAllLayouts[state.range(0)];
  const auto entries = static_cast<std::size_t>(state.range(1));
  const EventLossTable elt = generate_elt(spec_for(entries), 1);
  const LossLookup lookup =
      build_layout(std::span<const EventLossTable>(&elt, 1), kCatalog, kind, Precision::wide);
  const auto ids = random_ids(1 << 16);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lookup_loss(lookup, EventId{ids[i]}, 0));
    i = (i + 1) & (ids.size() - 1);
  }
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_Lookup)->ArgsProduct({{0, 1, 2, 3}, {1'000, 10'000, 100'000}});

struct LayerFixture {
  GeneratedPortfolio gp;
  YearEventTable yet;
  LossLookup lookup;

  LayerFixture(Precision precision, LayoutKind kind)
      : gp(generate_portfolio(spec_for(10'000), 1, 1, 16)),
        yet(generate_yet(spec_for(10'000))),
        lookup(build_layout(gp.elts, kCatalog, kind, precision)) {}
  const Layer& layer() const { return gp.portfolio.programs[0].layers[0]; }
};

// One trial through a 16-ELT layer; arg 0 = precision (0 wide, 1 narrow).
void BM_TrialPrecision(benchmark::State& state) {
  const auto precision = state.range(0) == 0 ? Precision::wide : Precision::narrow;
  const LayerFixture f(precision, LayoutKind::direct);
  std::size_t t = 0;
  std::int64_t events = 0;
  for (auto _ : state) {
    const auto trial = f.yet.trial(t);
    benchmark::DoNotOptimize(analyze_trial(trial, f.layer(), f.lookup));
    events += static_cast<std::int64_t>(trial.size());
    t = (t + 1) % f.yet.num_trials();
  }
  state.SetItemsProcessed(events);
  state.SetLabel(std::string(to_string(precision)));
}
BENCHMARK(BM_TrialPrecision)->Arg(0)->Arg(1);

// One trial through a 16-ELT layer at a given chunk size.
void BM_TrialChunk(benchmark::State& state) {
  const LayerFixture f(Precision::wide, LayoutKind::direct);
  const auto chunk = static_cast<std::size_t>(state.range(0));
  std::size_t t = 0;
  std::int64_t events = 0;
  for (auto _ : state) {
    const auto trial = f.yet.trial(t);
    benchmark::DoNotOptimize(analyze_trial(trial, f.layer(), f.lookup, chunk));
    events += static_cast<std::int64_t>(trial.size());
    t = (t + 1) % f.yet.num_trials();
  }
  state.SetItemsProcessed(events);
}
BENCHMARK(BM_TrialChunk)->Arg(1)->Arg(64)->Arg(256)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
