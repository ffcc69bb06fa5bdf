#include "agrisk/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <string>
#include <thread>
#include <unordered_map>

namespace agrisk {

RunError::RunError(std::uint64_t first_trial, std::uint64_t last_trial, const std::string& what)
    : Error("trial block [" + std::to_string(first_trial) + ", " + std::to_string(last_trial) +
            "]: " + what),
      first_(first_trial),
      last_(last_trial) {}

void RunConfig::validate() const {
  if (workers < 1) throw InvalidArgument("workers must be >= 1");
  if (threads_per_worker_slot < 1) throw InvalidArgument("threads_per_worker_slot must be >= 1");
  if (chunk_size < 1) throw InvalidArgument("chunk_size must be >= 1");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class BoundViolation : public Error {
 public:
  using Error::Error;
};

template <std::floating_point Real>
struct LayerKernel {
  ClampTerms<Real> occurrence;
  ClampTerms<Real> aggregate;
  std::size_t chunk_size = kDefaultChunkSize;
  bool checked = false;
};

// Per-event ELT sums are gathered for a block of events, then occurrence
// terms are applied and accumulated in event order. The order of every
// floating-point operation is event order x ELT order regardless of the
// block size.
template <std::floating_point Real, class Table>
Real trial_loss(std::span<const std::uint32_t> events, const Table& table,
                const LayerKernel<Real>& k, std::vector<Real>& scratch) {
  const auto terms = table.terms();
  const std::size_t num_elts = terms.size();
  scratch.resize(k.chunk_size);
  Real trial_sum{0};
  for (std::size_t begin = 0; begin < events.size(); begin += k.chunk_size) {
    const std::size_t n = std::min(k.chunk_size, events.size() - begin);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t e = events[begin + i];
      Real event_loss{0};
      for (std::size_t j = 0; j < num_elts; ++j) {
        event_loss += terms[j].apply(table.loss(e, j));
      }
      scratch[i] = event_loss;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const Real net = k.occurrence.apply(scratch[i]);
      if (k.checked && !(net >= Real{0} && net <= k.occurrence.limit)) {
        throw BoundViolation("occurrence-net loss outside [0, occurrence limit]");
      }
      trial_sum += net;
    }
  }
  const Real result = k.aggregate.apply(trial_sum);
  if (k.checked && !(result >= Real{0} && result <= k.aggregate.limit)) {
    throw BoundViolation("trial loss outside [0, aggregate limit]");
  }
  return result;
}

template <class F>
decltype(auto) visit_lookup(const LossLookup& lookup, F&& f) {
  return std::visit([&](const auto& typed) -> decltype(auto) { return std::visit(f, typed); },
                    lookup.variant());
}

struct Block {
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<Block> partition(std::size_t n, std::size_t parts) {
  parts = std::max<std::size_t>(1, std::min(parts, n));
  std::vector<Block> blocks;
  blocks.reserve(parts);
  const std::size_t base = n / parts;
  const std::size_t extra = n % parts;
  std::size_t at = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t len = base + (p < extra ? 1 : 0);
    blocks.push_back({at, at + len});
    at += len;
  }
  return blocks;
}

// Runs one layer over all trials. Each thread owns a contiguous block and
// writes only its own output slots.
void run_layer(const YearEventTable& yet, const Layer& layer, const LossLookup& lookup,
               const RunConfig& config, std::vector<double>& out) {
  out.assign(yet.num_trials(), 0.0);
  const auto blocks = partition(yet.num_trials(), config.total_threads());

  auto work = [&](const Block& block) {
    visit_lookup(lookup, [&](const auto& table) {
      using Real = std::remove_cvref_t<decltype(table.loss(0u, 0))>;
      LayerKernel<Real> k{ClampTerms<Real>(layer.occurrence), ClampTerms<Real>(layer.aggregate),
                          config.chunk_size, config.checked};
      std::vector<Real> scratch;
      for (std::size_t i = block.begin; i < block.end; ++i) {
        out[i] = static_cast<double>(trial_loss(yet.trial(i).events, table, k, scratch));
      }
    });
  };

  if (blocks.size() == 1) {
    try {
      work(blocks.front());
    } catch (const std::exception& e) {
      throw RunError(yet.trial(blocks.front().begin).trial_id,
                     yet.trial(blocks.front().end - 1).trial_id, e.what());
    }
    return;
  }

  std::vector<std::exception_ptr> errors(blocks.size());
  {
    std::vector<std::jthread> threads;
    threads.reserve(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      threads.emplace_back([&, b] {
        try {
          work(blocks[b]);
        } catch (...) {
          errors[b] = std::current_exception();
        }
      });
    }
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (!errors[b]) continue;
    const auto first = yet.trial(blocks[b].begin).trial_id;
    const auto last = yet.trial(blocks[b].end - 1).trial_id;
    try {
      std::rethrow_exception(errors[b]);
    } catch (const std::exception& e) {
      throw RunError(first, last, e.what());
    } catch (...) {
      throw RunError(first, last, "unknown worker failure");
    }
  }
}

}  // namespace

double analyze_trial(const TrialView& trial, const Layer& layer, const LossLookup& lookup,
                     std::size_t chunk_size) {
  if (chunk_size < 1) throw InvalidArgument("chunk_size must be >= 1");
  if (lookup.num_elts() != layer.elt_refs.size()) {
    throw InvalidArgument("analyze_trial: lookup covers " + std::to_string(lookup.num_elts()) +
                          " ELTs, layer references " + std::to_string(layer.elt_refs.size()));
  }
  return visit_lookup(lookup, [&](const auto& table) -> double {
    using Real = std::remove_cvref_t<decltype(table.loss(0u, 0))>;
    LayerKernel<Real> k{ClampTerms<Real>(layer.occurrence), ClampTerms<Real>(layer.aggregate),
                        chunk_size, false};
    std::vector<Real> scratch;
    return static_cast<double>(trial_loss(trial.events, table, k, scratch));
  });
}

AnalysisResult run_analysis(const Portfolio& portfolio, const YearEventTable& yet,
                            std::span<const EventLossTable> elts, const RunConfig& config) {
  config.validate();
  validate_portfolio(portfolio);
  if (yet.empty()) throw InvalidArgument("run_analysis: YET has no trials");
  if (auto violations = validate_yet(yet); !violations.empty()) {
    throw ValidationError(std::move(violations));
  }

  std::unordered_map<std::uint32_t, const EventLossTable*> by_id;
  for (const auto& e : elts) by_id.emplace(e.id(), &e);

  AnalysisResult result;
  result.total.scope = YltScope{portfolio.portfolio_id, 0, 0, true};
  std::vector<double> total(yet.num_trials(), 0.0);
  std::vector<double> losses;

  for (const auto& program : portfolio.programs) {
    for (const auto& layer : program.layers) {
      std::vector<const EventLossTable*> covered;
      covered.reserve(layer.elt_refs.size());
      for (auto ref : layer.elt_refs) {
        auto it = by_id.find(ref);
        if (it == by_id.end()) {
          throw InvalidArgument("program " + std::to_string(program.program_id) + " layer " +
                                std::to_string(layer.layer_id) + ": unresolved ELT reference " +
                                std::to_string(ref));
        }
        covered.push_back(it->second);
      }

      const auto load_start = Clock::now();
      const LossLookup lookup = build_layout(std::span<const EventLossTable* const>(covered),
                                             yet.catalog_size(), config.layout, config.precision);
      result.timing.load_seconds += seconds_since(load_start);

      const auto compute_start = Clock::now();
      run_layer(yet, layer, lookup, config, losses);
      result.timing.compute_seconds += seconds_since(compute_start);
      result.timing.trial_events += yet.events_total();

      for (std::size_t i = 0; i < losses.size(); ++i) total[i] += losses[i];
      YearLossTable ylt = make_ylt(std::move(losses),
                                   YltScope{portfolio.portfolio_id, program.program_id,
                                            layer.layer_id, false});
      for (std::size_t i = 0; i < yet.num_trials(); ++i) ylt.trial_ids[i] = yet.trial(i).trial_id;
      result.layers.push_back(std::move(ylt));
      losses = {};
    }
  }

  result.total.losses = std::move(total);
  result.total.trial_ids = result.layers.front().trial_ids;
  return result;
}

double relative_difference(double a, double b) noexcept {
  const double diff = std::abs(a - b);
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale < 1.0 ? diff : diff / scale;
}

double max_relative_difference(const YearLossTable& a, const YearLossTable& b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("max_relative_difference: tables differ in length");
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, relative_difference(a.losses[i], b.losses[i]));
  }
  return worst;
}

PrecisionComparison run_precision_comparison(const Portfolio& portfolio, const YearEventTable& yet,
                                             std::span<const EventLossTable> elts,
                                             RunConfig config) {
  PrecisionComparison out;
  config.precision = Precision::wide;
  out.wide = run_analysis(portfolio, yet, elts, config);
  config.precision = Precision::narrow;
  out.narrow = run_analysis(portfolio, yet, elts, config);
  out.max_relative_diff = max_relative_difference(out.wide.total, out.narrow.total);
  for (std::size_t l = 0; l < out.wide.layers.size(); ++l) {
    out.max_relative_diff =
        std::max(out.max_relative_diff, max_relative_difference(out.wide.layers[l],
                                                                out.narrow.layers[l]));
  }
  return out;
}

}  // namespace agrisk
