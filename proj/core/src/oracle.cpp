#include "agrisk/oracle.hpp"

#include <algorithm>
#include <string>

namespace agrisk {

namespace {

template <class Real>
Real clamp_excess(Real loss, double retention, double limit) {
  const Real r = static_cast<Real>(retention);
  const Real l = static_cast<Real>(limit);
  Real net = loss - r;
  if (net < Real{0}) net = Real{0};
  if (net > l) net = l;
  return net;
}

template <class Real>
std::vector<double> oracle_layer(const Layer& layer, const YearEventTable& yet,
                                 const std::vector<const EventLossTable*>& covered) {
  std::vector<double> losses;
  losses.reserve(yet.num_trials());
  for (std::size_t i = 0; i < yet.num_trials(); ++i) {
    Real trial_sum{0};
    for (const std::uint32_t event : yet.trial(i).events) {
      Real event_loss{0};
      for (const EventLossTable* elt : covered) {
        const Real raw = static_cast<Real>(elt->find(event).value_or(0.0));
        event_loss += clamp_excess(raw, elt->terms().retention, elt->terms().limit);
      }
      trial_sum += clamp_excess(event_loss, layer.occurrence.retention, layer.occurrence.limit);
    }
    const Real trial =
        clamp_excess(trial_sum, layer.aggregate.retention, layer.aggregate.limit);
    losses.push_back(static_cast<double>(trial));
  }
  return losses;
}

}  // namespace

AnalysisResult oracle_analyze(const Portfolio& portfolio, const YearEventTable& yet,
                              std::span<const EventLossTable> elts, Precision precision) {
  AnalysisResult result;
  result.total.scope = YltScope{portfolio.portfolio_id, 0, 0, true};
  result.total.losses.assign(yet.num_trials(), 0.0);
  for (std::size_t i = 0; i < yet.num_trials(); ++i) {
    result.total.trial_ids.push_back(yet.trial(i).trial_id);
  }

  for (const auto& program : portfolio.programs) {
    for (const auto& layer : program.layers) {
      std::vector<const EventLossTable*> covered;
      for (auto ref : layer.elt_refs) {
        auto it = std::find_if(elts.begin(), elts.end(),
                               [&](const EventLossTable& e) { return e.id() == ref; });
        if (it == elts.end()) {
          throw InvalidArgument("oracle: unresolved ELT reference " + std::to_string(ref));
        }
        covered.push_back(&*it);
      }
      YearLossTable ylt;
      ylt.scope = YltScope{portfolio.portfolio_id, program.program_id, layer.layer_id, false};
      ylt.trial_ids = result.total.trial_ids;
      ylt.losses = precision == Precision::wide ? oracle_layer<double>(layer, yet, covered)
                                                : oracle_layer<float>(layer, yet, covered);
      for (std::size_t i = 0; i < ylt.size(); ++i) result.total.losses[i] += ylt.losses[i];
      result.timing.trial_events += yet.events_total();
      result.layers.push_back(std::move(ylt));
    }
  }
  return result;
}

}  // namespace agrisk
