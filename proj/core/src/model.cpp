#include "agrisk/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace agrisk {

YearEventTable::YearEventTable(std::uint32_t catalog_size) : catalog_size_(catalog_size) {}

void YearEventTable::add_trial(std::uint64_t trial_id, std::span<const Occurrence> occurrences) {
  trial_ids_.push_back(trial_id);
  for (const auto& o : occurrences) {
    events_.push_back(o.event);
    timestamps_.push_back(o.timestamp);
  }
  offsets_.push_back(events_.size());
}

void YearEventTable::add_trial(std::uint64_t trial_id, std::span<const std::uint32_t> events,
                               std::span<const float> timestamps) {
  if (events.size() != timestamps.size()) {
    throw InvalidArgument("add_trial: events and timestamps differ in length");
  }
  trial_ids_.push_back(trial_id);
  events_.insert(events_.end(), events.begin(), events.end());
  timestamps_.insert(timestamps_.end(), timestamps.begin(), timestamps.end());
  offsets_.push_back(events_.size());
}

void YearEventTable::reserve(std::size_t trials, std::size_t events) {
  trial_ids_.reserve(trials);
  offsets_.reserve(trials + 1);
  events_.reserve(events);
  timestamps_.reserve(events);
}

TrialView YearEventTable::trial(std::size_t index) const {
  const auto begin = offsets_[index];
  const auto count = offsets_[index + 1] - begin;
  return TrialView{trial_ids_[index],
                   std::span<const std::uint32_t>(events_).subspan(begin, count),
                   std::span<const float>(timestamps_).subspan(begin, count)};
}

std::size_t YearEventTable::max_trial_length() const noexcept {
  std::size_t longest = 0;
  for (std::size_t i = 0; i + 1 < offsets_.size(); ++i) {
    longest = std::max<std::size_t>(longest, offsets_[i + 1] - offsets_[i]);
  }
  return longest;
}

std::string_view to_string(YetRule rule) noexcept {
  switch (rule) {
    case YetRule::empty_trial: return "empty-trial";
    case YetRule::trial_length: return "trial-length";
    case YetRule::out_of_order: return "out-of-order";
    case YetRule::negative_timestamp: return "negative-timestamp";
    case YetRule::event_id_range: return "id-range";
    case YetRule::duplicate_trial_id: return "duplicate-trial-id";
    case YetRule::non_contiguous_trial_id: return "non-contiguous-trial-id";
    case YetRule::zero_catalog: return "zero-catalog";
  }
  return "unknown";
}

std::vector<YetViolation> validate_yet(const YearEventTable& yet, TrialLengthBounds bounds) {
  std::vector<YetViolation> out;
  if (yet.catalog_size() == 0) {
    out.push_back({0, YetRule::zero_catalog, "catalog_size must be >= 1"});
  }
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(yet.num_trials());
  for (std::size_t i = 0; i < yet.num_trials(); ++i) {
    const TrialView t = yet.trial(i);
    if (!seen.insert(t.trial_id).second) {
      out.push_back({t.trial_id, YetRule::duplicate_trial_id, "trial id appears more than once"});
    } else if (t.trial_id != i + 1) {
      std::ostringstream msg;
      msg << "expected trial id " << i + 1 << " at position " << i;
      out.push_back({t.trial_id, YetRule::non_contiguous_trial_id, msg.str()});
    }
    if (t.size() == 0) {
      out.push_back({t.trial_id, YetRule::empty_trial, "trial has no events"});
      continue;
    }
    if (t.size() < bounds.min || t.size() > bounds.max) {
      std::ostringstream msg;
      msg << "length " << t.size() << " outside [" << bounds.min << ", " << bounds.max << "]";
      out.push_back({t.trial_id, YetRule::trial_length, msg.str()});
    }
    for (std::size_t k = 0; k < t.size(); ++k) {
      const auto e = t.events[k];
      if (e == 0 || e > yet.catalog_size()) {
        std::ostringstream msg;
        msg << "event " << e << " at position " << k << " outside [1, " << yet.catalog_size()
            << "]";
        out.push_back({t.trial_id, YetRule::event_id_range, msg.str()});
        break;
      }
    }
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (!(t.timestamps[k] >= 0.0f)) {
        out.push_back({t.trial_id, YetRule::negative_timestamp, "timestamp must be >= 0"});
        break;
      }
    }
    for (std::size_t k = 1; k < t.size(); ++k) {
      if (t.timestamps[k] < t.timestamps[k - 1]) {
        std::ostringstream msg;
        msg << "timestamp " << t.timestamps[k] << " at position " << k << " precedes "
            << t.timestamps[k - 1];
        out.push_back({t.trial_id, YetRule::out_of_order, msg.str()});
        break;
      }
    }
  }
  return out;
}

namespace {

std::string join_violations(const std::vector<YetViolation>& vs) {
  std::ostringstream out;
  out << vs.size() << " YET violation(s)";
  for (std::size_t i = 0; i < std::min<std::size_t>(vs.size(), 5); ++i) {
    out << "; trial " << vs[i].trial_id << ": " << to_string(vs[i].rule) << " (" << vs[i].detail
        << ")";
  }
  return out.str();
}

}  // namespace

ValidationError::ValidationError(std::vector<YetViolation> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

EventLossTable::EventLossTable(std::uint32_t elt_id, std::vector<EventLoss> entries, EltTerms terms)
    : id_(elt_id), entries_(std::move(entries)) {
  set_terms(terms);
  std::sort(entries_.begin(), entries_.end(),
            [](const EventLoss& a, const EventLoss& b) { return a.event < b.event; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.event == 0) {
      throw InvalidArgument("ELT " + std::to_string(elt_id) + ": event id 0 is not valid");
    }
    if (!(e.loss > 0.0) || !std::isfinite(e.loss)) {
      throw InvalidArgument("ELT " + std::to_string(elt_id) + ": event " +
                            std::to_string(e.event) + " has non-positive loss");
    }
    if (i > 0 && entries_[i - 1].event == e.event) {
      throw InvalidArgument("ELT " + std::to_string(elt_id) + ": duplicate event " +
                            std::to_string(e.event));
    }
  }
}

void EventLossTable::set_terms(const EltTerms& terms) {
  if (!terms.valid()) {
    throw InvalidArgument("ELT " + std::to_string(id_) +
                          ": terms need retention >= 0 and limit > 0");
  }
  terms_ = terms;
}

std::optional<double> EventLossTable::find(std::uint32_t event) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), event,
                             [](const EventLoss& a, std::uint32_t e) { return a.event < e; });
  if (it != entries_.end() && it->event == event) return it->loss;
  return std::nullopt;
}

namespace {

template <class Tag>
void check_terms(const RetentionLimit<Tag>& t, const std::string& path) {
  if (!(t.retention >= 0.0) || !std::isfinite(t.retention)) {
    throw InvalidArgument(path + ".retention: must be finite and >= 0");
  }
  if (!(t.limit > 0.0)) {
    throw InvalidArgument(path + ".limit: must be > 0");
  }
}

template <class T, class Id>
void check_unique_ids(const std::vector<T>& items, Id T::*id, const std::string& path) {
  std::unordered_set<std::uint64_t> ids;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (!ids.insert(items[i].*id).second) {
      throw InvalidArgument(path + "[" + std::to_string(i) + "]: duplicate id " +
                            std::to_string(items[i].*id));
    }
  }
}

}  // namespace

void validate_portfolio(const Portfolio& portfolio) {
  const auto& programs = portfolio.programs;
  if (programs.empty() || programs.size() > kMaxProgramsPerPortfolio) {
    throw InvalidArgument("programs: expected 1.." + std::to_string(kMaxProgramsPerPortfolio) +
                          " programs, got " + std::to_string(programs.size()));
  }
  check_unique_ids(programs, &Program::program_id, "programs");
  for (std::size_t p = 0; p < programs.size(); ++p) {
    const std::string ppath = "programs[" + std::to_string(p) + "]";
    const auto& layers = programs[p].layers;
    if (layers.empty()) throw InvalidArgument(ppath + ".layers: program has no layers");
    check_unique_ids(layers, &Layer::layer_id, ppath + ".layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const std::string lpath = ppath + ".layers[" + std::to_string(l) + "]";
      const auto& refs = layers[l].elt_refs;
      if (refs.empty() || refs.size() > kMaxEltsPerLayer) {
        throw InvalidArgument(lpath + ".elt_refs: expected 1.." +
                              std::to_string(kMaxEltsPerLayer) + " ELTs, got " +
                              std::to_string(refs.size()));
      }
      std::unordered_set<std::uint32_t> uniq(refs.begin(), refs.end());
      if (uniq.size() != refs.size()) {
        throw InvalidArgument(lpath + ".elt_refs: duplicate ELT reference");
      }
      check_terms(layers[l].occurrence, lpath + ".occurrence");
      check_terms(layers[l].aggregate, lpath + ".aggregate");
    }
  }
}

std::string YltScope::label() const {
  if (portfolio_total) return "portfolio-total";
  std::ostringstream out;
  out << "portfolio=" << portfolio_id << "/program=" << program_id << "/layer=" << layer_id;
  return out.str();
}

YearLossTable make_ylt(std::vector<double> losses, YltScope scope) {
  YearLossTable ylt;
  ylt.scope = scope;
  ylt.trial_ids.resize(losses.size());
  std::iota(ylt.trial_ids.begin(), ylt.trial_ids.end(), std::uint64_t{1});
  ylt.losses = std::move(losses);
  return ylt;
}

}  // namespace agrisk
