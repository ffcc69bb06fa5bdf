#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "agrisk/terms.hpp"

namespace agrisk {

/// Base for every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed arguments that break a documented precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Catalog event identifier, valid range [1, catalog_size].
struct EventId {
  std::uint32_t value = 0;
  friend auto operator<=>(const EventId&, const EventId&) = default;
};

/// One (event, timestamp) occurrence inside a trial. Timestamps are
/// fractional years; they order events but never enter loss arithmetic.
struct Occurrence {
  std::uint32_t event = 0;
  float timestamp = 0.0f;
  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

/// Read-only view of one trial stored inside a YearEventTable.
struct TrialView {
  std::uint64_t trial_id = 0;
  std::span<const std::uint32_t> events;
  std::span<const float> timestamps;

  [[nodiscard]] std::size_t size() const noexcept { return events.size(); }
};

/// Year Event Table. Trials are stored column-wise in flat arrays with an
/// offset index so a worker can stream one trial's event ids contiguously.
class YearEventTable {
 public:
  YearEventTable() = default;
  explicit YearEventTable(std::uint32_t catalog_size);

  /// Appends a trial. Does not validate; see validate_yet().
  void add_trial(std::uint64_t trial_id, std::span<const Occurrence> occurrences);
  void add_trial(std::uint64_t trial_id, std::span<const std::uint32_t> events,
                 std::span<const float> timestamps);
  void reserve(std::size_t trials, std::size_t events);

  [[nodiscard]] std::uint32_t catalog_size() const noexcept { return catalog_size_; }
  [[nodiscard]] std::size_t num_trials() const noexcept { return trial_ids_.size(); }
  [[nodiscard]] std::size_t events_total() const noexcept { return events_.size(); }
  [[nodiscard]] bool empty() const noexcept { return trial_ids_.empty(); }
  [[nodiscard]] TrialView trial(std::size_t index) const;
  [[nodiscard]] std::size_t max_trial_length() const noexcept;

  friend bool operator==(const YearEventTable&, const YearEventTable&) = default;

 private:
  std::uint32_t catalog_size_ = 0;
  std::vector<std::uint64_t> trial_ids_;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<std::uint32_t> events_;
  std::vector<float> timestamps_;
};

/// Rule broken by a trial, as reported by validate_yet().
enum class YetRule {
  empty_trial,
  trial_length,
  out_of_order,
  negative_timestamp,
  event_id_range,
  duplicate_trial_id,
  non_contiguous_trial_id,
  zero_catalog,
};

[[nodiscard]] std::string_view to_string(YetRule rule) noexcept;

struct YetViolation {
  std::uint64_t trial_id = 0;
  YetRule rule{};
  std::string detail;
};

/// Optional per-trial length bounds checked by validate_yet().
struct TrialLengthBounds {
  std::size_t min = 1;
  std::size_t max = std::numeric_limits<std::size_t>::max();
};

/// Returns every invariant violation; an empty list means the table is valid.
[[nodiscard]] std::vector<YetViolation> validate_yet(const YearEventTable& yet,
                                                     TrialLengthBounds bounds = {});

/// Well-formed data that breaks a domain invariant.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<YetViolation> violations);
  [[nodiscard]] const std::vector<YetViolation>& violations() const noexcept {
    return violations_;
  }

 private:
  std::vector<YetViolation> violations_;
};

struct EventLoss {
  std::uint32_t event = 0;
  double loss = 0.0;
  friend bool operator==(const EventLoss&, const EventLoss&) = default;
};

/// Event Loss Table: event id -> positive loss, plus its own terms.
/// Entries are kept sorted by event id; zero losses are never stored.
class EventLossTable {
 public:
  EventLossTable() = default;
  /// Throws InvalidArgument on duplicate ids, id 0, or non-positive/non-finite losses.
  EventLossTable(std::uint32_t elt_id, std::vector<EventLoss> entries, EltTerms terms = {});

  [[nodiscard]] std::uint32_t id() const noexcept { return id_; }
  [[nodiscard]] const EltTerms& terms() const noexcept { return terms_; }
  void set_terms(const EltTerms& terms);
  [[nodiscard]] std::span<const EventLoss> entries() const noexcept { return entries_; }
  [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
  [[nodiscard]] std::uint32_t max_event() const noexcept {
    return entries_.empty() ? 0 : entries_.back().event;
  }
  /// Binary search over the sorted entries.
  [[nodiscard]] std::optional<double> find(std::uint32_t event) const noexcept;

  friend bool operator==(const EventLossTable&, const EventLossTable&) = default;

 private:
  std::uint32_t id_ = 0;
  std::vector<EventLoss> entries_;
  EltTerms terms_;
};

inline constexpr std::size_t kMaxEltsPerLayer = 30;
inline constexpr std::size_t kMaxProgramsPerPortfolio = 10;

struct Layer {
  std::uint32_t layer_id = 0;
  std::vector<std::uint32_t> elt_refs;
  OccurrenceTerms occurrence;
  AggregateTerms aggregate;
  friend bool operator==(const Layer&, const Layer&) = default;
};

struct Program {
  std::uint32_t program_id = 0;
  std::vector<Layer> layers;
  friend bool operator==(const Program&, const Program&) = default;
};

struct Portfolio {
  std::uint32_t portfolio_id = 0;
  std::vector<Program> programs;
  friend bool operator==(const Portfolio&, const Portfolio&) = default;
};

/// Checks layer/program/portfolio structure and term validity. Throws
/// InvalidArgument with a path such as "programs[0].layers[1].elt_refs".
void validate_portfolio(const Portfolio& portfolio);

/// Which slice of the portfolio a YLT belongs to.
struct YltScope {
  std::uint32_t portfolio_id = 0;
  std::uint32_t program_id = 0;
  std::uint32_t layer_id = 0;
  bool portfolio_total = false;

  [[nodiscard]] std::string label() const;
  friend bool operator==(const YltScope&, const YltScope&) = default;
};

/// Year Loss Table: one loss per trial, in trial order.
struct YearLossTable {
  YltScope scope;
  std::vector<std::uint64_t> trial_ids;
  std::vector<double> losses;

  [[nodiscard]] std::size_t size() const noexcept { return losses.size(); }
  [[nodiscard]] bool empty() const noexcept { return losses.empty(); }
  friend bool operator==(const YearLossTable&, const YearLossTable&) = default;
};

/// Builds a YLT whose trial ids are 1..losses.size().
[[nodiscard]] YearLossTable make_ylt(std::vector<double> losses, YltScope scope = {});

}  // namespace agrisk
