#pragma once

#include <algorithm>
#include <concepts>
#include <limits>

namespace agrisk {

/// Sentinel for "no limit". Clamping against it is a no-op, so unlimited
/// contracts need no special-case arithmetic.
inline constexpr double kUnlimited = std::numeric_limits<double>::infinity();

/// Excess-of-loss clamp shared by all three financial-term levels:
/// min(max(loss - retention, 0), limit).
template <std::floating_point Real>
constexpr Real apply_excess_of_loss(Real loss, Real retention, Real limit) noexcept {
  return std::min(std::max(loss - retention, Real{0}), limit);
}

/// A (retention, limit) pair. The tag keeps ELT, occurrence and aggregate
/// terms from being passed in place of one another.
template <class Tag>
struct RetentionLimit {
  double retention = 0.0;
  double limit = kUnlimited;

  [[nodiscard]] bool valid() const noexcept { return retention >= 0.0 && limit > 0.0; }
  [[nodiscard]] bool is_identity() const noexcept {
    return retention == 0.0 && limit == kUnlimited;
  }
  friend bool operator==(const RetentionLimit&, const RetentionLimit&) = default;
};

struct EltTermsTag;
struct OccurrenceTermsTag;
struct AggregateTermsTag;

using EltTerms = RetentionLimit<EltTermsTag>;               // per-ELT terms
using OccurrenceTerms = RetentionLimit<OccurrenceTermsTag>; // per event, per layer
using AggregateTerms = RetentionLimit<AggregateTermsTag>;   // per trial, per layer

/// Terms narrowed to the working precision of a run.
template <std::floating_point Real>
struct ClampTerms {
  Real retention{0};
  Real limit{std::numeric_limits<Real>::infinity()};

  ClampTerms() = default;
  template <class Tag>
  explicit ClampTerms(const RetentionLimit<Tag>& t)
      : retention(static_cast<Real>(t.retention)), limit(static_cast<Real>(t.limit)) {}

  [[nodiscard]] Real apply(Real loss) const noexcept {
    return apply_excess_of_loss(loss, retention, limit);
  }
};

[[nodiscard]] inline double apply_elt_terms(double raw_loss, const EltTerms& t) noexcept {
  return apply_excess_of_loss(raw_loss, t.retention, t.limit);
}

[[nodiscard]] inline double apply_occurrence_terms(double event_loss,
                                                   const OccurrenceTerms& t) noexcept {
  return apply_excess_of_loss(event_loss, t.retention, t.limit);
}

/// `trial_sum` is the cumulative occurrence-net loss of one trial.
[[nodiscard]] inline double apply_aggregate_terms(double trial_sum,
                                                  const AggregateTerms& t) noexcept {
  return apply_excess_of_loss(trial_sum, t.retention, t.limit);
}

}  // namespace agrisk
