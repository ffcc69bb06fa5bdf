#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "agrisk/model.hpp"

namespace agrisk {

// Empirical, non-interpolated tail metrics over a YLT of N trials.
// Every rank of the form ceil(x) snaps x to the nearest integer first when
// it is within 1e-9 relative, so that e.g. alpha = 0.7, N = 10 gives
// rank 7 rather than 8.

struct EpPoint {
  double loss = 0.0;
  double probability = 0.0;  // (#trials with loss >= this loss) / N
  friend bool operator==(const EpPoint&, const EpPoint&) = default;
};

/// One point per distinct loss, ascending by loss; probabilities are in
/// (0, 1] and non-increasing.
struct EpCurve {
  std::vector<EpPoint> points;
};

struct RplRow {
  double return_period = 0.0;
  double loss = 0.0;
  friend bool operator==(const RplRow&, const RplRow&) = default;
};

/// ceil(x), with x snapped to an integer when within 1e-9 relative of one.
[[nodiscard]] std::size_t snapped_ceil(double x) noexcept;

[[nodiscard]] EpCurve exceedance_curve(const YearLossTable& ylt);

/// Loss at exceedance probability 1/RP: descending order statistic at rank
/// ceil(N / RP). Requires 1 < RP <= N.
[[nodiscard]] double pml(const YearLossTable& ylt, double return_period);

/// Smallest loss v with (#losses <= v) / N >= alpha; alpha in (0, 1).
[[nodiscard]] double var(const YearLossTable& ylt, double alpha);

/// Mean of the worst ceil((1 - alpha) N) losses; alpha in (0, 1).
[[nodiscard]] double tvar(const YearLossTable& ylt, double alpha);

/// pml per period; periods are deduplicated and sorted ascending.
[[nodiscard]] std::vector<RplRow> rpl_report(const YearLossTable& ylt,
                                             std::span<const double> periods);

}  // namespace agrisk
