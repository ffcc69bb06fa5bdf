#include "agrisk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace agrisk {

namespace {

std::vector<double> sorted_losses(const YearLossTable& ylt, const char* op) {
  if (ylt.empty()) throw InvalidArgument(std::string(op) + ": YLT is empty");
  std::vector<double> losses = ylt.losses;
  for (double v : losses) {
    if (std::isnan(v)) throw InvalidArgument(std::string(op) + ": YLT contains NaN");
  }
  std::sort(losses.begin(), losses.end());
  return losses;
}

void check_return_period(double rp, std::size_t n) {
  if (!(rp > 1.0) || !std::isfinite(rp)) {
    std::ostringstream msg;
    msg << "pml: return period " << rp << " must be > 1";
    throw InvalidArgument(msg.str());
  }
  if (rp > static_cast<double>(n)) {
    std::ostringstream msg;
    msg << "pml: return period " << rp << " exceeds the number of trials " << n
        << " (insufficient trials)";
    throw InvalidArgument(msg.str());
  }
}

void check_alpha(double alpha, const char* op) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream msg;
    msg << op << ": alpha " << alpha << " outside (0, 1)";
    throw InvalidArgument(msg.str());
  }
}

// `ascending` must be sorted; rank 1 is the largest loss.
double pml_sorted(const std::vector<double>& ascending, double rp) {
  check_return_period(rp, ascending.size());
  const std::size_t n = ascending.size();
  const std::size_t rank = std::clamp<std::size_t>(snapped_ceil(n / rp), 1, n);
  return ascending[n - rank];
}

}  // namespace

std::size_t snapped_ceil(double x) noexcept {
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x))) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(x));
}

EpCurve exceedance_curve(const YearLossTable& ylt) {
  const auto losses = sorted_losses(ylt, "exceedance_curve");
  const double n = static_cast<double>(losses.size());
  EpCurve curve;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (i > 0 && losses[i] == losses[i - 1]) continue;
    curve.points.push_back({losses[i], static_cast<double>(losses.size() - i) / n});
  }
  return curve;
}

double pml(const YearLossTable& ylt, double return_period) {
  return pml_sorted(sorted_losses(ylt, "pml"), return_period);
}

double var(const YearLossTable& ylt, double alpha) {
  check_alpha(alpha, "var");
  const auto losses = sorted_losses(ylt, "var");
  const std::size_t n = losses.size();
  const std::size_t k = std::clamp<std::size_t>(snapped_ceil(alpha * n), 1, n);
  return losses[k - 1];
}

double tvar(const YearLossTable& ylt, double alpha) {
  check_alpha(alpha, "tvar");
  const auto losses = sorted_losses(ylt, "tvar");
  const std::size_t n = losses.size();
  const std::size_t tail = std::min(snapped_ceil((1.0 - alpha) * n), n);
  if (tail == 0) {
    std::ostringstream msg;
    msg << "tvar: alpha " << alpha << " leaves no tail among " << n << " trials";
    throw InvalidArgument(msg.str());
  }
  // Mean taken as offset from the smallest tail loss: the result can never
  // round below it, so tvar >= var holds exactly and a constant tail
  // returns that constant.
  const double base = losses[n - tail];
  double excess = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) excess += losses[i] - base;
  return base + excess / static_cast<double>(tail);
}

std::vector<RplRow> rpl_report(const YearLossTable& ylt, std::span<const double> periods) {
  std::vector<double> unique(periods.begin(), periods.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<RplRow> rows;
  if (unique.empty()) return rows;
  const auto losses = sorted_losses(ylt, "rpl_report");
  rows.reserve(unique.size());
  for (double rp : unique) rows.push_back({rp, pml_sorted(losses, rp)});
  return rows;
}

}  // namespace agrisk
