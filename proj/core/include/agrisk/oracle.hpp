#pragma once

#include <span>

#include "agrisk/engine.hpp"
#include "agrisk/model.hpp"

namespace agrisk {

/// Brute-force reference for run_analysis: sequential, no lookup tables,
/// no chunking. Each event is searched for directly in the source ELTs.
/// Used to check the engine, never by it.
[[nodiscard]] AnalysisResult oracle_analyze(const Portfolio& portfolio, const YearEventTable& yet,
                                            std::span<const EventLossTable> elts,
                                            Precision precision = Precision::wide);

}  // namespace agrisk
