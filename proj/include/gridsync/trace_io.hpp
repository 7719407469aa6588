#pragma once

// CSV artifacts of a run. All numbers use 9 significant digits, so byte
// comparison of two files is a meaningful determinism check.

#include "gridsync/analysis.hpp"
#include "gridsync/engine.hpp"

#include <iosfwd>

namespace gridsync {

/// tick,bus_voltage,rel_voltage,n_flexible_on,price,n_postponed,n_vetoed,n_forced
/// (price left empty for fridge runs).
void write_trace_csv(std::ostream& out, const SimTrace& trace);
/// Inverse of write_trace_csv; n_agents and reference_spread are not stored.
SimTrace read_trace_csv(std::istream& in);

/// min_rel_voltage,max_rel_voltage,band_crossings,settling_tick,sync_index,
/// expectation_dispersion_final -- one data row, absent values left empty.
void write_report_csv(std::ostream& out, const StabilityReport& report);
StabilityReport read_report_csv(std::istream& in);

/// tick,reference_spread (washer runs).
void write_dispersion_csv(std::ostream& out, const SimTrace& trace);

}  // namespace gridsync
