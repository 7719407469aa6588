#pragma once

// Physical layer: one ideal source with series resistance feeding N parallel
// resistive loads. Everything here is a pure function of its inputs.

#include <cstdint>
#include <span>
#include <vector>

namespace gridsync {

using Tick = std::int64_t;
using Volts = double;
using Ohms = double;
using Siemens = double;

struct Disturbance {
    Tick tick = 0;
    Volts v_source = 0.0;

    friend bool operator==(const Disturbance&, const Disturbance&) = default;
};

struct SourceModel {
    Volts v_source = 0.0;   // open-circuit source voltage before any disturbance
    Ohms r_source = 0.0;    // series (internal) resistance, > 0
    Volts v_nominal = 0.0;  // design bus voltage, the 100% reference
    std::vector<Disturbance> disturbances;  // strictly increasing ticks

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    friend bool operator==(const SourceModel&, const SourceModel&) = default;
};

/// Per-agent load block. Index i is agent i.
struct LoadSet {
    std::vector<Siemens> base_conductances;
    std::vector<Siemens> flexible_conductances;
    std::vector<std::uint8_t> flexible_on;  // 0/1; not vector<bool> so it can be spanned

    LoadSet() = default;
    LoadSet(std::vector<Siemens> base, std::vector<Siemens> flexible);

    std::size_t size() const { return base_conductances.size(); }
    std::size_t count_on() const;
    void validate() const;
};

Siemens total_conductance(const LoadSet& loads);

/// Voltage-divider solution of the single bus:
/// v_source / (1 + r_source * G); open circuit (G = 0) returns v_source.
Volts solve_bus_voltage(Volts v_source, Ohms r_source, Siemens total_conductance);

/// Step-function source: last scheduled value with event tick <= tick.
Volts apply_disturbance(const SourceModel& source, Tick tick);

inline Volts solve_bus_voltage(const SourceModel& source, Tick tick, const LoadSet& loads)
{
    return solve_bus_voltage(apply_disturbance(source, tick), source.r_source,
                             total_conductance(loads));
}

}  // namespace gridsync
