#include "gridsync/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gridsync {

namespace {

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw std::invalid_argument(what);
}

bool finite_nonnegative(double g) { return std::isfinite(g) && g >= 0.0; }

}  // namespace

void SourceModel::validate() const
{
    require(std::isfinite(v_source) && v_source > 0.0, "source.v_source must be > 0");
    require(std::isfinite(r_source) && r_source > 0.0, "source.r_source must be > 0");
    require(std::isfinite(v_nominal) && v_nominal > 0.0, "source.v_nominal must be > 0");
    for (std::size_t i = 0; i < disturbances.size(); ++i) {
        const auto& d = disturbances[i];
        require(d.tick >= 0, "source.disturbances: tick must be >= 0");
        require(std::isfinite(d.v_source) && d.v_source > 0.0,
                "source.disturbances: voltage must be > 0");
        if (i > 0)
            require(d.tick > disturbances[i - 1].tick,
                    "source.disturbances: ticks must be strictly increasing");
    }
}

LoadSet::LoadSet(std::vector<Siemens> base, std::vector<Siemens> flexible)
    : base_conductances(std::move(base)),
      flexible_conductances(std::move(flexible)),
      flexible_on(base_conductances.size(), 0)
{
    validate();
}

std::size_t LoadSet::count_on() const
{
    return static_cast<std::size_t>(std::count(flexible_on.begin(), flexible_on.end(), 1));
}

void LoadSet::validate() const
{
    require(flexible_conductances.size() == base_conductances.size() &&
                flexible_on.size() == base_conductances.size(),
            "load set: per-agent lists must have equal length");
    require(std::all_of(base_conductances.begin(), base_conductances.end(), finite_nonnegative),
            "load set: base conductances must be finite and >= 0");
    require(std::all_of(flexible_conductances.begin(), flexible_conductances.end(),
                        finite_nonnegative),
            "load set: flexible conductances must be finite and >= 0");
}

Siemens total_conductance(const LoadSet& loads)
{
    Siemens g = 0.0;
    for (std::size_t i = 0; i < loads.size(); ++i) {
        g += loads.base_conductances[i];
        if (loads.flexible_on[i])
            g += loads.flexible_conductances[i];
    }
    return g;
}

Volts solve_bus_voltage(Volts v_source, Ohms r_source, Siemens total_conductance)
{
    if (total_conductance == 0.0)
        return v_source;
    return v_source / (1.0 + r_source * total_conductance);
}

Volts apply_disturbance(const SourceModel& source, Tick tick)
{
    // First event strictly after tick; the one before it (if any) is in force.
    auto it = std::upper_bound(source.disturbances.begin(), source.disturbances.end(), tick,
                               [](Tick t, const Disturbance& d) { return t < d.tick; });
    if (it == source.disturbances.begin())
        return source.v_source;
    return std::prev(it)->v_source;
}

}  // namespace gridsync
