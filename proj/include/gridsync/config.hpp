#pragma once

// Scenario configuration: the machine-readable description of one run.
//
// On disk a scenario is an INI document with the sections
// [run] [source] [agents] [policy] [coordinator] [market]; the full schema is
// documented in docs/config.md. Unknown sections or keys are errors.

#include "gridsync/circuit.hpp"
#include "gridsync/devices.hpp"
#include "gridsync/market.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridsync {

enum class AgentKind { Fridge, Washer };
enum class CoordinatorMode { None, Randomized, TimeDivision };

const char* to_string(AgentKind kind);
const char* to_string(CoordinatorMode mode);

/// Raised for any invalid configuration; field() is "section.key".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message),
          field_(std::move(field))
    {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct FridgeParams {
    Tick on_duration = 40;
    Tick off_duration = 60;
    std::optional<Tick> max_postpone;  // default 3 * off_duration

    Tick effective_max_postpone() const { return max_postpone.value_or(3 * off_duration); }
};

struct WasherParams {
    Tick job_length = 60;
    Tick day_length = 1440;
    std::optional<Tick> arrival_window;  // default (day_length - job_length) / 2
    Price reference_price_min = 40.0;
    Price reference_price_max = 40.0;

    Tick effective_arrival_window() const
    {
        return arrival_window.value_or((day_length - job_length) / 2);
    }
};

struct MarketConfig {
    Tick period_length = 60;
    PriceProcessParams process;
    std::optional<std::string> price_file;  // replaces the generated process when set
    FeedbackParams feedback;
};

struct ScenarioConfig {
    std::uint64_t seed = 1;
    Tick n_ticks = 0;
    std::size_t n_agents = 0;
    AgentKind kind = AgentKind::Fridge;
    double band_low = 0.98;
    double band_high = 1.02;

    SourceModel source;
    std::vector<Ohms> r_base{100.0};      // one value for all agents, or one per agent
    std::vector<Ohms> r_flexible{100.0};

    FridgeParams fridge;
    WasherParams washer;
    FridgePolicy fridge_policy;
    WasherPolicy washer_policy;

    CoordinatorMode coordinator = CoordinatorMode::None;
    std::size_t permits_per_tick = 1;

    std::optional<MarketConfig> market;  // washer scenarios only

    Ohms base_resistance(std::size_t agent) const;
    Ohms flexible_resistance(std::size_t agent) const;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Ordered INI document: section -> key -> raw value.
using ConfigDocument = std::map<std::string, std::map<std::string, std::string>>;

ConfigDocument read_config_document(std::istream& in);
ScenarioConfig config_from_document(const ConfigDocument& doc, const std::string& base_dir = ".");
ConfigDocument config_to_document(const ScenarioConfig& config);
void write_config_document(std::ostream& out, const ConfigDocument& doc);

ScenarioConfig parse_config(std::istream& in, const std::string& base_dir = ".");
/// Throws std::ios_base::failure when the file cannot be read.
ScenarioConfig load_config(const std::string& path);
/// Fully explicit document that reproduces the run when parsed back.
std::string write_config(const ScenarioConfig& config);

/// Scalar keys a sweep may override, by bare key name.
const std::vector<std::string>& sweepable_parameters();
/// Returns a copy of config with the named scalar replaced; throws ConfigError
/// for unknown names or invalid values.
ScenarioConfig with_parameter(const ScenarioConfig& config, const std::string& name,
                              const std::string& value);

}  // namespace gridsync
