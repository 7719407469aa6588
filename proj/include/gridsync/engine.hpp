#pragma once

// Discrete-time simulation loop tying the three layers together.
//
// Per tick t:
//   1. agents read the signals of tick t-1 (relative bus voltage) and the
//      price of the current market period;
//   2. every agent computes its transition from those frozen signals;
//   3. in time-division mode the coordinator filters proposed switch-ons;
//   4. the load set is committed;
//   5. the bus voltage for tick t is solved;
//   6. a trace row is appended.
// Since no agent sees another agent's tick-t decision, evaluation order is
// irrelevant to the result.

#include "gridsync/circuit.hpp"
#include "gridsync/config.hpp"
#include "gridsync/devices.hpp"
#include "gridsync/market.hpp"

#include <optional>
#include <span>
#include <vector>

namespace gridsync {

struct TraceRow {
    Tick tick = 0;
    Volts bus_voltage = 0.0;
    double rel_voltage = 0.0;
    std::size_t n_flexible_on = 0;
    std::optional<Price> price;  // washer runs only
    std::size_t n_postponed = 0;  // agents waiting in POSTPONED after this tick
    std::size_t n_vetoed = 0;     // candidate starts refused by the voltage check this tick
    std::size_t n_forced = 0;     // must-run / deadline activations this tick

    friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct SimTrace {
    std::size_t n_agents = 0;
    std::vector<TraceRow> rows;
    std::vector<Price> reference_spread;  // washer runs: max - min expectation per tick

    std::size_t size() const { return rows.size(); }
    std::vector<double> rel_voltages() const;
    std::vector<double> flexible_on_counts() const;

    friend bool operator==(const SimTrace&, const SimTrace&) = default;
};

/// Round-robin permit dispenser for time-division coordination.
class Coordinator {
public:
    explicit Coordinator(CoordinatorMode mode = CoordinatorMode::None) : mode_(mode) {}

    CoordinatorMode mode() const { return mode_; }
    std::size_t cursor() const { return cursor_; }
    void set_cursor(std::size_t cursor) { cursor_ = cursor; }

    /// Grants min(|requests|, permits) requests, scanning agent ids upward
    /// from the cursor and wrapping. The cursor moves past the last grantee.
    /// `requests` need not be sorted; duplicates are ignored.
    std::vector<std::size_t> assign_permits(std::span<const std::size_t> requests,
                                            std::size_t permits);

private:
    CoordinatorMode mode_;
    std::size_t cursor_ = 0;
};

/// Policy the agents actually apply: only the randomized coordinator keeps
/// the configured gate probability and resume delay; otherwise the reaction
/// is the deterministic (naive) one.
FridgePolicy effective_fridge_policy(const ScenarioConfig& config);

class Simulation {
public:
    explicit Simulation(ScenarioConfig config);

    const ScenarioConfig& config() const { return config_; }
    Tick tick() const { return tick_; }
    bool done() const { return tick_ >= config_.n_ticks; }

    /// Relative voltage agents will sense on the next step.
    double sensed_rel_voltage() const { return rel_voltage_; }
    const LoadSet& loads() const { return loads_; }
    const SimTrace& trace() const { return trace_; }
    const PriceSeries& exogenous_prices() const { return prices_; }
    std::span<const FridgeAgent> fridges() const { return fridges_; }
    std::span<const WasherAgent> washers() const { return washers_; }

    /// Permutation of agent ids used to iterate agents within a tick.
    void set_evaluation_order(std::vector<std::size_t> order);

    void step();
    const SimTrace& run_to_end();

private:
    Price current_price();
    void step_fridges(std::vector<std::size_t>& requests, std::vector<std::size_t>& priority);
    void step_washers(Price price, std::vector<std::size_t>& requests,
                      std::vector<std::size_t>& priority, std::size_t& vetoed);

    ScenarioConfig config_;
    FridgePolicy fridge_policy_;
    Coordinator coordinator_;
    std::vector<FridgeAgent> fridges_;
    std::vector<WasherAgent> washers_;
    std::vector<std::size_t> order_;
    LoadSet loads_;
    PriceSeries prices_;
    Tick tick_ = 0;
    double rel_voltage_ = 1.0;

    // scratch, indexed by agent id
    std::vector<FridgeStep> fridge_steps_;
    std::vector<WasherStep> washer_steps_;

    // demand feedback bookkeeping
    std::size_t feedback_period_ = 0;
    double period_on_sum_ = 0.0;
    double last_period_share_ = 0.0;
    std::optional<Price> period_price_;

    SimTrace trace_;
};

SimTrace run(const ScenarioConfig& config);

}  // namespace gridsync
