#pragma once

// Regulatory layer: appliance state machines and the local decision rules
// they apply to the signals they sense.
//
// Fridges follow a fixed ON/OFF duty cycle and react to the bus voltage.
// Washers hold one job per daily window and react to the market price,
// optionally filtered by a local voltage check.

#include "gridsync/circuit.hpp"
#include "gridsync/rng.hpp"

#include <optional>

namespace gridsync {

using Price = double;

enum class FridgeMode { On, Off, Postponed, Forced };

const char* to_string(FridgeMode mode);

struct FridgeAgent {
    std::size_t id = 0;
    Tick on_duration = 1;
    Tick off_duration = 1;
    Tick phase = 0;  // ticks into the cycle; [0, on) is the ON part
    FridgeMode mode = FridgeMode::Off;
    Tick postponed_for = 0;
    Tick max_postpone = 0;
    Tick resume_wait = -1;  // < 0: no resume delay drawn yet

    Tick cycle_length() const { return on_duration + off_duration; }
    bool flexible_on() const { return mode == FridgeMode::On || mode == FridgeMode::Forced; }
    void validate() const;

    friend bool operator==(const FridgeAgent&, const FridgeAgent&) = default;
};

/// Fridge with its cycle position drawn uniformly from the whole cycle.
FridgeAgent make_fridge(std::size_t id, Tick on_duration, Tick off_duration, Tick max_postpone,
                        Rng& rng);

struct FridgePolicy {
    bool reactive = true;  // false: plain duty cycle, blind to the voltage
    double threshold_low = 0.98;
    double threshold_high = 1.02;
    double act_probability = 1.0;  // 1.0 is the naive (deterministic) reaction
    Tick resume_wait_max = 0;

    void validate() const;
};

struct FridgeStep {
    FridgeAgent agent;
    bool flexible_on = false;
    bool switched_on = false;  // OFF/POSTPONED -> ON or FORCED this tick
    bool forced = false;       // must-run activation this tick
};

/// Bernoulli(act_probability) filter on a trigger. Always consumes one draw
/// when triggered, so p = 1 and the naive rule see the same stream.
bool randomized_gate(bool trigger, double act_probability, Rng& rng);

/// One tick of a fridge given the relative bus voltage sensed last tick.
FridgeStep fridge_step(const FridgeAgent& agent, const FridgePolicy& policy, double rel_voltage,
                       Rng& rng);

/// State of a fridge whose proposed switch-on was refused by the coordinator.
/// `before` is the state fed to fridge_step. A refused due or postponed
/// fridge waits in POSTPONED; a refused early start stays in its OFF phase.
FridgeAgent fridge_hold(const FridgeAgent& before);

struct WasherAgent {
    std::size_t id = 0;
    Price reference_price = 1.0;
    bool job_pending = false;
    Tick job_length = 1;
    Tick job_deadline = 0;  // latest start tick of the pending job
    std::optional<Tick> running_until;  // exclusive end of the running job

    // Daily job windows: one job arrives per window, at most arrival_window
    // ticks after the window opens, and must start by window end - job_length.
    Tick day_length = 1;
    Tick arrival_window = 0;
    Tick window_start = 0;
    Tick next_arrival = 0;

    bool flexible_on() const { return running_until.has_value(); }
    void validate() const;

    friend bool operator==(const WasherAgent&, const WasherAgent&) = default;
};

/// Washer whose daily window is offset uniformly at random, so jobs and
/// deadlines are spread across the day.
WasherAgent make_washer(std::size_t id, Price reference_price, Tick job_length, Tick day_length,
                        Tick arrival_window, Rng& rng);

struct WasherPolicy {
    double ewma_lambda = 0.02;
    double bargain_factor = 1.0;
    bool voltage_check_enabled = false;
    double voltage_limit = 0.95;
    double poll_probability = 1.0;  // chance a pending washer evaluates the price in a tick

    void validate() const;
};

struct WasherStep {
    WasherAgent agent;
    bool flexible_on = false;
    bool switched_on = false;
    bool forced = false;  // deadline start
    bool vetoed = false;
};

/// Exponentially weighted expectation update.
Price update_reference_price(Price reference, Price price, double ewma_lambda);

/// Candidate start survives only if the sensed voltage is at or above the limit.
bool voltage_veto(bool candidate_start, double rel_voltage, double voltage_limit);

WasherStep washer_step(const WasherAgent& agent, const WasherPolicy& policy, Price price,
                       double rel_voltage, Tick tick, Rng& rng);

/// Proposed start refused by the coordinator: the job stays pending.
WasherAgent washer_hold(const WasherAgent& proposed);

}  // namespace gridsync
