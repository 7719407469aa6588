#include "gridsync/devices.hpp"

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

bool in_unit_interval(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

FridgeAgent switch_on(FridgeAgent a, FridgeMode mode)
{
    a.mode = mode;
    a.phase = 0;
    a.postponed_for = 0;
    a.resume_wait = -1;
    return a;
}

}  // namespace

const char* to_string(FridgeMode mode)
{
    switch (mode) {
    case FridgeMode::On: return "ON";
    case FridgeMode::Off: return "OFF";
    case FridgeMode::Postponed: return "POSTPONED";
    case FridgeMode::Forced: return "FORCED";
    }
    return "?";
}

void FridgeAgent::validate() const
{
    require(on_duration >= 1, "agents.on_duration must be >= 1");
    require(off_duration >= 1, "agents.off_duration must be >= 1");
    require(max_postpone >= 0, "agents.max_postpone must be >= 0");
    require(phase >= 0 && phase < cycle_length(), "fridge phase outside its cycle");
    require(postponed_for >= 0 && postponed_for <= max_postpone,
            "fridge postponed_for exceeds max_postpone");
    const bool in_on_part = phase < on_duration;
    if (mode == FridgeMode::On || mode == FridgeMode::Forced)
        require(in_on_part, "fridge marked ON outside the ON part of its cycle");
    if (mode == FridgeMode::Off)
        require(!in_on_part, "fridge marked OFF inside the ON part of its cycle");
}

FridgeAgent make_fridge(std::size_t id, Tick on_duration, Tick off_duration, Tick max_postpone,
                        Rng& rng)
{
    FridgeAgent a;
    a.id = id;
    a.on_duration = on_duration;
    a.off_duration = off_duration;
    a.max_postpone = max_postpone;
    require(on_duration >= 1 && off_duration >= 1, "agents: cycle durations must be >= 1");
    a.phase = static_cast<Tick>(rng.uniform_int(static_cast<std::uint64_t>(a.cycle_length() - 1)));
    a.mode = a.phase < on_duration ? FridgeMode::On : FridgeMode::Off;
    a.validate();
    return a;
}

void FridgePolicy::validate() const
{
    require(std::isfinite(threshold_low) && threshold_low > 0.0 && threshold_low <= 1.0,
            "policy.threshold_low must be in (0, 1]");
    require(std::isfinite(threshold_high) && threshold_high >= 1.0,
            "policy.threshold_high must be >= 1");
    require(in_unit_interval(act_probability), "policy.act_probability must be in [0, 1]");
    require(resume_wait_max >= 0, "policy.resume_wait_max must be >= 0");
}

bool randomized_gate(bool trigger, double act_probability, Rng& rng)
{
    if (!trigger)
        return false;
    return rng.bernoulli(act_probability);
}

FridgeStep fridge_step(const FridgeAgent& agent, const FridgePolicy& policy, double rel_voltage,
                       Rng& rng)
{
    FridgeStep out{agent};
    FridgeAgent& a = out.agent;
    const bool low = policy.reactive && rel_voltage < policy.threshold_low;
    const bool high = policy.reactive && rel_voltage > policy.threshold_high;

    switch (agent.mode) {
    case FridgeMode::On:
    case FridgeMode::Forced:
        ++a.phase;
        if (a.phase == a.on_duration)
            a.mode = FridgeMode::Off;
        break;

    case FridgeMode::Off:
        if (a.phase + 1 == a.cycle_length()) {
            // due to start a new cycle
            if (low && a.max_postpone >= 1 && randomized_gate(true, policy.act_probability, rng)) {
                a.mode = FridgeMode::Postponed;
                a.postponed_for = 1;
                a.resume_wait = -1;
            } else {
                a = switch_on(a, FridgeMode::On);
                out.switched_on = true;
            }
        } else if (randomized_gate(high, policy.act_probability, rng)) {
            a = switch_on(a, FridgeMode::On);
            out.switched_on = true;
        } else {
            ++a.phase;
        }
        break;

    case FridgeMode::Postponed:
        if (a.postponed_for >= a.max_postpone) {
            a = switch_on(a, FridgeMode::Forced);
            out.switched_on = true;
            out.forced = true;
        } else if (low) {
            ++a.postponed_for;
            a.resume_wait = -1;
        } else {
            if (a.resume_wait < 0)
                a.resume_wait = static_cast<Tick>(
                    rng.uniform_int(static_cast<std::uint64_t>(policy.resume_wait_max)));
            if (a.resume_wait == 0) {
                a = switch_on(a, FridgeMode::On);
                out.switched_on = true;
            } else {
                --a.resume_wait;
                ++a.postponed_for;
            }
        }
        break;
    }

    out.flexible_on = a.flexible_on();
    return out;
}

FridgeAgent fridge_hold(const FridgeAgent& before)
{
    FridgeAgent a = before;
    switch (before.mode) {
    case FridgeMode::Postponed:
        a.postponed_for = std::min(before.postponed_for + 1, before.max_postpone);
        a.resume_wait = 0;
        break;
    case FridgeMode::Off:
        if (before.phase + 1 == before.cycle_length()) {
            a.mode = FridgeMode::Postponed;
            a.postponed_for = std::min<Tick>(1, before.max_postpone);
            a.resume_wait = 0;
        } else {
            ++a.phase;
        }
        break;
    case FridgeMode::On:
    case FridgeMode::Forced:
        break;
    }
    return a;
}

void WasherAgent::validate() const
{
    require(std::isfinite(reference_price) && reference_price > 0.0,
            "washer reference_price must be > 0");
    require(job_length >= 1, "agents.job_length must be >= 1");
    require(day_length > job_length, "agents.day_length must exceed agents.job_length");
    require(arrival_window >= 0 && arrival_window <= day_length - job_length,
            "agents.arrival_window must be in [0, day_length - job_length]");
}

WasherAgent make_washer(std::size_t id, Price reference_price, Tick job_length, Tick day_length,
                        Tick arrival_window, Rng& rng)
{
    WasherAgent a;
    a.id = id;
    a.reference_price = reference_price;
    a.job_length = job_length;
    a.day_length = day_length;
    a.arrival_window = arrival_window;
    a.validate();

    const auto offset = static_cast<Tick>(rng.uniform_int(static_cast<std::uint64_t>(day_length - 1)));
    a.window_start = offset - day_length;
    if (a.window_start + day_length - job_length < 0)
        a.window_start += day_length;  // today's window can no longer fit a job
    a.next_arrival =
        a.window_start + static_cast<Tick>(rng.uniform_int(static_cast<std::uint64_t>(arrival_window)));
    return a;
}

void WasherPolicy::validate() const
{
    require(in_unit_interval(ewma_lambda), "policy.ewma_lambda must be in [0, 1]");
    require(std::isfinite(bargain_factor) && bargain_factor > 0.0,
            "policy.bargain_factor must be > 0");
    require(std::isfinite(voltage_limit) && voltage_limit > 0.0 && voltage_limit < 1.0,
            "policy.voltage_limit must be in (0, 1)");
    require(std::isfinite(poll_probability) && poll_probability > 0.0 && poll_probability <= 1.0,
            "policy.poll_probability must be in (0, 1]");
}

Price update_reference_price(Price reference, Price price, double ewma_lambda)
{
    return (1.0 - ewma_lambda) * reference + ewma_lambda * price;
}

bool voltage_veto(bool candidate_start, double rel_voltage, double voltage_limit)
{
    return candidate_start && rel_voltage >= voltage_limit;
}

WasherStep washer_step(const WasherAgent& agent, const WasherPolicy& policy, Price price,
                       double rel_voltage, Tick tick, Rng& rng)
{
    WasherStep out{agent};
    WasherAgent& a = out.agent;

    if (a.running_until && tick >= *a.running_until) {
        a.running_until.reset();
        a.window_start += a.day_length;
        a.next_arrival = a.window_start +
                         static_cast<Tick>(rng.uniform_int(static_cast<std::uint64_t>(a.arrival_window)));
    }
    if (!a.running_until && !a.job_pending && tick >= a.next_arrival) {
        a.job_pending = true;
        a.job_deadline = a.window_start + a.day_length - a.job_length;
    }

    if (a.job_pending) {
        bool start = false;
        if (tick >= a.job_deadline) {
            start = true;
            out.forced = true;
        } else {
            const bool polled = policy.poll_probability >= 1.0 || rng.bernoulli(policy.poll_probability);
            const bool bargain = polled && price <= policy.bargain_factor * a.reference_price;
            if (bargain && policy.voltage_check_enabled) {
                start = voltage_veto(true, rel_voltage, policy.voltage_limit);
                out.vetoed = !start;
            } else {
                start = bargain;
            }
        }
        if (start) {
            a.job_pending = false;
            a.running_until = tick + a.job_length;
            out.switched_on = true;
        }
    }

    a.reference_price = update_reference_price(a.reference_price, price, policy.ewma_lambda);
    out.flexible_on = a.flexible_on();
    return out;
}

WasherAgent washer_hold(const WasherAgent& proposed)
{
    WasherAgent a = proposed;
    if (a.running_until) {
        a.running_until.reset();
        a.job_pending = true;
    }
    return a;
}

}  // namespace gridsync
