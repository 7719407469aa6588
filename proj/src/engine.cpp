#include "gridsync/engine.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gridsync {

namespace {

// Counter value reserved for construction-time draws (initial phases, day
// offsets, expectations); step draws use the tick as counter.
constexpr std::uint64_t kInitCounter = std::numeric_limits<std::uint64_t>::max();

std::uint64_t agent_stream(std::size_t id) { return static_cast<std::uint64_t>(id) + 1; }

}  // namespace

std::vector<double> SimTrace::rel_voltages() const
{
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows)
        v.push_back(r.rel_voltage);
    return v;
}

std::vector<double> SimTrace::flexible_on_counts() const
{
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows)
        v.push_back(static_cast<double>(r.n_flexible_on));
    return v;
}

std::vector<std::size_t> Coordinator::assign_permits(std::span<const std::size_t> requests,
                                                     std::size_t permits)
{
    std::vector<std::size_t> sorted(requests.begin(), requests.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<std::size_t> granted;
    if (sorted.empty() || permits == 0)
        return granted;

    const auto n = std::min(permits, sorted.size());
    auto it = std::lower_bound(sorted.begin(), sorted.end(), cursor_);
    for (std::size_t k = 0; k < n; ++k) {
        if (it == sorted.end())
            it = sorted.begin();
        granted.push_back(*it++);
    }
    cursor_ = granted.back() + 1;
    std::sort(granted.begin(), granted.end());
    return granted;
}

FridgePolicy effective_fridge_policy(const ScenarioConfig& config)
{
    FridgePolicy p = config.fridge_policy;
    if (config.coordinator != CoordinatorMode::Randomized) {
        p.act_probability = 1.0;
        p.resume_wait_max = 0;
    }
    return p;
}

Simulation::Simulation(ScenarioConfig config)
    : config_(std::move(config)), coordinator_(config_.coordinator)
{
    config_.validate();
    fridge_policy_ = effective_fridge_policy(config_);

    const std::size_t n = config_.n_agents;
    std::vector<Siemens> base(n), flex(n);
    for (std::size_t i = 0; i < n; ++i) {
        base[i] = 1.0 / config_.base_resistance(i);
        flex[i] = 1.0 / config_.flexible_resistance(i);
    }
    loads_ = LoadSet(std::move(base), std::move(flex));

    if (config_.kind == AgentKind::Fridge) {
        fridges_.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng(config_.seed, agent_stream(i), kInitCounter);
            fridges_.push_back(make_fridge(i, config_.fridge.on_duration,
                                           config_.fridge.off_duration,
                                           config_.fridge.effective_max_postpone(), rng));
            loads_.flexible_on[i] = fridges_.back().flexible_on();
        }
        fridge_steps_.resize(n);
    } else {
        const auto& w = config_.washer;
        washers_.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng(config_.seed, agent_stream(i), kInitCounter);
            const Price r0 = rng.uniform(w.reference_price_min, w.reference_price_max);
            washers_.push_back(make_washer(i, r0, w.job_length, w.day_length,
                                           w.effective_arrival_window(), rng));
        }
        washer_steps_.resize(n);

        const auto& m = *config_.market;
        if (m.price_file) {
            prices_ = load_price_series(*m.price_file, m.period_length);
        } else {
            const auto periods = std::max<std::size_t>(
                1, static_cast<std::size_t>((config_.n_ticks + m.period_length - 1) / m.period_length));
            prices_ = generate_price_series(m.process, periods, m.period_length, config_.seed);
        }
        last_period_share_ = m.feedback.baseline_share;
    }

    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});

    trace_.n_agents = n;
    trace_.rows.reserve(static_cast<std::size_t>(config_.n_ticks));
    rel_voltage_ = solve_bus_voltage(config_.source, 0, loads_) / config_.source.v_nominal;
}

void Simulation::set_evaluation_order(std::vector<std::size_t> order)
{
    auto check = order;
    std::sort(check.begin(), check.end());
    for (std::size_t i = 0; i < check.size(); ++i)
        if (check[i] != i)
            throw std::invalid_argument("evaluation order must be a permutation of agent ids");
    if (check.size() != config_.n_agents)
        throw std::invalid_argument("evaluation order must be a permutation of agent ids");
    order_ = std::move(order);
}

Price Simulation::current_price()
{
    const auto& m = *config_.market;
    const Price exogenous = prices_.at(tick_);
    if (m.feedback.slope == 0.0)
        return exogenous;

    const std::size_t k = prices_.period_of(tick_);
    if (!period_price_ || k != feedback_period_) {
        if (k > 0 && config_.n_agents > 0) {
            // mean demand share over the previous market period
            const Tick begin = static_cast<Tick>(k - 1) * m.period_length;
            const Tick end = std::min<Tick>(begin + m.period_length, tick_);
            double sum = 0.0;
            for (Tick t = begin; t < end; ++t)
                sum += static_cast<double>(trace_.rows[static_cast<std::size_t>(t)].n_flexible_on);
            if (end > begin)
                last_period_share_ =
                    sum / static_cast<double>((end - begin) * static_cast<Tick>(config_.n_agents));
        }
        feedback_period_ = k;
        period_price_ = price_with_feedback(exogenous, last_period_share_, m.feedback);
    }
    return *period_price_;
}

void Simulation::step_fridges(std::vector<std::size_t>& requests,
                              std::vector<std::size_t>& priority)
{
    for (std::size_t id : order_) {
        Rng rng(config_.seed, agent_stream(id), static_cast<std::uint64_t>(tick_));
        fridge_steps_[id] = fridge_step(fridges_[id], fridge_policy_, rel_voltage_, rng);
    }
    for (std::size_t id = 0; id < fridges_.size(); ++id) {
        const auto& s = fridge_steps_[id];
        if (s.switched_on)
            (s.forced ? priority : requests).push_back(id);
    }
}

void Simulation::step_washers(Price price, std::vector<std::size_t>& requests,
                              std::vector<std::size_t>& priority, std::size_t& vetoed)
{
    for (std::size_t id : order_) {
        Rng rng(config_.seed, agent_stream(id), static_cast<std::uint64_t>(tick_));
        washer_steps_[id] =
            washer_step(washers_[id], config_.washer_policy, price, rel_voltage_, tick_, rng);
    }
    for (std::size_t id = 0; id < washers_.size(); ++id) {
        const auto& s = washer_steps_[id];
        vetoed += s.vetoed ? 1 : 0;
        if (s.switched_on)
            (s.forced ? priority : requests).push_back(id);
    }
}

void Simulation::step()
{
    if (done())
        throw std::logic_error("simulation already reached n_ticks");

    TraceRow row;
    row.tick = tick_;

    std::vector<std::size_t> requests, priority;
    const bool is_fridge = config_.kind == AgentKind::Fridge;
    if (is_fridge) {
        step_fridges(requests, priority);
    } else {
        row.price = current_price();
        step_washers(*row.price, requests, priority, row.n_vetoed);
    }

    std::vector<std::uint8_t> denied(config_.n_agents, 0);
    std::vector<std::uint8_t> forced(config_.n_agents, 0);
    for (std::size_t id : priority)
        forced[id] = 1;
    if (coordinator_.mode() == CoordinatorMode::TimeDivision) {
        // must-run activations are served first, the rest share what is left
        const auto granted_priority = coordinator_.assign_permits(priority, config_.permits_per_tick);
        const auto left = config_.permits_per_tick - granted_priority.size();
        const auto granted = coordinator_.assign_permits(requests, left);
        for (std::size_t id : priority)
            denied[id] = !std::binary_search(granted_priority.begin(), granted_priority.end(), id);
        for (std::size_t id : requests)
            denied[id] = !std::binary_search(granted.begin(), granted.end(), id);
    }

    for (std::size_t id = 0; id < config_.n_agents; ++id) {
        bool on = false;
        if (is_fridge) {
            fridges_[id] = denied[id] ? fridge_hold(fridges_[id]) : fridge_steps_[id].agent;
            on = fridges_[id].flexible_on();
            row.n_postponed += fridges_[id].mode == FridgeMode::Postponed ? 1 : 0;
        } else {
            washers_[id] = denied[id] ? washer_hold(washer_steps_[id].agent) : washer_steps_[id].agent;
            on = washers_[id].flexible_on();
        }
        if (forced[id] && !denied[id])
            ++row.n_forced;
        loads_.flexible_on[id] = on ? 1 : 0;
    }

    row.bus_voltage = solve_bus_voltage(config_.source, tick_, loads_);
    row.rel_voltage = row.bus_voltage / config_.source.v_nominal;
    row.n_flexible_on = loads_.count_on();

    if (!is_fridge && !washers_.empty()) {
        const auto [lo, hi] = std::minmax_element(
            washers_.begin(), washers_.end(),
            [](const WasherAgent& a, const WasherAgent& b) { return a.reference_price < b.reference_price; });
        trace_.reference_spread.push_back(hi->reference_price - lo->reference_price);
    }

    trace_.rows.push_back(row);
    rel_voltage_ = row.rel_voltage;
    ++tick_;
}

const SimTrace& Simulation::run_to_end()
{
    while (!done())
        step();
    return trace_;
}

SimTrace run(const ScenarioConfig& config)
{
    Simulation sim(config);
    sim.run_to_end();
    return sim.trace();
}

}  // namespace gridsync
