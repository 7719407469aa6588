#include "gridsync/config.hpp"

#include "gridsync/text.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gridsync {

const char* to_string(AgentKind kind)
{
    return kind == AgentKind::Fridge ? "fridge" : "washer";
}

const char* to_string(CoordinatorMode mode)
{
    switch (mode) {
    case CoordinatorMode::None: return "none";
    case CoordinatorMode::Randomized: return "randomized";
    case CoordinatorMode::TimeDivision: return "time_division";
    }
    return "?";
}

Ohms ScenarioConfig::base_resistance(std::size_t agent) const
{
    return r_base.size() == 1 ? r_base.front() : r_base.at(agent);
}

Ohms ScenarioConfig::flexible_resistance(std::size_t agent) const
{
    return r_flexible.size() == 1 ? r_flexible.front() : r_flexible.at(agent);
}

namespace {

// Turns a module-level std::invalid_argument ("section.key must ...") into a
// ConfigError carrying the field name.
template <typename F>
void rethrow_as_config_error(F&& check)
{
    try {
        check();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        const std::string field = msg.substr(0, msg.find_first_of(" :"));
        if (field.find('.') == std::string::npos)
            throw ConfigError("", msg);
        throw ConfigError(field, std::string(trim(msg.substr(field.size() + 1))));
    }
}

void check_resistances(const std::vector<Ohms>& r, std::size_t n_agents, const char* field)
{
    if (r.size() != 1 && r.size() != n_agents)
        throw ConfigError(field, fmt::format("expected one value or {} values, got {}", n_agents,
                                             r.size()));
    for (Ohms v : r)
        if (!std::isfinite(v) || v <= 0.0)
            throw ConfigError(field, "resistances must be finite and > 0");
}

}  // namespace

void ScenarioConfig::validate() const
{
    if (n_ticks < 0)
        throw ConfigError("run.n_ticks", "must be >= 0");
    if (!(std::isfinite(band_low) && std::isfinite(band_high) && band_low > 0.0 &&
          band_low < band_high))
        throw ConfigError("run.band_low", "band must satisfy 0 < band_low < band_high");
    rethrow_as_config_error([&] { source.validate(); });
    check_resistances(r_base, n_agents, "agents.r_base");
    check_resistances(r_flexible, n_agents, "agents.r_flexible");

    if (coordinator == CoordinatorMode::TimeDivision && permits_per_tick < 1)
        throw ConfigError("coordinator.permits_per_tick", "must be >= 1");

    if (kind == AgentKind::Fridge) {
        if (fridge.on_duration < 1)
            throw ConfigError("agents.on_duration", "must be >= 1");
        if (fridge.off_duration < 1)
            throw ConfigError("agents.off_duration", "must be >= 1");
        if (fridge.effective_max_postpone() < 0)
            throw ConfigError("agents.max_postpone", "must be >= 0");
        rethrow_as_config_error([&] { fridge_policy.validate(); });
        if (market)
            throw ConfigError("market", "fridge scenarios carry no market section");
    } else {
        if (washer.job_length < 1)
            throw ConfigError("agents.job_length", "must be >= 1");
        if (washer.day_length <= washer.job_length)
            throw ConfigError("agents.day_length", "must exceed agents.job_length");
        const Tick aw = washer.effective_arrival_window();
        if (aw < 0 || aw > washer.day_length - washer.job_length)
            throw ConfigError("agents.arrival_window", "must be in [0, day_length - job_length]");
        if (!(washer.reference_price_min > 0.0 &&
              washer.reference_price_max >= washer.reference_price_min &&
              std::isfinite(washer.reference_price_max)))
            throw ConfigError("agents.reference_price_min",
                              "need 0 < reference_price_min <= reference_price_max");
        rethrow_as_config_error([&] { washer_policy.validate(); });
        if (coordinator == CoordinatorMode::Randomized)
            throw ConfigError("coordinator.mode", "randomized coordination applies to fridges only");
        if (!market)
            throw ConfigError("market", "washer scenarios need a market section");
        if (market->period_length < 1)
            throw ConfigError("market.period_length", "must be >= 1");
        rethrow_as_config_error([&] { market->process.validate(); });
        if (!std::isfinite(market->feedback.slope))
            throw ConfigError("market.feedback_slope", "must be finite");
        if (!(market->feedback.baseline_share >= 0.0 && market->feedback.baseline_share <= 1.0))
            throw ConfigError("market.baseline_share", "must be in [0, 1]");
    }
}

// ---------------------------------------------------------------------------
// Document <-> config

ConfigDocument read_config_document(std::istream& in)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("", fmt::format("line {}: {}", e.line(), e.message()));
    }
    ConfigDocument doc;
    for (const auto& [section, body] : tree) {
        if (body.empty())
            throw ConfigError(section, "key outside of any section");
        auto& keys = doc[section];
        for (const auto& [key, value] : body)
            keys[key] = value.get_value<std::string>();
    }
    return doc;
}

namespace {

class SectionReader {
public:
    SectionReader(const ConfigDocument& doc, std::string section)
        : section_(std::move(section))
    {
        if (auto it = doc.find(section_); it != doc.end())
            remaining_ = it->second;
    }

    std::string field(const std::string& key) const { return section_ + "." + key; }

    std::optional<std::string> take(const std::string& key)
    {
        auto it = remaining_.find(key);
        if (it == remaining_.end())
            return std::nullopt;
        std::string v = it->second;
        remaining_.erase(it);
        return v;
    }

    std::string require(const std::string& key)
    {
        auto v = take(key);
        if (!v)
            throw ConfigError(field(key), "missing required key");
        return *v;
    }

    double number(const std::string& key, const std::string& raw) const
    {
        auto v = parse_double(raw);
        if (!v)
            throw ConfigError(field(key), "not a number: '" + raw + "'");
        return *v;
    }

    long long integer(const std::string& key, const std::string& raw) const
    {
        auto v = parse_int(raw);
        if (!v)
            throw ConfigError(field(key), "not an integer: '" + raw + "'");
        return *v;
    }

    template <typename T>
    void get(const std::string& key, T& out)
    {
        auto raw = take(key);
        if (!raw)
            return;
        if constexpr (std::is_same_v<T, double>) {
            out = number(key, *raw);
        } else if constexpr (std::is_same_v<T, bool>) {
            const auto v = trim(*raw);
            if (v == "true" || v == "yes" || v == "1")
                out = true;
            else if (v == "false" || v == "no" || v == "0")
                out = false;
            else
                throw ConfigError(field(key), "not a boolean: '" + *raw + "'");
        } else if constexpr (std::is_same_v<T, std::string>) {
            out = std::string(trim(*raw));
        } else if constexpr (std::is_unsigned_v<T>) {
            const auto v = parse_uint(*raw);
            if (!v)
                throw ConfigError(field(key), "not a non-negative integer: '" + *raw + "'");
            out = static_cast<T>(*v);
        } else {
            out = static_cast<T>(integer(key, *raw));
        }
    }

    template <typename T>
    void get(const std::string& key, std::optional<T>& out)
    {
        if (remaining_.contains(key)) {
            T v{};
            get(key, v);
            out = v;
        }
    }

    std::vector<double> numbers(const std::string& key, const std::string& raw) const
    {
        std::vector<double> out;
        for (auto item : split(raw, ','))
            out.push_back(number(key, std::string(item)));
        return out;
    }

    /// "a:b, c:d" pairs; empty string is an empty list.
    std::vector<std::pair<long long, double>> pairs(const std::string& key,
                                                    const std::string& raw) const
    {
        std::vector<std::pair<long long, double>> out;
        if (trim(raw).empty())
            return out;
        for (auto item : split(raw, ',')) {
            const auto parts = split(item, ':');
            if (parts.size() != 2)
                throw ConfigError(field(key), "expected 'index:value', got '" + std::string(item) + "'");
            out.emplace_back(integer(key, std::string(parts[0])),
                             number(key, std::string(parts[1])));
        }
        return out;
    }

    void finish(const char* context) const
    {
        if (!remaining_.empty())
            throw ConfigError(field(remaining_.begin()->first),
                              fmt::format("unknown key{}", context));
    }

private:
    std::string section_;
    std::map<std::string, std::string> remaining_;
};

}  // namespace

ScenarioConfig config_from_document(const ConfigDocument& doc, const std::string& base_dir)
{
    for (const auto& [section, keys] : doc) {
        static const std::vector<std::string> known = {"run",    "source",      "agents",
                                                       "policy", "coordinator", "market"};
        if (std::find(known.begin(), known.end(), section) == known.end())
            throw ConfigError(section, "unknown section");
    }

    ScenarioConfig c;

    SectionReader run(doc, "run");
    run.get("seed", c.seed);
    c.n_ticks = run.integer("n_ticks", run.require("n_ticks"));
    run.get("band_low", c.band_low);
    run.get("band_high", c.band_high);
    run.finish("");

    SectionReader src(doc, "source");
    c.source.v_source = src.number("v_source", src.require("v_source"));
    c.source.r_source = src.number("r_source", src.require("r_source"));
    c.source.v_nominal = src.number("v_nominal", src.require("v_nominal"));
    if (auto raw = src.take("disturbances"))
        for (auto [tick, volts] : src.pairs("disturbances", *raw))
            c.source.disturbances.push_back({tick, volts});
    src.finish("");

    SectionReader agents(doc, "agents");
    const std::string kind = std::string(trim(agents.require("kind")));
    if (kind == "fridge")
        c.kind = AgentKind::Fridge;
    else if (kind == "washer")
        c.kind = AgentKind::Washer;
    else
        throw ConfigError("agents.kind", "expected 'fridge' or 'washer', got '" + kind + "'");
    {
        const auto n = agents.integer("count", agents.require("count"));
        if (n < 0)
            throw ConfigError("agents.count", "must be >= 0");
        c.n_agents = static_cast<std::size_t>(n);
    }
    c.r_base = agents.numbers("r_base", agents.require("r_base"));
    c.r_flexible = agents.numbers("r_flexible", agents.require("r_flexible"));
    const char* kind_note = c.kind == AgentKind::Fridge ? " for fridge agents" : " for washer agents";
    if (c.kind == AgentKind::Fridge) {
        agents.get("on_duration", c.fridge.on_duration);
        agents.get("off_duration", c.fridge.off_duration);
        agents.get("max_postpone", c.fridge.max_postpone);
    } else {
        agents.get("job_length", c.washer.job_length);
        agents.get("day_length", c.washer.day_length);
        agents.get("arrival_window", c.washer.arrival_window);
        agents.get("reference_price_min", c.washer.reference_price_min);
        agents.get("reference_price_max", c.washer.reference_price_max);
    }
    agents.finish(kind_note);

    SectionReader policy(doc, "policy");
    if (c.kind == AgentKind::Fridge) {
        policy.get("reactive", c.fridge_policy.reactive);
        policy.get("threshold_low", c.fridge_policy.threshold_low);
        policy.get("threshold_high", c.fridge_policy.threshold_high);
        policy.get("act_probability", c.fridge_policy.act_probability);
        policy.get("resume_wait_max", c.fridge_policy.resume_wait_max);
    } else {
        policy.get("ewma_lambda", c.washer_policy.ewma_lambda);
        policy.get("bargain_factor", c.washer_policy.bargain_factor);
        policy.get("voltage_check", c.washer_policy.voltage_check_enabled);
        policy.get("voltage_limit", c.washer_policy.voltage_limit);
        policy.get("poll_probability", c.washer_policy.poll_probability);
    }
    policy.finish(kind_note);

    SectionReader coord(doc, "coordinator");
    if (auto raw = coord.take("mode")) {
        const auto m = trim(*raw);
        if (m == "none")
            c.coordinator = CoordinatorMode::None;
        else if (m == "randomized")
            c.coordinator = CoordinatorMode::Randomized;
        else if (m == "time_division")
            c.coordinator = CoordinatorMode::TimeDivision;
        else
            throw ConfigError("coordinator.mode",
                              "expected none, randomized or time_division, got '" + *raw + "'");
    }
    coord.get("permits_per_tick", c.permits_per_tick);
    coord.finish("");

    if (doc.contains("market")) {
        if (c.kind == AgentKind::Fridge)
            throw ConfigError("market", "fridge scenarios carry no market section");
        SectionReader mk(doc, "market");
        MarketConfig m;
        mk.get("period_length", m.period_length);
        mk.get("mean", m.process.mean);
        mk.get("reversion", m.process.reversion);
        mk.get("noise_std", m.process.noise_std);
        mk.get("initial", m.process.initial);
        if (auto raw = mk.take("low_price_events")) {
            for (auto [period, price] : mk.pairs("low_price_events", *raw)) {
                if (period < 0)
                    throw ConfigError("market.low_price_events", "period must be >= 0");
                m.process.low_price_events.push_back({static_cast<std::size_t>(period), price});
            }
        }
        if (auto raw = mk.take("price_file")) {
            std::filesystem::path p(std::string(trim(*raw)));
            if (p.is_relative())
                p = std::filesystem::path(base_dir) / p;
            m.price_file = std::filesystem::absolute(p).lexically_normal().string();
        }
        mk.get("feedback_slope", m.feedback.slope);
        mk.get("baseline_share", m.feedback.baseline_share);
        mk.finish("");
        c.market = m;
    }

    c.validate();
    return c;
}

ConfigDocument config_to_document(const ScenarioConfig& c)
{
    auto join_numbers = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += (i ? ", " : "") + format_exact(v[i]);
        return s;
    };
    auto boolean = [](bool b) { return std::string(b ? "true" : "false"); };

    ConfigDocument d;
    d["run"]["seed"] = std::to_string(c.seed);
    d["run"]["n_ticks"] = std::to_string(c.n_ticks);
    d["run"]["band_low"] = format_exact(c.band_low);
    d["run"]["band_high"] = format_exact(c.band_high);

    d["source"]["v_source"] = format_exact(c.source.v_source);
    d["source"]["r_source"] = format_exact(c.source.r_source);
    d["source"]["v_nominal"] = format_exact(c.source.v_nominal);
    {
        std::string s;
        for (std::size_t i = 0; i < c.source.disturbances.size(); ++i)
            s += fmt::format("{}{}:{}", i ? ", " : "", c.source.disturbances[i].tick,
                             format_exact(c.source.disturbances[i].v_source));
        d["source"]["disturbances"] = s;
    }

    auto& a = d["agents"];
    a["kind"] = to_string(c.kind);
    a["count"] = std::to_string(c.n_agents);
    a["r_base"] = join_numbers(c.r_base);
    a["r_flexible"] = join_numbers(c.r_flexible);
    auto& p = d["policy"];
    if (c.kind == AgentKind::Fridge) {
        a["on_duration"] = std::to_string(c.fridge.on_duration);
        a["off_duration"] = std::to_string(c.fridge.off_duration);
        a["max_postpone"] = std::to_string(c.fridge.effective_max_postpone());
        p["reactive"] = boolean(c.fridge_policy.reactive);
        p["threshold_low"] = format_exact(c.fridge_policy.threshold_low);
        p["threshold_high"] = format_exact(c.fridge_policy.threshold_high);
        p["act_probability"] = format_exact(c.fridge_policy.act_probability);
        p["resume_wait_max"] = std::to_string(c.fridge_policy.resume_wait_max);
    } else {
        a["job_length"] = std::to_string(c.washer.job_length);
        a["day_length"] = std::to_string(c.washer.day_length);
        a["arrival_window"] = std::to_string(c.washer.effective_arrival_window());
        a["reference_price_min"] = format_exact(c.washer.reference_price_min);
        a["reference_price_max"] = format_exact(c.washer.reference_price_max);
        p["ewma_lambda"] = format_exact(c.washer_policy.ewma_lambda);
        p["bargain_factor"] = format_exact(c.washer_policy.bargain_factor);
        p["voltage_check"] = boolean(c.washer_policy.voltage_check_enabled);
        p["voltage_limit"] = format_exact(c.washer_policy.voltage_limit);
        p["poll_probability"] = format_exact(c.washer_policy.poll_probability);
    }

    d["coordinator"]["mode"] = to_string(c.coordinator);
    d["coordinator"]["permits_per_tick"] = std::to_string(c.permits_per_tick);

    if (c.market) {
        auto& m = d["market"];
        m["period_length"] = std::to_string(c.market->period_length);
        m["mean"] = format_exact(c.market->process.mean);
        m["reversion"] = format_exact(c.market->process.reversion);
        m["noise_std"] = format_exact(c.market->process.noise_std);
        m["initial"] = format_exact(c.market->process.initial.value_or(c.market->process.mean));
        std::string ev;
        for (std::size_t i = 0; i < c.market->process.low_price_events.size(); ++i) {
            const auto& e = c.market->process.low_price_events[i];
            ev += fmt::format("{}{}:{}", i ? ", " : "", e.period, format_exact(e.price));
        }
        m["low_price_events"] = ev;
        if (c.market->price_file)
            m["price_file"] = *c.market->price_file;
        m["feedback_slope"] = format_exact(c.market->feedback.slope);
        m["baseline_share"] = format_exact(c.market->feedback.baseline_share);
    }
    return d;
}

void write_config_document(std::ostream& out, const ConfigDocument& doc)
{
    // fixed section order, keys sorted within a section
    static const std::vector<std::string> order = {"run",    "source",      "agents",
                                                   "policy", "coordinator", "market"};
    bool first = true;
    for (const auto& section : order) {
        auto it = doc.find(section);
        if (it == doc.end())
            continue;
        if (!first)
            out << '\n';
        first = false;
        out << '[' << section << "]\n";
        for (const auto& [key, value] : it->second)
            out << key << " = " << value << '\n';
    }
}

ScenarioConfig parse_config(std::istream& in, const std::string& base_dir)
{
    return config_from_document(read_config_document(in), base_dir);
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::ios_base::failure("cannot open config file " + path);
    const auto dir = std::filesystem::path(path).parent_path();
    return parse_config(in, dir.empty() ? std::string(".") : dir.string());
}

std::string write_config(const ScenarioConfig& config)
{
    std::ostringstream out;
    write_config_document(out, config_to_document(config));
    return out.str();
}

const std::vector<std::string>& sweepable_parameters()
{
    static const std::vector<std::string> names = {
        "seed",           "act_probability", "resume_wait_max",  "threshold_low",
        "threshold_high", "max_postpone",    "permits_per_tick", "bargain_factor",
        "ewma_lambda",    "voltage_limit",   "poll_probability", "feedback_slope",
    };
    return names;
}

ScenarioConfig with_parameter(const ScenarioConfig& config, const std::string& name,
                              const std::string& value)
{
    const auto& names = sweepable_parameters();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw ConfigError(name, "unknown or non-sweepable parameter");

    auto doc = config_to_document(config);
    for (auto& [section, keys] : doc) {
        if (auto it = keys.find(name); it != keys.end()) {
            it->second = value;
            return config_from_document(doc);
        }
    }
    throw ConfigError(name, fmt::format("parameter does not apply to {} scenarios",
                                        to_string(config.kind)));
}

}  // namespace gridsync
