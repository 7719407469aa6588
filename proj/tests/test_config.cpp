#include "gridsync/config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

using namespace gridsync;

namespace {

const std::string kScenarioDir = GRIDSYNC_SCENARIO_DIR;

const char* kFridge = R"(
[run]
seed = 3
n_ticks = 100

[source]
v_source = 240
r_source = 0.1
v_nominal = 230
disturbances = 10:235, 50:240

[agents]
kind = fridge
count = 4
r_base = 200
r_flexible = 100, 110, 120, 130
on_duration = 4
off_duration = 6

[policy]
act_probability = 0.25
)";

ScenarioConfig parse(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

std::string field_of_error(const std::string& text)
{
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<no error>";
}

std::string replace(std::string text, const std::string& from, const std::string& to)
{
    text.replace(text.find(from), from.size(), to);
    return text;
}

}  // namespace

TEST(Config, ParsesFridgeScenario)
{
    const auto c = parse(kFridge);
    EXPECT_EQ(c.seed, 3u);
    EXPECT_EQ(c.n_ticks, 100);
    EXPECT_EQ(c.n_agents, 4u);
    EXPECT_EQ(c.kind, AgentKind::Fridge);
    EXPECT_EQ(c.source.disturbances, (std::vector<Disturbance>{{10, 235.0}, {50, 240.0}}));
    EXPECT_EQ(c.base_resistance(3), 200.0);
    EXPECT_EQ(c.flexible_resistance(2), 120.0);
    EXPECT_EQ(c.fridge.effective_max_postpone(), 18);
    EXPECT_EQ(c.fridge_policy.act_probability, 0.25);
    EXPECT_EQ(c.coordinator, CoordinatorMode::None);
    EXPECT_FALSE(c.market);
}

TEST(Config, WrittenConfigRoundTrips)
{
    const auto c = parse(kFridge);
    const auto text = write_config(c);
    const auto again = parse(text);
    EXPECT_EQ(write_config(again), text);
    EXPECT_EQ(again.flexible_resistance(1), 110.0);
    EXPECT_EQ(again.fridge_policy.act_probability, 0.25);
}

TEST(Config, ExactDoublesSurviveRoundTrip)
{
    auto c = parse(kFridge);
    c.fridge_policy.threshold_low = 0.1 + 0.2;  // not representable in few digits
    c.validate();
    const auto again = parse(write_config(c));
    EXPECT_EQ(again.fridge_policy.threshold_low, c.fridge_policy.threshold_low);
}

TEST(Config, ShippedScenariosLoadAndRoundTrip)
{
    int n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(kScenarioDir)) {
        if (entry.path().extension() != ".ini")
            continue;
        ++n;
        const auto c = load_config(entry.path().string());
        EXPECT_NO_THROW(c.validate()) << entry.path();
        EXPECT_EQ(write_config(parse(write_config(c))), write_config(c)) << entry.path();
    }
    EXPECT_GE(n, 5);
}

TEST(Config, ErrorsNameTheField)
{
    EXPECT_EQ(field_of_error(replace(kFridge, "act_probability = 0.25", "act_probability = 1.5")),
              "policy.act_probability");
    EXPECT_EQ(field_of_error(replace(kFridge, "r_source = 0.1", "r_source = 0")),
              "source.r_source");
    EXPECT_EQ(field_of_error(replace(kFridge, "n_ticks = 100", "n_ticks = many")), "run.n_ticks");
    EXPECT_EQ(field_of_error(replace(kFridge, "kind = fridge", "kind = toaster")), "agents.kind");
    EXPECT_EQ(field_of_error(replace(kFridge, "r_flexible = 100, 110, 120, 130", "r_flexible = 1, 2")),
              "agents.r_flexible");
}

TEST(Config, UnknownKeysAndSectionsRejected)
{
    EXPECT_EQ(field_of_error(replace(kFridge, "[policy]", "[policy]\nact_probabilty = 0.5")),
              "policy.act_probabilty");
    EXPECT_EQ(field_of_error(std::string(kFridge) + "\n[extras]\nx = 1\n"), "extras");
}

TEST(Config, MissingRequiredKey)
{
    EXPECT_EQ(field_of_error(replace(kFridge, "v_source = 240\n", "")), "source.v_source");
}

TEST(Config, MalformedIniRejected)
{
    EXPECT_THROW(parse("[run\nseed = 1\n"), ConfigError);
}

TEST(Config, KindSpecificSections)
{
    EXPECT_EQ(field_of_error(std::string(kFridge) + "\n[market]\nmean = 40\n"), "market");
    EXPECT_EQ(field_of_error(replace(replace(replace(kFridge, "kind = fridge", "kind = washer"),
                                             "on_duration = 4\n", ""),
                                     "off_duration = 6\n", "")),
              "policy.act_probability");
}

TEST(Config, WasherScenario)
{
    const auto c = load_config(kScenarioDir + "/price_spike.ini");
    EXPECT_EQ(c.kind, AgentKind::Washer);
    ASSERT_TRUE(c.market);
    EXPECT_EQ(c.market->period_length, 60);
    EXPECT_FALSE(c.washer_policy.voltage_check_enabled);
    const auto veto = load_config(kScenarioDir + "/price_spike_veto.ini");
    EXPECT_TRUE(veto.washer_policy.voltage_check_enabled);
}

TEST(Config, WithParameterOverridesOneField)
{
    const auto c = parse(kFridge);
    const auto p = with_parameter(c, "act_probability", "0.05");
    EXPECT_EQ(p.fridge_policy.act_probability, 0.05);
    EXPECT_EQ(p.seed, c.seed);
    EXPECT_EQ(with_parameter(c, "seed", "18446744073709551615").seed, 18446744073709551615ull);
    EXPECT_EQ(with_parameter(c, "max_postpone", "7").fridge.effective_max_postpone(), 7);
}

TEST(Config, WithParameterRejectsBadInput)
{
    const auto c = parse(kFridge);
    EXPECT_THROW(with_parameter(c, "nonsense", "1"), ConfigError);
    EXPECT_THROW(with_parameter(c, "act_probability", "2"), ConfigError);
    EXPECT_THROW(with_parameter(c, "bargain_factor", "0.5"), ConfigError);  // washer-only
    for (const auto& name : sweepable_parameters())
        EXPECT_FALSE(name.empty());
}

TEST(Config, MissingFileIsIoFailure)
{
    EXPECT_THROW(load_config("/nonexistent/scenario.ini"), std::ios_base::failure);
}
