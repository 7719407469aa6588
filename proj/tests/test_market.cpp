#include "gridsync/market.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace gridsync;

TEST(PriceSeries, StepFunctionOverPeriods)
{
    PriceSeries s{10, {1.0, 2.0, 3.0}};
    EXPECT_EQ(s.at(0), 1.0);
    EXPECT_EQ(s.at(9), 1.0);
    EXPECT_EQ(s.at(10), 2.0);
    EXPECT_EQ(s.at(29), 3.0);
    EXPECT_EQ(s.at(500), 3.0);  // last price holds
    EXPECT_EQ(s.period_of(25), 2u);
}

TEST(PriceProcess, SameSeedSameSeries)
{
    PriceProcessParams p;
    p.noise_std = 3.0;
    const auto a = generate_price_series(p, 500, 60, 99);
    const auto b = generate_price_series(p, 500, 60, 99);
    const auto c = generate_price_series(p, 500, 60, 100);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
}

TEST(PriceProcess, LongRunMeanAndNonNegativity)
{
    PriceProcessParams p;
    p.mean = 40.0;
    p.reversion = 0.2;
    p.noise_std = 2.0;
    const auto s = generate_price_series(p, 10000, 60, 5);
    const double mean = std::accumulate(s.prices.begin(), s.prices.end(), 0.0) / 10000.0;
    EXPECT_NEAR(mean, 40.0, 1.0);
    for (double x : s.prices)
        ASSERT_GE(x, 0.0);
}

TEST(PriceProcess, NoiseFreeReversionIsGeometric)
{
    PriceProcessParams p;
    p.mean = 40.0;
    p.reversion = 0.5;
    p.initial = 80.0;
    const auto s = generate_price_series(p, 6, 1, 1);
    for (std::size_t k = 0; k < 6; ++k)
        EXPECT_NEAR(s.prices[k], 40.0 + 40.0 * std::pow(0.5, static_cast<double>(k)), 1e-12);
}

TEST(PriceProcess, LowPriceEventsOverride)
{
    PriceProcessParams p;
    p.low_price_events = {{2, 5.0}, {3, 6.0}};
    const auto s = generate_price_series(p, 5, 60, 1);
    EXPECT_EQ(s.prices[1], 40.0);
    EXPECT_EQ(s.prices[2], 5.0);
    EXPECT_EQ(s.prices[3], 6.0);
    EXPECT_EQ(s.prices[4], 40.0);
}

TEST(PriceProcess, ClampsAtZero)
{
    PriceProcessParams p;
    p.mean = 0.5;
    p.noise_std = 10.0;
    const auto s = generate_price_series(p, 2000, 1, 3);
    EXPECT_EQ(*std::min_element(s.prices.begin(), s.prices.end()), 0.0);
}

TEST(Feedback, LinearAroundBaseline)
{
    FeedbackParams f{100.0, 0.2};
    EXPECT_DOUBLE_EQ(price_with_feedback(40.0, 0.2, f), 40.0);
    EXPECT_DOUBLE_EQ(price_with_feedback(40.0, 0.3, f), 50.0);
    EXPECT_DOUBLE_EQ(price_with_feedback(40.0, 0.0, f), 20.0);
    EXPECT_DOUBLE_EQ(price_with_feedback(10.0, 0.0, f), 0.0);
}

TEST(PriceCsv, RoundTrip)
{
    PriceSeries s{60, {40.0, 12.5, 0.0, 123.456789}};
    std::stringstream io;
    write_price_series(io, s);
    EXPECT_EQ(load_price_series(io, 60), s);
}

TEST(PriceCsv, HeaderOptionalAndBlankLinesIgnored)
{
    std::istringstream in("1.5\n\n2.5\n");
    const auto s = load_price_series(in, 30);
    EXPECT_EQ(s.prices, (std::vector<double>{1.5, 2.5}));
    EXPECT_EQ(s.period_length, 30);
}

TEST(PriceCsv, BadLineReportsLineNumber)
{
    std::istringstream in("price\n1.0\nabc\n");
    try {
        load_price_series(in, 60);
        FAIL() << "expected throw";
    } catch (const PriceParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(PriceCsv, NegativeAndEmptyRejected)
{
    std::istringstream neg("-1\n");
    EXPECT_THROW(load_price_series(neg, 60), PriceParseError);
    std::istringstream empty("price\n");
    EXPECT_THROW(load_price_series(empty, 60), PriceParseError);
}

TEST(PriceCsv, MissingFileIsIoFailure)
{
    EXPECT_THROW(load_price_series(std::string("/nonexistent/prices.csv"), 60),
                 std::ios_base::failure);
}

TEST(PriceProcess, ValidationRejectsBadReversion)
{
    PriceProcessParams p;
    p.reversion = 1.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}
