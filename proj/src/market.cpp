#include "gridsync/market.hpp"

#include "gridsync/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace gridsync {

Price PriceSeries::at(Tick tick) const
{
    if (prices.empty())
        throw std::logic_error("price series is empty");
    return prices[std::min(period_of(tick), prices.size() - 1)];
}

void PriceSeries::validate() const
{
    if (period_length < 1)
        throw std::invalid_argument("market.period_length must be >= 1");
    for (Price p : prices)
        if (!std::isfinite(p) || p < 0.0)
            throw std::invalid_argument("price series: prices must be finite and >= 0");
}

void PriceProcessParams::validate() const
{
    if (!std::isfinite(mean) || mean < 0.0)
        throw std::invalid_argument("market.mean must be >= 0");
    if (!std::isfinite(reversion) || reversion < 0.0 || reversion > 1.0)
        throw std::invalid_argument("market.reversion must be in [0, 1]");
    if (!std::isfinite(noise_std) || noise_std < 0.0)
        throw std::invalid_argument("market.noise_std must be >= 0");
    if (initial && (!std::isfinite(*initial) || *initial < 0.0))
        throw std::invalid_argument("market.initial must be >= 0");
    for (const auto& e : low_price_events)
        if (!std::isfinite(e.price) || e.price < 0.0)
            throw std::invalid_argument("market.low_price_events: prices must be >= 0");
}

PriceSeries generate_price_series(const PriceProcessParams& params, std::size_t n_periods,
                                  Tick period_length, std::uint64_t seed)
{
    params.validate();
    if (n_periods < 1)
        throw std::invalid_argument("price series needs at least one period");

    PriceSeries series{period_length, {}};
    series.prices.reserve(n_periods);
    Price p = params.initial.value_or(params.mean);
    series.prices.push_back(p);
    for (std::size_t k = 1; k < n_periods; ++k) {
        double eps = 0.0;
        if (params.noise_std > 0.0) {
            Rng rng(seed, 0, k);
            eps = rng.normal();
        }
        p = std::max(0.0, p + params.reversion * (params.mean - p) + params.noise_std * eps);
        series.prices.push_back(p);
    }
    // overrides do not feed back into the recursion
    for (const auto& e : params.low_price_events)
        if (e.period < n_periods)
            series.prices[e.period] = e.price;
    series.validate();
    return series;
}

Price price_with_feedback(Price exogenous_price, double demand_share, const FeedbackParams& params)
{
    return std::max(0.0, exogenous_price + params.slope * (demand_share - params.baseline_share));
}

PriceSeries load_price_series(std::istream& in, Tick period_length)
{
    PriceSeries series{period_length, {}};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto field = trim(line);
        if (field.empty())
            continue;
        if (series.prices.empty() && line_no == 1 && field == "price")
            continue;
        const auto value = parse_double(field);
        if (!value)
            throw PriceParseError(fmt::format("line {}: cannot parse price '{}'", line_no, field),
                                  line_no);
        if (!std::isfinite(*value) || *value < 0.0)
            throw PriceParseError(fmt::format("line {}: price must be >= 0", line_no), line_no);
        series.prices.push_back(*value);
    }
    if (series.prices.empty())
        throw PriceParseError("no price data", line_no);
    series.validate();
    return series;
}

PriceSeries load_price_series(const std::string& path, Tick period_length)
{
    std::ifstream in(path);
    if (!in)
        throw std::ios_base::failure("cannot open price file " + path);
    return load_price_series(in, period_length);
}

void write_price_series(std::ostream& out, const PriceSeries& series)
{
    out << "price\n";
    for (Price p : series.prices)
        out << format_decimal(p) << '\n';
}

}  // namespace gridsync
