#pragma once

// Information layer price signal: a step function over market periods.

#include "gridsync/circuit.hpp"
#include "gridsync/rng.hpp"

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridsync {

using Price = double;

struct PriceSeries {
    Tick period_length = 1;
    std::vector<Price> prices;

    std::size_t n_periods() const { return prices.size(); }
    std::size_t period_of(Tick tick) const
    {
        return static_cast<std::size_t>(tick / period_length);
    }
    /// Price in force at tick; past the last period the last price holds.
    Price at(Tick tick) const;
    void validate() const;

    friend bool operator==(const PriceSeries&, const PriceSeries&) = default;
};

struct PriceEvent {
    std::size_t period = 0;
    Price price = 0.0;

    friend bool operator==(const PriceEvent&, const PriceEvent&) = default;
};

struct PriceProcessParams {
    Price mean = 40.0;
    double reversion = 0.2;
    Price noise_std = 0.0;
    std::optional<Price> initial;  // p_0; defaults to mean
    std::vector<PriceEvent> low_price_events;

    void validate() const;
};

/// Mean-reverting AR(1) clamped at zero, then overrides. One normal draw per
/// period from stream (seed, 0, period), so the series is a pure function of
/// (params, n_periods, seed).
PriceSeries generate_price_series(const PriceProcessParams& params, std::size_t n_periods,
                                  Tick period_length, std::uint64_t seed);

struct FeedbackParams {
    double slope = 0.0;           // currency per unit of demand share
    double baseline_share = 0.0;  // demand share that leaves the price unchanged
};

Price price_with_feedback(Price exogenous_price, double demand_share, const FeedbackParams& params);

class PriceParseError : public std::runtime_error {
public:
    PriceParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what), line_(line)
    {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// One decimal price per line, optional `price` header, blank lines ignored.
PriceSeries load_price_series(std::istream& in, Tick period_length);
PriceSeries load_price_series(const std::string& path, Tick period_length);

/// Writes the `price` header and one value per line at 9 significant digits.
void write_price_series(std::ostream& out, const PriceSeries& series);

}  // namespace gridsync
