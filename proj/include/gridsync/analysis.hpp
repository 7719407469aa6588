#pragma once

// Metrics over simulation traces and time-of-day profiles over measured
// frequency (or any scalar) series.

#include "gridsync/circuit.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridsync {

struct SimTrace;

struct Band {
    double low = 0.98;
    double high = 1.02;

    bool contains(double v) const { return v >= low && v <= high; }
};

struct StabilityReport {
    double min_rel_voltage = 0.0;
    double max_rel_voltage = 0.0;
    std::size_t band_crossings = 0;
    std::optional<Tick> settling_tick;
    std::optional<double> sync_index;
    std::vector<double> expectation_dispersion;
};

/// Band exits over a series. The state before the first sample counts as
/// in-band, and a jump straight from below the band to above it (or back)
/// counts as an exit through the other edge.
std::size_t count_band_crossings(std::span<const double> rel_voltage, Band band);

/// Index of the first sample of the final in-band run, or nullopt when the
/// series ends outside the band.
std::optional<std::size_t> settling_index(std::span<const double> rel_voltage, Band band);

/// Min/max/crossings/settling over a window of samples whose first element
/// is at tick `first_tick`. Throws std::invalid_argument on an empty window.
StabilityReport stability_metrics(std::span<const double> rel_voltage, Band band,
                                  Tick first_tick = 0);

/// Full report for a trace, including the synchronization index over the
/// whole run and the expectation dispersion series of washer runs.
StabilityReport stability_metrics(const SimTrace& trace, Band band);

/// Standard deviation of the number of active flexible loads, normalized by
/// the independent-Bernoulli value sqrt(N p (1 - p)). nullopt when undefined
/// (fewer than two samples, no agents, or p at 0 or 1).
std::optional<double> synchronization_index(std::span<const double> n_flexible_on,
                                            std::size_t n_agents);

// ---------------------------------------------------------------------------
// Time-of-day profiles

/// Welford accumulator with Chan's pairwise merge.
class RunningStats {
public:
    void add(double x);
    void merge(const RunningStats& other);

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }
    /// Population variance.
    double variance() const { return count_ > 0 ? m2_ / static_cast<double>(count_) : 0.0; }
    double stddev() const;

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

constexpr int kSecondsPerDay = 86400;

struct TimeOfDayProfile {
    int bin_width = 1;
    std::vector<RunningStats> bins;

    explicit TimeOfDayProfile(int bin_width_seconds = 1);

    std::size_t n_bins() const { return bins.size(); }
    int bin_start(std::size_t bin) const { return static_cast<int>(bin) * bin_width; }
    bool missing(std::size_t bin) const { return bins[bin].count() == 0; }

    void add(double seconds_of_day, double value);
    void merge(const TimeOfDayProfile& other);
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(what), line_(line)
    {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Seconds since (wall-clock) midnight. Accepts epoch seconds (UTC) or
/// ISO-8601 `YYYY-MM-DD[T ]hh:mm:ss[.fff][Z|+hh:mm]`, whose written clock
/// time is used as is. A leap second (:60) falls into the last second of
/// its minute.
std::optional<double> seconds_of_day(std::string_view timestamp);

/// Reads `timestamp,value` CSV into a profile. The header is optional;
/// columns are found by name (timestamp/time, value/frequency).
TimeOfDayProfile time_of_day_profile(std::istream& csv, int bin_width);

/// Mean absolute deviation (from the profile's mean level) of the bins at
/// period boundaries minus that of all other bins.
double detect_periodic_deviation(const TimeOfDayProfile& profile, int period);

/// `bin_start_seconds,mean,std,count`; missing bins leave mean/std empty.
void write_profile_csv(std::ostream& out, const TimeOfDayProfile& profile);

struct ProfileRow {
    int bin_start_seconds = 0;
    std::optional<double> mean;
    std::optional<double> std;
    std::uint64_t count = 0;
};
std::vector<ProfileRow> read_profile_csv(std::istream& in);

}  // namespace gridsync
