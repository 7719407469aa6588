#include "gridsync/analysis.hpp"

#include "gridsync/engine.hpp"
#include "gridsync/text.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <initializer_list>
#include <istream>
#include <ostream>

namespace gridsync {

namespace {

enum class Side { Below, Inside, Above };

Side classify(double v, Band band)
{
    if (v < band.low)
        return Side::Below;
    if (v > band.high)
        return Side::Above;
    return Side::Inside;
}

}  // namespace

std::size_t count_band_crossings(std::span<const double> rel_voltage, Band band)
{
    std::size_t crossings = 0;
    Side prev = Side::Inside;
    for (double v : rel_voltage) {
        const Side s = classify(v, band);
        if (s != Side::Inside && s != prev)
            ++crossings;
        prev = s;
    }
    return crossings;
}

std::optional<std::size_t> settling_index(std::span<const double> rel_voltage, Band band)
{
    if (rel_voltage.empty() || !band.contains(rel_voltage.back()))
        return std::nullopt;
    std::size_t i = rel_voltage.size() - 1;
    while (i > 0 && band.contains(rel_voltage[i - 1]))
        --i;
    return i;
}

StabilityReport stability_metrics(std::span<const double> rel_voltage, Band band, Tick first_tick)
{
    if (rel_voltage.empty())
        throw std::invalid_argument("stability metrics of an empty trace");
    if (!(band.low > 0.0 && band.low < band.high))
        throw std::invalid_argument("band must satisfy 0 < low < high");

    StabilityReport r;
    const auto [lo, hi] = std::minmax_element(rel_voltage.begin(), rel_voltage.end());
    r.min_rel_voltage = *lo;
    r.max_rel_voltage = *hi;
    r.band_crossings = count_band_crossings(rel_voltage, band);
    if (auto i = settling_index(rel_voltage, band))
        r.settling_tick = first_tick + static_cast<Tick>(*i);
    return r;
}

StabilityReport stability_metrics(const SimTrace& trace, Band band)
{
    const auto rel = trace.rel_voltages();
    auto r = stability_metrics(rel, band, trace.rows.empty() ? 0 : trace.rows.front().tick);
    const auto on = trace.flexible_on_counts();
    r.sync_index = synchronization_index(on, trace.n_agents);
    r.expectation_dispersion = trace.reference_spread;
    return r;
}

std::optional<double> synchronization_index(std::span<const double> n_flexible_on,
                                            std::size_t n_agents)
{
    if (n_flexible_on.size() < 2 || n_agents == 0)
        return std::nullopt;
    RunningStats s;
    for (double x : n_flexible_on)
        s.add(x);
    const double n = static_cast<double>(n_agents);
    const double p_hat = s.mean() / n;
    if (!(p_hat > 0.0 && p_hat < 1.0))
        return std::nullopt;
    return s.stddev() / std::sqrt(n * p_hat * (1.0 - p_hat));
}

// ---------------------------------------------------------------------------

void RunningStats::add(double x)
{
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other)
{
    if (other.count_ == 0)
        return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(count_);
    const double nb = static_cast<double>(other.count_);
    const double n = na + nb;
    const double delta = other.mean_ - mean_;
    mean_ += delta * nb / n;
    m2_ += other.m2_ + delta * delta * na * nb / n;
    count_ += other.count_;
}

double RunningStats::stddev() const { return std::sqrt(std::max(0.0, variance())); }

TimeOfDayProfile::TimeOfDayProfile(int bin_width_seconds) : bin_width(bin_width_seconds)
{
    if (bin_width < 1 || kSecondsPerDay % bin_width != 0)
        throw std::invalid_argument(
            fmt::format("bin width {} s does not divide a day of 86400 s", bin_width));
    bins.resize(static_cast<std::size_t>(kSecondsPerDay / bin_width));
}

void TimeOfDayProfile::add(double seconds_of_day, double value)
{
    auto s = static_cast<long long>(std::floor(seconds_of_day));
    s = std::clamp<long long>(s, 0, kSecondsPerDay - 1);
    bins[static_cast<std::size_t>(s / bin_width)].add(value);
}

void TimeOfDayProfile::merge(const TimeOfDayProfile& other)
{
    if (other.bin_width != bin_width)
        throw std::invalid_argument("cannot merge profiles with different bin widths");
    for (std::size_t i = 0; i < bins.size(); ++i)
        bins[i].merge(other.bins[i]);
}

std::optional<double> seconds_of_day(std::string_view ts)
{
    ts = trim(ts);
    if (ts.empty())
        return std::nullopt;

    const bool iso = ts.size() >= 10 && ts[4] == '-' && ts[7] == '-';
    if (!iso) {
        const auto epoch = parse_double(ts);
        if (!epoch || !std::isfinite(*epoch))
            return std::nullopt;
        const double day = static_cast<double>(kSecondsPerDay);
        const double s = std::fmod(*epoch, day);
        return s < 0.0 ? s + day : s;
    }

    // YYYY-MM-DD[T ]hh:mm:ss[.fff][Z|+hh:mm|-hh:mm]
    auto digits = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        if (pos + len > ts.size())
            return std::nullopt;
        int v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(ts[i])))
                return std::nullopt;
            v = v * 10 + (ts[i] - '0');
        }
        return v;
    };
    const auto year = digits(0, 4), month = digits(5, 2), day = digits(8, 2);
    if (!year || !month || !day || *month < 1 || *month > 12 || *day < 1 || *day > 31)
        return std::nullopt;
    if (ts.size() < 19 || (ts[10] != 'T' && ts[10] != ' ') || ts[13] != ':' || ts[16] != ':')
        return std::nullopt;
    const auto hh = digits(11, 2), mm = digits(14, 2), ss = digits(17, 2);
    if (!hh || !mm || !ss || *hh > 23 || *mm > 59 || *ss > 60)
        return std::nullopt;

    std::size_t pos = 19;
    double fraction = 0.0;
    if (pos < ts.size() && ts[pos] == '.') {
        const auto start = pos;
        ++pos;
        while (pos < ts.size() && std::isdigit(static_cast<unsigned char>(ts[pos])))
            ++pos;
        if (pos == start + 1)
            return std::nullopt;
        fraction = *parse_double(ts.substr(start, pos - start));
    }
    const auto zone = ts.substr(pos);
    if (!(zone.empty() || zone == "Z" ||
          (zone.size() == 6 && (zone[0] == '+' || zone[0] == '-') && zone[3] == ':' &&
           digits(pos + 1, 2) && digits(pos + 4, 2))))
        return std::nullopt;

    return static_cast<double>(*hh * 3600 + *mm * 60 + std::min(*ss, 59)) + fraction;
}

TimeOfDayProfile time_of_day_profile(std::istream& csv, int bin_width)
{
    TimeOfDayProfile profile(bin_width);
    std::string line;
    std::size_t line_no = 0;
    std::size_t ts_col = 0, value_col = 1;
    bool first = true;
    while (std::getline(csv, line)) {
        ++line_no;
        if (trim(line).empty())
            continue;
        const auto fields = split(line, ',');
        if (first) {
            first = false;
            if (!seconds_of_day(fields[0]) || fields.size() < 2 || !parse_double(fields[1])) {
                auto column = [&](std::initializer_list<std::string_view> names) {
                    for (std::size_t i = 0; i < fields.size(); ++i)
                        for (auto n : names)
                            if (fields[i] == n)
                                return std::optional<std::size_t>(i);
                    return std::optional<std::size_t>{};
                };
                ts_col = column({"timestamp", "time"}).value_or(0);
                value_col = column({"value", "frequency"}).value_or(ts_col == 0 ? 1 : 0);
                if (fields.size() < 2 || ts_col == value_col)
                    throw ParseError(
                        fmt::format("line {}: header needs a timestamp and a value column", line_no),
                        line_no);
                continue;
            }
        }
        if (fields.size() <= std::max(ts_col, value_col))
            throw ParseError(fmt::format("line {}: expected timestamp and value columns", line_no),
                             line_no);
        const auto sod = seconds_of_day(fields[ts_col]);
        if (!sod)
            throw ParseError(fmt::format("line {}: unparseable timestamp '{}'", line_no,
                                         fields[ts_col]),
                             line_no);
        const auto value = parse_double(fields[value_col]);
        if (!value || !std::isfinite(*value))
            throw ParseError(
                fmt::format("line {}: unparseable value '{}'", line_no, fields[value_col]), line_no);
        profile.add(*sod, *value);
    }
    return profile;
}

double detect_periodic_deviation(const TimeOfDayProfile& profile, int period)
{
    if (period <= 0 || period % profile.bin_width != 0)
        throw std::invalid_argument(fmt::format("period {} s is not a multiple of the bin width {} s",
                                                period, profile.bin_width));
    RunningStats level;
    for (std::size_t i = 0; i < profile.n_bins(); ++i)
        if (!profile.missing(i))
            level.add(profile.bins[i].mean());
    if (level.count() == 0)
        throw std::invalid_argument("profile has no data: every bin is missing");

    RunningStats at_boundary, elsewhere;
    for (std::size_t i = 0; i < profile.n_bins(); ++i) {
        if (profile.missing(i))
            continue;
        const double dev = std::abs(profile.bins[i].mean() - level.mean());
        (profile.bin_start(i) % period == 0 ? at_boundary : elsewhere).add(dev);
    }
    if (at_boundary.count() == 0)
        throw std::invalid_argument("profile has no data at period boundaries");
    return at_boundary.mean() - elsewhere.mean();
}

void write_profile_csv(std::ostream& out, const TimeOfDayProfile& profile)
{
    out << "bin_start_seconds,mean,std,count\n";
    for (std::size_t i = 0; i < profile.n_bins(); ++i) {
        const auto& b = profile.bins[i];
        if (b.count() == 0)
            out << profile.bin_start(i) << ",,,0\n";
        else
            out << profile.bin_start(i) << ',' << format_decimal(b.mean()) << ','
                << format_decimal(b.stddev()) << ',' << b.count() << '\n';
    }
}

std::vector<ProfileRow> read_profile_csv(std::istream& in)
{
    std::vector<ProfileRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || trim(line).empty())
            continue;
        const auto f = split(line, ',');
        if (f.size() != 4)
            throw ParseError(fmt::format("line {}: expected 4 columns", line_no), line_no);
        ProfileRow r;
        const auto start = parse_int(f[0]);
        const auto count = parse_int(f[3]);
        if (!start || !count || *count < 0)
            throw ParseError(fmt::format("line {}: bad bin start or count", line_no), line_no);
        r.bin_start_seconds = static_cast<int>(*start);
        r.count = static_cast<std::uint64_t>(*count);
        if (!f[1].empty()) {
            r.mean = parse_double(f[1]);
            r.std = parse_double(f[2]);
            if (!r.mean || !r.std)
                throw ParseError(fmt::format("line {}: bad mean or std", line_no), line_no);
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace gridsync
