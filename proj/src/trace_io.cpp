#include "gridsync/trace_io.hpp"

#include "gridsync/text.hpp"

#include <fmt/format.h>

#include <istream>
#include <ostream>
#include <string>

namespace gridsync {

namespace {

constexpr const char* kTraceHeader =
    "tick,bus_voltage,rel_voltage,n_flexible_on,price,n_postponed,n_vetoed,n_forced";
constexpr const char* kReportHeader =
    "min_rel_voltage,max_rel_voltage,band_crossings,settling_tick,sync_index,"
    "expectation_dispersion_final";

template <typename T>
std::string optional_field(const std::optional<T>& v)
{
    if (!v)
        return {};
    if constexpr (std::is_floating_point_v<T>)
        return format_decimal(*v);
    else
        return std::to_string(*v);
}

[[noreturn]] void bad_line(std::size_t line_no, const std::string& what)
{
    throw ParseError(fmt::format("line {}: {}", line_no, what), line_no);
}

std::size_t count_field(std::string_view f, std::size_t line_no)
{
    const auto v = parse_int(f);
    if (!v || *v < 0)
        bad_line(line_no, "bad count '" + std::string(f) + "'");
    return static_cast<std::size_t>(*v);
}

double number_field(std::string_view f, std::size_t line_no)
{
    const auto v = parse_double(f);
    if (!v)
        bad_line(line_no, "bad number '" + std::string(f) + "'");
    return *v;
}

}  // namespace

void write_trace_csv(std::ostream& out, const SimTrace& trace)
{
    out << kTraceHeader << '\n';
    for (const auto& r : trace.rows) {
        out << r.tick << ',' << format_decimal(r.bus_voltage) << ','
            << format_decimal(r.rel_voltage) << ',' << r.n_flexible_on << ','
            << optional_field(r.price) << ',' << r.n_postponed << ',' << r.n_vetoed << ','
            << r.n_forced << '\n';
    }
}

SimTrace read_trace_csv(std::istream& in)
{
    SimTrace trace;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1) {
            if (trim(line) != kTraceHeader)
                bad_line(line_no, "unexpected trace header");
            continue;
        }
        if (trim(line).empty())
            continue;
        const auto f = split(line, ',');
        if (f.size() != 8)
            bad_line(line_no, "expected 8 columns");
        TraceRow r;
        const auto tick = parse_int(f[0]);
        if (!tick)
            bad_line(line_no, "bad tick");
        r.tick = *tick;
        r.bus_voltage = number_field(f[1], line_no);
        r.rel_voltage = number_field(f[2], line_no);
        r.n_flexible_on = count_field(f[3], line_no);
        if (!f[4].empty())
            r.price = number_field(f[4], line_no);
        r.n_postponed = count_field(f[5], line_no);
        r.n_vetoed = count_field(f[6], line_no);
        r.n_forced = count_field(f[7], line_no);
        trace.rows.push_back(r);
    }
    if (line_no == 0)
        throw ParseError("empty trace file", 0);
    return trace;
}

void write_report_csv(std::ostream& out, const StabilityReport& report)
{
    std::optional<double> dispersion;
    if (!report.expectation_dispersion.empty())
        dispersion = report.expectation_dispersion.back();
    out << kReportHeader << '\n'
        << format_decimal(report.min_rel_voltage) << ',' << format_decimal(report.max_rel_voltage)
        << ',' << report.band_crossings << ',' << optional_field(report.settling_tick) << ','
        << optional_field(report.sync_index) << ',' << optional_field(dispersion) << '\n';
}

StabilityReport read_report_csv(std::istream& in)
{
    std::string header, line;
    if (!std::getline(in, header) || trim(header) != kReportHeader)
        bad_line(1, "unexpected report header");
    if (!std::getline(in, line))
        bad_line(2, "missing report row");
    const auto f = split(line, ',');
    if (f.size() != 6)
        bad_line(2, "expected 6 columns");
    StabilityReport r;
    r.min_rel_voltage = number_field(f[0], 2);
    r.max_rel_voltage = number_field(f[1], 2);
    r.band_crossings = count_field(f[2], 2);
    if (!f[3].empty())
        r.settling_tick = static_cast<Tick>(count_field(f[3], 2));
    if (!f[4].empty())
        r.sync_index = number_field(f[4], 2);
    if (!f[5].empty())
        r.expectation_dispersion.push_back(number_field(f[5], 2));
    return r;
}

void write_dispersion_csv(std::ostream& out, const SimTrace& trace)
{
    out << "tick,reference_spread\n";
    for (std::size_t i = 0; i < trace.reference_spread.size(); ++i)
        out << trace.rows[i].tick << ',' << format_decimal(trace.reference_spread[i]) << '\n';
}

}  // namespace gridsync
