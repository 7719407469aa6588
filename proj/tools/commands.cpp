#include "commands.hpp"

#include "gridsync/analysis.hpp"
#include "gridsync/config.hpp"
#include "gridsync/engine.hpp"
#include "gridsync/rng.hpp"
#include "gridsync/text.hpp"
#include "gridsync/trace_io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <atomic>
#include <cctype>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

namespace gridsync::cli {

namespace fs = std::filesystem;

namespace {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw IoError("cannot create output directory " + dir.string());
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IoError("cannot open " + path.string() + " for writing");
    writer(f);
    f.flush();
    if (!f)
        throw IoError("failed writing " + path.string());
}

ScenarioConfig read_config(const std::string& path)
{
    if (!fs::is_regular_file(path))
        throw IoError("cannot read config file " + path);
    return load_config(path);
}

struct RunResult {
    SimTrace trace;
    StabilityReport report;
};

RunResult run_and_write(const ScenarioConfig& config, const fs::path& dir)
{
    RunResult r{run(config), {}};
    if (!r.trace.rows.empty())
        r.report = stability_metrics(r.trace, Band{config.band_low, config.band_high});

    ensure_dir(dir);
    write_file(dir / "trace.csv", [&](std::ostream& o) { write_trace_csv(o, r.trace); });
    write_file(dir / "report.csv", [&](std::ostream& o) { write_report_csv(o, r.report); });
    write_file(dir / "resolved.config", [&](std::ostream& o) { o << write_config(config); });
    if (config.kind == AgentKind::Washer)
        write_file(dir / "dispersion.csv", [&](std::ostream& o) { write_dispersion_csv(o, r.trace); });
    return r;
}

// Maps exceptions onto the exit-code contract.
template <typename F>
int guarded(std::ostream& err, F&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "error: invalid config: " << e.what() << '\n';
        return kInvalid;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInvalid;
    } catch (const PriceParseError& e) {
        err << "error: price file: " << e.what() << '\n';
        return kInvalid;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::ios_base::failure& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kInvalid;
    }
}

std::string sanitize(const std::string& s)
{
    std::string out;
    for (char c : s) {
        const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ||
                          c == '_' || c == '=';
        out += keep ? c : '_';
    }
    return out;
}

}  // namespace

fs::path resolve_output_dir(const std::string& out)
{
    fs::path p(out);
    if (p.is_relative()) {
        if (const char* root = std::getenv(kOutputRootEnv); root && *root)
            p = fs::path(root) / p;
    }
    return p;
}

std::uint64_t sweep_seed(std::uint64_t base_seed, std::size_t index)
{
    return base_seed ^ splitmix64(static_cast<std::uint64_t>(index));
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        auto config = read_config(opts.config_path);
        if (opts.seed)
            config.seed = *opts.seed;
        const auto dir = resolve_output_dir(opts.out_dir);
        const auto r = run_and_write(config, dir);
        out << fmt::format("wrote {} ticks to {}\n", r.trace.size(), dir.string());
        return static_cast<int>(kOk);
    });
}

int cmd_sweep(const SweepOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const auto base = read_config(opts.config_path);
        if (opts.values.empty())
            throw std::invalid_argument("sweep needs at least one value");

        // validate every row before running any of them
        std::vector<ScenarioConfig> configs;
        for (std::size_t i = 0; i < opts.values.size(); ++i) {
            auto seeded = base;
            seeded.seed = sweep_seed(base.seed, i);
            configs.push_back(with_parameter(seeded, opts.param, opts.values[i]));
        }

        const auto root = resolve_output_dir(opts.out_dir);
        ensure_dir(root);

        std::vector<StabilityReport> reports(configs.size());
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            for (std::size_t i = next++; i < configs.size(); i = next++) {
                try {
                    const auto dir = root / sanitize(opts.param + "=" + opts.values[i]);
                    reports[i] = run_and_write(configs[i], dir).report;
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        };
        const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(configs.size())));
        std::vector<std::jthread> pool;
        for (unsigned j = 1; j < jobs; ++j)
            pool.emplace_back(worker);
        worker();
        pool.clear();
        if (failure)
            std::rethrow_exception(failure);

        write_file(root / "sweep.csv", [&](std::ostream& o) {
            o << "value,min_rel_voltage,band_crossings,settling_tick,sync_index\n";
            for (std::size_t i = 0; i < reports.size(); ++i) {
                const auto& r = reports[i];
                o << opts.values[i] << ',' << format_decimal(r.min_rel_voltage) << ','
                  << r.band_crossings << ','
                  << (r.settling_tick ? std::to_string(*r.settling_tick) : "") << ','
                  << (r.sync_index ? format_decimal(*r.sync_index) : "") << '\n';
            }
        });
        out << fmt::format("swept {} over {} values into {}\n", opts.param, opts.values.size(),
                           root.string());
        return static_cast<int>(kOk);
    });
}

int cmd_analyze(const AnalyzeOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        std::ifstream in(opts.input_path);
        if (!in)
            throw IoError("cannot read " + opts.input_path);
        const auto profile = time_of_day_profile(in, opts.bin_width);

        const auto dir = resolve_output_dir(opts.out_dir);
        ensure_dir(dir);
        write_file(dir / "profile.csv", [&](std::ostream& o) { write_profile_csv(o, profile); });
        out << fmt::format("wrote {} bins to {}\n", profile.n_bins(), (dir / "profile.csv").string());
        if (opts.period)
            out << fmt::format("periodic_deviation_score({}) = {}\n", *opts.period,
                               format_decimal(detect_periodic_deviation(profile, *opts.period)));
        return static_cast<int>(kOk);
    });
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"gridsync: agent-based smart-appliance grid simulator"};
    app.require_subcommand(1);

    RunOptions run_opts;
    std::uint64_t seed = 0;
    auto* run_cmd = app.add_subcommand("run", "Run one scenario");
    run_cmd->add_option("--config", run_opts.config_path, "Scenario config file")->required();
    auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the config seed");
    run_cmd->add_option("--out", run_opts.out_dir, "Output directory");

    SweepOptions sweep_opts;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario once per parameter value");
    sweep_cmd->add_option("--config", sweep_opts.config_path, "Scenario config file")->required();
    sweep_cmd->add_option("--param", sweep_opts.param, "Parameter name, e.g. act_probability")
        ->required();
    sweep_cmd->add_option("--values", sweep_opts.values, "Comma-separated values")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--out", sweep_opts.out_dir, "Output directory");
    sweep_cmd->add_option("--jobs", sweep_opts.jobs, "Concurrent runs")->check(CLI::PositiveNumber);

    AnalyzeOptions analyze_opts;
    int period = 0;
    auto* analyze_cmd = app.add_subcommand("analyze", "Time-of-day profile of a frequency CSV");
    analyze_cmd->add_option("input", analyze_opts.input_path, "timestamp,value CSV")->required();
    analyze_cmd->add_option("--bin-width", analyze_opts.bin_width, "Bin width in seconds");
    auto* period_opt = analyze_cmd->add_option("--period", period, "Period in seconds to score");
    analyze_cmd->add_option("--out", analyze_opts.out_dir, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return kInvalid;
    }

    if (run_cmd->parsed()) {
        if (*seed_opt)
            run_opts.seed = seed;
        return cmd_run(run_opts, out, err);
    }
    if (sweep_cmd->parsed())
        return cmd_sweep(sweep_opts, out, err);
    if (*period_opt)
        analyze_opts.period = period;
    return cmd_analyze(analyze_opts, out, err);
}

}  // namespace gridsync::cli
