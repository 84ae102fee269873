#include "mtlf/cli.hpp"

#include "mtlf/checkpoint.hpp"
#include "mtlf/errors.hpp"
#include "mtlf/seasonal.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <fmt/format.h>

#include <charconv>
#include <chrono>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace mtlf::cli {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError(fmt::format("config key '{}': invalid value '{}'", key, value));
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError(fmt::format("config key '{}': expected true/false, got '{}'", key, value));
}

void apply_key(CliConfig& c, std::string_view key, std::string_view value) {
    auto& train = c.pipeline.train;
    auto& ens = c.pipeline.ensemble;
    if (key == "data") c.data_path = std::string(value);
    else if (key == "out") c.output_dir = std::string(value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "threads") c.threads = parse_number<unsigned>(key, value);
    else if (key == "holdout_years") c.pipeline.holdout_years = parse_number<int>(key, value);
    else if (key == "epochs") train.epochs = parse_number<int>(key, value);
    else if (key == "lr") train.learning_rate = parse_number<double>(key, value);
    else if (key == "tau") train.tau = parse_number<double>(key, value);
    else if (key == "state_size") train.state_size = parse_number<std::size_t>(key, value);
    else if (key == "snapshots") train.snapshots = parse_number<int>(key, value);
    else if (key == "subsets") ens.subsets = parse_number<int>(key, value);
    else if (key == "runs") ens.runs = parse_number<int>(key, value);
    else if (key == "coverage") ens.coverage = parse_number<int>(key, value);
    else if (key == "verbosity") c.verbosity = parse_number<int>(key, value);
    else if (key == "members") c.write_members = parse_bool(key, value);
    else if (key == "checkpoints") c.write_checkpoints = parse_bool(key, value);
    else throw ConfigError(fmt::format("unknown config key '{}'", key));
}

std::string read_file(const std::filesystem::path& path, bool config) {
    std::ifstream in(path);
    if (!in) {
        const auto msg = fmt::format("cannot open {} file '{}'", config ? "config" : "data", path.string());
        if (config) throw ConfigError(msg);
        throw DataError(msg);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

pipeline::PipelineConfig resolved(const CliConfig& c) {
    auto p = c.pipeline;
    p.train.seed = c.seed;
    p.ensemble.master_seed = c.seed;
    p.ensemble.threads = c.threads;
    return p;
}

Corpus load(const CliConfig& c, std::ostream& log) {
    if (c.data_path.empty()) throw ConfigError("no data file given (--data)");
    if (!std::filesystem::exists(c.data_path))
        throw DataError(fmt::format("data file '{}' does not exist", c.data_path.string()));
    auto loaded = load_corpus(c.data_path);
    if (c.verbosity >= 1) {
        for (const auto& w : loaded.warnings) log << "warning: " << w << '\n';
        for (const auto& r : loaded.rejected) log << "rejected: " << r << '\n';
    }
    return std::move(loaded.corpus);
}

std::string forecasts_csv(const pipeline::PipelineResult& result) {
    std::string s = "series_id,month,forecast\n";
    for (const auto& r : result.series)
        for (std::size_t j = 0; j < kMonths; ++j) s += fmt::format("{},{},{:.6f}\n", r.series_id, j + 1, r.forecast[j]);
    return s;
}

std::string members_csv(const pipeline::PipelineResult& result) {
    std::string s = "series_id,run,subset,month,normalized_forecast\n";
    for (const auto& se : result.ensemble.series)
        for (const auto& m : se.members)
            for (std::size_t j = 0; j < kMonths; ++j)
                s += fmt::format("{},{},{},{},{:.10f}\n", se.series_id, m.run, m.subset, j + 1, m.forecast[j]);
    return s;
}

std::string train_log_jsonl(const pipeline::PipelineResult& result) {
    std::string s;
    for (const auto& rep : result.ensemble.replicas)
        for (const auto& rec : rep.log) {
            nlohmann::json j{{"run", rep.run}, {"subset", rep.subset}, {"epoch", rec.epoch}, {"mean_loss", rec.mean_loss}};
            s += j.dump() + '\n';
        }
    return s;
}

void write_manifest(const CliConfig& c, std::string_view command, double seconds) {
    std::string s = fmt::format("# mtlf {} {}\n# wall_time_seconds = {:.3f}\n", kVersion, command, seconds);
    s += "# Pass this file as --config to repeat the run.\n";
    s += to_config_text(c);
    write_file_atomic(c.output_dir / "manifest.txt", s);
}

void write_common_outputs(const CliConfig& c, const pipeline::PipelineResult& result) {
    write_file_atomic(c.output_dir / "forecasts.csv", forecasts_csv(result));
    write_file_atomic(c.output_dir / "train_log.jsonl", train_log_jsonl(result));
    if (c.write_members) write_file_atomic(c.output_dir / "members.csv", members_csv(result));
    if (c.write_checkpoints) {
        const auto dir = c.output_dir / "checkpoints";
        std::filesystem::create_directories(dir);
        for (const auto& rep : result.ensemble.replicas)
            for (const auto& ck : rep.checkpoints) {
                std::ostringstream ss;
                write_checkpoint(ss, ck);
                write_file_atomic(dir / fmt::format("r{}_k{}_e{}.json", rep.run, rep.subset,
                                                    ck.hyperparameters.at("epoch")),
                                  ss.str());
            }
    }
}

pipeline::PipelineResult run_and_write(const CliConfig& c, std::ostream& log, std::string_view command) {
    const auto start = std::chrono::steady_clock::now();
    const Corpus corpus = load(c, log);
    auto pc = resolved(c);
    pc.ensemble.keep_checkpoints = c.write_checkpoints;
    auto result = pipeline::run_pipeline(corpus, pc);
    std::filesystem::create_directories(c.output_dir);
    write_common_outputs(c, result);
    if (c.verbosity >= 1)
        for (const auto& w : result.warnings) log << "warning: " << w << '\n';
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(c, command, secs);
    return result;
}

std::string indexed_csv(std::string_view header, const std::vector<double>& v, std::size_t base = 0) {
    std::string s = fmt::format("{},value\n", header);
    for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{},{:.17g}\n", base + i, v[i]);
    return s;
}

} // namespace

void apply_config_text(CliConfig& config, std::string_view text, std::string_view source) {
    std::size_t lineno = 0;
    while (!text.empty()) {
        ++lineno;
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(fmt::format("{}:{}: expected key = value", source, lineno));
        try {
            apply_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("{}:{}: {}", source, lineno, e.what()));
        }
    }
}

std::string to_config_text(const CliConfig& c) {
    const auto& t = c.pipeline.train;
    const auto& e = c.pipeline.ensemble;
    std::string s;
    s += fmt::format("data = {}\n", c.data_path.string());
    s += fmt::format("out = {}\n", c.output_dir.string());
    s += fmt::format("seed = {}\n", c.seed);
    s += fmt::format("threads = {}\n", c.threads);
    s += fmt::format("holdout_years = {}\n", c.pipeline.holdout_years);
    s += fmt::format("epochs = {}\n", t.epochs);
    s += fmt::format("lr = {}\n", t.learning_rate);
    s += fmt::format("tau = {}\n", t.tau);
    s += fmt::format("state_size = {}\n", t.state_size);
    s += fmt::format("snapshots = {}\n", t.snapshots);
    s += fmt::format("subsets = {}\n", e.subsets);
    s += fmt::format("runs = {}\n", e.runs);
    s += fmt::format("coverage = {}\n", e.coverage);
    s += fmt::format("verbosity = {}\n", c.verbosity);
    s += fmt::format("members = {}\n", c.write_members);
    s += fmt::format("checkpoints = {}\n", c.write_checkpoints);
    return s;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError(fmt::format("cannot write '{}'", tmp.string()));
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError(fmt::format("write to '{}' failed", tmp.string()));
    }
    std::filesystem::rename(tmp, path);
}

void cmd_forecast(const CliConfig& c, std::ostream& log) {
    const auto result = run_and_write(c, log, "forecast");
    if (result.report) {
        std::ostringstream csv;
        metrics::write_report_csv(csv, *result.report);
        write_file_atomic(c.output_dir / "metrics.csv", csv.str());
    }
    if (c.verbosity >= 1)
        log << fmt::format("wrote {} forecasts to {}\n", result.series.size(),
                           (c.output_dir / "forecasts.csv").string());
}

void cmd_backtest(const CliConfig& c, std::ostream& log) {
    if (c.pipeline.holdout_years < 1) throw ConfigError("backtest needs --holdout-years >= 1");
    const auto result = run_and_write(c, log, "backtest");
    std::ostringstream csv, table;
    metrics::write_report_csv(csv, *result.report);
    metrics::write_report_table(table, *result.report);
    write_file_atomic(c.output_dir / "metrics.csv", csv.str());
    write_file_atomic(c.output_dir / "metrics.txt", table.str());
    if (c.verbosity >= 1) log << table.str();
}

void cmd_inspect(const CliConfig& c, std::string_view series_id, std::ostream& log) {
    const Corpus corpus = load(c, log);
    const auto* series = corpus.find(series_id);
    if (!series) throw DataError(fmt::format("unknown series id '{}'", series_id));
    const auto stats = build_yearly_stats(*series);
    const auto norm = normalize_series(*series);
    const auto state = seasonal::init_state(norm);
    const auto trace = seasonal::unroll_seasonal(state, norm.values);
    const auto x = seasonal::deseasonalize(norm.values, std::span(trace.components).first(norm.values.size()));

    std::filesystem::create_directories(c.output_dir);
    const std::string id(series_id);
    auto path = [&](std::string_view stage) { return c.output_dir / fmt::format("{}_{}.csv", id, stage); };
    write_file_atomic(path("z"), indexed_csv("t", series->values));
    write_file_atomic(path("zbar"), indexed_csv("year", stats.means, static_cast<std::size_t>(series->start_year)));
    write_file_atomic(path("sigma"), indexed_csv("year", stats.dispersions, static_cast<std::size_t>(series->start_year)));
    write_file_atomic(path("y"), indexed_csv("t", norm.values));
    write_file_atomic(path("s"), indexed_csv("t", trace.components));
    write_file_atomic(path("x"), indexed_csv("t", x));
    if (c.verbosity >= 1) log << fmt::format("wrote 6 stage files for '{}' to {}\n", id, c.output_dir.string());
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monthly electricity demand forecasting with ETS normalization and a residual dilated LSTM ensemble",
                 "mtlf"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    struct Flags {
        std::optional<std::string> config, data, out;
        std::optional<std::uint64_t> seed;
        std::optional<unsigned> threads;
        std::optional<int> holdout, epochs, snapshots, subsets, runs, coverage;
        std::optional<double> lr, tau;
        std::optional<std::size_t> state_size;
        bool members = false, checkpoints = false, quiet = false;
        int verbose = 0;
        std::string series;
    } f;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", f.config, "key = value config file");
        sub->add_option("--data", f.data, "demand CSV (series_id,year,month,value)");
        sub->add_option("--out", f.out, "output directory");
        sub->add_option("--seed", f.seed, "master seed");
        sub->add_option("--threads", f.threads, "replica threads (0 = all cores)");
        sub->add_option("--holdout-years", f.holdout, "years withheld for scoring");
        sub->add_option("--epochs", f.epochs, "training epochs");
        sub->add_option("--lr", f.lr, "SGD learning rate");
        sub->add_option("--tau", f.tau, "pinball loss asymmetry");
        sub->add_option("--state-size", f.state_size, "LSTM cell/hidden size m");
        sub->add_option("--snapshots", f.snapshots, "epoch snapshots averaged (L)");
        sub->add_option("--subsets", f.subsets, "subset models per run (K)");
        sub->add_option("--runs", f.runs, "independent runs (R)");
        sub->add_option("--coverage", f.coverage, "subsets per series (c)");
        sub->add_flag("--members", f.members, "also write members.csv");
        sub->add_flag("--checkpoints", f.checkpoints, "also write per-replica checkpoints");
        sub->add_flag("-v,--verbose", f.verbose, "more output");
        sub->add_flag("-q,--quiet", f.quiet, "no progress output");
    };
    auto* forecast = app.add_subcommand("forecast", "forecast the year after the data");
    auto* backtest = app.add_subcommand("backtest", "withhold the last year(s) and score the forecast");
    auto* inspect = app.add_subcommand("inspect", "dump the preprocessing stages of one series");
    common(forecast);
    common(backtest);
    common(inspect);
    inspect->add_option("--series", f.series, "series id")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kOk : kConfigFailure;
    }

    try {
        CliConfig c;
        c.pipeline.holdout_years = backtest->parsed() ? 1 : 0;
        if (f.config) apply_config_text(c, read_file(*f.config, true), *f.config);
        if (f.data) c.data_path = *f.data;
        if (f.out) c.output_dir = *f.out;
        if (f.seed) c.seed = *f.seed;
        if (f.threads) c.threads = *f.threads;
        if (f.holdout) c.pipeline.holdout_years = *f.holdout;
        if (f.epochs) c.pipeline.train.epochs = *f.epochs;
        if (f.lr) c.pipeline.train.learning_rate = *f.lr;
        if (f.tau) c.pipeline.train.tau = *f.tau;
        if (f.state_size) c.pipeline.train.state_size = *f.state_size;
        if (f.snapshots) c.pipeline.train.snapshots = *f.snapshots;
        if (f.subsets) c.pipeline.ensemble.subsets = *f.subsets;
        if (f.runs) c.pipeline.ensemble.runs = *f.runs;
        if (f.coverage) c.pipeline.ensemble.coverage = *f.coverage;
        if (f.members) c.write_members = true;
        if (f.checkpoints) c.write_checkpoints = true;
        c.verbosity += f.verbose;
        if (f.quiet) c.verbosity = 0;
        resolved(c).validate();

        if (forecast->parsed()) cmd_forecast(c, err);
        else if (backtest->parsed()) cmd_backtest(c, err);
        else cmd_inspect(c, f.series, err);
        return kOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataFailure;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << '\n';
        return kNumericFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

} // namespace mtlf::cli
