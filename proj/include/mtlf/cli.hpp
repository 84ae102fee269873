#pragma once

#include "mtlf/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mtlf::cli {

inline constexpr std::string_view kVersion = "1.0.0";

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigFailure = 2,
    kDataFailure = 3,
    kNumericFailure = 4,
};

struct CliConfig {
    std::filesystem::path data_path;
    std::filesystem::path output_dir = ".";
    pipeline::PipelineConfig pipeline{};
    std::uint64_t seed = 0;
    unsigned threads = 0; // 0 = all cores
    int verbosity = 1;
    bool write_members = false;
    bool write_checkpoints = false;
};

// Applies `key = value` lines ('#' starts a comment) on top of `config`.
// Keys: data, out, seed, threads, holdout_years, epochs, lr, tau,
// state_size, snapshots, subsets, runs, coverage, verbosity, members,
// checkpoints. Unknown keys and bad values throw ConfigError.
void apply_config_text(CliConfig& config, std::string_view text, std::string_view source = "<config>");

// The same format, one line per key; loading it back reproduces `config`.
std::string to_config_text(const CliConfig& config);

// Entry point used by the executable. args excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

// Subcommands on an already resolved configuration. Throw mtlf::Error.
void cmd_forecast(const CliConfig& config, std::ostream& log);
void cmd_backtest(const CliConfig& config, std::ostream& log);
void cmd_inspect(const CliConfig& config, std::string_view series_id, std::ostream& log);

// Writes to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace mtlf::cli
