#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

namespace wdrc::cli {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitSolverError = 1;
inline constexpr int kExitInputError = 2;

/// Parsed run configuration with every default resolved. The raw document is
/// schema-validated first: unknown keys anywhere are rejected.
struct RunConfig {
    json effective;  // defaults resolved, echoed into the output directory

    static RunConfig load(const std::string& path);
    static RunConfig from_json(const json& doc);
};

/// Batch commands. Each writes machine-readable outputs into `out_dir`
/// (starting with effective_config.json) and throws on failure; `dispatch`
/// maps exceptions to the documented exit codes.
void cmd_calibrate(const RunConfig& cfg, const std::string& out_dir);
void cmd_solve(const RunConfig& cfg, const std::string& out_dir);
void cmd_backtest(const RunConfig& cfg, const std::string& out_dir);
void cmd_tc_sweep(const RunConfig& cfg, const std::string& out_dir);
void cmd_simulate(const RunConfig& cfg, const std::string& out_dir);
void cmd_report(const std::string& dir);

/// Run one subcommand end to end: 0 success, 1 solver/numeric failure,
/// 2 input/config error. Overrides replace the config's seed/jobs.
int dispatch(const std::string& command, const std::string& config_path,
             const std::string& out_dir, std::optional<std::uint64_t> seed_override,
             std::optional<int> jobs_override);

}  // namespace wdrc::cli
