#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>

#include "thermalize/config.hpp"

namespace thermalize {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes shared by the CLI and the in-process command API.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfigError = 1,
    kExitDegeneratePhysics = 2,
    kExitCapExceeded = 3,
};

struct CliOverrides {
    std::optional<std::pair<int, int>> fit_window;
    std::optional<std::string> out_path;
    std::optional<std::uint64_t> seed;
};

ExperimentConfig apply_overrides(ExperimentConfig config, const CliOverrides& overrides);

int cmd_count(const ExperimentConfig& config, std::ostream& log);
int cmd_table1(const ExperimentConfig& config, std::ostream& log);
int cmd_deform_map(const ExperimentConfig& config, std::ostream& log);
int cmd_sample(const ExperimentConfig& config, std::ostream& log);
int cmd_two_level(const ExperimentConfig& config, std::ostream& log);

/// Full CLI: parse arguments, load the config, dispatch, map exceptions to
/// exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace thermalize
