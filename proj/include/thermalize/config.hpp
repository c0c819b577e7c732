#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "thermalize/shell_counting.hpp"

namespace thermalize {

/// A field that accepts either a single number (broadcast over all entries)
/// or an explicit list; remembers which form the config used.
struct ScalarOrList {
    std::optional<double> scalar;       // set when the config gave one number
    std::vector<double> values;         // always the expanded list

    bool operator==(const ScalarOrList&) const = default;
};

struct SystemConfig {
    std::string kind = "harmonic";      // "harmonic" | "explicit"
    double omega = 0.0;                 // harmonic only
    int levels = 0;                     // harmonic only (M)
    std::vector<double> energies;       // explicit only
    std::vector<double> couplings;      // explicit only

    bool operator==(const SystemConfig&) const = default;
};

struct BathConfig {
    int modes = 0;                      // N
    ScalarOrList frequency;
    std::optional<ScalarOrList> strength;   // default: 1.0 per mode
    double quantum_unit = 0.0;
    std::optional<double> kappa_target;

    bool operator==(const BathConfig&) const = default;
};

struct ShellConfig {
    double energy = 0.0;
    double thickness = 0.0;

    bool operator==(const ShellConfig&) const = default;
};

struct RunConfig {
    std::uint64_t seed = 1;
    int samples = 100;
    CountMode mode = CountMode::analytic;
    std::pair<int, int> fit_window{0, 20};
    std::vector<double> kappa_list;     // table1
    std::uint64_t cap = 1'000'000;
    LevelCut level_cut = LevelCut::bare;
    std::optional<int> max_level;

    bool operator==(const RunConfig&) const = default;
};

struct TwoLevelConfig {
    double beta = 1.0;
    double gap = 1.0;
    std::vector<double> f_grid;

    bool operator==(const TwoLevelConfig&) const = default;
};

struct OutputConfig {
    std::string format = "csv";         // "csv" | "json"
    std::string path;

    bool operator==(const OutputConfig&) const = default;
};

struct ExperimentConfig {
    std::optional<SystemConfig> system;
    std::optional<BathConfig> bath;
    std::optional<ShellConfig> shell;
    RunConfig run;
    std::optional<TwoLevelConfig> two_level;
    OutputConfig output;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Strict parse: unknown keys anywhere are ConfigError; parse failures
/// report the line number.
ExperimentConfig parse_config_text(const std::string& text, const std::string& name);
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// FNV-1a over the canonical serialized form; stable across runs.
std::string config_hash(const ExperimentConfig& config);

SystemSpec build_system(const SystemConfig& config);

/// Applies the kappa_target rescale when present (exact within 1e-12 relative).
BathSpec build_bath(const BathConfig& config);

ShellWindow build_shell(const ShellConfig& config);

}  // namespace thermalize
