#include "thermalize/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace thermalize {

using nlohmann::json;

namespace {

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end())
            throw ConfigError("unknown key \"" + key + "\" in " + where);
    }
}

const json& require(const json& obj, const std::string& where, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(where + " is missing required key \"" + key + "\"");
    return *it;
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + " must be a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
    return v.get<int>();
}

std::vector<double> as_number_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + " must be a list of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) out.push_back(as_number(e, where + " entry"));
    return out;
}

ScalarOrList as_scalar_or_list(const json& v, int count, const std::string& where) {
    ScalarOrList out;
    if (v.is_number()) {
        out.scalar = v.get<double>();
        out.values.assign(static_cast<std::size_t>(count), *out.scalar);
    } else if (v.is_array()) {
        out.values = as_number_list(v, where);
        if (static_cast<int>(out.values.size()) != count)
            throw ConfigError(where + " list length must equal the mode count");
    } else {
        throw ConfigError(where + " must be a number or a list of numbers");
    }
    return out;
}

json scalar_or_list_json(const ScalarOrList& v) {
    if (v.scalar) return json(*v.scalar);
    return json(v.values);
}

SystemConfig parse_system(const json& j) {
    require_keys(j, "system", {"kind", "omega", "M", "energies", "couplings"});
    SystemConfig out;
    const json& kind = require(j, "system", "kind");
    if (!kind.is_string()) throw ConfigError("system.kind must be a string");
    out.kind = kind.get<std::string>();
    if (out.kind == "harmonic") {
        out.omega = as_number(require(j, "system", "omega"), "system.omega");
        out.levels = as_int(require(j, "system", "M"), "system.M");
        if (out.levels < 1) throw ConfigError("system.M must be >= 1");
        if (j.contains("energies") || j.contains("couplings"))
            throw ConfigError("harmonic system does not take explicit energies/couplings");
    } else if (out.kind == "explicit") {
        out.energies = as_number_list(require(j, "system", "energies"), "system.energies");
        out.couplings = as_number_list(require(j, "system", "couplings"), "system.couplings");
        if (j.contains("omega") || j.contains("M"))
            throw ConfigError("explicit system does not take omega/M");
    } else {
        throw ConfigError("system.kind must be \"harmonic\" or \"explicit\"");
    }
    return out;
}

json system_json(const SystemConfig& c) {
    json j;
    j["kind"] = c.kind;
    if (c.kind == "harmonic") {
        j["omega"] = c.omega;
        j["M"] = c.levels;
    } else {
        j["energies"] = c.energies;
        j["couplings"] = c.couplings;
    }
    return j;
}

BathConfig parse_bath(const json& j) {
    require_keys(j, "bath", {"N", "frequency", "strength", "quantum_unit", "kappa_target"});
    BathConfig out;
    out.modes = as_int(require(j, "bath", "N"), "bath.N");
    if (out.modes < 1) throw ConfigError("bath.N must be >= 1");
    out.frequency = as_scalar_or_list(require(j, "bath", "frequency"), out.modes, "bath.frequency");
    if (j.contains("strength"))
        out.strength = as_scalar_or_list(j.at("strength"), out.modes, "bath.strength");
    out.quantum_unit = as_number(require(j, "bath", "quantum_unit"), "bath.quantum_unit");
    if (j.contains("kappa_target"))
        out.kappa_target = as_number(j.at("kappa_target"), "bath.kappa_target");
    return out;
}

json bath_json(const BathConfig& c) {
    json j;
    j["N"] = c.modes;
    j["frequency"] = scalar_or_list_json(c.frequency);
    if (c.strength) j["strength"] = scalar_or_list_json(*c.strength);
    j["quantum_unit"] = c.quantum_unit;
    if (c.kappa_target) j["kappa_target"] = *c.kappa_target;
    return j;
}

ShellConfig parse_shell(const json& j) {
    require_keys(j, "shell", {"E", "delta"});
    ShellConfig out;
    out.energy = as_number(require(j, "shell", "E"), "shell.E");
    out.thickness = as_number(require(j, "shell", "delta"), "shell.delta");
    return out;
}

json shell_json(const ShellConfig& c) {
    json j;
    j["E"] = c.energy;
    j["delta"] = c.thickness;
    return j;
}

RunConfig parse_run(const json& j) {
    require_keys(j, "run",
                 {"seed", "samples", "mode", "fit_window", "kappa_list", "cap",
                  "level_cut", "max_level"});
    RunConfig out;
    if (j.contains("seed")) {
        const json& s = j.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
            throw ConfigError("run.seed must be a non-negative integer");
        out.seed = s.get<std::uint64_t>();
    }
    if (j.contains("samples")) {
        out.samples = as_int(j.at("samples"), "run.samples");
        if (out.samples < 1) throw ConfigError("run.samples must be >= 1");
    }
    if (j.contains("mode")) {
        const std::string mode = j.at("mode").is_string() ? j.at("mode").get<std::string>() : "";
        if (mode == "exact")
            out.mode = CountMode::exact;
        else if (mode == "analytic")
            out.mode = CountMode::analytic;
        else
            throw ConfigError("run.mode must be \"exact\" or \"analytic\"");
    }
    if (j.contains("fit_window")) {
        const json& w = j.at("fit_window");
        if (!w.is_array() || w.size() != 2)
            throw ConfigError("run.fit_window must be [lo, hi]");
        out.fit_window = {as_int(w[0], "run.fit_window[0]"), as_int(w[1], "run.fit_window[1]")};
        if (out.fit_window.second < out.fit_window.first)
            throw ConfigError("run.fit_window must satisfy lo <= hi");
    }
    if (j.contains("kappa_list"))
        out.kappa_list = as_number_list(j.at("kappa_list"), "run.kappa_list");
    if (j.contains("cap")) {
        const json& c = j.at("cap");
        if (!c.is_number_unsigned() && !(c.is_number_integer() && c.get<long long>() > 0))
            throw ConfigError("run.cap must be a positive integer");
        out.cap = c.get<std::uint64_t>();
        if (out.cap == 0) throw ConfigError("run.cap must be positive");
    }
    if (j.contains("level_cut")) {
        const std::string cut =
            j.at("level_cut").is_string() ? j.at("level_cut").get<std::string>() : "";
        if (cut == "bare")
            out.level_cut = LevelCut::bare;
        else if (cut == "deformed")
            out.level_cut = LevelCut::deformed;
        else
            throw ConfigError("run.level_cut must be \"bare\" or \"deformed\"");
    }
    if (j.contains("max_level")) out.max_level = as_int(j.at("max_level"), "run.max_level");
    return out;
}

json run_json(const RunConfig& c) {
    json j;
    j["seed"] = c.seed;
    j["samples"] = c.samples;
    j["mode"] = c.mode == CountMode::exact ? "exact" : "analytic";
    j["fit_window"] = json::array({c.fit_window.first, c.fit_window.second});
    if (!c.kappa_list.empty()) j["kappa_list"] = c.kappa_list;
    j["cap"] = c.cap;
    j["level_cut"] = c.level_cut == LevelCut::bare ? "bare" : "deformed";
    if (c.max_level) j["max_level"] = *c.max_level;
    return j;
}

TwoLevelConfig parse_two_level(const json& j) {
    require_keys(j, "two_level", {"beta", "delta", "f_grid"});
    TwoLevelConfig out;
    out.beta = as_number(require(j, "two_level", "beta"), "two_level.beta");
    out.gap = as_number(require(j, "two_level", "delta"), "two_level.delta");
    out.f_grid = as_number_list(require(j, "two_level", "f_grid"), "two_level.f_grid");
    if (out.f_grid.empty()) throw ConfigError("two_level.f_grid must be non-empty");
    return out;
}

json two_level_json(const TwoLevelConfig& c) {
    json j;
    j["beta"] = c.beta;
    j["delta"] = c.gap;
    j["f_grid"] = c.f_grid;
    return j;
}

OutputConfig parse_output(const json& j) {
    require_keys(j, "output", {"format", "path"});
    OutputConfig out;
    if (j.contains("format")) {
        const json& f = j.at("format");
        if (!f.is_string() || (f != "csv" && f != "json"))
            throw ConfigError("output.format must be \"csv\" or \"json\"");
        out.format = f.get<std::string>();
    }
    if (j.contains("path")) {
        if (!j.at("path").is_string()) throw ConfigError("output.path must be a string");
        out.path = j.at("path").get<std::string>();
    }
    return out;
}

json output_json(const OutputConfig& c) {
    json j;
    j["format"] = c.format;
    if (!c.path.empty()) j["path"] = c.path;
    return j;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    require_keys(j, "config", {"system", "bath", "shell", "run", "two_level", "output"});
    ExperimentConfig out;
    if (j.contains("system")) out.system = parse_system(j.at("system"));
    if (j.contains("bath")) out.bath = parse_bath(j.at("bath"));
    if (j.contains("shell")) out.shell = parse_shell(j.at("shell"));
    if (j.contains("run")) out.run = parse_run(j.at("run"));
    if (j.contains("two_level")) out.two_level = parse_two_level(j.at("two_level"));
    if (j.contains("output")) out.output = parse_output(j.at("output"));
    return out;
}

json config_to_json(const ExperimentConfig& config) {
    json j;
    if (config.system) j["system"] = system_json(*config.system);
    if (config.bath) j["bath"] = bath_json(*config.bath);
    if (config.shell) j["shell"] = shell_json(*config.shell);
    j["run"] = run_json(config.run);
    if (config.two_level) j["two_level"] = two_level_json(*config.two_level);
    j["output"] = output_json(config.output);
    return j;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& name) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // Map the byte offset to a line number for the diagnostic.
        std::size_t line = 1;
        for (std::size_t i = 0; i < text.size() && i + 1 < e.byte; ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError(name + ":" + std::to_string(line) + ": " + e.what());
    }
    return config_from_json(j);
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str(), path);
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string dump = config_to_json(config).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

SystemSpec build_system(const SystemConfig& config) {
    if (config.kind == "harmonic")
        return SystemSpec::harmonic(config.omega, static_cast<std::size_t>(config.levels));
    return SystemSpec(config.energies, config.couplings);
}

BathSpec build_bath(const BathConfig& config) {
    // Omitted strengths mean an uncoupled bath unless kappa_target asks for a
    // uniform profile to rescale.
    std::vector<double> strengths =
        config.strength ? config.strength->values
                        : std::vector<double>(static_cast<std::size_t>(config.modes),
                                              config.kappa_target ? 1.0 : 0.0);
    BathSpec bath(config.frequency.values, std::move(strengths), config.quantum_unit);
    if (config.kappa_target) bath = bath.with_kappa(*config.kappa_target);
    return bath;
}

ShellWindow build_shell(const ShellConfig& config) {
    return ShellWindow(config.energy, config.thickness);
}

}  // namespace thermalize
