#pragma once

#include "mmck/simkit.hpp"
#include "mmck/tuning.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace mmck {

struct OutputConfig {
    std::string directory = "out";
    bool plots = false;
    int log_decimation = 1;
};

struct WoaConfig {
    WoaParams params;                  // bounds filled from the target's defaults
    ControllerKind target = ControllerKind::fopi;
    std::vector<double> tune_vdc_levels; // empty => tune on the scenario as-is
    std::vector<double> warm_start_fopi; // 6-dim tuned FOPI to seed FOFPI tuning
};

struct Config {
    Scenario scenario;   // fully assembled (plant, controller, fis, fractional)
    WoaConfig woa;
    OutputConfig output;
    std::string fingerprint_source; // canonical JSON used for hashing
};

// Parses and validates; unknown keys anywhere are a hard error. Every field
// has a default, so {} is a valid config.
Config load_config(const nlohmann::json& j);
Config load_config_file(const std::string& path);

// Applies one dotted-path override, e.g. "scenario.duration=1.5" or
// "controller.type=fofpi"; values parse as JSON, bare words as strings.
void apply_override(nlohmann::json& j, const std::string& key_eq_value);

nlohmann::json read_json_file(const std::string& path);

// Scenario fingerprint: FNV-1a of the canonical config dump.
std::uint64_t config_fingerprint(const Config& c);

TuningSpec make_tuning_spec(const Config& c);

} // namespace mmck
