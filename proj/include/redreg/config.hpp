#pragma once

#include <string>

#include <json.hpp>

#include "redreg/trainer.hpp"

namespace redreg {

// JSON <-> RunConfig. Parsing is strict: unknown keys anywhere and
// out-of-range values raise ConfigError naming the offending key or the
// violated constraint. The gate threshold R additionally accepts the string
// "inf" to disable gating.
RunConfig parse_run_config(const nlohmann::ordered_json& j);
RunConfig load_run_config(const std::string& path);

nlohmann::ordered_json run_config_json(const RunConfig& cfg);
std::string run_config_canonical(const RunConfig& cfg);

// --set style override: dotted path, value parsed as JSON scalar when
// possible, else kept as a string. Intermediate objects are created as
// needed; misspelled keys surface later in the strict parse.
void apply_override(nlohmann::ordered_json& cfg, const std::string& dotted_key,
                    const std::string& value);

}  // namespace redreg
