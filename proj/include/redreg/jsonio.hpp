#pragma once

#include <string>

#include <json.hpp>

namespace redreg {

// 17 significant digits: shortest form that still round-trips IEEE doubles,
// so write -> read -> write is byte-stable. Throws on non-finite values.
std::string format_double(double v);

// Compact serialization that preserves key order and formats every float with
// format_double. All files the project writes and re-reads (telemetry,
// checkpoints, config dumps) go through this one writer.
std::string dump_canonical(const nlohmann::ordered_json& j);

}  // namespace redreg
