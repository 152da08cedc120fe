#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "tactile/core_model.hpp"

namespace tactile {

using Json = nlohmann::json;

Json to_json(const SensorConfig& config);
SensorConfig config_from_json(const Json& j);

Json to_json(const IndenterTip& tip);
IndenterTip tip_from_json(const Json& j);

SensorConfig load_config(const std::filesystem::path& path);
void save_config(const SensorConfig& config, const std::filesystem::path& path);

/// Canonical serialization used for digests: sorted keys, no whitespace, round-trip doubles.
std::string canonical_dump(const Json& j);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace tactile
