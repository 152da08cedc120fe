#pragma once

#include <string>
#include <string_view>

#include "tactile/core_model.hpp"

namespace tactile {

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view data);

/// Digest of the canonical JSON form of a configuration.
std::string config_digest(const SensorConfig& config);

}  // namespace tactile
