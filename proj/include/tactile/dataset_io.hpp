#pragma once

#include <filesystem>
#include <string>

#include "tactile/protocol.hpp"

namespace tactile {

/// Writes <stem>.csv (one row per frame: t,x,y,d,event,step,f1..fN; t is the tip class) and the
/// <stem>.json manifest with version, config, schedule, seed and digests.
void save_dataset(const Dataset& dataset, const std::filesystem::path& stem);

/// Verifies the format version, the embedded config digest and the CSV digest.
Dataset load_dataset(const std::filesystem::path& stem);

/// As above, and additionally requires the dataset to come from `expected`.
Dataset load_dataset(const std::filesystem::path& stem, const SensorConfig& expected);

std::string dataset_csv(const Dataset& dataset);

/// Accepts either a stem or a path ending in .csv/.json.
std::filesystem::path dataset_stem(const std::filesystem::path& path);

}  // namespace tactile
