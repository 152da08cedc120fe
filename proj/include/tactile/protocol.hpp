#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tactile/config_io.hpp"
#include "tactile/core_model.hpp"
#include "tactile/mechanics.hpp"
#include "tactile/optical_sim.hpp"

namespace tactile {

enum class Pattern { kGrid, kRandom };
enum class Lighting { kAmbient, kDark };
enum class Purpose { kTrain, kTest };

std::string to_string(Pattern p);
std::string to_string(Lighting l);
std::string to_string(Purpose p);
Pattern pattern_from_string(std::string_view s);
Lighting lighting_from_string(std::string_view s);
Purpose purpose_from_string(std::string_view s);

struct IndentationEvent {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  IndenterTip tip;
  bool operator==(const IndentationEvent&) const = default;
};

struct IndentationSchedule {
  std::string build;
  Purpose purpose = Purpose::kTrain;
  Pattern pattern = Pattern::kGrid;
  double grid_pitch = 2.0;
  int n_random = 0;  // random events per tip
  Lighting lighting = Lighting::kDark;
  std::vector<IndenterTip> tips;
  std::uint64_t seed = 1;
  bool descent_only = false;
  std::vector<IndentationEvent> events;  // visit order

  bool operator==(const IndentationSchedule&) const = default;
};

/// Depth sequence of one indentation: descent, then the mirrored retraction unless descent_only.
std::vector<double> depth_profile(const std::string& build, const IndenterTip& tip,
                                  bool descent_only = false);

/// Region all tips of the schedule may indent: the intersection of their sensing areas.
Rect common_sensing_area(const SensorConfig& config, const std::vector<IndenterTip>& tips);

struct ScheduleOptions {
  int n_random = -1;     // -1 selects the build default
  bool descent_only = false;
  double grid_pitch = 2.0;
};

IndentationSchedule make_schedule(const SensorConfig& config, Purpose purpose,
                                  const std::vector<IndenterTip>& tips, Lighting lighting,
                                  std::uint64_t seed, const ScheduleOptions& options = {});

Json to_json(const IndentationSchedule& s);
IndentationSchedule schedule_from_json(const Json& j);

struct SignalFrame {
  int tip_class = 1;
  double x = 0.0;
  double y = 0.0;
  double d = 0.0;
  int event = 0;
  int step = 0;
  std::vector<double> features;
  bool operator==(const SignalFrame&) const = default;
};

inline constexpr int kDatasetVersion = 1;

struct Dataset {
  int version = kDatasetVersion;
  SensorConfig config;
  IndentationSchedule schedule;
  std::string config_digest;
  std::vector<SignalFrame> frames;

  std::size_t feature_count() const;
};

bool operator==(const Dataset& a, const Dataset& b);

struct CollectOptions {
  RayBudget budget{4000, 4, 0.2};
  int workers = 1;
  /// Shared tracer; when it matches the config, its pose cache is reused across datasets.
  std::shared_ptr<const OpticalModel> model;
};

/// Drives the forward model through the schedule. Deterministic in (config, schedule).
Dataset collect(const SensorConfig& config, const IndentationSchedule& schedule,
                const CollectOptions& options = {});

/// Throws when a frame violates the dataset invariants.
void validate(const Dataset& dataset);

/// Copy restricted to rows satisfying `keep`.
template <typename Pred>
Dataset filter_frames(const Dataset& ds, Pred keep) {
  Dataset out = ds;
  out.frames.clear();
  for (const SignalFrame& f : ds.frames) {
    if (keep(f)) out.frames.push_back(f);
  }
  return out;
}

/// Concatenation; all parts must share the config digest.
Dataset merge(const std::vector<Dataset>& parts);

}  // namespace tactile
