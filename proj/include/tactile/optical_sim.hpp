#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <tuple>
#include <vector>

#include "tactile/core_model.hpp"
#include "tactile/mechanics.hpp"

namespace tactile {

struct RayBudget {
  int rays_per_emitter = 20000;
  int max_bounces = 4;
  double march_step = 0.2;  // mm
};

void validate(const RayBudget& budget);

/// readings[state][receiver] in ADC counts; states follow PairIndex::states.
struct RawOpticalFrame {
  std::vector<int> states;
  std::vector<int> receivers;
  std::vector<std::vector<double>> readings;

  /// Emitter-major channel vector with the same-frame ambient reading subtracted.
  std::vector<double> features() const;
  bool operator==(const RawOpticalFrame&) const = default;
};

struct SurfaceInteraction {
  bool reflected = false;
  Vec3 direction;  // reflected direction when `reflected`
};

/// Binary total internal reflection: reflect iff the angle from the normal reaches
/// arcsin(n_out / n_in). `normal` points out of the denser medium.
SurfaceInteraction reflect_or_exit(const Vec3& incident, const Vec3& normal, double n_in,
                                   double n_out);

/// Fixed-ray-set Monte Carlo tracer for one optical build.
///
/// Rays are drawn once from config.seed, so every frame uses the same emitted set and signals
/// vary smoothly with the deformation. Rays whose flat-surface path never enters the deformed
/// region are reused from the flat trace; only the rest are re-marched.
class OpticalModel {
 public:
  OpticalModel(const SensorConfig& config, const RayBudget& budget);

  const SensorConfig& config() const { return config_; }
  const RayBudget& budget() const { return budget_; }
  const PairIndex& pairs() const { return pairs_; }
  std::size_t emitter_count() const { return emitters_.size(); }
  std::size_t receiver_count() const { return receivers_.size(); }

  /// Captured weight / emitted rays per (emitter, receiver), emitter-major; noise free.
  std::vector<double> capture(const SurfaceField& field) const;
  /// capture() memoized on the pose; d <= 0 returns the flat baseline.
  std::vector<double> capture_cached(const IndentationPose& pose) const;
  const std::vector<double>& baseline() const { return baseline_; }
  /// Total captured weight per emitter state, for energy checks.
  std::vector<double> captured_weight(const SurfaceField& field) const;

  /// Counts per unit captured fraction.
  double gain() const { return gain_; }

  /// Applies gain, per-emitter efficiency, ambient light and noise. `efficiency` may be empty.
  RawOpticalFrame make_frame(const std::vector<double>& capture, const NoiseParams& noise,
                             const std::vector<double>& efficiency, std::uint64_t seed) const;

  std::size_t cache_size() const;

 private:
  struct Ray {
    Vec3 origin;
    Vec3 direction;
  };
  struct Outcome {
    int receiver = -1;
    double weight = 0.0;
  };

  Outcome trace(const Ray& ray, const SurfaceField& field, std::vector<Vec3>* path) const;
  /// Clips [t0, t1] to the slab layer the dent can reach; false when empty.
  bool clip_to_layer(const Vec3& p, const Vec3& v, const SurfaceField& field, double& t0,
                     double& t1) const;
  /// Whether any point of the piece [a, b] may lie on or above the deformed surface.
  bool piece_may_hit(const Vec3& p, const Vec3& v, double a, double b,
                     const SurfaceField& field) const;
  bool segment_may_hit(const Vec3& p, const Vec3& v, double t0, double t1,
                       const SurfaceField& field) const;
  std::optional<double> march(const Vec3& p, const Vec3& v, double t0, double t1,
                              const SurfaceField& field) const;
  int receiver_hit(const Vec3& p, const Vec3& v) const;
  std::vector<Outcome> outcomes(const SurfaceField& field) const;

  SensorConfig config_;
  RayBudget budget_;
  PairIndex pairs_;
  std::vector<const Terminal*> emitters_;
  std::vector<const Terminal*> receivers_;
  std::vector<Ray> rays_;  // emitter-major, rays_per_emitter each
  std::vector<Outcome> flat_;
  std::vector<Vec3> flat_points_;
  std::vector<std::uint32_t> flat_offsets_;  // flat path of ray k: points [off[k], off[k+1])
  std::vector<double> baseline_;
  std::vector<double> ambient_weight_;  // per-receiver ambient scale
  double gain_ = 1.0;
  double cos_critical_ = 0.0;

  mutable std::mutex cache_mutex_;
  mutable std::map<std::tuple<double, double, double, int>, std::vector<double>> cache_;
};

/// One-shot convenience: build the model, deform-free tracing of `field`, noisy frame.
RawOpticalFrame trace_frame(const SensorConfig& config, const SurfaceField& field,
                            const RayBudget& budget, const NoiseParams& noise,
                            std::uint64_t rng_seed);

struct SweepCurve {
  double thickness = 0.0;
  std::vector<double> depths;
  std::vector<double> signal;  // counts, ambient-free, noise free
  bool dead_band = false;
  double dead_band_start = 0.0;
  double dead_band_end = 0.0;
  double total_variation = 0.0;
};

struct DeadBand {
  bool found = false;
  double start = 0.0;
  double end = 0.0;
};

/// Longest run of length >= min_length (mm) where successive samples differ by < epsilon,
/// followed by a change >= epsilon at greater depth.
DeadBand detect_dead_band(const std::vector<double>& depths, const std::vector<double>& signal,
                          double epsilon, double min_length = 1.0);

/// Facing emitter/receiver 20 mm apart, hemisphere indented at the midpoint.
/// epsilon_fraction is the dead-band threshold as a fraction of full scale.
std::vector<SweepCurve> thickness_sweep(const std::vector<double>& thicknesses,
                                        const std::vector<double>& depths,
                                        const RayBudget& budget,
                                        double epsilon_fraction = 0.005);

/// A frame tagged with its indentation event, for drift emulation.
struct TimedFrame {
  int event = 0;
  RawOpticalFrame frame;
};

/// Per-emitter efficiency after `event` indentation events; all ones when drift is off.
std::vector<double> emitter_efficiency(const SensorConfig& config, int event);

/// Scales each emitter state's ambient-free part by the emitter's efficiency at that event.
/// Identity for the smt build and when neither drift_rate nor bond_detach is set.
std::vector<TimedFrame> apply_drift(const SensorConfig& config, std::vector<TimedFrame> frames);

}  // namespace tactile
