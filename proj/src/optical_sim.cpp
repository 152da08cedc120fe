#include "tactile/optical_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tactile/error.hpp"
#include "tactile/rng.hpp"

namespace tactile {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNudge = 1e-7;
constexpr double kBisectTol = 1e-3;
constexpr double kPiece = 1.0;  // mm, granularity of the reach test along a segment
constexpr double kShotScale = 100.0;      // counts at which shot noise doubles its variance
constexpr double kAmbientFlicker = 0.05;  // relative per-frame ambient fluctuation

enum class Plane { kNone, kWallX0, kWallX1, kWallY0, kWallY1, kBase, kTop };

// Tangent frame of a terminal's mounting plane.
void patch_axes(const Vec3& n, Vec3& t1, Vec3& t2) {
  if (std::abs(n.z) > 0.5) {
    t1 = {1.0, 0.0, 0.0};
    t2 = {0.0, 1.0, 0.0};
  } else {
    t1 = normalized(cross({0.0, 0.0, 1.0}, n));
    t2 = {0.0, 0.0, 1.0};
  }
}

double fresnel_reflectance(double cos_i, double n_in, double n_out) {
  const double sin_t = n_in / n_out * std::sqrt(std::max(0.0, 1.0 - cos_i * cos_i));
  if (sin_t >= 1.0) return 1.0;
  const double cos_t = std::sqrt(1.0 - sin_t * sin_t);
  const double rs = (n_in * cos_i - n_out * cos_t) / (n_in * cos_i + n_out * cos_t);
  const double rp = (n_in * cos_t - n_out * cos_i) / (n_in * cos_t + n_out * cos_i);
  return 0.5 * (rs * rs + rp * rp);
}

}  // namespace

void validate(const RayBudget& b) {
  require(b.rays_per_emitter >= 1, "rays_per_emitter must be positive");
  require(b.max_bounces >= 1, "max_bounces must be at least 1");
  require(b.march_step > 0.0, "march_step must be positive");
}

std::vector<double> RawOpticalFrame::features() const {
  std::vector<double> out;
  const auto amb = std::find(states.begin(), states.end(), -1);
  require(amb != states.end(), "optical frame has no ambient state");
  const auto& ambient = readings[static_cast<std::size_t>(amb - states.begin())];
  for (std::size_t s = 0; s < states.size(); ++s) {
    if (states[s] < 0) continue;
    for (std::size_t r = 0; r < receivers.size(); ++r) out.push_back(readings[s][r] - ambient[r]);
  }
  return out;
}

SurfaceInteraction reflect_or_exit(const Vec3& incident, const Vec3& normal, double n_in,
                                   double n_out) {
  require(std::abs(norm(incident) - 1.0) <= 1e-9 && std::abs(norm(normal) - 1.0) <= 1e-9,
          "reflect_or_exit expects unit vectors");
  require(n_in > n_out, "total internal reflection needs n_in > n_out");
  const double c = dot(incident, normal);
  // Angle from the normal theta reflects iff sin(theta) >= n_out / n_in.
  const double sin2 = std::max(0.0, 1.0 - c * c);
  const double s_crit = n_out / n_in;
  if (sin2 >= s_crit * s_crit) return {true, incident - normal * (2.0 * c)};
  return {false, incident};
}

OpticalModel::OpticalModel(const SensorConfig& config, const RayBudget& budget)
    : config_(config), budget_(budget) {
  validate(config_);
  validate(budget_);
  require(config_.transduction == Transduction::kOptical, "optical model needs an optical config");
  pairs_ = enumerate_pairs(config_);
  emitters_ = config_.terminals_with(TerminalRole::kEmitter);
  receivers_ = config_.terminals_with(TerminalRole::kReceiver);
  const double s_crit = config_.refractive_index_air / config_.refractive_index_elastomer;
  cos_critical_ = std::sqrt(1.0 - s_crit * s_crit);

  const auto n_rays = static_cast<std::size_t>(budget_.rays_per_emitter);
  rays_.reserve(emitters_.size() * n_rays);
  for (std::size_t e = 0; e < emitters_.size(); ++e) {
    const Terminal& t = *emitters_[e];
    Rng rng = make_rng({config_.seed, 0x0E11u, static_cast<std::uint64_t>(t.id)});
    Vec3 t1, t2;
    patch_axes(t.orientation, t1, t2);
    const double side = std::sqrt(t.active_area);
    const double smax = std::sin(deg_to_rad(t.emission_half_angle));
    for (std::size_t k = 0; k < n_rays; ++k) {
      const double u = (uniform01(rng) - 0.5) * side;
      const double w = (uniform01(rng) - 0.5) * side;
      // Cosine-weighted (Lambertian) direction truncated at the emission half-angle.
      const double sin_th = smax * std::sqrt(uniform01(rng));
      const double cos_th = std::sqrt(1.0 - sin_th * sin_th);
      const double phi = 2.0 * kPi * uniform01(rng);
      Ray ray;
      ray.origin = t.position + t1 * u + t2 * w + t.orientation * kNudge;
      ray.direction = normalized(t.orientation * cos_th +
                                 (t1 * std::cos(phi) + t2 * std::sin(phi)) * sin_th);
      rays_.push_back(ray);
    }
  }

  const SurfaceField flat;
  flat_.reserve(rays_.size());
  flat_offsets_.reserve(rays_.size() + 1);
  flat_offsets_.push_back(0);
  std::vector<Vec3> path;
  for (const Ray& ray : rays_) {
    path.clear();
    flat_.push_back(trace(ray, flat, &path));
    flat_points_.insert(flat_points_.end(), path.begin(), path.end());
    flat_offsets_.push_back(static_cast<std::uint32_t>(flat_points_.size()));
  }
  baseline_ = capture(flat);

  Rng amb = make_rng({config_.seed, 0xA3B1u});
  for (std::size_t r = 0; r < receivers_.size(); ++r) {
    ambient_weight_.push_back(0.8 + 0.4 * uniform01(amb));
  }
  if (config_.optics.gain > 0.0) {
    gain_ = config_.optics.gain;
  } else {
    const double peak = baseline_.empty() ? 0.0 : *std::max_element(baseline_.begin(), baseline_.end());
    gain_ = peak > 0.0 ? config_.optics.gain_target_fraction * config_.noise.adc_full_scale / peak
                       : config_.noise.adc_full_scale;
  }
}

int OpticalModel::receiver_hit(const Vec3& p, const Vec3& v) const {
  for (std::size_t r = 0; r < receivers_.size(); ++r) {
    const Terminal& t = *receivers_[r];
    const Vec3 d = p - t.position;
    if (std::abs(dot(d, t.orientation)) > 1e-6) continue;
    Vec3 t1, t2;
    patch_axes(t.orientation, t1, t2);
    const double half = 0.5 * std::sqrt(t.active_area);
    if (std::abs(dot(d, t1)) > half || std::abs(dot(d, t2)) > half) continue;
    if (-dot(v, t.orientation) < std::cos(deg_to_rad(t.acceptance_half_angle))) continue;
    return static_cast<int>(r);
  }
  return -1;
}

bool OpticalModel::clip_to_layer(const Vec3& p, const Vec3& v, const SurfaceField& field,
                                 double& t0, double& t1) const {
  const double floor = config_.slab_thickness - field.max_height();
  if (v.z > 0.0) t0 = std::max(t0, (floor - p.z) / v.z);
  else if (v.z < 0.0) t1 = std::min(t1, (floor - p.z) / v.z);
  else if (p.z < floor) return false;
  return t0 <= t1;
}

bool OpticalModel::piece_may_hit(const Vec3& p, const Vec3& v, double a, double b,
                                 const SurfaceField& field) const {
  const Vec3 qa = p + v * a;
  const Vec3 qb = p + v * b;
  const double reach = field.reach(config_.slab_thickness - std::max(qa.z, qb.z));
  if (reach <= 0.0) return false;
  // Horizontal distance from the indentation axis to the piece.
  const double ax = qa.x - field.center_x();
  const double ay = qa.y - field.center_y();
  const double dx = qb.x - qa.x;
  const double dy = qb.y - qa.y;
  const double len2 = dx * dx + dy * dy;
  double s = 0.0;
  if (len2 > 0.0) s = std::clamp(-(ax * dx + ay * dy) / len2, 0.0, 1.0);
  const double ex = ax + s * dx;
  const double ey = ay + s * dy;
  return ex * ex + ey * ey <= reach * reach;
}

bool OpticalModel::segment_may_hit(const Vec3& p, const Vec3& v, double t0, double t1,
                                   const SurfaceField& field) const {
  if (!clip_to_layer(p, v, field, t0, t1)) return false;
  for (double a = t0; a < t1 || a == t0;) {
    const double b = std::min(a + kPiece, t1);
    if (piece_may_hit(p, v, a, b, field)) return true;
    if (b >= t1) break;
    a = b;
  }
  return false;
}

std::optional<double> OpticalModel::march(const Vec3& p, const Vec3& v, double t0, double t1,
                                          const SurfaceField& field) const {
  const double top = config_.slab_thickness;
  auto gap = [&](double t) {
    const Vec3 q = p + v * t;
    return q.z - (top - field.height(q.x, q.y));
  };
  if (!clip_to_layer(p, v, field, t0, t1)) return std::nullopt;
  for (double a = t0;;) {
    const double b = std::min(a + kPiece, t1);
    if (piece_may_hit(p, v, a, b, field)) {
      if (gap(a) >= 0.0) return a;
      double prev = a;
      for (double t = a; t < b;) {
        const double next = std::min(t + budget_.march_step, b);
        if (gap(next) >= 0.0) {
          double lo = prev;
          double hi = next;
          while (hi - lo > kBisectTol) {
            const double mid = 0.5 * (lo + hi);
            (gap(mid) >= 0.0 ? hi : lo) = mid;
          }
          return lo;
        }
        prev = next;
        t = next;
      }
    }
    if (b >= t1) break;
    a = b;
  }
  return std::nullopt;
}

OpticalModel::Outcome OpticalModel::trace(const Ray& ray, const SurfaceField& field,
                                          std::vector<Vec3>* path) const {
  const double W = config_.slab_width;
  const double L = config_.slab_length;
  const double T = config_.slab_thickness;
  const double n_in = config_.refractive_index_elastomer;
  const double n_out = config_.refractive_index_air;
  Vec3 p = ray.origin;
  Vec3 v = ray.direction;
  double weight = 1.0;
  int bounces = 0;
  if (path) path->push_back(p);
  if (!field.flat() && p.z >= T - field.height(p.x, p.y)) return {};

  for (;;) {
    double t = kInf;
    Plane plane = Plane::kNone;
    auto consider = [&](double tc, Plane pl) {
      if (tc >= 0.0 && tc < t) {
        t = tc;
        plane = pl;
      }
    };
    if (v.x > 0.0) consider((W - p.x) / v.x, Plane::kWallX1);
    if (v.x < 0.0) consider(-p.x / v.x, Plane::kWallX0);
    if (v.y > 0.0) consider((L - p.y) / v.y, Plane::kWallY1);
    if (v.y < 0.0) consider(-p.y / v.y, Plane::kWallY0);
    if (v.z > 0.0) consider((T - p.z) / v.z, Plane::kTop);
    if (v.z < 0.0) consider(-p.z / v.z, Plane::kBase);
    if (plane == Plane::kNone) return {};

    bool deformed_hit = false;
    if (!field.flat()) {
      if (auto hit = march(p, v, 0.0, t, field)) {
        t = *hit;
        deformed_hit = true;
      }
    }

    const Vec3 q = p + v * t;
    if (path) path->push_back(q);

    if (deformed_hit || plane == Plane::kTop) {
      Vec3 n{0.0, 0.0, 1.0};
      if (deformed_hit) {
        n = field.normal(q.x, q.y);
        if (field.in_contact(q.x, q.y)) {
          if (!config_.optics.indenter_reflective) return {};
          v = normalized(v - n * (2.0 * dot(v, n)));
          n = {};
        }
      }
      if (norm(n) > 0.0) {
        const SurfaceInteraction s = reflect_or_exit(v, n, n_in, n_out);
        if (s.reflected) {
          v = normalized(s.direction);
        } else if (config_.optics.fresnel) {
          weight *= fresnel_reflectance(std::abs(dot(v, n)), n_in, n_out);
          v = normalized(v - n * (2.0 * dot(v, n)));
        } else {
          return {};
        }
      }
      if (++bounces > budget_.max_bounces) return {};
      p = q;
      if (!deformed_hit) p.z = std::min(p.z, T - kNudge);
      continue;
    }

    const int r = receiver_hit(q, v);
    if (r >= 0) return {r, weight};
    const double refl =
        plane == Plane::kBase ? config_.optics.base_reflectivity : config_.optics.wall_reflectivity;
    if (refl <= 0.0) return {};
    weight *= refl;
    if (++bounces > budget_.max_bounces) return {};
    p = q;
    switch (plane) {
      case Plane::kWallX0: v.x = -v.x; p.x = kNudge; break;
      case Plane::kWallX1: v.x = -v.x; p.x = W - kNudge; break;
      case Plane::kWallY0: v.y = -v.y; p.y = kNudge; break;
      case Plane::kWallY1: v.y = -v.y; p.y = L - kNudge; break;
      case Plane::kBase: v.z = -v.z; p.z = kNudge; break;
      default: break;
    }
  }
}

std::vector<OpticalModel::Outcome> OpticalModel::outcomes(const SurfaceField& field) const {
  if (field.flat() || flat_.size() != rays_.size()) {
    std::vector<Outcome> out;
    out.reserve(rays_.size());
    for (const Ray& ray : rays_) out.push_back(trace(ray, field, nullptr));
    return out;
  }
  std::vector<Outcome> out = flat_;
  for (std::size_t k = 0; k < rays_.size(); ++k) {
    for (std::uint32_t i = flat_offsets_[k]; i + 1 < flat_offsets_[k + 1]; ++i) {
      const Vec3& a = flat_points_[i];
      const Vec3 seg = flat_points_[i + 1] - a;
      const double len = norm(seg);
      if (len > 0.0 && segment_may_hit(a, seg * (1.0 / len), 0.0, len, field)) {
        out[k] = trace(rays_[k], field, nullptr);
        break;
      }
    }
  }
  return out;
}

std::vector<double> OpticalModel::capture(const SurfaceField& field) const {
  const std::vector<Outcome> res = outcomes(field);
  const std::size_t nr = receivers_.size();
  std::vector<double> out(emitters_.size() * nr, 0.0);
  const auto per = static_cast<std::size_t>(budget_.rays_per_emitter);
  for (std::size_t k = 0; k < res.size(); ++k) {
    if (res[k].receiver < 0) continue;
    out[(k / per) * nr + static_cast<std::size_t>(res[k].receiver)] += res[k].weight;
  }
  for (double& x : out) x /= static_cast<double>(per);
  return out;
}

std::vector<double> OpticalModel::captured_weight(const SurfaceField& field) const {
  const std::vector<Outcome> res = outcomes(field);
  std::vector<double> out(emitters_.size(), 0.0);
  const auto per = static_cast<std::size_t>(budget_.rays_per_emitter);
  for (std::size_t k = 0; k < res.size(); ++k) {
    if (res[k].receiver >= 0) out[k / per] += res[k].weight;
  }
  return out;
}

std::vector<double> OpticalModel::capture_cached(const IndentationPose& pose) const {
  if (pose.depth <= 0.0) return baseline_;
  const auto key = std::make_tuple(pose.x, pose.y, pose.depth, pose.tip.class_id);
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  std::vector<double> c = capture(deform(config_, pose));
  std::lock_guard<std::mutex> lock(cache_mutex_);
  cache_.emplace(key, c);
  return c;
}

std::size_t OpticalModel::cache_size() const {
  std::lock_guard<std::mutex> lock(cache_mutex_);
  return cache_.size();
}

RawOpticalFrame OpticalModel::make_frame(const std::vector<double>& capture,
                                         const NoiseParams& noise,
                                         const std::vector<double>& efficiency,
                                         std::uint64_t seed) const {
  const std::size_t ne = emitters_.size();
  const std::size_t nr = receivers_.size();
  require(capture.size() == ne * nr, "capture vector does not match the layout");
  require(efficiency.empty() || efficiency.size() == ne, "efficiency vector does not match emitters");
  Rng rng = make_rng({seed, 0xF7A3u});
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double flicker = std::max(0.0, 1.0 + kAmbientFlicker * gauss(rng));
  std::vector<double> ambient(nr);
  for (std::size_t r = 0; r < nr; ++r) {
    ambient[r] = std::round(noise.ambient_level * ambient_weight_[r] * flicker);
  }
  RawOpticalFrame f;
  f.states = pairs_.states;
  f.receivers = pairs_.receivers;
  f.readings.assign(f.states.size(), std::vector<double>(nr, 0.0));
  for (std::size_t s = 0; s < f.states.size(); ++s) {
    const bool dark_state = f.states[s] < 0;
    const double eff = dark_state || efficiency.empty() ? 1.0 : efficiency[s];
    for (std::size_t r = 0; r < nr; ++r) {
      const double level = dark_state ? 0.0 : gain_ * capture[s * nr + r] * eff;
      const double total = level + ambient[r];
      const double sigma = noise.shot_noise_sigma * std::sqrt(1.0 + total / kShotScale);
      const double value = total + sigma * gauss(rng);
      f.readings[s][r] = std::clamp(std::round(value), 0.0, noise.adc_full_scale);
    }
  }
  return f;
}

RawOpticalFrame trace_frame(const SensorConfig& config, const SurfaceField& field,
                            const RayBudget& budget, const NoiseParams& noise,
                            std::uint64_t rng_seed) {
  const OpticalModel model(config, budget);
  return model.make_frame(model.capture(field), noise, {}, rng_seed);
}

DeadBand detect_dead_band(const std::vector<double>& depths, const std::vector<double>& signal,
                          double epsilon, double min_length) {
  require(depths.size() == signal.size(), "depths and signal differ in length");
  DeadBand best;
  const std::size_t n = depths.size();
  std::size_t i = 0;
  while (i + 1 < n) {
    if (std::abs(signal[i + 1] - signal[i]) >= epsilon) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && std::abs(signal[j + 1] - signal[j]) < epsilon) ++j;
    const double len = depths[j] - depths[i];
    bool resumes = false;
    for (std::size_t k = j; k + 1 < n; ++k) {
      if (std::abs(signal[k + 1] - signal[k]) >= epsilon) {
        resumes = true;
        break;
      }
    }
    if (len >= min_length - 1e-9 && resumes && (!best.found || len > best.end - best.start)) {
      best = {true, depths[i], depths[j]};
    }
    i = j;
  }
  return best;
}

std::vector<SweepCurve> thickness_sweep(const std::vector<double>& thicknesses,
                                        const std::vector<double>& depths,
                                        const RayBudget& budget, double epsilon_fraction) {
  require(!thicknesses.empty() && !depths.empty(), "thickness sweep needs thicknesses and depths");
  std::vector<SweepCurve> curves;
  for (double thickness : thicknesses) {
    SensorConfig cfg = facing_pair_layout(thickness);
    NoiseParams quiet = cfg.noise;
    quiet.shot_noise_sigma = 0.0;
    quiet.ambient_level = 0.0;
    const OpticalModel model(cfg, budget);
    SweepCurve curve;
    curve.thickness = thickness;
    for (double d : depths) {
      if (d > cfg.depth_cap() + 1e-12) continue;
      IndentationPose pose{0.5 * cfg.slab_width, 0.5 * cfg.slab_length, d,
                           IndenterTip::hemisphere()};
      const std::vector<double> c = d <= 0.0 ? model.baseline() : model.capture(deform(cfg, pose));
      curve.depths.push_back(d);
      curve.signal.push_back(model.make_frame(c, quiet, {}, 0).features().at(0));
    }
    for (std::size_t k = 1; k < curve.signal.size(); ++k) {
      curve.total_variation += std::abs(curve.signal[k] - curve.signal[k - 1]);
    }
    const DeadBand band =
        detect_dead_band(curve.depths, curve.signal, epsilon_fraction * cfg.noise.adc_full_scale);
    curve.dead_band = band.found;
    curve.dead_band_start = band.start;
    curve.dead_band_end = band.end;
    curves.push_back(std::move(curve));
  }
  return curves;
}

std::vector<double> emitter_efficiency(const SensorConfig& config, int event) {
  const auto emitters = config.terminals_with(TerminalRole::kEmitter);
  std::vector<double> eff(emitters.size(), 1.0);
  const NoiseParams& n = config.noise;
  if (config.build == "smt" || (!n.bond_detach && n.drift_rate <= 0.0) || event <= 0) return eff;
  for (std::size_t e = 0; e < emitters.size(); ++e) {
    double rate = n.drift_rate;
    if (n.bond_detach) {
      // Each emitter's bond loosens at its own pace.
      Rng rng = make_rng({config.seed, 0xB0D0u, static_cast<std::uint64_t>(emitters[e]->id)});
      rate = std::max(n.drift_rate, 0.004) * (0.5 + uniform01(rng));
    }
    eff[e] = std::pow(1.0 - std::min(rate, 1.0), event);
  }
  return eff;
}

std::vector<TimedFrame> apply_drift(const SensorConfig& config, std::vector<TimedFrame> frames) {
  const NoiseParams& n = config.noise;
  if (config.build == "smt" || (!n.bond_detach && n.drift_rate <= 0.0)) return frames;
  for (TimedFrame& tf : frames) {
    const std::vector<double> eff = emitter_efficiency(config, tf.event);
    RawOpticalFrame& f = tf.frame;
    const auto amb = std::find(f.states.begin(), f.states.end(), -1);
    if (amb == f.states.end()) continue;
    const std::vector<double> ambient = f.readings[static_cast<std::size_t>(amb - f.states.begin())];
    for (std::size_t s = 0; s < f.states.size(); ++s) {
      if (f.states[s] < 0) continue;
      for (std::size_t r = 0; r < f.receivers.size(); ++r) {
        const double scaled = ambient[r] + (f.readings[s][r] - ambient[r]) * eff.at(s);
        f.readings[s][r] = std::clamp(std::round(scaled), 0.0, n.adc_full_scale);
      }
    }
  }
  return frames;
}

}  // namespace tactile
