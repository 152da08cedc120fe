#include "doctest.h"

#include <cmath>

#include "tactile/optical_sim.hpp"
#include "tactile/protocol.hpp"
#include "tactile/rng.hpp"

using namespace tactile;

namespace {

const RayBudget kSmall{400, 4, 0.2};

IndentationPose centre(const SensorConfig& c, double d) {
  const IndenterTip tip = IndenterTip::hemisphere();
  const Rect a = sensing_area(c, tip);
  return {a.center_x(), a.center_y(), d, tip};
}

}  // namespace

TEST_CASE("reflection switches at the critical angle") {
  const Vec3 n{0.0, 0.0, 1.0};
  const double crit = std::asin(1.0 / 1.4);
  for (double delta : {-1e-6, 1e-6}) {
    const double th = crit + delta;
    const Vec3 v{std::sin(th), 0.0, std::cos(th)};
    const SurfaceInteraction s = reflect_or_exit(v, n, 1.4, 1.0);
    CHECK(s.reflected == (delta > 0.0));
  }
  const Vec3 v{std::sin(1.2), 0.0, std::cos(1.2)};
  const SurfaceInteraction s = reflect_or_exit(v, n, 1.4, 1.0);
  REQUIRE(s.reflected);
  CHECK(s.direction.x == doctest::Approx(v.x));
  CHECK(s.direction.z == doctest::Approx(-v.z));
}

TEST_CASE("reflection preserves the tangential component for tilted normals") {
  Rng rng = make_rng({9});
  for (int k = 0; k < 200; ++k) {
    const Vec3 n = normalized(Vec3{0.3 * (uniform01(rng) - 0.5), 0.3 * (uniform01(rng) - 0.5), 1.0});
    const Vec3 v = normalized(Vec3{uniform01(rng) - 0.5, uniform01(rng) - 0.5, 0.2});
    const SurfaceInteraction s = reflect_or_exit(v, n, 1.4, 1.0);
    if (!s.reflected) continue;
    const double vn = v.x * n.x + v.y * n.y + v.z * n.z;
    const double rn = s.direction.x * n.x + s.direction.y * n.y + s.direction.z * n.z;
    CHECK(rn == doctest::Approx(-vn));
    CHECK(std::hypot(s.direction.x, s.direction.y, s.direction.z) == doctest::Approx(1.0));
  }
}

TEST_CASE("captured weight never exceeds the emitted rays") {
  const SensorConfig c = build_layout("tht");
  const OpticalModel m(c, kSmall);
  for (double d : {0.0, 1.0, 3.0}) {
    const SurfaceField f = deform(c, centre(c, d));
    for (double w : m.captured_weight(f)) {
      CHECK(w >= 0.0);
      CHECK(w <= kSmall.rays_per_emitter + 1e-9);
    }
  }
}

TEST_CASE("capture is deterministic and the flat pose reproduces the baseline") {
  const SensorConfig c = build_layout("tht");
  const OpticalModel a(c, kSmall);
  const OpticalModel b(c, kSmall);
  CHECK(a.baseline() == b.baseline());
  CHECK(a.capture_cached(centre(c, -1.0)) == a.baseline());
  const std::vector<double> deep = a.capture_cached(centre(c, 2.0));
  CHECK(deep == b.capture(deform(c, centre(c, 2.0))));
  CHECK(deep != a.baseline());
  CHECK(a.cache_size() >= 1);
}

TEST_CASE("frames subtract the same-frame ambient reading") {
  const SensorConfig c = build_layout("tht");
  const OpticalModel m(c, kSmall);
  NoiseParams quiet = c.noise;
  quiet.shot_noise_sigma = 0.0;
  quiet.ambient_level = 0.0;
  const std::vector<double> dark = m.make_frame(m.baseline(), quiet, {}, 1).features();
  quiet.ambient_level = 150.0;
  const std::vector<double> lit = m.make_frame(m.baseline(), quiet, {}, 1).features();
  REQUIRE(dark.size() == lit.size());
  for (std::size_t k = 0; k < dark.size(); ++k) CHECK(lit[k] == doctest::Approx(dark[k]).epsilon(1e-9));
}

TEST_CASE("dead band detection on synthetic curves") {
  std::vector<double> depths, flat_then_change, monotone;
  for (int k = 0; k <= 50; ++k) {
    const double d = 0.1 * k;
    depths.push_back(d);
    monotone.push_back(100.0 - 10.0 * d);
    flat_then_change.push_back(d < 3.0 ? 100.0 : 100.0 - 20.0 * (d - 3.0));
  }
  CHECK_FALSE(detect_dead_band(depths, monotone, 0.5).found);
  const DeadBand band = detect_dead_band(depths, flat_then_change, 0.5);
  REQUIRE(band.found);
  CHECK(band.start == doctest::Approx(0.0));
  CHECK(band.end == doctest::Approx(3.0).epsilon(0.05));
  std::vector<double> flat_tail = monotone;
  for (int k = 30; k <= 50; ++k) flat_tail[k] = flat_tail[30];
  CHECK_FALSE(detect_dead_band(depths, flat_tail, 0.5).found);
}

TEST_CASE("drift lowers emitter efficiency and is off by default") {
  SensorConfig c = build_layout("tht");
  for (double e : emitter_efficiency(c, 50)) CHECK(e == 1.0);
  c.noise.drift_rate = 0.001;
  const std::vector<double> e = emitter_efficiency(c, 50);
  for (double v : e) CHECK(v < 1.0);
}
