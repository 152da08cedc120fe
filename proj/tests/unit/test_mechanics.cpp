#include "doctest.h"

#include <cmath>

#include "tactile/error.hpp"
#include "tactile/mechanics.hpp"
#include "tactile/rng.hpp"

using namespace tactile;

namespace {

IndentationPose centre_pose(const SensorConfig& c, const IndenterTip& tip, double d) {
  const Rect a = sensing_area(c, tip);
  return {a.center_x(), a.center_y(), d, tip};
}

}  // namespace

TEST_CASE("flat surface for non-positive depth") {
  const SensorConfig c = build_layout("tht");
  const SurfaceField f = deform(c, centre_pose(c, IndenterTip::hemisphere(), -2.0));
  CHECK(f.height(10.0, 10.0) == 0.0);
  CHECK_FALSE(f.in_contact(16.0, 16.0));
}

TEST_CASE("apex height equals depth for every tip") {
  const SensorConfig c = build_layout("smt");
  for (const IndenterTip& tip : all_tips()) {
    const IndentationPose p = centre_pose(c, tip, 1.0);
    const SurfaceField f = deform(c, p);
    CHECK(f.height(p.x, p.y) == doctest::Approx(1.0));
    CHECK(f.in_contact(p.x, p.y));
  }
}

TEST_CASE("height is bounded by depth and vanishes beyond reach") {
  const SensorConfig c = build_layout("tht");
  Rng rng = make_rng({5});
  for (const IndenterTip& tip : all_tips()) {
    for (double d : {0.3, 1.5, 4.0}) {
      const IndentationPose p = centre_pose(c, tip, std::min(d, c.depth_cap()));
      const SurfaceField f = deform(c, p);
      for (int k = 0; k < 400; ++k) {
        const double x = uniform01(rng) * c.slab_width;
        const double y = uniform01(rng) * c.slab_length;
        const double h = f.height(x, y);
        CHECK(h >= 0.0);
        CHECK(h <= p.depth + 1e-12);
        const double level = 0.25 * p.depth;
        if (std::hypot(x - p.x, y - p.y) > f.reach(level)) CHECK(h < level);
      }
    }
  }
}

TEST_CASE("normals point up and tilt away from the dent") {
  const SensorConfig c = build_layout("tht");
  const IndentationPose p = centre_pose(c, IndenterTip::hemisphere(), 2.0);
  const SurfaceField f = deform(c, p);
  const Vec3 n0 = f.normal(p.x, p.y);
  CHECK(n0.z == doctest::Approx(1.0));
  const Vec3 n1 = f.normal(p.x + 3.5, p.y);
  CHECK(n1.z > 0.0);
  CHECK(n1.x < 0.0);
}

TEST_CASE("poses outside the sensing area or beyond the cap fail") {
  const SensorConfig c = build_layout("tht");
  CHECK_THROWS_AS(deform(c, {0.5, 0.5, 1.0, IndenterTip::hemisphere()}), Error);
  CHECK_THROWS_AS(deform(c, centre_pose(c, IndenterTip::hemisphere(), 6.5)), Error);
}

TEST_CASE("force curve anchors and monotonicity") {
  CHECK(depth_to_force(0.0) == 0.0);
  CHECK(depth_to_force(0.1) == doctest::Approx(0.11));
  CHECK(depth_to_force(0.3) == doctest::Approx(0.55));
  double prev = -1.0;
  for (int k = 0; k <= 50; ++k) {
    const double f = depth_to_force(0.1 * k);
    CHECK(f > prev);
    prev = f;
  }
  CHECK_THROWS_AS(depth_to_force(6.0), Error);
}
