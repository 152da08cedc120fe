#include "doctest.h"

#include <cmath>

#include "tactile/error.hpp"
#include "tactile/resistive_sim.hpp"

using namespace tactile;

TEST_CASE("unit cube opposite corners") {
  std::vector<ResistorEdge> edges;
  for (int i = 0; i < 8; ++i) {
    for (int bit : {1, 2, 4}) {
      if (!(i & bit)) edges.push_back({i, i | bit, 1.0});
    }
  }
  const ResistorNetwork net(8, edges, {{0}, {7}, {1}});
  CHECK(net.pair_resistance(0, 1) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  // Adjacent corners of the cube: 7/12 ohm.
  CHECK(net.pair_resistance(0, 2) == doctest::Approx(7.0 / 12.0).epsilon(1e-12));
}

TEST_CASE("series, parallel and shorted electrodes") {
  const ResistorNetwork series(4, {{0, 1, 1.0}, {1, 2, 0.5}, {2, 3, 0.25}}, {{0}, {3}});
  CHECK(series.pair_resistance(0, 1) == doctest::Approx(7.0));
  const ResistorNetwork par(2, {{0, 1, 1.0}, {0, 1, 2.0}, {0, 1, 3.0}}, {{0}, {1}});
  CHECK(par.pair_resistance(0, 1) == doctest::Approx(1.0 / 6.0));
  // An electrode binding nodes 1 and 2 shorts the middle resistor.
  const ResistorNetwork shorted(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}}, {{0}, {3}, {1, 2}});
  CHECK(shorted.pair_resistance(0, 1) == doctest::Approx(2.0));
}

TEST_CASE("all pairs matrix is symmetric with a zero diagonal") {
  const Lattice lat = build_lattice(build_layout("resistive"));
  const Eigen::MatrixXd r = lat.network.all_pairs();
  REQUIRE(r.rows() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(r(i, i) == 0.0);
    for (int j = 0; j < 4; ++j) {
      CHECK(r(i, j) == doctest::Approx(r(j, i)));
      if (i != j) {
        CHECK(r(i, j) > 0.0);
        CHECK(r(i, j) == doctest::Approx(lat.network.pair_resistance(i, j)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("compression raises conductance and lowers every pair resistance") {
  CHECK(strained_conductance(1.0, 0.0, 8.0) == doctest::Approx(1.0));
  CHECK(strained_conductance(1.0, 0.1, 8.0) > 1.0);
  const SensorConfig c = build_layout("resistive");
  ResistiveSensor s(c, 3);
  const std::vector<double> rest = s.resistances();
  const Rect a = sensing_area(c, IndenterTip::hemisphere());
  const IndentationPose pose{a.center_x(), a.center_y(), 3.0, IndenterTip::hemisphere()};
  s.advance(&pose, 30.0);
  const std::vector<double> pressed = s.resistances();
  for (std::size_t k = 0; k < rest.size(); ++k) CHECK(pressed[k] < rest[k]);
}

TEST_CASE("hysteresis follows the exact first-order lag") {
  HysteresisState st;
  st.strain = {0.0, 0.2};
  st.tau_load = 0.3;
  st.tau_unload = 2.0;
  step_hysteresis(st, {0.1, 0.0}, 0.15);
  CHECK(st.strain[0] == doctest::Approx(0.1 * (1.0 - std::exp(-0.5))).epsilon(1e-12));
  CHECK(st.strain[1] == doctest::Approx(0.2 * std::exp(-0.075)).epsilon(1e-12));
}

TEST_CASE("frames need a baseline and start near zero") {
  SensorConfig c = build_layout("resistive");
  c.noise.resistance_sigma = 0.0;
  ResistiveSensor s(c, 3);
  CHECK_THROWS_AS(s.frame(), Error);
  s.capture_baseline();
  for (double v : s.frame()) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("drift leaves the resting state unchanged when disabled") {
  const SensorConfig c = build_layout("resistive");
  ResistiveSensor s(c, 3);
  const std::vector<double> before = s.resistances();
  s.advance(nullptr, 10.0);
  CHECK(s.resistances() == before);
}
