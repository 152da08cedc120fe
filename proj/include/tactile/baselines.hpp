#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "tactile/geometry.hpp"
#include "tactile/protocol.hpp"

namespace tactile {

struct CenterPredictor {
  double x = 0.0;
  double y = 0.0;
  double depth = 0.0;  // mean training depth, reported as the depth guess
};

struct RandomPredictor {
  Rect area;
  double depth = 0.0;
  std::uint64_t seed = 1;
};

struct Baselines {
  CenterPredictor center;
  RandomPredictor random;
};

Baselines fit_baselines(const Dataset& train, std::uint64_t seed = 1);

/// Rows of (x, y, d); the random predictor draws row i from a stream seeded by (seed, i).
Eigen::MatrixXd predict(const CenterPredictor& p, Eigen::Index rows);
Eigen::MatrixXd predict(const RandomPredictor& p, Eigen::Index rows);

}  // namespace tactile
