#pragma once

#include <string>

#include <Eigen/Dense>

#include "tactile/standardizer.hpp"

namespace tactile {

struct LinearModel {
  Standardizer x_std;
  Eigen::MatrixXd weights;     // standardized features x outputs
  Eigen::RowVectorXd intercept;
  std::string warning;         // set when the ridge fallback was used

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
  /// Weights and intercept in raw feature units.
  Eigen::MatrixXd raw_weights() const;
  Eigen::RowVectorXd raw_intercept() const;
};

/// Least squares with intercept on standardized features. Rank deficiency falls back to a ridge
/// of 1e-8 and records a warning.
LinearModel fit_linear(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

}  // namespace tactile
