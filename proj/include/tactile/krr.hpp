#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tactile/standardizer.hpp"

namespace tactile {

/// exp(-|a - b|_1 / sigma).
double laplacian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double sigma);
/// Gram matrix K(i, j) = k(a_i, b_j) over rows.
Eigen::MatrixXd laplacian_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double sigma);

struct KernelRidgeModel {
  Standardizer x_std;
  Standardizer y_std;
  Eigen::MatrixXd support;  // standardized training inputs
  Eigen::MatrixXd alpha;    // dual coefficients, one column per output
  double lambda = 1.0;
  double sigma = 1.0;

  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
};

/// Solves (K + lambda I) alpha = Y on standardized inputs and targets by Cholesky.
KernelRidgeModel fit_krr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double lambda,
                         double sigma);

struct CalibrationGrid {
  std::vector<double> lambdas;
  std::vector<double> sigmas;

  /// 15 log-spaced values per axis.
  static CalibrationGrid standard();
  static std::vector<double> log_space(double lo_exp, double hi_exp, int n);
};

struct CalibrationCell {
  double lambda = 0.0;
  double sigma = 0.0;
  double objective = 0.0;
};

struct CalibrationResult {
  double lambda = 0.0;
  double sigma = 0.0;
  double objective = 0.0;
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
  std::vector<CalibrationCell> cells;
};

/// Mean Euclidean error over the first two target columns plus mean |error| of the third
/// when present.
double calibration_objective(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth);

/// Grid search with explicit training and validation sets; ties keep the first cell.
CalibrationResult calibrate_krr(const Eigen::MatrixXd& x_train, const Eigen::MatrixXd& y_train,
                                const Eigen::MatrixXd& x_val, const Eigen::MatrixXd& y_val,
                                const CalibrationGrid& grid, int workers = 1);

/// Fits on the first half of the events (by first appearance in `events`) and validates on the
/// second half. At most `max_rows` rows per half are used, taken at an even stride.
CalibrationResult calibrate_krr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                const std::vector<int>& events, const CalibrationGrid& grid,
                                int workers = 1, std::size_t max_rows = 1500);

}  // namespace tactile
