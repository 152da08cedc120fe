#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tactile/standardizer.hpp"

namespace tactile {

struct SvmOptions {
  double c = 10.0;  // hinge weight against the 0.5 |w|^2 term, per mean sample
  int epochs = 300;
};

struct LinearSvmModel {
  Standardizer x_std;
  Eigen::VectorXd w;
  double bias = 0.0;
  double c = 10.0;

  Eigen::VectorXd decision(const Eigen::MatrixXd& x) const;
  std::vector<int> predict(const Eigen::MatrixXd& x) const;
};

/// Full-batch subgradient descent on 0.5|w|^2 + c * mean hinge, with iterate averaging.
/// Labels are 0/1.
LinearSvmModel fit_svm(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                       const SvmOptions& options = {});

}  // namespace tactile
