#pragma once

#include <vector>

#include <Eigen/Dense>

#include "tactile/protocol.hpp"

namespace tactile {

/// Per-column affine map to zero mean and unit (population) standard deviation.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  std::vector<int> constant;  // columns whose spread is zero; they keep scale 1

  static Standardizer fit(const Eigen::MatrixXd& x);
  /// Per-column centering with one shared scale: the pooled spread of the non-constant columns.
  static Standardizer fit_pooled(const Eigen::MatrixXd& x);
  static Standardizer identity(Eigen::Index columns);

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& z) const;
  Eigen::Index size() const { return mean.size(); }
  bool operator==(const Standardizer&) const = default;
};

enum class Target { kLocation, kDepth, kBoth };

std::string to_string(Target t);
Target target_from_string(std::string_view s);
int target_width(Target t);

/// Row-per-frame feature matrix; `columns` selects feature channels (empty keeps all).
Eigen::MatrixXd feature_matrix(const std::vector<SignalFrame>& frames,
                               const std::vector<int>& columns = {});
/// Columns (x, y), (d) or (x, y, d).
Eigen::MatrixXd target_matrix(const std::vector<SignalFrame>& frames, Target target);

}  // namespace tactile
