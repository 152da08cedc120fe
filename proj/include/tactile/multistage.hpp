#pragma once

#include <array>

#include <Eigen/Dense>

#include "tactile/krr.hpp"
#include "tactile/linear.hpp"

namespace tactile {

inline constexpr int kSliceCount = 5;

/// Slice index for a predicted depth: floor of the clamped depth, capped at the last slice.
int route_slice(double predicted_depth);

struct MultistageModel {
  LinearModel depth;  // stage 1: d from features
  std::array<KernelRidgeModel, kSliceCount> slices;  // stage 2: (x, y) per 1 mm slice

  /// Rows of (x, y, d_p) with d_p clamped to [0, 5].
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
};

struct SliceHyper {
  double lambda = 1e-3;
  double sigma = 10.0;
};

/// `y` holds (x, y, d) for frames with d >= 0. Slice k trains on d in [k, k + 1), the last
/// slice also on d = 5.
MultistageModel fit_multistage(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                               const std::array<SliceHyper, kSliceCount>& hyper);

/// Rows of `y` (third column = depth) falling in slice k.
std::vector<Eigen::Index> slice_rows(const Eigen::MatrixXd& y, int k);

}  // namespace tactile
