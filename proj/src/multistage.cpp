#include "tactile/multistage.hpp"

#include <algorithm>
#include <cmath>

#include "tactile/error.hpp"

namespace tactile {

int route_slice(double predicted_depth) {
  const double d = std::clamp(predicted_depth, 0.0, static_cast<double>(kSliceCount));
  return std::clamp(static_cast<int>(std::floor(d)), 0, kSliceCount - 1);
}

std::vector<Eigen::Index> slice_rows(const Eigen::MatrixXd& y, int k) {
  require(y.cols() == 3, "multistage targets are (x, y, d)");
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double d = y(i, 2);
    const bool last = k == kSliceCount - 1;
    // Depths are sampled on a 0.1 mm grid; the tolerance keeps k.0 in slice k.
    if (d >= k - 1e-9 && (d < k + 1 - 1e-9 || (last && d <= kSliceCount + 1e-9))) rows.push_back(i);
  }
  return rows;
}

MultistageModel fit_multistage(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                               const std::array<SliceHyper, kSliceCount>& hyper) {
  require(x.rows() == y.rows() && y.cols() == 3, "multistage needs (x, y, d) targets per row");
  MultistageModel m;
  m.depth = fit_linear(x, y.col(2));
  for (int k = 0; k < kSliceCount; ++k) {
    const auto rows = slice_rows(y, k);
    if (rows.empty()) {
      fail(ErrorKind::kInvalidArgument, "depth slice " + std::to_string(k) + " has no training rows");
    }
    m.slices[static_cast<std::size_t>(k)] =
        fit_krr(x(rows, Eigen::all), y(rows, Eigen::seq(0, 1)), hyper[k].lambda, hyper[k].sigma);
  }
  return m;
}

Eigen::MatrixXd MultistageModel::predict(const Eigen::MatrixXd& x) const {
  const Eigen::VectorXd dp = depth.predict(x).col(0);
  Eigen::MatrixXd out(x.rows(), 3);
  std::array<std::vector<Eigen::Index>, kSliceCount> routed;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out(i, 2) = std::clamp(dp(i), 0.0, static_cast<double>(kSliceCount));
    routed[static_cast<std::size_t>(route_slice(dp(i)))].push_back(i);
  }
  for (int k = 0; k < kSliceCount; ++k) {
    const auto& rows = routed[static_cast<std::size_t>(k)];
    if (rows.empty()) continue;
    const Eigen::MatrixXd loc = slices[static_cast<std::size_t>(k)].predict(x(rows, Eigen::all));
    for (std::size_t r = 0; r < rows.size(); ++r) out.block(rows[r], 0, 1, 2) = loc.row(static_cast<Eigen::Index>(r));
  }
  return out;
}

}  // namespace tactile
