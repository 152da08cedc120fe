#include "tactile/linear.hpp"

#include <algorithm>

#include "tactile/error.hpp"

namespace tactile {

LinearModel fit_linear(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  require(x.rows() == y.rows(), "feature and target row counts differ");
  require(x.rows() >= x.cols() + 1, "linear regression needs at least n_features + 1 rows");
  LinearModel m;
  m.x_std = Standardizer::fit(x);
  m.intercept = y.colwise().mean();
  m.weights = Eigen::MatrixXd::Zero(x.cols(), y.cols());

  // Constant columns standardize to zero and carry no weight.
  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (std::find(m.x_std.constant.begin(), m.x_std.constant.end(), j) == m.x_std.constant.end())
      live.push_back(j);
  }
  if (live.empty()) return m;

  const Eigen::MatrixXd z_all = m.x_std.apply(x);
  Eigen::MatrixXd z(x.rows(), static_cast<Eigen::Index>(live.size()));
  for (std::size_t k = 0; k < live.size(); ++k) z.col(static_cast<Eigen::Index>(k)) = z_all.col(live[k]);
  const Eigen::MatrixXd yc = y.rowwise() - m.intercept;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  Eigen::MatrixXd w;
  if (qr.rank() == z.cols()) {
    w = qr.solve(yc);
  } else {
    const Eigen::MatrixXd gram =
        z.transpose() * z + 1e-8 * Eigen::MatrixXd::Identity(z.cols(), z.cols());
    w = gram.ldlt().solve(z.transpose() * yc);
    m.warning = "rank-deficient design (rank " + std::to_string(qr.rank()) + " of " +
                std::to_string(z.cols()) + "); ridge 1e-8 used";
  }
  for (std::size_t k = 0; k < live.size(); ++k) m.weights.row(live[k]) = w.row(static_cast<Eigen::Index>(k));
  return m;
}

Eigen::MatrixXd LinearModel::predict(const Eigen::MatrixXd& x) const {
  return (x_std.apply(x) * weights).rowwise() + intercept;
}

Eigen::MatrixXd LinearModel::raw_weights() const {
  return weights.array().colwise() / x_std.scale.array();
}

Eigen::RowVectorXd LinearModel::raw_intercept() const {
  return intercept - x_std.mean.transpose() * raw_weights();
}

}  // namespace tactile
