#include "tactile/svm.hpp"

#include <cmath>

#include "tactile/error.hpp"

namespace tactile {

LinearSvmModel fit_svm(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                       const SvmOptions& options) {
  require(static_cast<std::size_t>(x.rows()) == labels.size() && x.rows() > 0,
          "one label per row required");
  require(options.c > 0.0 && options.epochs >= 1, "invalid SVM options");
  bool pos = false, neg = false;
  for (int y : labels) {
    require(y == 0 || y == 1, "SVM labels must be 0 or 1");
    (y == 1 ? pos : neg) = true;
  }
  if (!(pos && neg)) fail(ErrorKind::kInvalidArgument, "SVM training data has a single class");

  LinearSvmModel m;
  m.c = options.c;
  m.x_std = Standardizer::fit(x);
  const Eigen::MatrixXd z = m.x_std.apply(x);
  Eigen::VectorXd y(z.rows());
  for (Eigen::Index i = 0; i < z.rows(); ++i) y(i) = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;

  // Pegasos schedule on (1/c)/2 |w|^2 + mean hinge.
  const double lambda = 1.0 / options.c;
  const double n = static_cast<double>(z.rows());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(z.cols());
  double b = 0.0;
  Eigen::VectorXd w_sum = Eigen::VectorXd::Zero(z.cols());
  double b_sum = 0.0;
  for (int t = 1; t <= options.epochs; ++t) {
    const Eigen::VectorXd margin = y.array() * ((z * w).array() + b);
    Eigen::VectorXd gw = lambda * w;
    double gb = 0.0;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      if (margin(i) < 1.0) {
        gw -= (y(i) / n) * z.row(i).transpose();
        gb -= y(i) / n;
      }
    }
    const double eta = 1.0 / (lambda * t);
    w -= eta * gw;
    b -= eta * gb;
    w_sum += w;
    b_sum += b;
  }
  m.w = w_sum / options.epochs;
  m.bias = b_sum / options.epochs;
  require(m.w.allFinite() && std::isfinite(m.bias), "SVM training diverged");
  return m;
}

Eigen::VectorXd LinearSvmModel::decision(const Eigen::MatrixXd& x) const {
  return (x_std.apply(x) * w).array() + bias;
}

std::vector<int> LinearSvmModel::predict(const Eigen::MatrixXd& x) const {
  const Eigen::VectorXd s = decision(x);
  std::vector<int> out(static_cast<std::size_t>(s.size()));
  for (Eigen::Index i = 0; i < s.size(); ++i) out[static_cast<std::size_t>(i)] = s(i) > 0.0 ? 1 : 0;
  return out;
}

}  // namespace tactile
