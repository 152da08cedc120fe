#include "tactile/standardizer.hpp"

#include <algorithm>
#include <cmath>

#include "tactile/error.hpp"

namespace tactile {

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  require(x.rows() > 0, "cannot standardize an empty matrix");
  Standardizer s;
  s.mean = x.colwise().mean().transpose();
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean(j)).square().mean();
    const double sd = std::sqrt(var);
    if (sd > 1e-12 * std::max(1.0, std::abs(s.mean(j)))) {
      s.scale(j) = sd;
    } else {
      s.scale(j) = 1.0;
      s.constant.push_back(static_cast<int>(j));
    }
  }
  return s;
}

Standardizer Standardizer::fit_pooled(const Eigen::MatrixXd& x) {
  Standardizer s = fit(x);
  // Constant columns contribute nothing to the pooled spread.
  double sum = 0.0;
  Eigen::Index n = 0;
  for (Eigen::Index j = 0; j < s.scale.size(); ++j) {
    if (std::find(s.constant.begin(), s.constant.end(), j) != s.constant.end()) continue;
    sum += s.scale(j) * s.scale(j);
    ++n;
  }
  s.scale.setConstant(n > 0 ? std::sqrt(sum / static_cast<double>(n)) : 1.0);
  return s;
}

Standardizer Standardizer::identity(Eigen::Index columns) {
  Standardizer s;
  s.mean = Eigen::VectorXd::Zero(columns);
  s.scale = Eigen::VectorXd::Ones(columns);
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  require(x.cols() == mean.size(), "standardizer width mismatch");
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& z) const {
  require(z.cols() == mean.size(), "standardizer width mismatch");
  return (z.array().rowwise() * scale.transpose().array()).matrix().rowwise() + mean.transpose();
}

std::string to_string(Target t) {
  switch (t) {
    case Target::kLocation: return "location";
    case Target::kDepth: return "depth";
    case Target::kBoth: return "both";
  }
  return "both";
}

Target target_from_string(std::string_view s) {
  if (s == "location") return Target::kLocation;
  if (s == "depth") return Target::kDepth;
  if (s == "both") return Target::kBoth;
  fail(ErrorKind::kInvalidArgument, "unknown target '" + std::string(s) + "'");
}

int target_width(Target t) {
  switch (t) {
    case Target::kLocation: return 2;
    case Target::kDepth: return 1;
    case Target::kBoth: return 3;
  }
  return 3;
}

Eigen::MatrixXd feature_matrix(const std::vector<SignalFrame>& frames,
                               const std::vector<int>& columns) {
  const std::size_t width = frames.empty() ? 0 : frames.front().features.size();
  const Eigen::Index cols = columns.empty() ? static_cast<Eigen::Index>(width)
                                            : static_cast<Eigen::Index>(columns.size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(frames.size()), cols);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i].features;
    require(f.size() == width, "frames have differing feature counts");
    for (Eigen::Index j = 0; j < cols; ++j) {
      const std::size_t src = columns.empty() ? static_cast<std::size_t>(j)
                                              : static_cast<std::size_t>(columns[j]);
      require(src < width, "feature column out of range");
      x(static_cast<Eigen::Index>(i), j) = f[src];
    }
  }
  return x;
}

Eigen::MatrixXd target_matrix(const std::vector<SignalFrame>& frames, Target target) {
  Eigen::MatrixXd y(static_cast<Eigen::Index>(frames.size()), target_width(target));
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const SignalFrame& f = frames[i];
    switch (target) {
      case Target::kLocation: y.row(r) << f.x, f.y; break;
      case Target::kDepth: y(r, 0) = f.d; break;
      case Target::kBoth: y.row(r) << f.x, f.y, f.d; break;
    }
  }
  return y;
}

}  // namespace tactile
