#include "tactile/baselines.hpp"

#include "tactile/error.hpp"
#include "tactile/rng.hpp"

namespace tactile {

Baselines fit_baselines(const Dataset& train, std::uint64_t seed) {
  require(!train.frames.empty(), "baselines need a non-empty training set");
  const Rect area = common_sensing_area(train.config, train.schedule.tips);
  double depth = 0.0;
  int touching = 0;
  for (const SignalFrame& f : train.frames) {
    if (f.d < 0.0) continue;
    depth += f.d;
    ++touching;
  }
  depth = touching > 0 ? depth / touching : 0.0;
  Baselines b;
  b.center = {area.center_x(), area.center_y(), depth};
  b.random = {area, depth, seed};
  return b;
}

Eigen::MatrixXd predict(const CenterPredictor& p, Eigen::Index rows) {
  Eigen::MatrixXd out(rows, 3);
  out.col(0).setConstant(p.x);
  out.col(1).setConstant(p.y);
  out.col(2).setConstant(p.depth);
  return out;
}

Eigen::MatrixXd predict(const RandomPredictor& p, Eigen::Index rows) {
  Eigen::MatrixXd out(rows, 3);
  for (Eigen::Index i = 0; i < rows; ++i) {
    Rng rng = make_rng({p.seed, 0xBA5Eu, static_cast<std::uint64_t>(i)});
    out(i, 0) = p.area.x0 + p.area.width() * uniform01(rng);
    out(i, 1) = p.area.y0 + p.area.height() * uniform01(rng);
    out(i, 2) = p.depth;
  }
  return out;
}

}  // namespace tactile
