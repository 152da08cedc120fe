#include "tactile/krr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <thread>

#include "tactile/error.hpp"

namespace tactile {

namespace {

constexpr double kJitter = 1e-10;

// L1 distances between the rows of a and b.
Eigen::MatrixXd l1_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require(a.cols() == b.cols(), "kernel inputs differ in width");
  const Eigen::MatrixXd at = a.transpose();
  const Eigen::MatrixXd bt = b.transpose();
  Eigen::MatrixXd d(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) d(i, j) = (at.col(i) - bt.col(j)).cwiseAbs().sum();
  }
  return d;
}

std::optional<Eigen::MatrixXd> solve_spd(Eigen::MatrixXd k, const Eigen::MatrixXd& rhs,
                                         double lambda) {
  k.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) return std::nullopt;
  return llt.solve(rhs);
}

// Cholesky solve with one jittered retry; refines until the residual meets the tolerance.
Eigen::MatrixXd solve_dual(const Eigen::MatrixXd& k, const Eigen::MatrixXd& y, double lambda) {
  Eigen::MatrixXd a = k;
  a.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    a.diagonal().array() += kJitter;
    llt.compute(a);
    if (llt.info() != Eigen::Success) {
      fail(ErrorKind::kNumerical, "kernel matrix factorization failed after jitter");
    }
  }
  Eigen::MatrixXd alpha = llt.solve(y);
  const double target = 1e-8 * std::max(y.norm(), std::numeric_limits<double>::min());
  for (int it = 0; it < 3; ++it) {
    const Eigen::MatrixXd r = y - a * alpha;
    if (r.norm() < target) break;
    alpha += llt.solve(r);
  }
  return alpha;
}

}  // namespace

double laplacian_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double sigma) {
  require(sigma > 0.0, "kernel bandwidth must be positive");
  require(a.size() == b.size(), "kernel inputs differ in length");
  return std::exp(-(a - b).cwiseAbs().sum() / sigma);
}

Eigen::MatrixXd laplacian_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double sigma) {
  require(sigma > 0.0, "kernel bandwidth must be positive");
  return (-l1_distances(a, b).array() / sigma).exp().matrix();
}

KernelRidgeModel fit_krr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double lambda,
                         double sigma) {
  require(lambda > 0.0, "ridge strength must be positive");
  require(sigma > 0.0, "kernel bandwidth must be positive");
  require(x.rows() == y.rows() && x.rows() > 0, "kernel ridge needs matching non-empty data");
  KernelRidgeModel m;
  m.lambda = lambda;
  m.sigma = sigma;
  m.x_std = Standardizer::fit_pooled(x);
  m.y_std = Standardizer::fit(y);
  m.support = m.x_std.apply(x);
  m.alpha = solve_dual(laplacian_gram(m.support, m.support, sigma), m.y_std.apply(y), lambda);
  return m;
}

Eigen::MatrixXd KernelRidgeModel::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd k = laplacian_gram(x_std.apply(x), support, sigma);
  return y_std.invert(k * alpha);
}

std::vector<double> CalibrationGrid::log_space(double lo_exp, double hi_exp, int n) {
  require(n >= 1, "grid needs at least one value");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const double e = n == 1 ? lo_exp : lo_exp + (hi_exp - lo_exp) * i / (n - 1);
    out.push_back(std::pow(10.0, e));
  }
  return out;
}

CalibrationGrid CalibrationGrid::standard() {
  // The bandwidth acts on L1 distances between standardized feature vectors, whose typical
  // scale grows with the channel count; the range spans that scale for 6 to 214 channels.
  return {log_space(-7.0, 0.0, 15), log_space(-1.0, 3.0, 15)};
}

double calibration_objective(const Eigen::MatrixXd& predicted, const Eigen::MatrixXd& truth) {
  require(predicted.rows() == truth.rows() && predicted.cols() == truth.cols() &&
              truth.rows() > 0,
          "calibration objective needs matching non-empty predictions");
  double loc = 0.0;
  double depth = 0.0;
  const Eigen::Index n = truth.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (truth.cols() >= 2) {
      loc += std::hypot(predicted(i, 0) - truth(i, 0), predicted(i, 1) - truth(i, 1));
      if (truth.cols() >= 3) depth += std::abs(predicted(i, 2) - truth(i, 2));
    } else {
      depth += std::abs(predicted(i, 0) - truth(i, 0));
    }
  }
  return (loc + depth) / static_cast<double>(n);
}

CalibrationResult calibrate_krr(const Eigen::MatrixXd& x_train, const Eigen::MatrixXd& y_train,
                                const Eigen::MatrixXd& x_val, const Eigen::MatrixXd& y_val,
                                const CalibrationGrid& grid, int workers) {
  require(!grid.lambdas.empty() && !grid.sigmas.empty(), "calibration grid is empty");
  require(x_train.rows() > 0 && x_val.rows() > 0, "calibration needs training and validation rows");
  for (double l : grid.lambdas) require(l > 0.0, "grid ridge strengths must be positive");
  for (double s : grid.sigmas) require(s > 0.0, "grid bandwidths must be positive");

  const Standardizer xs = Standardizer::fit_pooled(x_train);
  const Standardizer ys = Standardizer::fit(y_train);
  const Eigen::MatrixXd zt = xs.apply(x_train);
  const Eigen::MatrixXd zv = xs.apply(x_val);
  const Eigen::MatrixXd yt = ys.apply(y_train);
  const Eigen::MatrixXd d_train = l1_distances(zt, zt);
  const Eigen::MatrixXd d_val = l1_distances(zv, zt);

  const std::size_t nl = grid.lambdas.size();
  const std::size_t ns = grid.sigmas.size();
  std::vector<double> objective(nl * ns, std::numeric_limits<double>::infinity());
  auto run_sigma = [&](std::size_t s) {
    const double sigma = grid.sigmas[s];
    const Eigen::MatrixXd k = (-d_train.array() / sigma).exp().matrix();
    const Eigen::MatrixXd kv = (-d_val.array() / sigma).exp().matrix();
    for (std::size_t l = 0; l < nl; ++l) {
      auto alpha = solve_spd(k, yt, grid.lambdas[l]);
      if (!alpha) continue;
      const double obj = calibration_objective(ys.invert(kv * *alpha), y_val);
      if (std::isfinite(obj)) objective[l * ns + s] = obj;
    }
  };
  const std::size_t nw = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1, ns);
  if (nw == 1) {
    for (std::size_t s = 0; s < ns; ++s) run_sigma(s);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < nw; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t s = w; s < ns; s += nw) run_sigma(s);
      });
    }
    for (auto& t : pool) t.join();
  }

  CalibrationResult r;
  r.train_rows = static_cast<std::size_t>(x_train.rows());
  r.validation_rows = static_cast<std::size_t>(x_val.rows());
  r.objective = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < nl; ++l) {
    for (std::size_t s = 0; s < ns; ++s) {
      const double obj = objective[l * ns + s];
      r.cells.push_back({grid.lambdas[l], grid.sigmas[s], obj});
      if (obj < r.objective) {
        r.objective = obj;
        r.lambda = grid.lambdas[l];
        r.sigma = grid.sigmas[s];
      }
    }
  }
  if (!std::isfinite(r.objective)) fail(ErrorKind::kNumerical, "every calibration cell failed");
  return r;
}

CalibrationResult calibrate_krr(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                const std::vector<int>& events, const CalibrationGrid& grid,
                                int workers, std::size_t max_rows) {
  require(static_cast<std::size_t>(x.rows()) == events.size() && x.rows() == y.rows(),
          "calibration inputs differ in row count");
  std::map<int, std::size_t> rank;  // first-appearance rank of each event
  {
    std::size_t next = 0;
    for (int e : events) {
      if (rank.emplace(e, next).second) ++next;
    }
  }
  if (rank.size() < 2) fail(ErrorKind::kInvalidArgument, "calibration needs at least 2 events");
  const std::size_t half = (rank.size() + 1) / 2;
  std::vector<Eigen::Index> first, second;
  for (std::size_t i = 0; i < events.size(); ++i) {
    (rank.at(events[i]) < half ? first : second).push_back(static_cast<Eigen::Index>(i));
  }
  auto thin = [max_rows](std::vector<Eigen::Index> rows) {
    if (max_rows == 0 || rows.size() <= max_rows) return rows;
    std::vector<Eigen::Index> out;
    for (std::size_t k = 0; k < max_rows; ++k) out.push_back(rows[k * rows.size() / max_rows]);
    return out;
  };
  first = thin(std::move(first));
  second = thin(std::move(second));
  return calibrate_krr(x(first, Eigen::all), y(first, Eigen::all), x(second, Eigen::all),
                       y(second, Eigen::all), grid, workers);
}

}  // namespace tactile
