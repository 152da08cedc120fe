#include "doctest.h"

#include <cmath>

#include "tactile/baselines.hpp"
#include "tactile/error.hpp"
#include "tactile/krr.hpp"
#include "tactile/linear.hpp"
#include "tactile/mlp.hpp"
#include "tactile/multistage.hpp"
#include "tactile/rng.hpp"
#include "tactile/svm.hpp"

using namespace tactile;

namespace {

Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng = make_rng({seed});
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

}  // namespace

TEST_CASE("standardizer maps to zero mean, unit spread and back") {
  Eigen::MatrixXd x = gaussian(40, 3, 1) * 5.0;
  x.col(2).setConstant(7.0);
  const Standardizer s = Standardizer::fit(x);
  const Eigen::MatrixXd z = s.apply(x);
  CHECK(z.col(0).mean() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::sqrt(z.col(1).array().square().mean()) == doctest::Approx(1.0));
  CHECK(s.constant == std::vector<int>{2});
  CHECK(z.col(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((s.invert(z) - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pooled standardizer shares one spread across non-constant columns") {
  Eigen::MatrixXd x = gaussian(50, 3, 2);
  x.col(0) *= 2.0;
  x.col(1) *= 6.0;
  x.col(2).setConstant(-3.0);
  const Standardizer per = Standardizer::fit(x);
  const Standardizer s = Standardizer::fit_pooled(x);
  const double rms = std::sqrt(0.5 * (per.scale(0) * per.scale(0) + per.scale(1) * per.scale(1)));
  CHECK(s.scale(0) == doctest::Approx(rms).epsilon(1e-12));
  CHECK(s.scale(1) == s.scale(0));
  CHECK(s.scale(2) == s.scale(0));
  CHECK(s.constant == std::vector<int>{2});
  CHECK((s.invert(s.apply(x)) - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kernel ridge predictions are invariant to a common rescaling of the inputs") {
  const Eigen::MatrixXd x = gaussian(30, 4, 3);
  const Eigen::MatrixXd y = gaussian(30, 2, 4);
  const Eigen::MatrixXd q = gaussian(5, 4, 5);
  const KernelRidgeModel a = fit_krr(x, y, 0.1, 2.0);
  const KernelRidgeModel b = fit_krr(x * 37.0, y, 0.1, 2.0);
  CHECK((a.predict(q) - b.predict(q * 37.0)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("three-point line fit") {
  Eigen::MatrixXd x(3, 1), y(3, 1);
  x << 0.0, 1.0, 2.0;
  y << 1.0, 2.0, 4.0;
  const LinearModel m = fit_linear(x, y);
  // Normal equations: slope 1.5, intercept 5/6.
  CHECK(m.raw_weights()(0, 0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(m.raw_intercept()(0) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  Eigen::MatrixXd q(1, 1);
  q << 3.0;
  CHECK(m.predict(q)(0, 0) == doctest::Approx(1.5 * 3.0 + 5.0 / 6.0));
  CHECK(m.warning.empty());
}

TEST_CASE("collinear features fall back to the ridge with a warning") {
  Eigen::MatrixXd x(6, 2);
  x.col(0) << 1, 2, 3, 4, 5, 6;
  x.col(1) = 2.0 * x.col(0);
  const Eigen::MatrixXd y = 3.0 * x.col(0);
  const LinearModel m = fit_linear(x, y);
  CHECK_FALSE(m.warning.empty());
  CHECK((m.predict(x) - y).cwiseAbs().maxCoeff() < 1e-4);
  CHECK_THROWS_AS(fit_linear(x.topRows(2), y.topRows(2)), Error);
}

TEST_CASE("laplacian kernel fixtures") {
  Eigen::VectorXd a(2), b(2);
  a << 0.0, 0.0;
  b << 1.0, 2.0;
  CHECK(laplacian_kernel(a, a, 0.3) == 1.0);
  CHECK(std::abs(laplacian_kernel(a, b, 1.0) - std::exp(-3.0)) < 1e-12);
  CHECK(std::abs(laplacian_kernel(a, b, 2.0) - std::exp(-1.5)) < 1e-12);
  const Eigen::MatrixXd g = laplacian_gram(gaussian(5, 2, 3), gaussian(5, 2, 3), 1.0);
  CHECK((g - g.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((g.diagonal().array() - 1.0).abs().maxCoeff() < 1e-15);
}

TEST_CASE("kernel ridge matches a dense solve and interpolates as lambda vanishes") {
  const Eigen::MatrixXd x = gaussian(5, 2, 4);
  const Eigen::MatrixXd y = gaussian(5, 3, 5);
  const KernelRidgeModel m = fit_krr(x, y, 1e-12, 1.0);
  CHECK((m.predict(x) - y).cwiseAbs().maxCoeff() < 1e-6);
  const KernelRidgeModel big = fit_krr(x, y, 1e6, 1.0);
  const Eigen::RowVectorXd mean = y.colwise().mean();
  CHECK((big.predict(x).rowwise() - mean).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("calibration returns a grid cell with the minimum objective") {
  const Eigen::MatrixXd x = gaussian(60, 2, 6);
  Eigen::MatrixXd y(60, 3);
  y.col(0) = x.col(0);
  y.col(1) = x.col(1) * 2.0;
  y.col(2) = (x.col(0) + x.col(1)).cwiseAbs();
  std::vector<int> groups(60);
  for (int i = 0; i < 60; ++i) groups[i] = i;
  CalibrationGrid grid;
  grid.lambdas = CalibrationGrid::log_space(-4, 0, 5);
  grid.sigmas = CalibrationGrid::log_space(-1, 2, 4);
  const CalibrationResult r = calibrate_krr(x, y, groups, grid, 1, 1000);
  REQUIRE(r.cells.size() == 20);
  double best = 1e300;
  for (const CalibrationCell& c : r.cells) best = std::min(best, c.objective);
  CHECK(r.objective == best);
  CHECK(r.train_rows == 30);
  CHECK(r.validation_rows == 30);
  const CalibrationGrid standard = CalibrationGrid::standard();
  CHECK(standard.lambdas.size() == 15);
  CHECK(standard.sigmas.size() == 15);
  CHECK(standard.lambdas.front() == doctest::Approx(1e-7));
  CHECK(standard.lambdas.back() == doctest::Approx(1.0));
}

TEST_CASE("MLP gradients match finite differences for both heads") {
  const Eigen::MatrixXd z = gaussian(64, 5, 7);
  for (MlpHead head : {MlpHead::kSigmoid, MlpHead::kSoftmax}) {
    const int classes = head == MlpHead::kSigmoid ? 2 : 4;
    std::vector<int> labels(64);
    for (int i = 0; i < 64; ++i) labels[i] = head == MlpHead::kSigmoid ? (z(i, 0) > 0) : i % 4;
    MlpOptions o;
    o.hidden = 32;
    MlpModel m = init_mlp(5, classes, head, o);
    CHECK(gradient_check(m, z.topRows(8), {labels.begin(), labels.begin() + 8}) < 1e-5);
    train_epochs(m, z, labels, 3);
    CHECK(gradient_check(m, z.topRows(8), {labels.begin(), labels.begin() + 8}) < 1e-5);
    CHECK(m.loss_curve.size() == 3);
  }
}

TEST_CASE("MLP learns a separable rule and training is seed-deterministic") {
  const Eigen::MatrixXd x = gaussian(400, 3, 8);
  std::vector<int> labels(400);
  for (int i = 0; i < 400; ++i) labels[i] = x(i, 0) - x(i, 2) > 0.0;
  MlpOptions o;
  o.hidden = 64;
  o.epochs = 40;
  o.learning_rate = 3e-3;
  const MlpModel a = fit_mlp(x, labels, MlpHead::kSigmoid, o);
  const MlpModel b = fit_mlp(x, labels, MlpHead::kSigmoid, o);
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.loss_curve.back() < a.loss_curve.front());
  const std::vector<int> p = a.predict(x);
  int hit = 0;
  for (int i = 0; i < 400; ++i) hit += p[i] == labels[i];
  CHECK(hit >= 380);
  const Eigen::MatrixXd prob = a.predict_proba(x);
  CHECK(prob.minCoeff() >= 0.0);
  CHECK(prob.maxCoeff() <= 1.0);
}

TEST_CASE("linear SVM separates separable data") {
  const Eigen::MatrixXd x = gaussian(200, 2, 9);
  std::vector<int> labels(200);
  for (int i = 0; i < 200; ++i) labels[i] = x(i, 0) + 0.5 * x(i, 1) > 0.0;
  const LinearSvmModel m = fit_svm(x, labels);
  const std::vector<int> p = m.predict(x);
  int hit = 0;
  for (int i = 0; i < 200; ++i) hit += p[i] == labels[i];
  CHECK(hit >= 196);
  CHECK_THROWS_AS(fit_svm(x, std::vector<int>(200, 1)), Error);
}

TEST_CASE("multistage routing") {
  CHECK(route_slice(-0.3) == 0);
  CHECK(route_slice(0.0) == 0);
  CHECK(route_slice(0.99) == 0);
  CHECK(route_slice(1.0) == 1);
  CHECK(route_slice(4.2) == 4);
  CHECK(route_slice(5.0) == 4);
  CHECK(route_slice(7.5) == 4);
  Eigen::MatrixXd y(4, 3);
  y << 0, 0, 0.5, 0, 0, 1.0, 0, 0, 4.9, 0, 0, 5.0;
  CHECK(slice_rows(y, 0).size() == 1);
  CHECK(slice_rows(y, 1).size() == 1);
  CHECK(slice_rows(y, 4).size() == 2);
}

TEST_CASE("multistage model predicts within its slices") {
  Rng rng = make_rng({10});
  Eigen::MatrixXd x(300, 3), y(300, 3);
  for (int i = 0; i < 300; ++i) {
    const double px = uniform01(rng) * 10, py = uniform01(rng) * 10, d = uniform01(rng) * 5;
    x.row(i) << px + 0.1 * d, py - 0.1 * d, d;
    y.row(i) << px, py, d;
  }
  std::array<SliceHyper, kSliceCount> h;
  for (SliceHyper& s : h) s = {1e-6, 10.0};
  const MultistageModel m = fit_multistage(x, y, h);
  const Eigen::MatrixXd p = m.predict(x);
  CHECK((p.col(2) - y.col(2)).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((p.leftCols(2) - y.leftCols(2)).cwiseAbs().maxCoeff() < 0.05);
  Eigen::MatrixXd shallow = y;
  shallow.col(2).setConstant(0.5);
  CHECK_THROWS_AS(fit_multistage(x, shallow, h), Error);
}

TEST_CASE("baselines are deterministic") {
  RandomPredictor r{{0.0, 0.0, 4.0, 2.0}, 1.5, 3};
  const Eigen::MatrixXd a = predict(r, 50);
  CHECK(a == predict(r, 50));
  CHECK(a.topRows(10) == predict(r, 10));
  CHECK(a.col(0).minCoeff() >= 0.0);
  CHECK(a.col(0).maxCoeff() <= 4.0);
  CHECK(a.col(1).maxCoeff() <= 2.0);
  CHECK((a.col(2).array() == 1.5).all());
  const Eigen::MatrixXd c = predict(CenterPredictor{2.0, 1.0, 1.5}, 3);
  CHECK(c(2, 0) == 2.0);
  CHECK(c(2, 1) == 1.0);
}
