#include "tactile/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tactile/error.hpp"
#include "tactile/rng.hpp"

namespace tactile {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kCheckStep = 1e-5;
constexpr double kCheckFloor = 1e-6;  // denominator floor for relative errors

double softplus(double o) { return o > 0.0 ? o + std::log1p(std::exp(-o)) : std::log1p(std::exp(o)); }

// Loss summed over samples of output logits o (outputs x n).
double summed_loss(MlpHead head, const Eigen::MatrixXd& o, const std::vector<int>& labels) {
  double total = 0.0;
  for (Eigen::Index k = 0; k < o.cols(); ++k) {
    const int y = labels[static_cast<std::size_t>(k)];
    if (head == MlpHead::kSigmoid) {
      total += softplus(o(0, k)) - (y == 1 ? o(0, k) : 0.0);
    } else {
      const double m = o.col(k).maxCoeff();
      const double lse = m + std::log((o.col(k).array() - m).exp().sum());
      total += lse - o(y, k);
    }
  }
  return total;
}

// d(summed loss)/d(logits).
Eigen::MatrixXd logit_gradient(MlpHead head, const Eigen::MatrixXd& o,
                               const std::vector<int>& labels) {
  Eigen::MatrixXd g(o.rows(), o.cols());
  for (Eigen::Index k = 0; k < o.cols(); ++k) {
    const int y = labels[static_cast<std::size_t>(k)];
    if (head == MlpHead::kSigmoid) {
      g(0, k) = 1.0 / (1.0 + std::exp(-o(0, k))) - (y == 1 ? 1.0 : 0.0);
    } else {
      const double m = o.col(k).maxCoeff();
      Eigen::VectorXd p = (o.col(k).array() - m).exp();
      p /= p.sum();
      p(y) -= 1.0;
      g.col(k) = p;
    }
  }
  return g;
}

void check_labels(const MlpModel& m, const Eigen::MatrixXd& z, const std::vector<int>& labels) {
  require(static_cast<std::size_t>(z.rows()) == labels.size(), "one label per row required");
  require(z.cols() == m.inputs(), "input width mismatch");
  for (int y : labels) require(y >= 0 && y < m.classes(), "label out of range");
}

struct Pass {
  Eigen::MatrixXd a;  // hidden pre-activations, hidden x n
  Eigen::MatrixXd h;
  Eigen::MatrixXd o;  // logits
};

Pass run(const MlpModel& m, const Eigen::MatrixXd& z) {
  Pass p;
  p.a = (m.w1 * z.transpose()).colwise() + m.b1;
  p.h = p.a.cwiseMax(0.0);
  p.o = (m.w2 * p.h).colwise() + m.b2;
  return p;
}

MlpGradients backprop(const MlpModel& m, const Eigen::MatrixXd& z, const Pass& p,
                      const std::vector<int>& labels, double scale) {
  const Eigen::MatrixXd go = logit_gradient(m.head, p.o, labels) * scale;
  MlpGradients g;
  g.w2 = go * p.h.transpose();
  g.b2 = go.rowwise().sum();
  const Eigen::MatrixXd gh =
      (m.w2.transpose() * go).array() * (p.a.array() > 0.0).cast<double>();
  g.w1 = gh * z;
  g.b1 = gh.rowwise().sum();
  return g;
}

struct AdamSlot {
  Eigen::MatrixXd m;
  Eigen::MatrixXd v;
};

template <typename P>
void adam_step(P& param, const P& grad, AdamSlot& s, double lr, int t) {
  if (s.m.size() == 0) {
    s.m = Eigen::MatrixXd::Zero(param.rows(), param.cols());
    s.v = Eigen::MatrixXd::Zero(param.rows(), param.cols());
  }
  s.m = kAdamBeta1 * s.m + (1.0 - kAdamBeta1) * grad;
  s.v = kAdamBeta2 * s.v + (1.0 - kAdamBeta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(kAdamBeta1, t);
  const double c2 = 1.0 - std::pow(kAdamBeta2, t);
  param.array() -= lr * (s.m.array() / c1) / ((s.v.array() / c2).sqrt() + kAdamEps);
}

}  // namespace

Eigen::MatrixXd MlpModel::forward(const Eigen::MatrixXd& z) const {
  const Eigen::MatrixXd o = run(*this, z).o;
  if (head == MlpHead::kSigmoid) return (1.0 / (1.0 + (-o.array()).exp())).matrix();
  Eigen::MatrixXd p(o.rows(), o.cols());
  for (Eigen::Index k = 0; k < o.cols(); ++k) {
    const Eigen::ArrayXd e = (o.col(k).array() - o.col(k).maxCoeff()).exp();
    p.col(k) = e / e.sum();
  }
  return p;
}

Eigen::MatrixXd MlpModel::predict_proba(const Eigen::MatrixXd& x) const {
  return forward(x_std.apply(x)).transpose();
}

std::vector<int> MlpModel::predict(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd p = predict_proba(x);
  std::vector<int> out(static_cast<std::size_t>(p.rows()));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    if (head == MlpHead::kSigmoid) {
      out[static_cast<std::size_t>(i)] = p(i, 0) >= 0.5 ? 1 : 0;
    } else {
      Eigen::Index best = 0;
      p.row(i).maxCoeff(&best);
      out[static_cast<std::size_t>(i)] = static_cast<int>(best);
    }
  }
  return out;
}

MlpModel init_mlp(int inputs, int classes, MlpHead head, const MlpOptions& options) {
  require(inputs >= 1, "network needs at least one input");
  require(options.hidden >= 1 && options.batch >= 1 && options.epochs >= 0,
          "invalid network options");
  require(options.learning_rate > 0.0, "learning rate must be positive");
  require(head == MlpHead::kSigmoid ? classes == 2 : classes >= 2,
          "sigmoid heads are binary; softmax heads need at least two classes");
  MlpModel m;
  m.head = head;
  m.options = options;
  m.x_std = Standardizer::identity(inputs);
  const int outputs = head == MlpHead::kSigmoid ? 1 : classes;
  Rng rng = make_rng({options.seed, 0x1A17u});
  std::normal_distribution<double> n01(0.0, 1.0);
  m.w1.resize(options.hidden, inputs);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(inputs));
  for (Eigen::Index i = 0; i < m.w1.size(); ++i) m.w1.data()[i] = s1 * n01(rng);
  m.w2.resize(outputs, options.hidden);
  const double s2 = 1.0 / std::sqrt(static_cast<double>(options.hidden));
  for (Eigen::Index i = 0; i < m.w2.size(); ++i) m.w2.data()[i] = s2 * n01(rng);
  m.b1 = Eigen::VectorXd::Zero(options.hidden);
  m.b2 = Eigen::VectorXd::Zero(outputs);
  return m;
}

double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& z, const std::vector<int>& labels) {
  check_labels(model, z, labels);
  require(z.rows() > 0, "loss needs at least one row");
  return summed_loss(model.head, run(model, z).o, labels) / static_cast<double>(z.rows());
}

MlpGradients mlp_gradients(const MlpModel& model, const Eigen::MatrixXd& z,
                           const std::vector<int>& labels) {
  check_labels(model, z, labels);
  require(z.rows() > 0, "gradients need at least one row");
  return backprop(model, z, run(model, z), labels, 1.0 / static_cast<double>(z.rows()));
}

void train_epochs(MlpModel& model, const Eigen::MatrixXd& z, const std::vector<int>& labels,
                  int epochs) {
  check_labels(model, z, labels);
  require(z.rows() > 0, "training needs at least one row");
  const auto n = static_cast<std::size_t>(z.rows());
  const auto batch = static_cast<std::size_t>(model.options.batch);
  AdamSlot sw1, sb1, sw2, sb2;
  int t = 0;
  std::vector<Eigen::Index> order(n);
  std::vector<int> batch_labels;
  const int start = static_cast<int>(model.loss_curve.size());
  for (int e = 0; e < epochs; ++e) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng = make_rng({model.options.seed, 0xEB0Cu, static_cast<std::uint64_t>(start + e)});
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t b0 = 0; b0 < n; b0 += batch) {
      const std::size_t b1 = std::min(n, b0 + batch);
      const std::vector<Eigen::Index> rows(order.begin() + static_cast<std::ptrdiff_t>(b0),
                                           order.begin() + static_cast<std::ptrdiff_t>(b1));
      batch_labels.clear();
      for (Eigen::Index r : rows) batch_labels.push_back(labels[static_cast<std::size_t>(r)]);
      const Eigen::MatrixXd zb = z(rows, Eigen::all);
      const Pass p = run(model, zb);
      total += summed_loss(model.head, p.o, batch_labels);
      const MlpGradients g =
          backprop(model, zb, p, batch_labels, 1.0 / static_cast<double>(rows.size()));
      ++t;
      adam_step(model.w1, g.w1, sw1, model.options.learning_rate, t);
      adam_step(model.b1, g.b1, sb1, model.options.learning_rate, t);
      adam_step(model.w2, g.w2, sw2, model.options.learning_rate, t);
      adam_step(model.b2, g.b2, sb2, model.options.learning_rate, t);
    }
    model.loss_curve.push_back(total / static_cast<double>(n));
  }
  require(model.w1.allFinite() && model.w2.allFinite() && model.b1.allFinite() &&
              model.b2.allFinite(),
          "network training diverged");
}

MlpModel fit_mlp(const Eigen::MatrixXd& x, const std::vector<int>& labels, MlpHead head,
                 const MlpOptions& options, int classes) {
  require(static_cast<std::size_t>(x.rows()) == labels.size() && x.rows() > 0,
          "one label per row required");
  if (classes <= 0) classes = head == MlpHead::kSigmoid ? 2 : *std::max_element(labels.begin(), labels.end()) + 1;
  MlpModel m = init_mlp(static_cast<int>(x.cols()), classes, head, options);
  m.x_std = Standardizer::fit_pooled(x);
  train_epochs(m, m.x_std.apply(x), labels, options.epochs);
  return m;
}

double gradient_check(const MlpModel& model, const Eigen::MatrixXd& z,
                      const std::vector<int>& labels) {
  check_labels(model, z, labels);
  require(z.rows() >= 1 && z.rows() <= 8, "gradient check expects a batch of 1 to 8 rows");
  const double n = static_cast<double>(z.rows());
  const Pass p = run(model, z);
  const MlpGradients g = backprop(model, z, p, labels, 1.0 / n);
  const double h = kCheckStep;
  auto loss_of = [&](const Eigen::MatrixXd& o) { return summed_loss(model.head, o, labels) / n; };
  double worst = 0.0;
  auto record = [&](double analytic, double lp, double lm) {
    const double numeric = (lp - lm) / (2.0 * h);
    const double denom = std::max(std::abs(analytic) + std::abs(numeric), kCheckFloor);
    worst = std::max(worst, std::abs(analytic - numeric) / denom);
  };

  Eigen::MatrixXd o = p.o;
  for (Eigen::Index r = 0; r < o.rows(); ++r) {
    for (Eigen::Index j = 0; j <= p.h.rows(); ++j) {
      // j == hidden is the output bias.
      const Eigen::RowVectorXd delta =
          j < p.h.rows() ? Eigen::RowVectorXd(p.h.row(j) * h)
                         : Eigen::RowVectorXd::Constant(o.cols(), h);
      o.row(r) += delta;
      const double lp = loss_of(o);
      o.row(r) -= 2.0 * delta;
      const double lm = loss_of(o);
      o.row(r) = p.o.row(r);
      record(j < p.h.rows() ? g.w2(r, j) : g.b2(r), lp, lm);
    }
  }

  // Hidden-layer parameters only move one unit's activations. Perturbations that carry a
  // pre-activation across the rectifier's kink are skipped, since the loss is not
  // differentiable there.
  Eigen::MatrixXd o2 = p.o;
  for (Eigen::Index j = 0; j < p.a.rows(); ++j) {
    for (Eigen::Index i = 0; i <= z.cols(); ++i) {
      const Eigen::RowVectorXd delta =
          i < z.cols() ? Eigen::RowVectorXd(z.col(i).transpose() * h)
                       : Eigen::RowVectorXd::Constant(z.rows(), h);
      const Eigen::RowVectorXd ap = p.a.row(j) + delta;
      const Eigen::RowVectorXd am = p.a.row(j) - delta;
      bool kink = false;
      for (Eigen::Index k = 0; k < ap.size(); ++k) {
        if ((ap(k) > 0.0) != (p.a(j, k) > 0.0) || (am(k) > 0.0) != (p.a(j, k) > 0.0)) kink = true;
      }
      if (kink) continue;
      o2 = p.o + model.w2.col(j) * (ap.cwiseMax(0.0) - p.h.row(j));
      const double lp = loss_of(o2);
      o2 = p.o + model.w2.col(j) * (am.cwiseMax(0.0) - p.h.row(j));
      const double lm = loss_of(o2);
      record(i < z.cols() ? g.w1(j, i) : g.b1(j), lp, lm);
    }
  }
  return worst;
}

}  // namespace tactile
