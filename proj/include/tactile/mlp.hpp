#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "tactile/standardizer.hpp"

namespace tactile {

enum class MlpHead { kSigmoid, kSoftmax };

struct MlpOptions {
  int hidden = 1024;
  int epochs = 30;
  int batch = 128;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
};

/// One rectified-linear hidden layer. Sigmoid heads have a single output (probability of label
/// 1); softmax heads have one output per class.
struct MlpModel {
  MlpHead head = MlpHead::kSigmoid;
  MlpOptions options;
  Standardizer x_std;
  Eigen::MatrixXd w1;  // hidden x inputs
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // outputs x hidden
  Eigen::VectorXd b2;
  std::vector<double> loss_curve;  // mean training loss per epoch

  int inputs() const { return static_cast<int>(w1.cols()); }
  int outputs() const { return static_cast<int>(w2.rows()); }
  int classes() const { return head == MlpHead::kSigmoid ? 2 : outputs(); }

  /// Column-per-sample output probabilities for standardized inputs (rows = samples).
  Eigen::MatrixXd forward(const Eigen::MatrixXd& z) const;
  /// Probabilities for raw inputs, one row per sample.
  Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const;
  std::vector<int> predict(const Eigen::MatrixXd& x) const;
};

struct MlpGradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

/// Seeded initialization, weights ~ N(0, 1/fan_in), zero biases, identity standardizer.
MlpModel init_mlp(int inputs, int classes, MlpHead head, const MlpOptions& options);

/// Mean cross-entropy on standardized inputs.
double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& z, const std::vector<int>& labels);
MlpGradients mlp_gradients(const MlpModel& model, const Eigen::MatrixXd& z,
                           const std::vector<int>& labels);

/// Adam epochs over seeded mini-batches of standardized inputs; appends to loss_curve.
void train_epochs(MlpModel& model, const Eigen::MatrixXd& z, const std::vector<int>& labels,
                  int epochs);

/// Standardizes, initializes and trains for options.epochs.
MlpModel fit_mlp(const Eigen::MatrixXd& x, const std::vector<int>& labels, MlpHead head,
                 const MlpOptions& options, int classes = 0);

/// Max relative error between analytic gradients and central differences (step 1e-5) over
/// every parameter, on a batch of at most 8 standardized rows.
double gradient_check(const MlpModel& model, const Eigen::MatrixXd& z,
                      const std::vector<int>& labels);

}  // namespace tactile
