#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tactile/baselines.hpp"
#include "tactile/config_io.hpp"
#include "tactile/krr.hpp"
#include "tactile/linear.hpp"
#include "tactile/mlp.hpp"
#include "tactile/multistage.hpp"
#include "tactile/svm.hpp"

namespace tactile {

inline constexpr int kModelVersion = 1;

using ModelVariant = std::variant<LinearModel, KernelRidgeModel, MultistageModel, MlpModel,
                                  LinearSvmModel, CenterPredictor, RandomPredictor>;

struct TrainedModel {
  ModelVariant model;
  Target target = Target::kBoth;  // regressors only
  std::vector<int> columns;       // feature channels used; empty = all
  std::string build;
  std::string config_digest;
  std::string training_digest;
  Json record = Json::object();   // calibration record and other provenance

  std::string kind() const;
  bool is_classifier() const;
};

/// Writes stem.json (header) and stem.bin (little-endian float64 blocks listed in the header).
void save_model(const TrainedModel& model, const std::string& stem);
TrainedModel load_model(const std::string& stem);

/// Rows of (x, y, d); absent outputs are NaN and depths are clamped to >= 0.
Eigen::MatrixXd predict_regression(const TrainedModel& model,
                                   const std::vector<SignalFrame>& frames);
/// Class per frame: touch (0/1) or tip class id (1..6).
std::vector<int> predict_labels(const TrainedModel& model, const std::vector<SignalFrame>& frames);

}  // namespace tactile
