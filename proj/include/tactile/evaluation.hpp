#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tactile/model_io.hpp"
#include "tactile/protocol.hpp"

namespace tactile {

struct Stats {
  double median = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population
};

/// NaN entries are ignored; an empty sample gives NaN statistics.
Stats summarize(std::vector<double> values);

inline constexpr std::size_t kMinBinSamples = 20;
inline constexpr double kBinHalfWidth = 0.05;  // mm

struct ErrorRow {
  double depth = 0.0;
  std::size_t count = 0;
  bool sparse = false;  // fewer than kMinBinSamples frames
  Stats location;
  Stats depth_error;
};

struct ErrorTable {
  std::vector<ErrorRow> rows;
  std::string model_digest;
  std::string dataset_digest;

  const ErrorRow& at(double depth) const;
};

std::vector<double> tht_depth_bins();  // 0.1 0.5 1 2 3 5
std::vector<double> smt_depth_bins();  // 0.1 0.5 1 2 3 4

/// `predicted` holds rows of (x, y, d) aligned with `truth`.
ErrorTable error_table(const Eigen::MatrixXd& predicted, const std::vector<SignalFrame>& truth,
                       const std::vector<double>& bins);

/// Checks that the model was trained on the test set's configuration.
ErrorTable error_table(const TrainedModel& model, const Dataset& test,
                       const std::vector<double>& bins);

struct CurvePoint {
  double depth = 0.0;
  std::size_t count = 0;
  double rate = 0.0;
};

/// Fraction of frames at each depth (grouped at `granularity` mm) predicted as touching.
std::vector<CurvePoint> touch_curve(const std::vector<int>& predicted,
                                    const std::vector<SignalFrame>& frames,
                                    double granularity = 0.1);
/// Fraction of frames at each depth whose predicted tip class is the true one.
std::vector<CurvePoint> tip_curve(const std::vector<int>& predicted,
                                  const std::vector<SignalFrame>& frames,
                                  double granularity = 0.1);
/// Rate at the depth point closest to `depth`; throws when no point lies within granularity/2.
double curve_rate(const std::vector<CurvePoint>& curve, double depth, double granularity = 0.1);

struct TerminalMask {
  std::string name;
  std::vector<int> removed;
};

/// Baseline plus the four removal cases for the 16-terminal THT ring.
std::vector<TerminalMask> tht_removal_cases();
std::vector<TerminalMask> masks_from_json(const Json& j);
Json to_json(const std::vector<TerminalMask>& masks);

/// Feature channels left after dropping every pair that involves a removed terminal.
std::vector<int> retained_columns(const SensorConfig& config, const TerminalMask& mask);

/// Trains a regressor on `train` using the given feature channels.
using FitFn = std::function<TrainedModel(const Dataset& train, const std::vector<int>& columns)>;

struct AblationResult {
  TerminalMask mask;
  std::size_t channels = 0;
  ErrorTable table;
};

/// One retrained model per mask, evaluated on `test`; masks run in parallel.
std::vector<AblationResult> ablate_terminals(const SensorConfig& config,
                                             const std::vector<TerminalMask>& masks,
                                             const Dataset& train, const Dataset& test,
                                             const FitFn& fit, const std::vector<double>& bins,
                                             int workers = 1);

struct TipFold {
  IndenterTip held_out;
  double eval_depth = 2.0;
  ErrorRow row;
};

/// Evaluation depth for a held-out tip: 1 mm for the planar tip, 2 mm otherwise.
double tip_eval_depth(const IndenterTip& tip);

/// Six leave-one-tip-out folds; each trains on the other five tips and tests on the held-out
/// tip's frames at its evaluation depth.
std::vector<TipFold> ablate_tips(const Dataset& train, const Dataset& test, const FitFn& fit,
                                 int workers = 1);

}  // namespace tactile
