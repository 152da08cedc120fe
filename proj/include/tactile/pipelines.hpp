#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tactile/evaluation.hpp"
#include "tactile/model_io.hpp"
#include "tactile/optical_sim.hpp"
#include "tactile/protocol.hpp"

namespace tactile {

/// Training-row selection for regressors. Frames with d < 0 never qualify.
struct RowPolicy {
  double step = 0.5;          // keep depths on this lattice
  double fine_below = 0.0;    // depths <= this keep the 0.1 mm lattice instead
  bool descent_only = true;
  double only_depth = -1.0;   // >= 0 keeps this depth exclusively
};

std::vector<SignalFrame> regression_rows(const Dataset& ds, const RowPolicy& policy);

struct KrrFitOptions {
  bool calibrate = true;
  bool refit = true;          // after calibration, refit on every row (else on the first half)
  double lambda = 1e-3;
  double sigma = 10.0;
  std::size_t calibration_rows = 800;  // per half
  std::size_t max_rows = 12000;
  CalibrationGrid grid = CalibrationGrid::standard();
  int workers = 1;
};

Json to_json(const CalibrationResult& r, const CalibrationGrid& grid);

/// Location halves for calibration: rows grouped by indentation location, split in visit order.
std::vector<int> location_groups(const std::vector<SignalFrame>& rows);

TrainedModel train_krr(const Dataset& ds, const std::vector<SignalFrame>& rows,
                       const std::vector<int>& columns, Target target, const KrrFitOptions& opt);
TrainedModel train_linear(const Dataset& ds, const std::vector<SignalFrame>& rows,
                          const std::vector<int>& columns, Target target);
TrainedModel train_multistage(const Dataset& ds, const KrrFitOptions& opt,
                              const std::vector<int>& columns = {});

enum class ClassifierKind { kMlp, kSvm };

/// Touch detector on descent and retraction frames of every depth; label = (d > 0).
TrainedModel train_touch(const Dataset& ds, ClassifierKind kind, const MlpOptions& mlp,
                         std::size_t max_rows, const std::vector<int>& columns = {});
/// Softmax tip classifier on descent and retraction frames of every depth.
TrainedModel train_tip(const Dataset& ds, const MlpOptions& mlp, std::size_t max_rows);

/// Sizes and budgets of the full experiment set.
struct Profile {
  std::string name = "full";
  RayBudget tht_budget{4000, 4, 0.2};
  RayBudget large_budget{3000, 4, 0.2};
  RayBudget smt_budget{2000, 4, 0.2};
  RayBudget sweep_budget{20000, 4, 0.2};
  double sweep_step = 0.1;
  double optical_pitch = 2.0;
  double large_pitch = 2.0;
  double smt_pitch = 2.0;
  int tht_test_events = 100;
  int large_test_events = 100;
  int smt_test_events = 40;   // per tip
  int resistive_test_events = 60;
  int replicates = 3;
  std::size_t touch_rows = 60000;
  std::size_t tip_rows = 60000;
  std::size_t calibration_rows = 800;
  MlpOptions mlp{1024, 40, 128, 1e-3, 1};
  double resistive_drift_sigma = 0.002;
};

Profile full_profile();
/// Small budgets for smoke and reproducibility runs.
Profile quick_profile();
Profile profile_by_name(const std::string& name);
Json to_json(const Profile& p);

struct RunContext {
  Profile profile;
  std::filesystem::path out;  // empty: write nothing
  std::uint64_t seed = 7;
  int workers = 1;
  std::function<void(const std::string&)> log;
};

std::vector<SweepCurve> run_sweep(const RunContext& ctx, std::vector<double> thicknesses = {});

struct ResistiveResult {
  Stats center, random, linear, krr;  // localization at 3 mm over the test set
  Stats krr_drift;
  double lambda = 0.0;
  double sigma = 0.0;
};
ResistiveResult run_resistive(const RunContext& ctx);

struct ThtResult {
  ErrorTable ambient_test;  // merged-lighting model
  ErrorTable dark_test;
  std::vector<std::vector<CurvePoint>> touch_curves;  // one per replicate
  std::vector<std::vector<AblationResult>> ablation;  // per replicate, tht_removal_cases order
  ErrorTable ambient_trained_dark_test;
  ErrorTable dark_trained_dark_test;
  double lambda = 0.0;
  double sigma = 0.0;
};
ThtResult run_tht(const RunContext& ctx);

struct LargeResult {
  ErrorTable single_stage;
  ErrorTable multistage;
};
LargeResult run_large(const RunContext& ctx);

struct TipMaxDepth {
  IndenterTip tip;
  double depth = 0.0;
  double accuracy = 0.0;
};

struct SmtResult {
  std::vector<CurvePoint> tip_curve;
  std::vector<TipMaxDepth> max_depth_accuracy;
  double accuracy_deep_negative = 0.0;  // at d = -10
  ErrorTable all_tips;
  std::vector<TipFold> folds;
};
SmtResult run_smt(const RunContext& ctx);

struct ReproResult {
  std::vector<SweepCurve> sweep;
  ResistiveResult resistive;
  ThtResult tht;
  LargeResult large;
  SmtResult smt;
};

/// Every experiment with fixed seeds; writes tables, curves, plots and summary.json under
/// ctx.out.
ReproResult run_repro(const RunContext& ctx);

}  // namespace tactile
