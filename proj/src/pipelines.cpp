#include "tactile/pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <map>
#include <memory>

#include "tactile/digest.hpp"
#include "tactile/error.hpp"
#include "tactile/report.hpp"
#include "tactile/rng.hpp"

namespace tactile {

namespace {

constexpr double kLatticeTol = 1e-6;

bool on_lattice(double d, double step) {
  const double q = d / step;
  return std::abs(q - std::round(q)) < kLatticeTol;
}

std::size_t descent_length(const std::string& build, int tip_class) {
  return depth_profile(build, IndenterTip::from_class(tip_class), true).size();
}

bool on_descent(const Dataset& ds, const SignalFrame& f) {
  return static_cast<std::size_t>(f.step) < descent_length(ds.schedule.build, f.tip_class);
}

template <typename T>
std::vector<T> thin(const std::vector<T>& rows, std::size_t max_rows) {
  if (max_rows == 0 || rows.size() <= max_rows) return rows;
  std::vector<T> out;
  out.reserve(max_rows);
  for (std::size_t k = 0; k < max_rows; ++k) out.push_back(rows[k * rows.size() / max_rows]);
  return out;
}

std::string matrix_digest(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  std::string bytes(sizeof(double) * static_cast<std::size_t>(x.size() + y.size()), '\0');
  std::memcpy(bytes.data(), x.data(), sizeof(double) * static_cast<std::size_t>(x.size()));
  std::memcpy(bytes.data() + sizeof(double) * static_cast<std::size_t>(x.size()), y.data(),
              sizeof(double) * static_cast<std::size_t>(y.size()));
  return sha256_hex(bytes);
}

TrainedModel wrap(ModelVariant m, const Dataset& ds, const std::vector<int>& columns, Target target,
                  std::string digest) {
  TrainedModel tm;
  tm.model = std::move(m);
  tm.target = target;
  tm.columns = columns;
  tm.build = ds.config.build;
  tm.config_digest = ds.config_digest;
  tm.training_digest = std::move(digest);
  return tm;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

void note(const RunContext& ctx, const std::string& msg) {
  if (ctx.log) ctx.log(msg);
}

void emit(const RunContext& ctx, const std::string& rel, const std::string& contents) {
  if (ctx.out.empty()) return;
  write_output(ctx.out / rel, contents);
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t derive(const RunContext& ctx, std::uint64_t tag, std::uint64_t a = 0, std::uint64_t b = 0) {
  return mix_seed({ctx.seed, tag, a, b});
}

std::vector<SignalFrame> frames_near(const std::vector<SignalFrame>& frames,
                                     const std::vector<double>& depths) {
  std::vector<SignalFrame> out;
  for (const SignalFrame& f : frames) {
    for (double d : depths) {
      if (std::abs(f.d - d) <= kBinHalfWidth + 1e-9) {
        out.push_back(f);
        break;
      }
    }
  }
  return out;
}

Dataset with_frames(const Dataset& ds, std::vector<SignalFrame> frames) {
  Dataset out;
  out.version = ds.version;
  out.config = ds.config;
  out.schedule = ds.schedule;
  out.config_digest = ds.config_digest;
  out.frames = std::move(frames);
  return out;
}

Json stats_json(const Stats& s) { return {{"median", s.median}, {"mean", s.mean}, {"std", s.std}}; }

Json table_json(const ErrorTable& t) {
  Json rows = Json::array();
  for (const ErrorRow& r : t.rows) {
    rows.push_back({{"depth", r.depth}, {"count", r.count}, {"sparse", r.sparse},
                    {"location", stats_json(r.location)}, {"depth_error", stats_json(r.depth_error)}});
  }
  return rows;
}

Json curve_json(const std::vector<CurvePoint>& c) {
  Json out = Json::array();
  for (const CurvePoint& p : c) out.push_back({p.depth, p.count, p.rate});
  return out;
}

CollectOptions optical_options(const RunContext& ctx, const std::shared_ptr<const OpticalModel>& model) {
  CollectOptions o;
  o.budget = model->budget();
  o.model = model;
  o.workers = ctx.workers;
  return o;
}

KrrFitOptions krr_options(const RunContext& ctx) {
  KrrFitOptions o;
  o.calibration_rows = ctx.profile.calibration_rows;
  o.workers = ctx.workers;
  return o;
}

}  // namespace

std::vector<SignalFrame> regression_rows(const Dataset& ds, const RowPolicy& p) {
  require(p.step > 0.0, "row policy step must be positive");
  std::vector<SignalFrame> out;
  for (const SignalFrame& f : ds.frames) {
    if (f.d < 0.0) continue;
    if (p.descent_only && !on_descent(ds, f)) continue;
    if (p.only_depth >= 0.0) {
      if (std::abs(f.d - p.only_depth) > kLatticeTol) continue;
    } else {
      const double step = f.d <= p.fine_below + kLatticeTol ? 0.1 : p.step;
      if (!on_lattice(f.d, step)) continue;
    }
    out.push_back(f);
  }
  return out;
}

std::vector<int> location_groups(const std::vector<SignalFrame>& rows) {
  std::map<std::pair<long long, long long>, int> ids;
  std::vector<int> out;
  out.reserve(rows.size());
  for (const SignalFrame& f : rows) {
    const auto key = std::make_pair(std::llround(f.x * 1e6), std::llround(f.y * 1e6));
    const auto it = ids.emplace(key, static_cast<int>(ids.size())).first;
    out.push_back(it->second);
  }
  return out;
}

Json to_json(const CalibrationResult& r, const CalibrationGrid& grid) {
  Json cells = Json::array();
  for (const CalibrationCell& c : r.cells) cells.push_back({c.lambda, c.sigma, c.objective});
  return {{"lambda", r.lambda},
          {"sigma", r.sigma},
          {"gamma", 1.0 / r.sigma},
          {"objective", r.objective},
          {"train_rows", r.train_rows},
          {"validation_rows", r.validation_rows},
          {"lambdas", grid.lambdas},
          {"sigmas", grid.sigmas},
          {"cells", cells},
          // Hardware operating points on raw signals; documentation only, never used to fit.
          {"hardware_reference",
           {{{"build", "tht"}, {"lambda", 2.15e-4}, {"sigma", 5.45e-4}, {"gamma", 1.0 / 5.45e-4}},
            {{"build", "smt"}, {"lambda", 0.01}, {"sigma", 1.0 / 10.0e-7}, {"gamma", 10.0e-7}}}}};
}

TrainedModel train_krr(const Dataset& ds, const std::vector<SignalFrame>& rows_in,
                       const std::vector<int>& columns, Target target, const KrrFitOptions& opt) {
  if (rows_in.empty()) fail(ErrorKind::kInvalidArgument, "no training rows for kernel ridge");
  const std::vector<SignalFrame> rows = thin(rows_in, opt.max_rows);
  Eigen::MatrixXd x = feature_matrix(rows, columns);
  Eigen::MatrixXd y = target_matrix(rows, target);
  double lambda = opt.lambda;
  double sigma = opt.sigma;
  Json record = Json::object();
  if (opt.calibrate) {
    const std::vector<int> groups = location_groups(rows);
    const CalibrationResult cal =
        calibrate_krr(x, y, groups, opt.grid, opt.workers, opt.calibration_rows);
    lambda = cal.lambda;
    sigma = cal.sigma;
    record["calibration"] = to_json(cal, opt.grid);
    if (!opt.refit) {
      // Keep only the first half of the locations, as in the calibration fit.
      const int n_groups = *std::max_element(groups.begin(), groups.end()) + 1;
      std::vector<Eigen::Index> keep;
      for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i] < (n_groups + 1) / 2) keep.push_back(static_cast<Eigen::Index>(i));
      }
      x = Eigen::MatrixXd(x(keep, Eigen::all));
      y = Eigen::MatrixXd(y(keep, Eigen::all));
    }
  }
  record["refit"] = opt.refit || !opt.calibrate;
  record["rows"] = x.rows();
  TrainedModel tm = wrap(fit_krr(x, y, lambda, sigma), ds, columns, target, matrix_digest(x, y));
  tm.record = std::move(record);
  return tm;
}

TrainedModel train_linear(const Dataset& ds, const std::vector<SignalFrame>& rows,
                          const std::vector<int>& columns, Target target) {
  const Eigen::MatrixXd x = feature_matrix(rows, columns);
  const Eigen::MatrixXd y = target_matrix(rows, target);
  LinearModel m = fit_linear(x, y);
  Json record = {{"rows", x.rows()}};
  if (!m.warning.empty()) record["warning"] = m.warning;
  TrainedModel tm = wrap(std::move(m), ds, columns, target, matrix_digest(x, y));
  tm.record = std::move(record);
  return tm;
}

TrainedModel train_multistage(const Dataset& ds, const KrrFitOptions& opt,
                              const std::vector<int>& columns) {
  std::vector<SignalFrame> depth_rows;
  for (const SignalFrame& f : ds.frames) {
    if (f.d >= 0.0) depth_rows.push_back(f);
  }
  const std::vector<SignalFrame> slice_frames = regression_rows(ds, {0.1, 0.0, true, -1.0});
  const Eigen::MatrixXd xs = feature_matrix(slice_frames, columns);
  const Eigen::MatrixXd ys = target_matrix(slice_frames, Target::kBoth);
  std::array<SliceHyper, kSliceCount> hyper;
  Json slices = Json::array();
  for (int k = 0; k < kSliceCount; ++k) {
    hyper[k] = {opt.lambda, opt.sigma};
    Json rec = {{"slice", k}, {"center", k + 0.5}};
    if (opt.calibrate) {
      const auto rows = slice_rows(ys, k);
      if (rows.empty()) fail(ErrorKind::kInvalidArgument, "depth slice " + std::to_string(k) + " is empty");
      std::vector<SignalFrame> sf;
      for (Eigen::Index r : rows) sf.push_back(slice_frames[static_cast<std::size_t>(r)]);
      const CalibrationResult cal =
          calibrate_krr(xs(rows, Eigen::all), ys(rows, Eigen::seq(0, 1)), location_groups(sf),
                        opt.grid, opt.workers, opt.calibration_rows);
      hyper[k] = {cal.lambda, cal.sigma};
      rec["calibration"] = to_json(cal, opt.grid);
    }
    slices.push_back(rec);
  }
  MultistageModel m;
  m.depth = fit_linear(feature_matrix(depth_rows, columns), target_matrix(depth_rows, Target::kDepth));
  const MultistageModel staged = fit_multistage(xs, ys, hyper);
  m.slices = staged.slices;
  TrainedModel tm = wrap(std::move(m), ds, columns, Target::kBoth, matrix_digest(xs, ys));
  tm.record = {{"slices", slices}, {"depth_rows", depth_rows.size()}};
  return tm;
}

namespace {

std::vector<SignalFrame> classifier_rows(const Dataset& ds, std::size_t max_rows, std::uint64_t seed) {
  std::vector<SignalFrame> rows = ds.frames;
  if (max_rows > 0 && rows.size() > max_rows) {
    Rng rng = make_rng({seed, 0xC1A5u});
    std::shuffle(rows.begin(), rows.end(), rng);
    rows.resize(max_rows);
  }
  return rows;
}

}  // namespace

TrainedModel train_touch(const Dataset& ds, ClassifierKind kind, const MlpOptions& mlp,
                         std::size_t max_rows, const std::vector<int>& columns) {
  const std::vector<SignalFrame> rows = classifier_rows(ds, max_rows, mlp.seed);
  const Eigen::MatrixXd x = feature_matrix(rows, columns);
  std::vector<int> labels;
  Eigen::MatrixXd y(static_cast<Eigen::Index>(rows.size()), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    labels.push_back(rows[i].d > 0.0 ? 1 : 0);
    y(static_cast<Eigen::Index>(i), 0) = labels.back();
  }
  const bool pos = std::count(labels.begin(), labels.end(), 1) > 0;
  const bool neg = std::count(labels.begin(), labels.end(), 0) > 0;
  if (!(pos && neg)) fail(ErrorKind::kInvalidArgument, "touch training data has a single class");
  TrainedModel tm = kind == ClassifierKind::kMlp
                        ? wrap(fit_mlp(x, labels, MlpHead::kSigmoid, mlp), ds, columns, Target::kBoth,
                               matrix_digest(x, y))
                        : wrap(fit_svm(x, labels), ds, columns, Target::kBoth, matrix_digest(x, y));
  tm.record = {{"rows", rows.size()}, {"task", "touch"}};
  return tm;
}

TrainedModel train_tip(const Dataset& ds, const MlpOptions& mlp, std::size_t max_rows) {
  const std::vector<SignalFrame> rows = classifier_rows(ds, max_rows, mlp.seed);
  const Eigen::MatrixXd x = feature_matrix(rows, {});
  std::vector<int> labels;
  Eigen::MatrixXd y(static_cast<Eigen::Index>(rows.size()), 1);
  std::array<bool, 6> seen{};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].tip_class >= 1 && rows[i].tip_class <= 6, "tip class out of range");
    labels.push_back(rows[i].tip_class - 1);
    seen[static_cast<std::size_t>(labels.back())] = true;
    y(static_cast<Eigen::Index>(i), 0) = labels.back();
  }
  for (std::size_t k = 0; k < seen.size(); ++k) {
    if (!seen[k]) {
      fail(ErrorKind::kInvalidArgument,
           "tip classifier data lacks class " + std::to_string(k + 1));
    }
  }
  TrainedModel tm = wrap(fit_mlp(x, labels, MlpHead::kSoftmax, mlp, 6), ds, {}, Target::kBoth,
                         matrix_digest(x, y));
  tm.record = {{"rows", rows.size()}, {"task", "tip"}};
  return tm;
}

Profile full_profile() { return Profile{}; }

Profile quick_profile() {
  Profile p;
  p.name = "quick";
  p.tht_budget = {300, 4, 0.2};
  p.large_budget = {300, 4, 0.2};
  p.smt_budget = {200, 4, 0.2};
  p.sweep_budget = {2000, 4, 0.2};
  p.sweep_step = 0.5;
  p.optical_pitch = 5.0;
  p.large_pitch = 8.0;
  p.smt_pitch = 8.0;
  p.tht_test_events = 8;
  p.large_test_events = 6;
  p.smt_test_events = 3;
  p.resistive_test_events = 12;
  p.replicates = 1;
  p.touch_rows = 600;
  p.tip_rows = 600;
  p.calibration_rows = 120;
  p.mlp.epochs = 2;
  return p;
}

Profile profile_by_name(const std::string& name) {
  if (name == "full") return full_profile();
  if (name == "quick") return quick_profile();
  fail(ErrorKind::kInvalidArgument, "unknown profile '" + name + "' (expected full or quick)");
}

Json to_json(const Profile& p) {
  auto budget = [](const RayBudget& b) {
    return Json{{"rays_per_emitter", b.rays_per_emitter}, {"max_bounces", b.max_bounces},
                {"march_step", b.march_step}};
  };
  return {{"name", p.name},
          {"tht_budget", budget(p.tht_budget)},
          {"large_budget", budget(p.large_budget)},
          {"smt_budget", budget(p.smt_budget)},
          {"sweep_budget", budget(p.sweep_budget)},
          {"sweep_step", p.sweep_step},
          {"optical_pitch", p.optical_pitch},
          {"large_pitch", p.large_pitch},
          {"smt_pitch", p.smt_pitch},
          {"tht_test_events", p.tht_test_events},
          {"large_test_events", p.large_test_events},
          {"smt_test_events", p.smt_test_events},
          {"resistive_test_events", p.resistive_test_events},
          {"replicates", p.replicates},
          {"touch_rows", p.touch_rows},
          {"tip_rows", p.tip_rows},
          {"calibration_rows", p.calibration_rows},
          {"mlp", {{"hidden", p.mlp.hidden}, {"epochs", p.mlp.epochs}, {"batch", p.mlp.batch},
                   {"learning_rate", p.mlp.learning_rate}}},
          {"resistive_drift_sigma", p.resistive_drift_sigma}};
}

std::vector<SweepCurve> run_sweep(const RunContext& ctx, std::vector<double> thicknesses) {
  Timer t;
  if (thicknesses.empty()) thicknesses = {5.0, 7.0, 8.0, 10.0, 12.0};
  std::vector<double> depths;
  const int n = static_cast<int>(std::lround(5.0 / ctx.profile.sweep_step));
  for (int k = 0; k <= n; ++k) depths.push_back(std::round(k * ctx.profile.sweep_step * 1e9) / 1e9);
  const std::vector<SweepCurve> curves = thickness_sweep(thicknesses, depths, ctx.profile.sweep_budget);
  std::string csv = "thickness,depth,signal\n";
  std::string bands = "thickness,dead_band,start,end,total_variation\n";
  for (const SweepCurve& c : curves) {
    for (std::size_t k = 0; k < c.depths.size(); ++k) {
      csv += fmt(c.thickness) + ',' + fmt(c.depths[k]) + ',' + fmt(c.signal[k]) + '\n';
    }
    bands += fmt(c.thickness) + ',' + (c.dead_band ? "1" : "0") + ',' + fmt(c.dead_band_start) + ',' +
             fmt(c.dead_band_end) + ',' + fmt(c.total_variation) + '\n';
  }
  emit(ctx, "sweep/curves.csv", csv);
  emit(ctx, "sweep/dead_bands.csv", bands);
  note(ctx, "sweep: " + std::to_string(curves.size()) + " curves in " + fmt(t.seconds()) + " s");
  return curves;
}

ResistiveResult run_resistive(const RunContext& ctx) {
  Timer t;
  ResistiveResult res;
  const RowPolicy at3{0.5, 0.0, false, 3.0};
  const IndenterTip hemi = IndenterTip::hemisphere();
  auto collect_pair = [&](const SensorConfig& cfg, std::uint64_t tag) {
    std::vector<Dataset> grids;
    for (int k = 0; k < 4; ++k) {
      grids.push_back(collect(cfg, make_schedule(cfg, Purpose::kTrain, {hemi}, Lighting::kDark,
                                                 derive(ctx, tag, 1, static_cast<std::uint64_t>(k)))));
    }
    ScheduleOptions so;
    so.n_random = ctx.profile.resistive_test_events;
    Dataset test = collect(cfg, make_schedule(cfg, Purpose::kTest, {hemi}, Lighting::kDark,
                                              derive(ctx, tag, 2), so));
    return std::make_pair(merge(grids), std::move(test));
  };

  const SensorConfig cfg = build_layout("resistive");
  const auto [train, test] = collect_pair(cfg, 0x4E51);
  const std::vector<SignalFrame> train_rows = regression_rows(train, at3);
  const std::vector<SignalFrame> test_rows = regression_rows(test, at3);
  const Dataset test3 = with_frames(test, test_rows);
  note(ctx, "resistive: collected " + std::to_string(train.frames.size() + test.frames.size()) +
                " frames in " + fmt(t.seconds()) + " s");

  const Baselines base = fit_baselines(train, derive(ctx, 0x4E51, 3));
  const auto n = static_cast<Eigen::Index>(test_rows.size());
  auto loc_stats = [&](const Eigen::MatrixXd& pred) {
    return error_table(pred, test_rows, {3.0}).rows.front().location;
  };
  res.center = loc_stats(predict(base.center, n));
  res.random = loc_stats(predict(base.random, n));
  const TrainedModel lin = train_linear(train, train_rows, {}, Target::kLocation);
  res.linear = loc_stats(predict_regression(lin, test_rows));
  const TrainedModel krr = train_krr(train, train_rows, {}, Target::kLocation, krr_options(ctx));
  const Eigen::MatrixXd krr_pred = predict_regression(krr, test_rows);
  res.krr = loc_stats(krr_pred);
  const auto& km = std::get<KernelRidgeModel>(krr.model);
  res.lambda = km.lambda;
  res.sigma = km.sigma;

  SensorConfig drift_cfg = cfg;
  drift_cfg.resistive.drift_sigma = ctx.profile.resistive_drift_sigma;
  const auto [dtrain, dtest] = collect_pair(drift_cfg, 0x4E51);
  const std::vector<SignalFrame> dtest_rows = regression_rows(dtest, at3);
  const TrainedModel dkrr =
      train_krr(dtrain, regression_rows(dtrain, at3), {}, Target::kLocation, krr_options(ctx));
  res.krr_drift = error_table(predict_regression(dkrr, dtest_rows), dtest_rows, {3.0}).rows.front().location;

  std::string table = "predictor,median,mean,std\n";
  const std::vector<std::pair<std::string, Stats>> named = {
      {"center", res.center}, {"random", res.random}, {"linear", res.linear}, {"laplacian_krr", res.krr},
      {"laplacian_krr_drift", res.krr_drift}};
  for (const auto& [name, s] : named) {
    table += name + ',' + fmt(s.median) + ',' + fmt(s.mean) + ',' + fmt(s.std) + '\n';
  }
  emit(ctx, "resistive/table.csv", table);
  emit(ctx, "resistive/predictions.csv", predictions_csv(krr_pred, test_rows));
  emit(ctx, "resistive/arrows.svg",
       arrow_plot_svg(krr_pred, test_rows, {3.0}, common_sensing_area(cfg, {hemi})));
  emit(ctx, "resistive/calibration.json", krr.record.dump(1) + "\n");
  (void)test3;
  note(ctx, "resistive: done in " + fmt(t.seconds()) + " s (krr median " + fmt(res.krr.median) + " mm)");
  return res;
}

ThtResult run_tht(const RunContext& ctx) {
  Timer t;
  ThtResult res;
  const Profile& p = ctx.profile;
  const SensorConfig cfg = build_layout("tht");
  const IndenterTip hemi = IndenterTip::hemisphere();
  const auto model = std::make_shared<const OpticalModel>(cfg, p.tht_budget);
  const CollectOptions co = optical_options(ctx, model);
  const RowPolicy policy{0.5, 0.0, false, -1.0};
  const std::vector<double> bins = tht_depth_bins();
  const Rect area = common_sensing_area(cfg, {hemi});
  ScheduleOptions grid_opt;
  grid_opt.grid_pitch = p.optical_pitch;
  ScheduleOptions test_opt;
  test_opt.n_random = p.tht_test_events;

  for (int r = 0; r < p.replicates; ++r) {
    const auto ru = static_cast<std::uint64_t>(r);
    auto grid = [&](Lighting l, std::uint64_t k) {
      return collect(cfg, make_schedule(cfg, Purpose::kTrain, {hemi}, l, derive(ctx, 0x7A7, ru, k), grid_opt), co);
    };
    const Dataset a1 = grid(Lighting::kAmbient, 1);
    const Dataset d1 = grid(Lighting::kDark, 2);
    const Dataset a2 = grid(Lighting::kAmbient, 3);
    const Dataset d2 = grid(Lighting::kDark, 4);
    const std::uint64_t test_seed = derive(ctx, 0x7A7, ru, 9);
    const Dataset test_amb =
        collect(cfg, make_schedule(cfg, Purpose::kTest, {hemi}, Lighting::kAmbient, test_seed, test_opt), co);
    const Dataset test_dark =
        collect(cfg, make_schedule(cfg, Purpose::kTest, {hemi}, Lighting::kDark, test_seed, test_opt), co);
    const Dataset train = merge({a1, d1, a2, d2});
    note(ctx, "tht r" + std::to_string(r) + ": data ready at " + fmt(t.seconds()) + " s (" +
                  std::to_string(model->cache_size()) + " cached poses)");
    const std::string tag = "tht/r" + std::to_string(r) + "/";

    const Dataset amb_bins = with_frames(test_amb, frames_near(test_amb.frames, bins));
    const Dataset dark_bins = with_frames(test_dark, frames_near(test_dark.frames, bins));
    if (r == 0) {
      const TrainedModel main = train_krr(train, regression_rows(train, policy), {}, Target::kBoth,
                                          krr_options(ctx));
      const auto& km = std::get<KernelRidgeModel>(main.model);
      res.lambda = km.lambda;
      res.sigma = km.sigma;
      res.ambient_test = error_table(main, amb_bins, bins);
      res.dark_test = error_table(main, dark_bins, bins);
      const Eigen::MatrixXd pred = predict_regression(main, amb_bins.frames);
      emit(ctx, "tht/krr_ambient_test.csv", error_table_csv(res.ambient_test));
      emit(ctx, "tht/krr_dark_test.csv", error_table_csv(res.dark_test));
      emit(ctx, "tht/predictions.csv", predictions_csv(pred, amb_bins.frames));
      emit(ctx, "tht/arrows.svg", arrow_plot_svg(pred, amb_bins.frames, bins, area));
      emit(ctx, "tht/calibration.json", main.record.dump(1) + "\n");
      note(ctx, "tht: main model at " + fmt(t.seconds()) + " s (3 mm median " +
                    fmt(res.ambient_test.at(3.0).location.median) + " mm)");

      KrrFitOptions fixed = krr_options(ctx);
      fixed.calibrate = false;
      fixed.lambda = km.lambda;
      fixed.sigma = km.sigma;
      const Dataset amb_train = merge({a1, a2});
      const Dataset dark_train = merge({d1, d2});
      const TrainedModel amb_model =
          train_krr(amb_train, regression_rows(amb_train, policy), {}, Target::kBoth, fixed);
      const TrainedModel dark_model =
          train_krr(dark_train, regression_rows(dark_train, policy), {}, Target::kBoth, fixed);
      res.ambient_trained_dark_test = error_table(amb_model, dark_bins, bins);
      res.dark_trained_dark_test = error_table(dark_model, dark_bins, bins);
      emit(ctx, "tht/lighting_ambient_trained_dark_test.csv", error_table_csv(res.ambient_trained_dark_test));
      emit(ctx, "tht/lighting_dark_trained_dark_test.csv", error_table_csv(res.dark_trained_dark_test));
    }

    MlpOptions mo = p.mlp;
    mo.seed = derive(ctx, 0x70C4, ru);
    const TrainedModel touch = train_touch(train, ClassifierKind::kMlp, mo, p.touch_rows);
    res.touch_curves.push_back(touch_curve(predict_labels(touch, test_amb.frames), test_amb.frames));
    emit(ctx, tag + "touch_curve.csv", curve_csv(res.touch_curves.back()));
    note(ctx, "tht r" + std::to_string(r) + ": touch classifier at " + fmt(t.seconds()) + " s");

    const Dataset test2 = with_frames(test_amb, frames_near(test_amb.frames, {2.0}));
    const FitFn fit = [&](const Dataset& ds, const std::vector<int>& cols) {
      KrrFitOptions o = krr_options(ctx);
      o.workers = 1;
      return train_krr(ds, regression_rows(ds, policy), cols, Target::kBoth, o);
    };
    res.ablation.push_back(ablate_terminals(cfg, tht_removal_cases(), train, test2, fit, {2.0}, ctx.workers));
    std::string csv = "case,channels,loc_median,loc_mean,loc_std,depth_median,depth_mean,depth_std\n";
    for (const AblationResult& a : res.ablation.back()) {
      const ErrorRow& row = a.table.rows.front();
      csv += a.mask.name + ',' + std::to_string(a.channels) + ',' + fmt(row.location.median) + ',' +
             fmt(row.location.mean) + ',' + fmt(row.location.std) + ',' + fmt(row.depth_error.median) +
             ',' + fmt(row.depth_error.mean) + ',' + fmt(row.depth_error.std) + '\n';
    }
    emit(ctx, tag + "ablation.csv", csv);
    note(ctx, "tht r" + std::to_string(r) + ": ablation at " + fmt(t.seconds()) + " s");
  }
  emit(ctx, "tht/removal_masks.json", to_json(tht_removal_cases()).dump(1) + "\n");
  return res;
}

LargeResult run_large(const RunContext& ctx) {
  Timer t;
  LargeResult res;
  const Profile& p = ctx.profile;
  const SensorConfig cfg = build_layout("tht_large");
  const IndenterTip hemi = IndenterTip::hemisphere();
  const auto model = std::make_shared<const OpticalModel>(cfg, p.large_budget);
  const CollectOptions co = optical_options(ctx, model);
  ScheduleOptions grid_opt;
  grid_opt.grid_pitch = p.large_pitch;
  ScheduleOptions test_opt;
  test_opt.n_random = p.large_test_events;
  const Dataset train =
      collect(cfg, make_schedule(cfg, Purpose::kTrain, {hemi}, Lighting::kDark, derive(ctx, 0x1A46, 1), grid_opt), co);
  const Dataset test_all =
      collect(cfg, make_schedule(cfg, Purpose::kTest, {hemi}, Lighting::kDark, derive(ctx, 0x1A46, 2), test_opt), co);
  const std::vector<double> bins = tht_depth_bins();
  const Dataset test = with_frames(test_all, frames_near(test_all.frames, bins));
  note(ctx, "large: data ready at " + fmt(t.seconds()) + " s");

  const TrainedModel single = train_krr(train, regression_rows(train, {0.5, 0.0, false, -1.0}), {},
                                        Target::kBoth, krr_options(ctx));
  res.single_stage = error_table(single, test, bins);
  const TrainedModel multi = train_multistage(train, krr_options(ctx));
  res.multistage = error_table(multi, test, bins);
  emit(ctx, "large/single_stage.csv", error_table_csv(res.single_stage));
  emit(ctx, "large/multistage.csv", error_table_csv(res.multistage));
  emit(ctx, "large/multistage_record.json", multi.record.dump(1) + "\n");
  note(ctx, "large: done at " + fmt(t.seconds()) + " s (2 mm single " +
                fmt(res.single_stage.at(2.0).location.median) + ", multistage " +
                fmt(res.multistage.at(2.0).location.median) + ")");
  return res;
}

SmtResult run_smt(const RunContext& ctx) {
  Timer t;
  SmtResult res;
  const Profile& p = ctx.profile;
  const SensorConfig cfg = build_layout("smt");
  const std::vector<IndenterTip> tips = all_tips();
  const auto model = std::make_shared<const OpticalModel>(cfg, p.smt_budget);
  const CollectOptions co = optical_options(ctx, model);
  ScheduleOptions grid_opt;
  grid_opt.grid_pitch = p.smt_pitch;
  ScheduleOptions test_opt;
  test_opt.n_random = p.smt_test_events;
  const Dataset train =
      collect(cfg, make_schedule(cfg, Purpose::kTrain, tips, Lighting::kDark, derive(ctx, 0x5A7, 1), grid_opt), co);
  const Dataset test =
      collect(cfg, make_schedule(cfg, Purpose::kTest, tips, Lighting::kDark, derive(ctx, 0x5A7, 2), test_opt), co);
  note(ctx, "smt: data ready at " + fmt(t.seconds()) + " s");

  MlpOptions mo = p.mlp;
  mo.seed = derive(ctx, 0x5A7, 3);
  const TrainedModel tip_model = train_tip(train, mo, p.tip_rows);
  const std::vector<int> labels = predict_labels(tip_model, test.frames);
  res.tip_curve = tip_curve(labels, test.frames);
  res.accuracy_deep_negative = curve_rate(res.tip_curve, -10.0);
  std::string max_csv = "tip,class,depth,count,accuracy\n";
  for (const IndenterTip& tip : tips) {
    const double dmax = depth_profile("smt", tip, true).back();
    std::size_t n = 0, hit = 0;
    for (std::size_t i = 0; i < test.frames.size(); ++i) {
      const SignalFrame& f = test.frames[i];
      if (f.tip_class != tip.class_id || std::abs(f.d - dmax) > kLatticeTol) continue;
      ++n;
      if (labels[i] == f.tip_class) ++hit;
    }
    const double acc = n ? static_cast<double>(hit) / static_cast<double>(n) : 0.0;
    res.max_depth_accuracy.push_back({tip, dmax, acc});
    max_csv += tip.name() + ',' + std::to_string(tip.class_id) + ',' + fmt(dmax) + ',' +
               std::to_string(n) + ',' + fmt(acc) + '\n';
  }
  emit(ctx, "smt/tip_curve.csv", curve_csv(res.tip_curve));
  emit(ctx, "smt/tip_max_depth.csv", max_csv);
  note(ctx, "smt: tip classifier at " + fmt(t.seconds()) + " s");

  const std::vector<double> bins = smt_depth_bins();
  const RowPolicy policy{0.5, 1.0, true, -1.0};
  std::vector<double> fold_depths = {1.0, 2.0};
  std::vector<double> all_depths = bins;
  const Dataset test_bins = with_frames(test, frames_near(test.frames, all_depths));
  const TrainedModel all = train_krr(train, regression_rows(train, policy), {}, Target::kBoth, krr_options(ctx));
  res.all_tips = error_table(all, test_bins, bins);
  const Eigen::MatrixXd pred = predict_regression(all, test_bins.frames);
  emit(ctx, "smt/all_tips.csv", error_table_csv(res.all_tips));
  emit(ctx, "smt/arrows.svg", arrow_plot_svg(pred, test_bins.frames, bins, common_sensing_area(cfg, tips)));
  emit(ctx, "smt/calibration.json", all.record.dump(1) + "\n");
  note(ctx, "smt: all-tips regressor at " + fmt(t.seconds()) + " s");

  const auto& km = std::get<KernelRidgeModel>(all.model);
  KrrFitOptions fixed = krr_options(ctx);
  fixed.calibrate = false;
  fixed.lambda = km.lambda;
  fixed.sigma = km.sigma;
  const FitFn fit = [&](const Dataset& ds, const std::vector<int>& cols) {
    return train_krr(ds, regression_rows(ds, policy), cols, Target::kBoth, fixed);
  };
  res.folds = ablate_tips(train, with_frames(test, frames_near(test.frames, fold_depths)), fit, ctx.workers);
  std::string csv = "tip,class,depth,count,sparse,loc_median,loc_mean,loc_std,depth_median,depth_mean,depth_std\n";
  for (const TipFold& f : res.folds) {
    const ErrorRow& r = f.row;
    csv += f.held_out.name() + ',' + std::to_string(f.held_out.class_id) + ',' + fmt(f.eval_depth) + ',' +
           std::to_string(r.count) + ',' + (r.sparse ? "1" : "0") + ',' + fmt(r.location.median) + ',' +
           fmt(r.location.mean) + ',' + fmt(r.location.std) + ',' + fmt(r.depth_error.median) + ',' +
           fmt(r.depth_error.mean) + ',' + fmt(r.depth_error.std) + '\n';
  }
  emit(ctx, "smt/tip_removal.csv", csv);
  note(ctx, "smt: tip removal at " + fmt(t.seconds()) + " s");
  return res;
}

ReproResult run_repro(const RunContext& ctx) {
  ReproResult r;
  r.sweep = run_sweep(ctx);
  r.resistive = run_resistive(ctx);
  r.tht = run_tht(ctx);
  r.large = run_large(ctx);
  r.smt = run_smt(ctx);

  Json sweep = Json::array();
  for (const SweepCurve& c : r.sweep) {
    sweep.push_back({{"thickness", c.thickness}, {"dead_band", c.dead_band},
                     {"start", c.dead_band_start}, {"end", c.dead_band_end},
                     {"total_variation", c.total_variation}});
  }
  Json ablation = Json::array();
  for (const auto& rep : r.tht.ablation) {
    Json row = Json::object();
    for (const AblationResult& a : rep) row[a.mask.name] = a.table.rows.front().location.median;
    ablation.push_back(row);
  }
  Json touch = Json::array();
  for (const auto& c : r.tht.touch_curves) touch.push_back(curve_json(c));
  Json tips = Json::array();
  for (const TipMaxDepth& m : r.smt.max_depth_accuracy) {
    tips.push_back({{"tip", m.tip.name()}, {"depth", m.depth}, {"accuracy", m.accuracy}});
  }
  Json folds = Json::array();
  for (const TipFold& f : r.smt.folds) {
    folds.push_back({{"tip", f.held_out.name()}, {"depth", f.eval_depth},
                     {"location", stats_json(f.row.location)}, {"depth_error", stats_json(f.row.depth_error)}});
  }
  const Json summary = {
      {"profile", to_json(ctx.profile)},
      {"seed", ctx.seed},
      {"sweep", sweep},
      {"resistive", {{"center", stats_json(r.resistive.center)}, {"random", stats_json(r.resistive.random)},
                     {"linear", stats_json(r.resistive.linear)}, {"krr", stats_json(r.resistive.krr)},
                     {"krr_drift", stats_json(r.resistive.krr_drift)}, {"lambda", r.resistive.lambda},
                     {"sigma", r.resistive.sigma}}},
      {"tht", {{"ambient_test", table_json(r.tht.ambient_test)}, {"dark_test", table_json(r.tht.dark_test)},
               {"lambda", r.tht.lambda}, {"sigma", r.tht.sigma}, {"touch_curves", touch},
               {"ablation_2mm_median", ablation},
               {"ambient_trained_dark_test", table_json(r.tht.ambient_trained_dark_test)},
               {"dark_trained_dark_test", table_json(r.tht.dark_trained_dark_test)}}},
      {"large", {{"single_stage", table_json(r.large.single_stage)},
                 {"multistage", table_json(r.large.multistage)}}},
      {"smt", {{"tip_curve", curve_json(r.smt.tip_curve)}, {"max_depth_accuracy", tips},
               {"accuracy_at_minus_10", r.smt.accuracy_deep_negative},
               {"all_tips", table_json(r.smt.all_tips)}, {"tip_removal", folds}}}};
  emit(ctx, "summary.json", summary.dump(1) + "\n");
  return r;
}

}  // namespace tactile
