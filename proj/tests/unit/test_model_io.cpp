#include "doctest.h"

#include <filesystem>

#include "tactile/config_io.hpp"
#include "tactile/error.hpp"
#include "tactile/model_io.hpp"
#include "tactile/pipelines.hpp"

using namespace tactile;
namespace fs = std::filesystem;

namespace {

const Dataset& small_dataset() {
  static const Dataset ds = [] {
    const SensorConfig c = build_layout("resistive");
    ScheduleOptions o;
    o.n_random = 12;
    return collect(c, make_schedule(c, Purpose::kTest, {IndenterTip::hemisphere()}, Lighting::kDark, 4, o));
  }();
  return ds;
}

fs::path scratch() {
  const fs::path p = fs::temp_directory_path() / "tactile_unit_models";
  fs::create_directories(p);
  return p;
}

void round_trip(const TrainedModel& tm, const std::string& name) {
  const Dataset& ds = small_dataset();
  const std::string stem = (scratch() / name).string();
  save_model(tm, stem);
  const TrainedModel back = load_model(stem + ".json");
  CHECK(back.kind() == tm.kind());
  CHECK(back.config_digest == tm.config_digest);
  CHECK(back.columns == tm.columns);
  if (tm.is_classifier()) {
    CHECK(predict_labels(back, ds.frames) == predict_labels(tm, ds.frames));
  } else {
    const Eigen::MatrixXd a = predict_regression(tm, ds.frames);
    const Eigen::MatrixXd b = predict_regression(back, ds.frames);
    // Columns outside the target stay NaN on both sides.
    CHECK(((a.array() == b.array()) || (a.array().isNaN() && b.array().isNaN())).all());
  }
}

}  // namespace

TEST_CASE("every model kind round-trips bit-exactly") {
  const Dataset& ds = small_dataset();
  const RowPolicy rows{0.5, 0.0, false, -1.0};
  KrrFitOptions k;
  k.calibrate = false;
  round_trip(train_krr(ds, regression_rows(ds, rows), {}, Target::kBoth, k), "krr");
  round_trip(train_krr(ds, regression_rows(ds, rows), {0, 2, 5}, Target::kLocation, k), "krr_cols");
  round_trip(train_linear(ds, regression_rows(ds, rows), {}, Target::kDepth), "linear");
  MlpOptions m;
  m.hidden = 16;
  m.epochs = 2;
  round_trip(train_touch(ds, ClassifierKind::kMlp, m, 0), "touch_mlp");
  round_trip(train_touch(ds, ClassifierKind::kSvm, m, 0), "touch_svm");
}

TEST_CASE("tampering and version changes are detected") {
  const Dataset& ds = small_dataset();
  KrrFitOptions k;
  k.calibrate = false;
  const TrainedModel tm = train_krr(ds, regression_rows(ds, {0.5, 0.0, false, -1.0}), {}, Target::kBoth, k);
  const std::string stem = (scratch() / "tamper").string();
  save_model(tm, stem);
  std::string bin = read_file(stem + ".bin");
  bin[bin.size() / 2] ^= 0x01;
  write_file_atomic(stem + ".bin", bin);
  try {
    load_model(stem);
    FAIL("tampered model loaded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDigestMismatch);
  }
  save_model(tm, stem);
  Json header = Json::parse(read_file(stem + ".json"));
  header["version"] = kModelVersion + 1;
  write_file_atomic(stem + ".json", header.dump());
  try {
    load_model(stem);
    FAIL("future model version loaded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kVersionMismatch);
  }
}

TEST_CASE("error tables refuse models from another configuration") {
  const Dataset& ds = small_dataset();
  KrrFitOptions k;
  k.calibrate = false;
  TrainedModel tm = train_krr(ds, regression_rows(ds, {0.5, 0.0, false, -1.0}), {}, Target::kBoth, k);
  CHECK_NOTHROW(error_table(tm, ds, {3.0}));
  tm.config_digest = std::string(64, '0');
  try {
    error_table(tm, ds, {3.0});
    FAIL("mismatched model accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDigestMismatch);
  }
}

TEST_CASE("regression rows follow the policy") {
  const Dataset& ds = small_dataset();
  for (const SignalFrame& f : regression_rows(ds, {0.5, 0.0, false, 3.0})) CHECK(f.d == doctest::Approx(3.0));
  for (const SignalFrame& f : regression_rows(ds, {1.0, 0.0, false, -1.0})) {
    CHECK(f.d >= 0.0);
    CHECK(std::abs(f.d - std::round(f.d)) < 1e-9);
  }
  const auto groups = location_groups(ds.frames);
  CHECK(groups.front() == 0);
  CHECK(*std::max_element(groups.begin(), groups.end()) == 11);
}
