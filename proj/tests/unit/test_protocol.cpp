#include "doctest.h"

#include <filesystem>
#include <set>

#include "tactile/config_io.hpp"
#include "tactile/dataset_io.hpp"
#include "tactile/error.hpp"
#include "tactile/protocol.hpp"

using namespace tactile;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tactile_unit_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("depth profiles") {
  const IndenterTip hemi = IndenterTip::hemisphere();
  const std::vector<double> tht = depth_profile("tht", hemi, true);
  CHECK(tht.front() == doctest::Approx(-10.0));
  CHECK(tht.back() == doctest::Approx(5.0));
  CHECK(tht.size() == 61);
  const std::vector<double> full = depth_profile("tht", hemi);
  CHECK(full.size() == 2 * tht.size() - 1);
  for (std::size_t k = 0; k < tht.size(); ++k) CHECK(full[full.size() - 1 - k] == doctest::Approx(tht[k]));
  const std::vector<double> res = depth_profile("resistive", hemi, true);
  CHECK(res.back() == doctest::Approx(3.0));
  CHECK(depth_profile("smt", IndenterTip::planar_disc(), true).back() == doctest::Approx(1.2));
  CHECK(depth_profile("smt", IndenterTip::corner(), true).back() == doctest::Approx(4.0));
}

TEST_CASE("grid schedules visit every location once per tip") {
  const SensorConfig c = build_layout("tht");
  const IndentationSchedule s = make_schedule(c, Purpose::kTrain, {IndenterTip::hemisphere()}, Lighting::kDark, 7);
  CHECK(s.events.size() == 121);
  std::set<std::pair<double, double>> seen;
  for (const IndentationEvent& e : s.events) seen.insert({e.x, e.y});
  CHECK(seen.size() == 121);
  const IndentationSchedule r = make_schedule(build_layout("resistive"), Purpose::kTrain,
                                              {IndenterTip::hemisphere()}, Lighting::kDark, 7);
  CHECK(r.events.size() == 54);
  CHECK(make_schedule(build_layout("smt"), Purpose::kTrain, all_tips(), Lighting::kDark, 1).events.size() == 6 * 81);
}

TEST_CASE("random schedules stay inside the sensing area and depend only on the seed") {
  const SensorConfig c = build_layout("tht");
  ScheduleOptions o;
  o.n_random = 50;
  const auto a = make_schedule(c, Purpose::kTest, {IndenterTip::hemisphere()}, Lighting::kDark, 3, o);
  const auto b = make_schedule(c, Purpose::kTest, {IndenterTip::hemisphere()}, Lighting::kAmbient, 3, o);
  const auto other = make_schedule(c, Purpose::kTest, {IndenterTip::hemisphere()}, Lighting::kDark, 4, o);
  REQUIRE(a.events.size() == 50);
  const Rect area = sensing_area(c, IndenterTip::hemisphere());
  for (std::size_t k = 0; k < a.events.size(); ++k) {
    CHECK(area.contains(a.events[k].x, a.events[k].y));
    CHECK(a.events[k] == b.events[k]);
  }
  CHECK(a.events != other.events);
  CHECK(schedule_from_json(to_json(a)) == a);
}

TEST_CASE("collection is deterministic and round-trips through disk") {
  const SensorConfig c = build_layout("tht");
  ScheduleOptions o;
  o.n_random = 2;
  o.descent_only = true;
  const auto s = make_schedule(c, Purpose::kTest, {IndenterTip::hemisphere()}, Lighting::kAmbient, 5, o);
  CollectOptions co;
  co.budget = {150, 4, 0.2};
  const Dataset a = collect(c, s, co);
  const Dataset b = collect(c, s, co);
  CHECK(a == b);
  CHECK(a.frames.size() == 2 * depth_profile("tht", IndenterTip::hemisphere(), true).size());
  CHECK(a.feature_count() == 64);
  validate(a);
  const fs::path dir = scratch("dataset");
  save_dataset(a, dir / "ds");
  CHECK(load_dataset(dir / "ds") == a);
  CHECK(load_dataset(dir / "ds.csv", c) == a);
  CHECK_THROWS_AS(load_dataset(dir / "ds", build_layout("tht_large")), Error);

  std::string csv = read_file(dir / "ds.csv");
  csv[csv.size() - 3] = csv[csv.size() - 3] == '1' ? '2' : '1';
  write_file_atomic(dir / "ds.csv", csv);
  try {
    load_dataset(dir / "ds");
    FAIL("tampered dataset loaded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDigestMismatch);
  }
}

TEST_CASE("resistive collection restarts each event from rest without drift") {
  const SensorConfig c = build_layout("resistive");
  ScheduleOptions o;
  o.n_random = 3;
  const auto s = make_schedule(c, Purpose::kTest, {IndenterTip::hemisphere()}, Lighting::kDark, 2, o);
  const Dataset ds = collect(c, s);
  CHECK(ds.feature_count() == 6);
  for (const SignalFrame& f : ds.frames) {
    CHECK(f.d >= 0.0);
    CHECK(f.d <= 3.0 + 1e-12);
  }
}

TEST_CASE("merge requires a shared configuration") {
  const SensorConfig c = build_layout("resistive");
  ScheduleOptions o;
  o.n_random = 1;
  const Dataset a = collect(c, make_schedule(c, Purpose::kTest, {IndenterTip::hemisphere()}, Lighting::kDark, 1, o));
  const Dataset b = collect(c, make_schedule(c, Purpose::kTest, {IndenterTip::hemisphere()}, Lighting::kDark, 2, o));
  CHECK(merge({a, b}).frames.size() == a.frames.size() + b.frames.size());
  Dataset other = b;
  other.config_digest = "x";
  CHECK_THROWS_AS(merge({a, other}), Error);
}
