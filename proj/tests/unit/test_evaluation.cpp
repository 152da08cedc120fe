#include "doctest.h"

#include <cmath>

#include "tactile/config_io.hpp"
#include "tactile/error.hpp"
#include "tactile/evaluation.hpp"
#include "tactile/report.hpp"

using namespace tactile;

namespace {

std::vector<SignalFrame> frames_at(double d, int n) {
  std::vector<SignalFrame> out;
  for (int i = 0; i < n; ++i) {
    SignalFrame f;
    f.x = 10.0 + i;
    f.y = 10.0;
    f.d = d;
    f.event = i;
    out.push_back(f);
  }
  return out;
}

}  // namespace

TEST_CASE("summary statistics use the population spread and skip NaN") {
  const Stats s = summarize({1.0, 2.0, 3.0, 4.0, std::nan("")});
  CHECK(s.median == doctest::Approx(2.5));
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.std == doctest::Approx(std::sqrt(1.25)));
  CHECK(std::isnan(summarize({}).median));
}

TEST_CASE("error table fixture") {
  std::vector<SignalFrame> truth = frames_at(3.0, 25);
  const std::vector<SignalFrame> shallow = frames_at(0.5, 5);
  truth.insert(truth.end(), shallow.begin(), shallow.end());
  Eigen::MatrixXd pred(30, 3);
  for (int i = 0; i < 30; ++i) {
    // 3-4-5 offsets give a location error of 5 * scale.
    const double scale = i < 25 ? 0.1 * (i % 5 + 1) : 1.0;
    pred.row(i) << truth[i].x + 3.0 * scale, truth[i].y + 4.0 * scale, truth[i].d + 0.2;
  }
  const ErrorTable t = error_table(pred, truth, {0.5, 3.0, 5.0});
  REQUIRE(t.rows.size() == 3);
  const ErrorRow& r3 = t.at(3.0);
  CHECK(r3.count == 25);
  CHECK_FALSE(r3.sparse);
  CHECK(r3.location.median == doctest::Approx(1.5));
  CHECK(r3.location.mean == doctest::Approx(1.5));
  CHECK(r3.depth_error.median == doctest::Approx(0.2));
  const ErrorRow& r05 = t.at(0.5);
  CHECK(r05.count == 5);
  CHECK(r05.sparse);
  CHECK(r05.location.median == doctest::Approx(5.0));
  CHECK(t.at(5.0).count == 0);
  CHECK(std::isnan(t.at(5.0).location.median));
  CHECK_THROWS_AS(t.at(1.0), Error);
}

TEST_CASE("bins accept frames within the half width") {
  std::vector<SignalFrame> truth = frames_at(2.04, 1);
  truth.push_back(frames_at(2.06, 1)[0]);
  Eigen::MatrixXd pred(2, 3);
  pred.row(0) << truth[0].x, truth[0].y, truth[0].d;
  pred.row(1) << truth[1].x, truth[1].y, truth[1].d;
  CHECK(error_table(pred, truth, {2.0}).rows[0].count == 1);
}

TEST_CASE("curves group frames by depth") {
  std::vector<SignalFrame> f = frames_at(-1.0, 4);
  const std::vector<SignalFrame> deep = frames_at(0.3, 4);
  f.insert(f.end(), deep.begin(), deep.end());
  const std::vector<int> pred = {0, 0, 0, 1, 1, 1, 1, 1};
  const auto curve = touch_curve(pred, f);
  REQUIRE(curve.size() == 2);
  CHECK(curve_rate(curve, -1.0) == doctest::Approx(0.25));
  CHECK(curve_rate(curve, 0.3) == doctest::Approx(1.0));
  CHECK_THROWS_AS(curve_rate(curve, 2.0), Error);
  for (SignalFrame& s : f) s.tip_class = 3;
  const auto tip = tip_curve({3, 1, 3, 3, 3, 3, 2, 3}, f);
  CHECK(curve_rate(tip, -1.0) == doctest::Approx(0.75));
  CHECK(curve_rate(tip, 0.3) == doctest::Approx(0.75));
}

TEST_CASE("removal masks match the fixture file") {
  const Json j = Json::parse(read_file(std::string(TACTILE_SOURCE_DIR) + "/data/terminal_masks.json"));
  const std::vector<TerminalMask> file = masks_from_json(j);
  const std::vector<TerminalMask> built = tht_removal_cases();
  REQUIRE(file.size() == built.size());
  for (std::size_t k = 0; k < file.size(); ++k) {
    CHECK(file[k].name == built[k].name);
    CHECK(file[k].removed == built[k].removed);
  }
  CHECK(masks_from_json(to_json(built)).size() == built.size());
}

TEST_CASE("retained channel counts per removal case") {
  const SensorConfig c = build_layout("tht");
  const std::vector<TerminalMask> m = tht_removal_cases();
  CHECK(retained_columns(c, m[0]).size() == 64);
  CHECK(retained_columns(c, m[1]).size() == 32);
  CHECK(retained_columns(c, m[2]).size() == 36);
  CHECK(retained_columns(c, m[3]).size() == 16);
  CHECK(retained_columns(c, m[4]).size() == 16);
  CHECK_THROWS_AS(retained_columns(c, {"bad", {99}}), Error);
  CHECK_THROWS_AS(retained_columns(c, {"dark", {0, 2, 4, 6, 8, 10, 12, 14}}), Error);
}

TEST_CASE("tip evaluation depths") {
  CHECK(tip_eval_depth(IndenterTip::planar_disc()) == 1.0);
  CHECK(tip_eval_depth(IndenterTip::hemisphere()) == 2.0);
  CHECK(tip_eval_depth(IndenterTip::corner()) == 2.0);
}

TEST_CASE("error table CSV is stable") {
  ErrorTable t;
  ErrorRow r;
  r.depth = 3.0;
  r.count = 25;
  r.location = {1.5, 1.25, 0.5};
  r.depth_error = {0.2, 0.2, 0.0};
  t.rows.push_back(r);
  ErrorRow empty;
  empty.depth = 5.0;
  empty.sparse = true;
  empty.location = empty.depth_error = {std::nan(""), std::nan(""), std::nan("")};
  t.rows.push_back(empty);
  CHECK(error_table_csv(t) ==
        "depth,count,sparse,loc_median,loc_mean,loc_std,depth_median,depth_mean,depth_std\n"
        "3,25,0,1.5,1.25,0.5,0.20000000000000001,0.20000000000000001,0\n"
        "5,0,1,nan,nan,nan,nan,nan,nan\n");
}

TEST_CASE("arrow plot has one panel per bin and one arrow per frame") {
  std::vector<SignalFrame> truth = frames_at(3.0, 3);
  const std::vector<SignalFrame> other = frames_at(0.5, 2);
  truth.insert(truth.end(), other.begin(), other.end());
  Eigen::MatrixXd pred(5, 3);
  for (int i = 0; i < 5; ++i) pred.row(i) << truth[i].x + 0.5, truth[i].y - 0.5, truth[i].d;
  const std::string svg = arrow_plot_svg(pred, truth, {0.5, 3.0}, Rect{0.0, 0.0, 20.0, 20.0});
  CHECK(svg_panel_count(svg) == 2);
  std::size_t arrows = 0;
  for (std::size_t p = svg.find("class=\"arrow\""); p != std::string::npos; p = svg.find("class=\"arrow\"", p + 1)) ++arrows;
  CHECK(arrows == 5);
  CHECK(svg.rfind("<svg", 0) == 0);
}
