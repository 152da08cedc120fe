// Acceptance run: one PASS/FAIL line per criterion. Exit status is nonzero if any line fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "CLI11.hpp"
#include "tactile/config_io.hpp"
#include "tactile/krr.hpp"
#include "tactile/mlp.hpp"
#include "tactile/optical_sim.hpp"
#include "tactile/pipelines.hpp"
#include "tactile/resistive_sim.hpp"
#include "tactile/rng.hpp"

namespace fs = std::filesystem;
using namespace tactile;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void line(int id, const std::string& title, const Verdict& v) {
  if (!v.pass) ++failures;
  std::printf("[%s] %2d %s: %s\n", v.pass ? "PASS" : "FAIL", id, title.c_str(), v.detail.c_str());
  std::fflush(stdout);
}

class Clock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v, int prec = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

Verdict optics_oracle() {
  Clock c;
  const double n_in = 1.4, n_out = 1.0;
  const double critical = std::asin(n_out / n_in);
  Rng rng = make_rng({2024, 1});
  int mismatches = 0;
  const int trials = 10000;
  const Vec3 normal{0.0, 0.0, 1.0};
  for (int k = 0; k < trials; ++k) {
    const double theta = 0.5 * kPi * uniform01(rng);
    const double phi = 2.0 * kPi * uniform01(rng);
    const Vec3 v{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
    const SurfaceInteraction s = reflect_or_exit(v, normal, n_in, n_out);
    const bool expect = theta >= critical;
    if (s.reflected != expect) ++mismatches;
    if (s.reflected) {
      const Vec3 r{v.x, v.y, -v.z};
      const Vec3 d = s.direction - r;
      if (std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z) > 1e-12) ++mismatches;
    }
  }
  const double deg = rad_to_deg(critical);
  const double cfg_deg = build_layout("tht").critical_angle_deg();
  const double t = c.seconds();
  const bool pass = mismatches == 0 && std::abs(cfg_deg - deg) < 1e-12 && std::abs(deg - 45.58) < 0.005 && t < 1.0;
  return {pass, "critical angle " + num(deg, 6) + " deg, " + std::to_string(mismatches) + " mismatches in " +
                    std::to_string(trials) + " draws, " + num(t, 3) + " s"};
}

// Dense reference: grounded Laplacian solved by full-pivot LU.
double brute_resistance(int nodes, const std::vector<ResistorEdge>& edges, int a, int b) {
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(nodes, nodes);
  for (const ResistorEdge& e : edges) {
    l(e.a, e.a) += e.conductance;
    l(e.b, e.b) += e.conductance;
    l(e.a, e.b) -= e.conductance;
    l(e.b, e.a) -= e.conductance;
  }
  std::vector<int> keep;
  for (int i = 0; i < nodes; ++i) {
    if (i != b) keep.push_back(i);
  }
  Eigen::MatrixXd reduced(keep.size(), keep.size());
  Eigen::VectorXd current = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    for (std::size_t j = 0; j < keep.size(); ++j) reduced(i, j) = l(keep[i], keep[j]);
    if (keep[i] == a) current(static_cast<Eigen::Index>(i)) = 1.0;
  }
  const Eigen::VectorXd v = reduced.fullPivLu().solve(current);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] == a) return v(static_cast<Eigen::Index>(i));
  }
  return 0.0;
}

Verdict resistance_oracle() {
  Clock c;
  std::vector<ResistorEdge> cube;
  for (int i = 0; i < 8; ++i) {
    for (int bit : {1, 2, 4}) {
      if (!(i & bit)) cube.push_back({i, i | bit, 1.0});
    }
  }
  const ResistorNetwork net(8, cube, {{0}, {7}});
  const double r = net.pair_resistance(0, 1);
  const double brute = brute_resistance(8, cube, 0, 7);
  const ResistorNetwork series(3, {{0, 1, 1.0}, {1, 2, 0.5}}, {{0}, {2}});
  const ResistorNetwork parallel(2, {{0, 1, 1.0}, {0, 1, 1.0}}, {{0}, {1}});
  const double rs = series.pair_resistance(0, 1);
  const double rp = parallel.pair_resistance(0, 1);
  const double t = c.seconds();
  const bool pass = std::abs(r - 5.0 / 6.0) < 1e-9 && std::abs(brute - 5.0 / 6.0) < 1e-9 &&
                    std::abs(r - brute) < 1e-9 && std::abs(rs - 3.0) < 1e-12 && std::abs(rp - 0.5) < 1e-12 &&
                    t < 1.0;
  return {pass, "cube " + num(r, 12) + " ohm (dense " + num(brute, 12) + "), series " + num(rs, 12) +
                    ", parallel " + num(rp, 12) + ", " + num(t, 3) + " s"};
}

Verdict krr_oracle() {
  Rng rng = make_rng({2024, 3});
  double worst = 0.0;
  for (int n = 2; n <= 5; ++n) {
    Eigen::MatrixXd x(n, 3), y(n, 2), q(4, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = uniform01(rng) * 4.0 - 2.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = uniform01(rng) * 10.0;
    for (Eigen::Index i = 0; i < q.size(); ++i) q.data()[i] = uniform01(rng) * 4.0 - 2.0;
    const double lambda = 0.05, sigma = 1.7;
    const KernelRidgeModel m = fit_krr(x, y, lambda, sigma);
    // Independent reference: centred inputs over one pooled spread, per-column targets,
    // explicit kernel sums, LU solve.
    const Eigen::RowVectorXd mx = x.colwise().mean(), my = y.colwise().mean();
    const double pooled = std::sqrt((x.rowwise() - mx).array().square().mean());
    const Eigen::RowVectorXd sx = Eigen::RowVectorXd::Constant(x.cols(), pooled);
    const Eigen::RowVectorXd sy = ((y.rowwise() - my).array().square().colwise().mean()).sqrt();
    const Eigen::MatrixXd zx = (x.rowwise() - mx).array().rowwise() / sx.array();
    const Eigen::MatrixXd zy = (y.rowwise() - my).array().rowwise() / sy.array();
    const Eigen::MatrixXd zq = (q.rowwise() - mx).array().rowwise() / sx.array();
    auto k = [&](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < a.size(); ++j) s += std::abs(a(j) - b(j));
      return std::exp(-s / sigma);
    };
    Eigen::MatrixXd g(n, n), kq(q.rows(), n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) g(i, j) = k(zx.row(i), zx.row(j)) + (i == j ? lambda : 0.0);
    }
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      for (int j = 0; j < n; ++j) kq(i, j) = k(zq.row(i), zx.row(j));
    }
    const Eigen::MatrixXd alpha = g.fullPivLu().solve(zy);
    const Eigen::MatrixXd ref = ((kq * alpha).array().rowwise() * sy.array()).rowwise() + my.array();
    worst = std::max(worst, (m.predict(q) - ref).cwiseAbs().maxCoeff());
  }
  Eigen::VectorXd a(3), b(3);
  a << 0.0, 0.0, 0.0;
  b << 1.0, -1.5, 0.5;
  const double self = laplacian_kernel(a, a, 0.7);
  const double e3 = laplacian_kernel(a, b, 1.0);
  const bool pass = worst < 1e-9 && std::abs(self - 1.0) < 1e-12 && std::abs(e3 - std::exp(-3.0)) < 1e-12;
  return {pass, "max prediction gap " + num(worst, 3) + ", k(x,x) = " + num(self, 15) + ", k = " + num(e3, 15) +
                    " vs e^-3 = " + num(std::exp(-3.0), 15)};
}

Verdict gradient_oracle() {
  Clock c;
  Rng rng = make_rng({2024, 4});
  std::normal_distribution<double> normal(0.0, 1.0);
  const int inputs = 12, rows = 256;
  Eigen::MatrixXd z(rows, inputs);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = normal(rng);
  double worst = 0.0;
  std::string parts;
  for (MlpHead head : {MlpHead::kSigmoid, MlpHead::kSoftmax}) {
    const int classes = head == MlpHead::kSigmoid ? 2 : 6;
    std::vector<int> labels(rows);
    for (int i = 0; i < rows; ++i) {
      labels[i] = head == MlpHead::kSigmoid ? (z(i, 0) + 0.5 * z(i, 1) > 0.0) : static_cast<int>(rng() % 6);
    }
    MlpOptions o;
    o.seed = 11;
    MlpModel m = init_mlp(inputs, classes, head, o);
    const Eigen::MatrixXd batch = z.topRows(8);
    const std::vector<int> bl(labels.begin(), labels.begin() + 8);
    const double at_init = gradient_check(m, batch, bl);
    train_epochs(m, z, labels, 1);
    const double after = gradient_check(m, batch, bl);
    worst = std::max({worst, at_init, after});
    parts += std::string(head == MlpHead::kSigmoid ? "sigmoid" : "softmax") + " " + num(at_init, 3) + "/" +
             num(after, 3) + "; ";
  }
  const double t = c.seconds();
  return {worst < 1e-4 && t < 30.0, parts + "max " + num(worst, 3) + ", " + num(t, 3) + " s"};
}

Verdict sweep_trend(const RunContext& ctx) {
  Clock c;
  RunContext sc = ctx;
  sc.profile.sweep_budget = RayBudget{20000, 4, 0.2};
  sc.profile.sweep_step = 0.1;
  const std::vector<SweepCurve> curves = run_sweep(sc, {8.0, 12.0});
  const double t = c.seconds();
  const double full_scale = build_layout("tht").noise.adc_full_scale;
  const SweepCurve& c8 = curves[0];
  const SweepCurve& c12 = curves[1];
  const bool pass = !c8.dead_band && c12.dead_band && c8.total_variation > 0.1 * full_scale && t < 300.0;
  std::string d12 = c12.dead_band ? "[" + num(c12.dead_band_start) + ", " + num(c12.dead_band_end) + "] mm" : "none";
  return {pass, "8 mm dead band " + std::string(c8.dead_band ? "present" : "none") + ", TV " +
                    num(100.0 * c8.total_variation / full_scale, 3) + "% of full scale; 12 mm dead band " + d12 +
                    "; " + num(t, 3) + " s"};
}

Verdict tht_pipeline(const ThtResult& r, double seconds) {
  std::string detail;
  bool pass = seconds < 1800.0;
  for (const auto& [name, table] : {std::pair{"ambient", &r.ambient_test}, std::pair{"dark", &r.dark_test}}) {
    const double l3 = table->at(3.0).location.median;
    const double l05 = table->at(0.5).location.median;
    const double d2 = table->at(2.0).depth_error.median;
    pass = pass && l3 < 1.0 && l3 < l05 && d2 < 0.3;
    detail += std::string(name) + " test: loc@3 " + num(l3) + " mm, loc@0.5 " + num(l05) + " mm, depth@2 " +
              num(d2) + " mm; ";
  }
  return {pass, detail + "lambda " + num(r.lambda, 3) + ", sigma " + num(r.sigma, 3) + ", " + num(seconds, 4) + " s"};
}

Verdict touch_trend(const ThtResult& r) {
  std::map<long long, std::pair<double, int>> avg;
  for (const auto& curve : r.touch_curves) {
    for (const CurvePoint& p : curve) {
      auto& a = avg[std::llround(p.depth * 10.0)];
      a.first += p.rate;
      a.second += 1;
    }
  }
  const std::size_t reps = r.touch_curves.size();
  double at_m1 = std::nan("");
  double worst_touch = 1.0;
  bool complete = reps >= 3;
  for (const auto& [key, a] : avg) {
    if (a.second != static_cast<int>(reps)) complete = false;
    const double rate = a.first / a.second;
    if (key == -10) at_m1 = rate;
    if (key >= 3) worst_touch = std::min(worst_touch, rate);
  }
  const bool pass = complete && at_m1 <= 0.10 && worst_touch >= 0.90;
  return {pass, std::to_string(reps) + " seeds: rate at -1 mm " + num(100.0 * at_m1, 3) +
                    "%, lowest rate over d >= 0.3 mm " + num(100.0 * worst_touch, 3) + "%"};
}

Verdict removal_trend(const ThtResult& r) {
  std::map<std::string, double> mean;
  for (const auto& rep : r.ablation) {
    for (const AblationResult& a : rep) mean[a.mask.name] += a.table.rows.front().location.median / r.ablation.size();
  }
  const double b = mean["baseline"], c1 = mean["case1"], c2 = mean["case2"], c3 = mean["case3"], c4 = mean["case4"];
  const double slack = 1.1;
  const bool hard = r.ablation.size() >= 3 && b <= slack * std::min(c1, c2) &&
                    std::max(c1, c2) <= slack * std::min(c3, c4);
  const bool soft1 = c1 <= c2, soft2 = c3 <= c4;
  return {hard, "medians at 2 mm over " + std::to_string(r.ablation.size()) + " seeds: baseline " + num(b) +
                    ", case1 " + num(c1) + ", case2 " + num(c2) + ", case3 " + num(c3) + ", case4 " + num(c4) +
                    "; soft case1<=case2 " + (soft1 ? "pass" : "fail") + ", case3<=case4 " + (soft2 ? "pass" : "fail")};
}

Verdict multistage_trend(const LargeResult& r, double seconds) {
  const double s = r.single_stage.at(2.0).location.median;
  const double m = r.multistage.at(2.0).location.median;
  return {m <= s && seconds < 2700.0,
          "2 mm median: multistage " + num(m) + " mm, single-stage " + num(s) + " mm, " + num(seconds, 4) + " s"};
}

Verdict tip_trend(const SmtResult& r) {
  bool pass = std::abs(r.accuracy_deep_negative - 1.0 / 6.0) <= 0.05;
  std::string detail;
  for (const TipMaxDepth& m : r.max_depth_accuracy) {
    pass = pass && m.accuracy >= 0.9;
    detail += m.tip.name() + "@" + num(m.depth, 2) + " " + num(100.0 * m.accuracy, 3) + "%; ";
  }
  return {pass, detail + "at -10 mm " + num(100.0 * r.accuracy_deep_negative, 3) + "%"};
}

Verdict loto_trend(const SmtResult& r) {
  bool pass = r.folds.size() == 6;
  std::string detail;
  for (const TipFold& f : r.folds) {
    const double all = r.all_tips.at(f.eval_depth).location.median;
    const double ratio = f.row.location.median / all;
    pass = pass && std::isfinite(ratio) && ratio <= 2.0;
    detail += f.held_out.name() + "@" + num(f.eval_depth, 2) + " " + num(f.row.location.median) + " (x" +
              num(ratio, 3) + "); ";
  }
  return {pass, detail};
}

Verdict nuisance(const ThtResult& t, const ResistiveResult& r) {
  bool pass = true;
  double worst = 0.0;
  for (const ErrorRow& dark : t.dark_trained_dark_test.rows) {
    const double amb = t.ambient_trained_dark_test.at(dark.depth).location.median;
    const double rel = std::abs(amb - dark.location.median) / dark.location.median;
    worst = std::max(worst, rel);
    pass = pass && std::isfinite(rel) && rel < 0.25;
  }
  const double drift = r.krr_drift.median / r.krr.median - 1.0;
  pass = pass && drift < 0.25;
  return {pass, "lighting: worst per-bin gap " + num(100.0 * worst, 3) + "%; resistive drift: median " +
                    num(r.krr_drift.median) + " vs " + num(r.krr.median) + " mm (" + num(100.0 * drift, 3) + "%)"};
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
  std::set<std::string> names;
  for (const fs::path& root : {a, b}) {
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file()) names.insert(fs::relative(e.path(), root).generic_string());
    }
  }
  for (const std::string& n : names) {
    if (!fs::exists(a / n) || !fs::exists(b / n)) {
      why = n + " missing in one run";
      return false;
    }
    if (read_file(a / n) != read_file(b / n)) {
      why = n + " differs";
      return false;
    }
  }
  why = std::to_string(names.size()) + " files identical";
  return !names.empty();
}

Verdict reproducibility(const fs::path& out, int workers) {
  Clock c;
  std::string why;
  bool ok = true;
  for (const char* run : {"repro_a", "repro_b"}) {
    fs::remove_all(out / run);
    const std::string cmd = std::string("\"") + TACTILE_CLI + "\" --workers " + std::to_string(workers) + " --out \"" +
                            (out / run).string() + "\" repro-paper --profile quick > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) ok = false;
  }
  if (!ok) return {false, "repro-paper exited with an error"};
  const bool same = same_tree(out / "repro_a", out / "repro_b", why);
  return {same, "quick profile, two executions: " + why + ", " + num(c.seconds(), 4) + " s"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int workers = 1;
  std::string out = "acceptance_runs";
  std::string profile = "full";
  std::vector<int> only;
  app.add_option("--workers", workers);
  app.add_option("--out", out);
  app.add_option("--profile", profile, "full or quick (quick is for smoke runs only)");
  app.add_option("--only", only, "criteria to run");
  CLI11_PARSE(app, argc, argv);
  auto want = [&](std::initializer_list<int> ids) {
    if (only.empty()) return true;
    for (int id : ids) {
      if (std::find(only.begin(), only.end(), id) != only.end()) return true;
    }
    return false;
  };

  RunContext ctx;
  ctx.profile = profile_by_name(profile);
  ctx.out = fs::path(out) / "full";
  ctx.workers = workers;
  ctx.log = [](const std::string& s) { std::fprintf(stderr, "  %s\n", s.c_str()); };

  try {
    if (want({1})) line(1, "optics oracle", optics_oracle());
    if (want({2})) line(2, "resistance oracle", resistance_oracle());
    if (want({3})) line(3, "kernel ridge oracle", krr_oracle());
    if (want({4})) line(4, "MLP gradient check", gradient_oracle());
    if (want({5})) line(5, "thickness sweep modes", sweep_trend(ctx));
    ResistiveResult res;
    if (want({12})) res = run_resistive(ctx);
    if (want({6, 7, 8, 12})) {
      Clock c;
      const ThtResult tht = run_tht(ctx);
      const double t = c.seconds();
      if (want({6})) line(6, "THT pipeline", tht_pipeline(tht, t));
      if (want({7})) line(7, "touch classification", touch_trend(tht));
      if (want({8})) line(8, "terminal removal", removal_trend(tht));
      if (want({12})) line(12, "nuisance robustness", nuisance(tht, res));
    }
    if (want({9})) {
      Clock c;
      const LargeResult large = run_large(ctx);
      line(9, "multistage vs single-stage", multistage_trend(large, c.seconds()));
    }
    if (want({10, 11})) {
      const SmtResult smt = run_smt(ctx);
      if (want({10})) line(10, "tip classification", tip_trend(smt));
      if (want({11})) line(11, "leave-one-tip-out", loto_trend(smt));
    }
    if (want({13})) line(13, "reproducibility", reproducibility(out, workers));
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 1;
  }
  return failures == 0 ? 0 : 1;
}
