#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tactile/config_io.hpp"
#include "tactile/dataset_io.hpp"
#include "tactile/digest.hpp"
#include "tactile/error.hpp"
#include "tactile/evaluation.hpp"
#include "tactile/model_io.hpp"
#include "tactile/pipelines.hpp"
#include "tactile/report.hpp"

namespace fs = std::filesystem;
using namespace tactile;

namespace {

constexpr const char* kToolVersion = "tactile 1.0.0";
constexpr int kUsageExit = 2;

std::string kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::kInvalidArgument: return "invalid_argument";
    case ErrorKind::kMissingInput: return "missing_input";
    case ErrorKind::kDigestMismatch: return "digest_mismatch";
    case ErrorKind::kVersionMismatch: return "version_mismatch";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

int report_error(const std::string& kind, const std::string& message, int code) {
  std::cerr << Json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  return code;
}

/// Everything a manifest records besides the output listing.
struct Manifest {
  std::string command;
  std::vector<std::string> args;
  Json seeds = Json::object();
  Json config_digests = Json::object();
  Json inputs = Json::object();
};

std::string file_digest(const fs::path& p) { return sha256_hex(read_file(p)); }

void write_manifest(const fs::path& out, const Manifest& m) {
  Json outputs = Json::object();
  if (fs::exists(out)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(out)) {
      if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) outputs[fs::relative(f, out).generic_string()] = file_digest(f);
  }
  const Json j = {{"tool_version", kToolVersion}, {"command", m.command},     {"args", m.args},
                  {"seeds", m.seeds},             {"config_digests", m.config_digests},
                  {"inputs", m.inputs},           {"outputs", outputs}};
  write_output(out / "manifest.json", j.dump(1) + "\n");
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      fail(ErrorKind::kInvalidArgument, "not a number in list: '" + item + "'");
    }
  }
  return out;
}

/// Expands a JSON run file into flags placed right after the subcommand, so explicit flags,
/// which come later, take precedence.
std::vector<std::string> expand_run_file(std::vector<std::string> args) {
  auto it = std::find(args.begin(), args.end(), "--run");
  if (it == args.end()) return args;
  if (it + 1 == args.end()) fail(ErrorKind::kInvalidArgument, "--run needs a file");
  const fs::path file = *(it + 1);
  args.erase(it, it + 2);
  if (!fs::exists(file)) fail(ErrorKind::kMissingInput, "run file not found: " + file.string());
  Json j;
  try {
    j = Json::parse(read_file(file));
  } catch (const Json::parse_error& e) {
    fail(ErrorKind::kInvalidArgument, "run file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) fail(ErrorKind::kInvalidArgument, "run file must hold a JSON object");
  std::vector<std::string> flags;
  std::string command;
  for (const auto& [key, value] : j.items()) {
    if (key == "command") {
      command = value.get<std::string>();
      continue;
    }
    const std::string flag = "--" + key;
    if (value.is_boolean()) {
      if (value.get<bool>()) flags.push_back(flag);
    } else if (value.is_array()) {
      std::string joined;
      for (const Json& v : value) {
        if (!joined.empty()) joined += ',';
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      flags.push_back(flag);
      flags.push_back(joined);
    } else {
      flags.push_back(flag);
      flags.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  // args[0] is the program; the subcommand is the first non-flag argument that follows.
  std::size_t pos = 1;
  while (pos < args.size() && args[pos].rfind("-", 0) == 0) {
    pos += (args[pos] == "--workers" || args[pos] == "--out") ? 2 : 1;
  }
  if (pos >= args.size()) {
    if (command.empty()) fail(ErrorKind::kInvalidArgument, "no subcommand given");
    args.push_back(command);
  }
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos) + 1, flags.begin(), flags.end());
  return args;
}

SensorConfig resolve_config(const std::string& build, const std::string& config_path) {
  if (!config_path.empty()) {
    if (!fs::exists(config_path)) fail(ErrorKind::kMissingInput, "config not found: " + config_path);
    return load_config(config_path);
  }
  return build_layout(build);
}

Dataset load_data(const std::string& path, Manifest& m, const std::string& role) {
  const fs::path stem = dataset_stem(path);
  if (!fs::exists(stem.string() + ".json") || !fs::exists(stem.string() + ".csv")) {
    fail(ErrorKind::kMissingInput, "dataset not found: " + stem.string());
  }
  Dataset ds = load_dataset(stem);
  m.inputs[role] = file_digest(stem.string() + ".csv");
  m.config_digests[role] = ds.config_digest;
  return ds;
}

TrainedModel load_trained(const std::string& path, Manifest& m) {
  fs::path stem = path;
  if (stem.extension() == ".json" || stem.extension() == ".bin") stem.replace_extension();
  if (!fs::exists(stem.string() + ".json")) fail(ErrorKind::kMissingInput, "model not found: " + path);
  TrainedModel tm = load_model(stem.string());
  m.inputs["model"] = file_digest(stem.string() + ".bin");
  m.config_digests["model"] = tm.config_digest;
  return tm;
}

void check_same_config(const TrainedModel& tm, const Dataset& ds) {
  if (tm.config_digest != ds.config_digest) {
    fail(ErrorKind::kDigestMismatch, "model was trained on config " + tm.config_digest.substr(0, 12) +
                                         " but the dataset comes from " + ds.config_digest.substr(0, 12));
  }
}

std::vector<double> bins_for(const std::string& build, const std::string& flag) {
  if (!flag.empty()) return parse_list(flag);
  if (build == "smt") return smt_depth_bins();
  if (build == "resistive") return {3.0};
  return tht_depth_bins();
}

struct TrainArgs {
  std::string data;
  std::string model = "krr";
  std::string target = "both";
  bool calibrate = false;
  bool no_refit = false;
  double lambda = 1e-3;
  double sigma = 10.0;
  double row_step = 0.5;
  double fine_below = 0.0;
  double only_depth = -1.0;
  std::size_t calibration_rows = 800;
  std::size_t max_rows = 9000;
  std::size_t classifier_rows = 8000;
  int epochs = 30;
  int hidden = 1024;
  std::uint64_t seed = 1;
  std::string name = "model";
};

void add_train_flags(CLI::App* c, TrainArgs& a) {
  c->add_option("--model", a.model, "krr | linear | multistage | touch-mlp | touch-svm | tip-mlp | center | random")
      ->check(CLI::IsMember({"krr", "linear", "multistage", "touch-mlp", "touch-svm", "tip-mlp", "center",
                             "random"}));
  c->add_option("--target", a.target, "location | depth | both")
      ->check(CLI::IsMember({"location", "depth", "both"}));
  c->add_flag("--calibrate", a.calibrate, "grid-search lambda and sigma on location halves");
  c->add_flag("--no-refit", a.no_refit, "keep the calibration-half fit instead of refitting on all rows");
  c->add_option("--lambda", a.lambda);
  c->add_option("--sigma", a.sigma);
  c->add_option("--row-step", a.row_step, "depth lattice of regression rows, mm");
  c->add_option("--fine-below", a.fine_below, "keep the 0.1 mm lattice up to this depth");
  c->add_option("--only-depth", a.only_depth, "train on this depth only");
  c->add_option("--calibration-rows", a.calibration_rows);
  c->add_option("--max-rows", a.max_rows);
  c->add_option("--classifier-rows", a.classifier_rows);
  c->add_option("--epochs", a.epochs);
  c->add_option("--hidden", a.hidden);
  c->add_option("--seed", a.seed);
}

KrrFitOptions krr_options(const TrainArgs& a, int workers) {
  KrrFitOptions o;
  o.calibrate = a.calibrate;
  o.refit = !a.no_refit;
  o.lambda = a.lambda;
  o.sigma = a.sigma;
  o.calibration_rows = a.calibration_rows;
  o.max_rows = a.max_rows;
  o.workers = workers;
  return o;
}

MlpOptions mlp_options(const TrainArgs& a) {
  MlpOptions o;
  o.epochs = a.epochs;
  o.hidden = a.hidden;
  o.seed = a.seed;
  return o;
}

RowPolicy row_policy(const TrainArgs& a) { return {a.row_step, a.fine_below, true, a.only_depth}; }

TrainedModel train_any(const Dataset& ds, const TrainArgs& a, const std::vector<int>& columns, int workers) {
  const Target target = target_from_string(a.target);
  if (a.model == "krr") return train_krr(ds, regression_rows(ds, row_policy(a)), columns, target, krr_options(a, workers));
  if (a.model == "linear") return train_linear(ds, regression_rows(ds, row_policy(a)), columns, target);
  if (a.model == "multistage") return train_multistage(ds, krr_options(a, workers), columns);
  if (a.model == "touch-mlp") return train_touch(ds, ClassifierKind::kMlp, mlp_options(a), a.classifier_rows, columns);
  if (a.model == "touch-svm") return train_touch(ds, ClassifierKind::kSvm, mlp_options(a), a.classifier_rows, columns);
  if (a.model == "tip-mlp") {
    require(columns.empty(), "the tip classifier uses every channel");
    return train_tip(ds, mlp_options(a), a.classifier_rows);
  }
  const Baselines b = fit_baselines(ds, a.seed);
  TrainedModel tm;
  if (a.model == "center") tm.model = b.center;
  else tm.model = b.random;
  tm.target = Target::kBoth;
  tm.build = ds.config.build;
  tm.config_digest = ds.config_digest;
  tm.training_digest = sha256_hex(dataset_csv(ds));
  return tm;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_run_file(args);
  } catch (const Error& e) {
    return report_error(kind_name(e.kind()), e.what(), static_cast<int>(e.kind()));
  }

  CLI::App app{"Simulation and learning workbench for tactile sensors with spatially overlapping signals"};
  app.option_defaults()->take_last();
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  int workers = 1;
  const char* env_root = std::getenv("TACTILE_OUTPUT_ROOT");
  std::string out = env_root && *env_root ? env_root : "runs";
  app.add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", out, "output directory (default $TACTILE_OUTPUT_ROOT or ./runs)");
  app.add_option("--run", "JSON run file whose keys mirror the flags; explicit flags win");

  Manifest manifest;
  std::function<void()> action;

  // layout
  std::string build = "tht";
  std::string config_path;
  auto* layout = app.add_subcommand("layout", "build a sensor configuration and write it as JSON");
  layout->add_option("--build", build)->check(CLI::IsMember({"resistive", "tht", "tht_large", "smt"}));
  layout->add_option("--config", config_path, "start from this configuration file");
  layout->callback([&] {
    action = [&] {
      const SensorConfig cfg = resolve_config(build, config_path);
      save_config(cfg, fs::path(out) / "config.json");
      manifest.config_digests["config"] = config_digest(cfg);
      const Rect area = sensing_area(cfg, IndenterTip::hemisphere());
      std::cout << cfg.build << ": " << cfg.terminals.size() << " terminals, sensing area "
                << area.width() << " x " << area.height() << " mm\n";
    };
  });

  // sweep-thickness
  std::string thicknesses = "5,7,8,10,12";
  int sweep_rays = 20000;
  double sweep_step = 0.1;
  auto* sweep = app.add_subcommand("sweep-thickness", "signal versus depth for facing terminals across slab heights");
  sweep->add_option("--thicknesses", thicknesses, "comma-separated slab heights, mm");
  sweep->add_option("--rays", sweep_rays, "rays per emitter")->check(CLI::PositiveNumber);
  sweep->add_option("--step", sweep_step, "depth step, mm")->check(CLI::PositiveNumber);
  sweep->callback([&] {
    action = [&] {
      RunContext ctx;
      ctx.profile.sweep_budget.rays_per_emitter = sweep_rays;
      ctx.profile.sweep_step = sweep_step;
      ctx.out = out;
      ctx.workers = workers;
      const auto curves = run_sweep(ctx, parse_list(thicknesses));
      for (const SweepCurve& c : curves) {
        std::cout << c.thickness << " mm: " << (c.dead_band ? "dead band" : "no dead band");
        if (c.dead_band) std::cout << " [" << c.dead_band_start << ", " << c.dead_band_end << "]";
        std::cout << ", total variation " << c.total_variation << '\n';
      }
    };
  });

  // collect
  std::string purpose = "train", lighting = "dark", tips = "1", name = "dataset";
  std::uint64_t seed = 7;
  double pitch = 2.0;
  int events = -1, rays = 4000;
  bool descent_only = false;
  auto* col = app.add_subcommand("collect", "run an indentation schedule through the forward model");
  col->add_option("--build", build)->check(CLI::IsMember({"resistive", "tht", "tht_large", "smt"}));
  col->add_option("--config", config_path);
  col->add_option("--purpose", purpose)->check(CLI::IsMember({"train", "test"}));
  col->add_option("--lighting", lighting)->check(CLI::IsMember({"ambient", "dark"}));
  col->add_option("--seed", seed);
  col->add_option("--tips", tips, "comma-separated tip classes 1..6, or 'all'");
  col->add_option("--pitch", pitch, "grid pitch, mm")->check(CLI::PositiveNumber);
  col->add_option("--events", events, "random events per tip (-1 for the build default)");
  col->add_option("--rays", rays, "rays per emitter")->check(CLI::PositiveNumber);
  col->add_flag("--descent-only", descent_only);
  col->add_option("--name", name, "dataset stem inside the output directory");
  col->callback([&] {
    action = [&] {
      const SensorConfig cfg = resolve_config(build, config_path);
      std::vector<IndenterTip> tip_list;
      if (tips == "all") tip_list = all_tips();
      else for (double c : parse_list(tips)) tip_list.push_back(IndenterTip::from_class(static_cast<int>(c)));
      ScheduleOptions so;
      so.grid_pitch = pitch;
      so.n_random = events;
      so.descent_only = descent_only;
      const IndentationSchedule sched = make_schedule(cfg, purpose_from_string(purpose), tip_list,
                                                      lighting_from_string(lighting), seed, so);
      CollectOptions co;
      co.budget.rays_per_emitter = rays;
      co.workers = workers;
      const Dataset ds = collect(cfg, sched, co);
      save_dataset(ds, fs::path(out) / name);
      manifest.seeds["schedule"] = seed;
      manifest.seeds["config"] = cfg.seed;
      manifest.config_digests["dataset"] = ds.config_digest;
      std::cout << sched.events.size() << " events, " << ds.frames.size() << " frames, "
                << ds.feature_count() << " channels\n";
    };
  });

  // train
  TrainArgs ta;
  auto* train = app.add_subcommand("train", "fit a regressor or classifier on a dataset");
  train->add_option("--data", ta.data, "dataset stem")->required();
  train->add_option("--name", ta.name, "model stem inside the output directory");
  add_train_flags(train, ta);
  train->callback([&] {
    action = [&] {
      const Dataset ds = load_data(ta.data, manifest, "train");
      const TrainedModel tm = train_any(ds, ta, {}, workers);
      save_model(tm, (fs::path(out) / ta.name).string());
      manifest.seeds["train"] = ta.seed;
      if (tm.record.contains("calibration")) {
        const Json& c = tm.record["calibration"];
        write_output(fs::path(out) / "calibration.json", c.dump(1) + "\n");
        std::cout << "calibrated lambda " << c["lambda"].get<double>() << ", sigma "
                  << c["sigma"].get<double>() << '\n';
      }
      std::cout << tm.kind() << " model written to " << (fs::path(out) / ta.name).string() << ".json\n";
    };
  });

  // predict
  std::string model_path, data_path;
  auto* pred = app.add_subcommand("predict", "apply a model to a dataset");
  pred->add_option("--model", model_path)->required();
  pred->add_option("--data", data_path)->required();
  pred->callback([&] {
    action = [&] {
      const TrainedModel tm = load_trained(model_path, manifest);
      const Dataset ds = load_data(data_path, manifest, "data");
      check_same_config(tm, ds);
      if (tm.is_classifier()) {
        const std::vector<int> labels = predict_labels(tm, ds.frames);
        std::string csv = "t,x,y,d,label\n";
        char buf[160];
        for (std::size_t i = 0; i < labels.size(); ++i) {
          const SignalFrame& f = ds.frames[i];
          std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%d\n", f.tip_class, f.x, f.y, f.d, labels[i]);
          csv += buf;
        }
        write_output(fs::path(out) / "labels.csv", csv);
      } else {
        write_output(fs::path(out) / "predictions.csv", predictions_csv(predict_regression(tm, ds.frames), ds.frames));
      }
    };
  });

  // evaluate
  std::string bins_flag;
  auto* eval = app.add_subcommand("evaluate", "depth-binned error table, or a rate curve for classifiers");
  eval->add_option("--model", model_path)->required();
  eval->add_option("--data", data_path)->required();
  eval->add_option("--bins", bins_flag, "comma-separated depth bins, mm");
  eval->callback([&] {
    action = [&] {
      const TrainedModel tm = load_trained(model_path, manifest);
      const Dataset ds = load_data(data_path, manifest, "data");
      check_same_config(tm, ds);
      if (tm.is_classifier()) {
        const std::vector<int> labels = predict_labels(tm, ds.frames);
        const bool tip = std::holds_alternative<MlpModel>(tm.model) &&
                         std::get<MlpModel>(tm.model).head == MlpHead::kSoftmax;
        const auto curve = tip ? tip_curve(labels, ds.frames) : touch_curve(labels, ds.frames);
        write_output(fs::path(out) / (tip ? "tip_curve.csv" : "touch_curve.csv"), curve_csv(curve));
      } else {
        const ErrorTable t = error_table(tm, ds, bins_for(ds.config.build, bins_flag));
        write_output(fs::path(out) / "error_table.csv", error_table_csv(t));
        std::cout << error_table_csv(t);
      }
    };
  });

  // ablate-terminals
  std::string train_path, test_path, masks_path;
  double ablate_depth = 2.0;
  TrainArgs ab;
  ab.calibrate = true;
  auto* abt = app.add_subcommand("ablate-terminals", "retrain with terminals removed and compare error");
  abt->add_option("--train", train_path)->required();
  abt->add_option("--test", test_path)->required();
  abt->add_option("--masks", masks_path, "removal masks JSON (default: the five built-in cases)");
  abt->add_option("--depth", ablate_depth, "evaluation depth, mm");
  add_train_flags(abt, ab);
  auto* abp = app.add_subcommand("ablate-tips", "leave-one-tip-out retraining");
  abp->add_option("--train", train_path)->required();
  abp->add_option("--test", test_path)->required();
  add_train_flags(abp, ab);
  abt->callback([&] {
    action = [&] {
      const Dataset tr = load_data(train_path, manifest, "train");
      const Dataset te = load_data(test_path, manifest, "test");
      if (tr.config_digest != te.config_digest) fail(ErrorKind::kDigestMismatch, "train and test configs differ");
      std::vector<TerminalMask> masks = tht_removal_cases();
      if (!masks_path.empty()) {
        if (!fs::exists(masks_path)) fail(ErrorKind::kMissingInput, "masks not found: " + masks_path);
        masks = masks_from_json(Json::parse(read_file(masks_path)));
        manifest.inputs["masks"] = file_digest(masks_path);
      }
      const FitFn fit = [&](const Dataset& ds, const std::vector<int>& cols) { return train_any(ds, ab, cols, 1); };
      const auto results = ablate_terminals(tr.config, masks, tr, te, fit, {ablate_depth}, workers);
      std::string csv = "case,channels,count,loc_median,loc_mean,loc_std,depth_median,depth_mean,depth_std\n";
      char buf[400];
      for (const AblationResult& r : results) {
        const ErrorRow& e = r.table.rows.front();
        std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.mask.name.c_str(),
                      r.channels, e.count, e.location.median, e.location.mean, e.location.std,
                      e.depth_error.median, e.depth_error.mean, e.depth_error.std);
        csv += buf;
      }
      write_output(fs::path(out) / "ablation.csv", csv);
      std::cout << csv;
    };
  });
  abp->callback([&] {
    action = [&] {
      const Dataset tr = load_data(train_path, manifest, "train");
      const Dataset te = load_data(test_path, manifest, "test");
      if (tr.config_digest != te.config_digest) fail(ErrorKind::kDigestMismatch, "train and test configs differ");
      const FitFn fit = [&](const Dataset& ds, const std::vector<int>& cols) { return train_any(ds, ab, cols, 1); };
      const auto folds = ablate_tips(tr, te, fit, workers);
      std::string csv = "tip,class,depth,count,loc_median,loc_mean,loc_std,depth_median,depth_mean,depth_std\n";
      char buf[400];
      for (const TipFold& f : folds) {
        const ErrorRow& e = f.row;
        std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      f.held_out.name().c_str(), f.held_out.class_id, f.eval_depth, e.count, e.location.median,
                      e.location.mean, e.location.std, e.depth_error.median, e.depth_error.mean, e.depth_error.std);
        csv += buf;
      }
      write_output(fs::path(out) / "tip_removal.csv", csv);
      std::cout << csv;
    };
  });

  // report
  auto* rep = app.add_subcommand("report", "error table, prediction CSV and arrow plot for a regressor");
  rep->add_option("--model", model_path)->required();
  rep->add_option("--data", data_path)->required();
  rep->add_option("--bins", bins_flag);
  rep->callback([&] {
    action = [&] {
      const TrainedModel tm = load_trained(model_path, manifest);
      const Dataset ds = load_data(data_path, manifest, "data");
      check_same_config(tm, ds);
      if (tm.is_classifier()) fail(ErrorKind::kInvalidArgument, "report needs a regression model");
      const std::vector<double> bins = bins_for(ds.config.build, bins_flag);
      const Eigen::MatrixXd p = predict_regression(tm, ds.frames);
      write_output(fs::path(out) / "error_table.csv", error_table_csv(error_table(p, ds.frames, bins)));
      write_output(fs::path(out) / "predictions.csv", predictions_csv(p, ds.frames));
      write_output(fs::path(out) / "arrows.svg",
                   arrow_plot_svg(p, ds.frames, bins, common_sensing_area(ds.config, ds.schedule.tips)));
    };
  });

  // repro-paper
  std::string profile = "full";
  std::uint64_t repro_seed = 7;
  auto* repro = app.add_subcommand("repro-paper", "run every experiment with fixed seeds");
  repro->add_option("--profile", profile)->check(CLI::IsMember({"full", "quick"}));
  repro->add_option("--seed", repro_seed);
  repro->callback([&] {
    action = [&] {
      RunContext ctx;
      ctx.profile = profile_by_name(profile);
      ctx.out = out;
      ctx.seed = repro_seed;
      ctx.workers = workers;
      ctx.log = [](const std::string& s) { std::cerr << s << '\n'; };
      run_repro(ctx);
      manifest.seeds["repro"] = repro_seed;
      for (const char* b : {"resistive", "tht", "tht_large", "smt"}) {
        manifest.config_digests[b] = config_digest(build_layout(b));
      }
    };
  });

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kUsageExit);
  }

  try {
    manifest.command = app.get_subcommands().front()->get_name();
    // The output directory is not part of the recorded arguments, so replays elsewhere match.
    for (std::size_t i = 1; i < args.size(); ++i) {
      if (args[i] == "--out") {
        ++i;
        continue;
      }
      manifest.args.push_back(args[i]);
    }
    fs::create_directories(out);
    action();
    write_manifest(out, manifest);
  } catch (const Error& e) {
    return report_error(kind_name(e.kind()), e.what(), static_cast<int>(e.kind()));
  } catch (const Json::exception& e) {
    return report_error("invalid_argument", e.what(), static_cast<int>(ErrorKind::kInvalidArgument));
  } catch (const fs::filesystem_error& e) {
    return report_error("io", e.what(), static_cast<int>(ErrorKind::kIo));
  }
  return 0;
}
