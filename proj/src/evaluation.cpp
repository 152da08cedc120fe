#include "tactile/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <thread>

#include "tactile/error.hpp"

namespace tactile {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs job(i) for i in [0, n) on up to `workers` threads.
template <typename Job>
void parallel_for(std::size_t n, int workers, Job job) {
  const std::size_t nw = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
  if (nw <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nw);
  for (std::size_t w = 0; w < nw; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += nw) job(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<CurvePoint> curve(const std::vector<SignalFrame>& frames, double granularity,
                              const std::function<bool(std::size_t)>& hit) {
  require(granularity > 0.0, "curve granularity must be positive");
  std::map<long long, std::pair<std::size_t, std::size_t>> bins;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    auto& b = bins[std::llround(frames[i].d / granularity)];
    ++b.first;
    if (hit(i)) ++b.second;
  }
  std::vector<CurvePoint> out;
  for (const auto& [key, c] : bins) {
    out.push_back({static_cast<double>(key) * granularity, c.first,
                   static_cast<double>(c.second) / static_cast<double>(c.first)});
  }
  return out;
}

}  // namespace

Stats summarize(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return std::isnan(v); }),
               values.end());
  if (values.empty()) return {kNaN, kNaN, kNaN};
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  Stats s;
  s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(n));
  return s;
}

const ErrorRow& ErrorTable::at(double depth) const {
  for (const ErrorRow& r : rows) {
    if (std::abs(r.depth - depth) < 1e-9) return r;
  }
  fail(ErrorKind::kInvalidArgument, "error table has no row for depth " + std::to_string(depth));
}

std::vector<double> tht_depth_bins() { return {0.1, 0.5, 1.0, 2.0, 3.0, 5.0}; }
std::vector<double> smt_depth_bins() { return {0.1, 0.5, 1.0, 2.0, 3.0, 4.0}; }

ErrorTable error_table(const Eigen::MatrixXd& predicted, const std::vector<SignalFrame>& truth,
                       const std::vector<double>& bins) {
  require(predicted.rows() == static_cast<Eigen::Index>(truth.size()) && predicted.cols() == 3,
          "predictions must be (x, y, d) rows aligned with the test frames");
  ErrorTable t;
  for (double bin : bins) {
    std::vector<double> loc, dep;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const SignalFrame& f = truth[i];
      if (std::abs(f.d - bin) > kBinHalfWidth + 1e-9) continue;
      const auto r = static_cast<Eigen::Index>(i);
      loc.push_back(std::hypot(predicted(r, 0) - f.x, predicted(r, 1) - f.y));
      dep.push_back(std::abs(predicted(r, 2) - f.d));
    }
    ErrorRow row;
    row.depth = bin;
    row.count = loc.size();
    row.sparse = loc.size() < kMinBinSamples;
    row.location = summarize(std::move(loc));
    row.depth_error = summarize(std::move(dep));
    t.rows.push_back(row);
  }
  return t;
}

ErrorTable error_table(const TrainedModel& model, const Dataset& test,
                       const std::vector<double>& bins) {
  if (!model.config_digest.empty() && model.config_digest != test.config_digest) {
    fail(ErrorKind::kDigestMismatch, "model was trained on config " + model.config_digest +
                                         " but the test set uses " + test.config_digest);
  }
  ErrorTable t = error_table(predict_regression(model, test.frames), test.frames, bins);
  t.model_digest = model.training_digest;
  t.dataset_digest = test.config_digest;
  return t;
}

std::vector<CurvePoint> touch_curve(const std::vector<int>& predicted,
                                    const std::vector<SignalFrame>& frames, double granularity) {
  require(predicted.size() == frames.size(), "one prediction per frame required");
  return curve(frames, granularity, [&](std::size_t i) { return predicted[i] == 1; });
}

std::vector<CurvePoint> tip_curve(const std::vector<int>& predicted,
                                  const std::vector<SignalFrame>& frames, double granularity) {
  require(predicted.size() == frames.size(), "one prediction per frame required");
  return curve(frames, granularity,
               [&](std::size_t i) { return predicted[i] == frames[i].tip_class; });
}

double curve_rate(const std::vector<CurvePoint>& c, double depth, double granularity) {
  for (const CurvePoint& p : c) {
    if (std::abs(p.depth - depth) <= 0.5 * granularity) return p.rate;
  }
  fail(ErrorKind::kInvalidArgument, "curve has no point at depth " + std::to_string(depth));
}

std::vector<TerminalMask> tht_removal_cases() {
  // Ring ids run counter-clockwise, four per wall starting on the y = 0 wall; even ids are
  // emitters. The removed sets reconstruct the four drawn panels.
  return {
      {"baseline", {}},
      {"case1", {0, 6, 8, 14}},                  // one emitter per wall
      {"case2", {8, 9, 10, 11}},                 // one wall: 2 emitters + 2 receivers
      {"case3", {1, 2, 5, 6, 9, 10, 13, 14}},    // the middle two of every wall
      {"case4", {8, 9, 10, 11, 12, 13, 14, 15}}, // two adjacent walls
  };
}

std::vector<TerminalMask> masks_from_json(const Json& j) {
  std::vector<TerminalMask> out;
  for (const Json& m : j.at("masks")) {
    out.push_back({m.at("name").get<std::string>(), m.at("removed").get<std::vector<int>>()});
  }
  return out;
}

Json to_json(const std::vector<TerminalMask>& masks) {
  Json arr = Json::array();
  for (const TerminalMask& m : masks) arr.push_back({{"name", m.name}, {"removed", m.removed}});
  return {{"version", 1}, {"masks", arr}};
}

std::vector<int> retained_columns(const SensorConfig& config, const TerminalMask& mask) {
  std::set<int> removed;
  for (int id : mask.removed) {
    config.terminal(id);  // throws on unknown ids
    removed.insert(id);
  }
  const PairIndex pairs = enumerate_pairs(config);
  if (config.transduction == Transduction::kOptical) {
    auto all_gone = [&](TerminalRole role) {
      for (const Terminal* t : config.terminals_with(role)) {
        if (!removed.count(t->id)) return false;
      }
      return true;
    };
    if (all_gone(TerminalRole::kEmitter) || all_gone(TerminalRole::kReceiver)) {
      fail(ErrorKind::kInvalidArgument,
           "mask '" + mask.name + "' removes every emitter or every receiver");
    }
  }
  std::vector<int> cols;
  for (std::size_t k = 0; k < pairs.pairs.size(); ++k) {
    const auto [a, b] = pairs.pairs[k];
    if (!removed.count(a) && !removed.count(b)) cols.push_back(static_cast<int>(k));
  }
  require(!cols.empty(), "mask '" + mask.name + "' leaves no feature channels");
  return cols;
}

std::vector<AblationResult> ablate_terminals(const SensorConfig& config,
                                             const std::vector<TerminalMask>& masks,
                                             const Dataset& train, const Dataset& test,
                                             const FitFn& fit, const std::vector<double>& bins,
                                             int workers) {
  std::vector<std::vector<int>> columns;
  for (const TerminalMask& m : masks) columns.push_back(retained_columns(config, m));
  std::vector<AblationResult> out(masks.size());
  parallel_for(masks.size(), workers, [&](std::size_t i) {
    const TrainedModel model = fit(train, columns[i]);
    out[i] = {masks[i], columns[i].size(), error_table(model, test, bins)};
  });
  return out;
}

double tip_eval_depth(const IndenterTip& tip) {
  return tip.shape == TipShape::kPlanarDisc ? 1.0 : 2.0;
}

std::vector<TipFold> ablate_tips(const Dataset& train, const Dataset& test, const FitFn& fit,
                                 int workers) {
  const std::vector<IndenterTip> tips = all_tips();
  for (const IndenterTip& tip : tips) {
    const bool in_train = std::any_of(train.frames.begin(), train.frames.end(),
                                      [&](const SignalFrame& f) { return f.tip_class == tip.class_id; });
    const bool in_test = std::any_of(test.frames.begin(), test.frames.end(),
                                     [&](const SignalFrame& f) { return f.tip_class == tip.class_id; });
    if (!in_train || !in_test) {
      fail(ErrorKind::kMissingInput, "tip '" + tip.name() + "' is missing from the tip datasets");
    }
  }
  std::vector<TipFold> out(tips.size());
  parallel_for(tips.size(), workers, [&](std::size_t i) {
    const IndenterTip& held = tips[i];
    const Dataset fold_train =
        filter_frames(train, [&](const SignalFrame& f) { return f.tip_class != held.class_id; });
    const Dataset fold_test =
        filter_frames(test, [&](const SignalFrame& f) { return f.tip_class == held.class_id; });
    const double depth = tip_eval_depth(held);
    const TrainedModel model = fit(fold_train, {});
    out[i] = {held, depth, error_table(model, fold_test, {depth}).rows.front()};
  });
  return out;
}

}  // namespace tactile
