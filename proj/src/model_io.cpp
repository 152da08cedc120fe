#include "tactile/model_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include "tactile/digest.hpp"
#include "tactile/error.hpp"

namespace tactile {

namespace {

struct Blocks {
  Json layout = Json::array();
  std::vector<double> data;

  void put(const std::string& name, const Eigen::MatrixXd& m) {
    layout.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"offset", data.size()}});
    data.insert(data.end(), m.data(), m.data() + m.size());  // column-major
  }

  Eigen::MatrixXd get(const std::string& name) const {
    for (const Json& b : layout) {
      if (b.at("name") != name) continue;
      const auto rows = b.at("rows").get<Eigen::Index>();
      const auto cols = b.at("cols").get<Eigen::Index>();
      const auto off = b.at("offset").get<std::size_t>();
      if (rows < 0 || cols < 0 || off + static_cast<std::size_t>(rows * cols) > data.size()) {
        fail(ErrorKind::kInvalidArgument, "model block '" + name + "' exceeds the binary file");
      }
      Eigen::MatrixXd m(rows, cols);
      std::memcpy(m.data(), data.data() + off, sizeof(double) * static_cast<std::size_t>(m.size()));
      return m;
    }
    fail(ErrorKind::kInvalidArgument, "model block '" + name + "' missing");
  }
};

std::string encode(const std::vector<double>& v) {
  std::string out(v.size() * sizeof(double), '\0');
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto bits = std::bit_cast<std::uint64_t>(v[i]);
    for (int b = 0; b < 8; ++b) out[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  return out;
}

std::vector<double> decode(const std::string& s) {
  if (s.size() % 8 != 0) fail(ErrorKind::kInvalidArgument, "model binary length is not a multiple of 8");
  std::vector<double> v(s.size() / 8);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[i * 8 + b])) << (8 * b);
    v[i] = std::bit_cast<double>(bits);
  }
  return v;
}

Json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json std_json(const Standardizer& s) {
  return {{"mean", vec_json(s.mean)}, {"scale", vec_json(s.scale)}, {"constant", s.constant}};
}

Standardizer std_from(const Json& j) {
  Standardizer s;
  s.mean = vec_from(j.at("mean"));
  s.scale = vec_from(j.at("scale"));
  s.constant = j.at("constant").get<std::vector<int>>();
  require(s.mean.size() == s.scale.size(), "standardizer mean and scale differ in length");
  return s;
}

Json put_linear(const LinearModel& m, const std::string& p, Blocks& b) {
  b.put(p + "weights", m.weights);
  b.put(p + "intercept", m.intercept);
  return {{"x_std", std_json(m.x_std)}, {"warning", m.warning}};
}

LinearModel get_linear(const Json& j, const std::string& p, const Blocks& b) {
  LinearModel m;
  m.x_std = std_from(j.at("x_std"));
  m.warning = j.at("warning").get<std::string>();
  m.weights = b.get(p + "weights");
  m.intercept = b.get(p + "intercept");
  return m;
}

Json put_krr(const KernelRidgeModel& m, const std::string& p, Blocks& b) {
  b.put(p + "support", m.support);
  b.put(p + "alpha", m.alpha);
  return {{"x_std", std_json(m.x_std)}, {"y_std", std_json(m.y_std)}, {"lambda", m.lambda},
          {"sigma", m.sigma}, {"gamma", 1.0 / m.sigma}};
}

KernelRidgeModel get_krr(const Json& j, const std::string& p, const Blocks& b) {
  KernelRidgeModel m;
  m.x_std = std_from(j.at("x_std"));
  m.y_std = std_from(j.at("y_std"));
  m.lambda = j.at("lambda").get<double>();
  m.sigma = j.at("sigma").get<double>();
  m.support = b.get(p + "support");
  m.alpha = b.get(p + "alpha");
  return m;
}

Json options_json(const MlpOptions& o) {
  return {{"hidden", o.hidden}, {"epochs", o.epochs}, {"batch", o.batch},
          {"learning_rate", o.learning_rate}, {"seed", o.seed}};
}

MlpOptions options_from(const Json& j) {
  MlpOptions o;
  o.hidden = j.at("hidden").get<int>();
  o.epochs = j.at("epochs").get<int>();
  o.batch = j.at("batch").get<int>();
  o.learning_rate = j.at("learning_rate").get<double>();
  o.seed = j.at("seed").get<std::uint64_t>();
  return o;
}

Json rect_json(const Rect& r) { return {r.x0, r.y0, r.x1, r.y1}; }

Rect rect_from(const Json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string TrainedModel::kind() const {
  switch (model.index()) {
    case 0: return "linear";
    case 1: return "krr";
    case 2: return "multistage";
    case 3: return "mlp";
    case 4: return "svm";
    case 5: return "center";
    case 6: return "random";
  }
  return "unknown";
}

bool TrainedModel::is_classifier() const {
  return std::holds_alternative<MlpModel>(model) || std::holds_alternative<LinearSvmModel>(model);
}

void save_model(const TrainedModel& tm, const std::string& stem) {
  Blocks b;
  Json params;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          params = put_linear(m, "", b);
        } else if constexpr (std::is_same_v<T, KernelRidgeModel>) {
          params = put_krr(m, "", b);
        } else if constexpr (std::is_same_v<T, MultistageModel>) {
          params["depth"] = put_linear(m.depth, "depth.", b);
          params["slices"] = Json::array();
          for (int k = 0; k < kSliceCount; ++k) {
            params["slices"].push_back(
                put_krr(m.slices[static_cast<std::size_t>(k)], "slice" + std::to_string(k) + ".", b));
          }
        } else if constexpr (std::is_same_v<T, MlpModel>) {
          b.put("w1", m.w1);
          b.put("b1", m.b1);
          b.put("w2", m.w2);
          b.put("b2", m.b2);
          params = {{"head", m.head == MlpHead::kSigmoid ? "sigmoid" : "softmax"},
                    {"options", options_json(m.options)},
                    {"x_std", std_json(m.x_std)},
                    {"loss_curve", m.loss_curve}};
        } else if constexpr (std::is_same_v<T, LinearSvmModel>) {
          b.put("w", m.w);
          params = {{"x_std", std_json(m.x_std)}, {"bias", m.bias}, {"c", m.c}};
        } else if constexpr (std::is_same_v<T, CenterPredictor>) {
          params = {{"x", m.x}, {"y", m.y}, {"depth", m.depth}};
        } else {
          params = {{"area", rect_json(m.area)}, {"depth", m.depth}, {"seed", m.seed}};
        }
      },
      tm.model);
  const std::string bin = encode(b.data);
  Json h = {{"version", kModelVersion},
            {"kind", tm.kind()},
            {"target", to_string(tm.target)},
            {"columns", tm.columns},
            {"build", tm.build},
            {"config_digest", tm.config_digest},
            {"training_digest", tm.training_digest},
            {"record", tm.record},
            {"params", params},
            {"blocks", b.layout},
            {"bin_digest", sha256_hex(bin)}};
  write_file_atomic(stem + ".bin", bin);
  write_file_atomic(stem + ".json", h.dump(2) + "\n");
}

TrainedModel load_model(const std::string& stem_in) {
  std::string stem = stem_in;
  for (const char* ext : {".json", ".bin"}) {
    const std::string e = ext;
    if (stem.size() > e.size() && stem.compare(stem.size() - e.size(), e.size(), e) == 0) {
      stem.resize(stem.size() - e.size());
    }
  }
  Json h;
  try {
    h = Json::parse(read_file(stem + ".json"));
  } catch (const Json::exception& e) {
    fail(ErrorKind::kInvalidArgument, "model header is not valid JSON: " + std::string(e.what()));
  }
  if (h.value("version", -1) != kModelVersion) {
    fail(ErrorKind::kVersionMismatch, "model format version " + h.value("version", Json()).dump() +
                                          " is not " + std::to_string(kModelVersion));
  }
  const std::string bin = read_file(stem + ".bin");
  if (sha256_hex(bin) != h.at("bin_digest").get<std::string>()) {
    fail(ErrorKind::kDigestMismatch, "model binary does not match its header digest");
  }
  Blocks b;
  b.layout = h.at("blocks");
  b.data = decode(bin);
  TrainedModel tm;
  tm.target = target_from_string(h.at("target").get<std::string>());
  tm.columns = h.at("columns").get<std::vector<int>>();
  tm.build = h.at("build").get<std::string>();
  tm.config_digest = h.at("config_digest").get<std::string>();
  tm.training_digest = h.at("training_digest").get<std::string>();
  tm.record = h.at("record");
  const Json& p = h.at("params");
  const std::string kind = h.at("kind").get<std::string>();
  if (kind == "linear") {
    tm.model = get_linear(p, "", b);
  } else if (kind == "krr") {
    tm.model = get_krr(p, "", b);
  } else if (kind == "multistage") {
    MultistageModel m;
    m.depth = get_linear(p.at("depth"), "depth.", b);
    for (int k = 0; k < kSliceCount; ++k) {
      m.slices[static_cast<std::size_t>(k)] =
          get_krr(p.at("slices").at(k), "slice" + std::to_string(k) + ".", b);
    }
    tm.model = std::move(m);
  } else if (kind == "mlp") {
    MlpModel m;
    m.head = p.at("head") == "sigmoid" ? MlpHead::kSigmoid : MlpHead::kSoftmax;
    m.options = options_from(p.at("options"));
    m.x_std = std_from(p.at("x_std"));
    m.loss_curve = p.at("loss_curve").get<std::vector<double>>();
    m.w1 = b.get("w1");
    m.b1 = b.get("b1");
    m.w2 = b.get("w2");
    m.b2 = b.get("b2");
    tm.model = std::move(m);
  } else if (kind == "svm") {
    LinearSvmModel m;
    m.x_std = std_from(p.at("x_std"));
    m.bias = p.at("bias").get<double>();
    m.c = p.at("c").get<double>();
    m.w = b.get("w");
    tm.model = std::move(m);
  } else if (kind == "center") {
    tm.model = CenterPredictor{p.at("x").get<double>(), p.at("y").get<double>(),
                               p.at("depth").get<double>()};
  } else if (kind == "random") {
    tm.model = RandomPredictor{rect_from(p.at("area")), p.at("depth").get<double>(),
                               p.at("seed").get<std::uint64_t>()};
  } else {
    fail(ErrorKind::kInvalidArgument, "unknown model kind '" + kind + "'");
  }
  return tm;
}

Eigen::MatrixXd predict_regression(const TrainedModel& tm, const std::vector<SignalFrame>& frames) {
  require(!tm.is_classifier(), "model '" + tm.kind() + "' is a classifier, not a regressor");
  const auto n = static_cast<Eigen::Index>(frames.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(n, 3, kNaN);
  if (n == 0) return out;
  auto place = [&](const Eigen::MatrixXd& raw) {
    switch (tm.target) {
      case Target::kLocation: out.leftCols(2) = raw; break;
      case Target::kDepth: out.col(2) = raw.col(0); break;
      case Target::kBoth: out = raw; break;
    }
  };
  if (const auto* m = std::get_if<LinearModel>(&tm.model)) {
    place(m->predict(feature_matrix(frames, tm.columns)));
  } else if (const auto* m = std::get_if<KernelRidgeModel>(&tm.model)) {
    place(m->predict(feature_matrix(frames, tm.columns)));
  } else if (const auto* m = std::get_if<MultistageModel>(&tm.model)) {
    out = m->predict(feature_matrix(frames, tm.columns));
  } else if (const auto* m = std::get_if<CenterPredictor>(&tm.model)) {
    out = predict(*m, n);
  } else if (const auto* m = std::get_if<RandomPredictor>(&tm.model)) {
    out = predict(*m, n);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isnan(out(i, 2))) out(i, 2) = std::max(out(i, 2), 0.0);
  }
  return out;
}

std::vector<int> predict_labels(const TrainedModel& tm, const std::vector<SignalFrame>& frames) {
  require(tm.is_classifier(), "model '" + tm.kind() + "' is not a classifier");
  if (frames.empty()) return {};
  const Eigen::MatrixXd x = feature_matrix(frames, tm.columns);
  if (const auto* m = std::get_if<LinearSvmModel>(&tm.model)) return m->predict(x);
  const auto& m = std::get<MlpModel>(tm.model);
  std::vector<int> out = m.predict(x);
  // Softmax heads index tip classes from 0; report class ids.
  if (m.head == MlpHead::kSoftmax) {
    for (int& c : out) ++c;
  }
  return out;
}

}  // namespace tactile
