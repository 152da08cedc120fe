#include "tactile/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "tactile/digest.hpp"
#include "tactile/error.hpp"
#include "tactile/resistive_sim.hpp"
#include "tactile/rng.hpp"

namespace tactile {

namespace {

constexpr double kInterEventGap = 10.0;  // s between indentations

std::vector<double> ramp(double from, double to, double step) {
  std::vector<double> out;
  const int n = static_cast<int>(std::lround((to - from) / step));
  for (int k = 0; k <= n; ++k) out.push_back(std::round((from + k * step) * 1e9) / 1e9);
  return out;
}

std::vector<double> mirrored(std::vector<double> descent, bool descent_only) {
  if (descent_only || descent.size() < 2) return descent;
  for (std::size_t k = descent.size() - 1; k-- > 0;) descent.push_back(descent[k]);
  return descent;
}

double smt_max_depth(const IndenterTip& tip) {
  switch (tip.shape) {
    case TipShape::kPlanarDisc: return 1.2;
    case TipShape::kEdge90: return 3.0;
    default: return 4.0;
  }
}

int default_random_events(const std::string& build) {
  return build == "resistive" ? 60 : 100;
}

}  // namespace

std::string to_string(Pattern p) { return p == Pattern::kGrid ? "grid" : "random"; }
std::string to_string(Lighting l) { return l == Lighting::kAmbient ? "ambient" : "dark"; }
std::string to_string(Purpose p) { return p == Purpose::kTrain ? "train" : "test"; }

Pattern pattern_from_string(std::string_view s) {
  if (s == "grid") return Pattern::kGrid;
  if (s == "random") return Pattern::kRandom;
  fail(ErrorKind::kInvalidArgument, "unknown pattern '" + std::string(s) + "'");
}

Lighting lighting_from_string(std::string_view s) {
  if (s == "ambient") return Lighting::kAmbient;
  if (s == "dark") return Lighting::kDark;
  fail(ErrorKind::kInvalidArgument, "unknown lighting '" + std::string(s) + "'");
}

Purpose purpose_from_string(std::string_view s) {
  if (s == "train") return Purpose::kTrain;
  if (s == "test") return Purpose::kTest;
  fail(ErrorKind::kInvalidArgument, "unknown purpose '" + std::string(s) + "'");
}

std::vector<double> depth_profile(const std::string& build, const IndenterTip& tip,
                                  bool descent_only) {
  std::vector<double> descent;
  if (build == "resistive") {
    descent = ramp(0.0, 3.0, 0.5);
  } else if (build == "smt") {
    descent = {-10.0};
    for (double d : ramp(-5.0, -1.0, 1.0)) descent.push_back(d);
    for (double d : ramp(0.0, smt_max_depth(tip), 0.1)) descent.push_back(d);
  } else {
    descent = ramp(-10.0, -1.0, 1.0);
    for (double d : ramp(0.0, 5.0, 0.1)) descent.push_back(d);
  }
  return mirrored(std::move(descent), descent_only);
}

Rect common_sensing_area(const SensorConfig& config, const std::vector<IndenterTip>& tips) {
  require(!tips.empty(), "at least one tip is required");
  Rect area = sensing_area(config, tips.front());
  for (const IndenterTip& t : tips) {
    const Rect r = sensing_area(config, t);
    area = {std::max(area.x0, r.x0), std::max(area.y0, r.y0), std::min(area.x1, r.x1),
            std::min(area.y1, r.y1)};
  }
  return area;
}

IndentationSchedule make_schedule(const SensorConfig& config, Purpose purpose,
                                  const std::vector<IndenterTip>& tips, Lighting lighting,
                                  std::uint64_t seed, const ScheduleOptions& options) {
  validate(config);
  require(!tips.empty(), "schedule needs at least one tip");
  if (config.build != "smt") {
    for (const IndenterTip& t : tips) {
      require(t.shape == TipShape::kHemisphere,
              "build '" + config.build + "' is indented with the hemispherical tip only");
    }
  }
  IndentationSchedule s;
  s.build = config.build;
  s.purpose = purpose;
  s.pattern = purpose == Purpose::kTrain ? Pattern::kGrid : Pattern::kRandom;
  s.grid_pitch = options.grid_pitch;
  s.lighting = config.transduction == Transduction::kResistive ? Lighting::kDark : lighting;
  s.tips = tips;
  s.seed = seed;
  s.descent_only = options.descent_only;
  s.n_random = options.n_random >= 0 ? options.n_random : default_random_events(config.build);

  const Rect area = common_sensing_area(config, tips);
  Rng rng = make_rng({seed, 0x5C4Eu});
  int id = 0;
  for (const IndenterTip& tip : tips) {
    std::vector<std::pair<double, double>> spots;
    if (s.pattern == Pattern::kGrid) {
      spots = grid_points(area, s.grid_pitch);
      std::shuffle(spots.begin(), spots.end(), rng);
    } else {
      std::uniform_real_distribution<double> ux(area.x0, area.x1);
      std::uniform_real_distribution<double> uy(area.y0, area.y1);
      for (int k = 0; k < s.n_random; ++k) {
        const double x = ux(rng);
        spots.emplace_back(x, uy(rng));
      }
    }
    for (const auto& [x, y] : spots) s.events.push_back({id++, x, y, tip});
  }
  return s;
}

Json to_json(const IndentationSchedule& s) {
  Json tips = Json::array();
  for (const IndenterTip& t : s.tips) tips.push_back(to_json(t));
  Json events = Json::array();
  for (const IndentationEvent& e : s.events) events.push_back({e.id, e.x, e.y, e.tip.class_id});
  Json profiles = Json::object();
  for (const IndenterTip& t : s.tips) {
    profiles[std::to_string(t.class_id)] = depth_profile(s.build, t, s.descent_only);
  }
  return {{"build", s.build},
          {"purpose", to_string(s.purpose)},
          {"pattern", to_string(s.pattern)},
          {"grid_pitch", s.grid_pitch},
          {"n_random", s.n_random},
          {"lighting", to_string(s.lighting)},
          {"tips", tips},
          {"seed", s.seed},
          {"descent_only", s.descent_only},
          {"events", events},
          {"depth_profiles", profiles}};
}

IndentationSchedule schedule_from_json(const Json& j) {
  IndentationSchedule s;
  try {
    s.build = j.at("build").get<std::string>();
    s.purpose = purpose_from_string(j.at("purpose").get<std::string>());
    s.pattern = pattern_from_string(j.at("pattern").get<std::string>());
    s.grid_pitch = j.at("grid_pitch").get<double>();
    s.n_random = j.at("n_random").get<int>();
    s.lighting = lighting_from_string(j.at("lighting").get<std::string>());
    for (const Json& t : j.at("tips")) s.tips.push_back(tip_from_json(t));
    s.seed = j.at("seed").get<std::uint64_t>();
    s.descent_only = j.at("descent_only").get<bool>();
    for (const Json& e : j.at("events")) {
      s.events.push_back({e.at(0).get<int>(), e.at(1).get<double>(), e.at(2).get<double>(),
                          IndenterTip::from_class(e.at(3).get<int>())});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("malformed schedule: ") + e.what());
  }
  return s;
}

std::size_t Dataset::feature_count() const { return enumerate_pairs(config).feature_count(); }

bool operator==(const Dataset& a, const Dataset& b) {
  return a.version == b.version && a.config_digest == b.config_digest &&
         config_digest(a.config) == config_digest(b.config) && a.schedule == b.schedule &&
         a.frames == b.frames;
}

namespace {

std::vector<SignalFrame> collect_optical_event(const OpticalModel& model, const SensorConfig& config,
                                               const IndentationSchedule& schedule, std::size_t index) {
  const IndentationEvent& ev = schedule.events[index];
  NoiseParams noise = config.noise;
  if (schedule.lighting == Lighting::kDark) noise.ambient_level = 0.0;
  const std::vector<double> eff = emitter_efficiency(config, static_cast<int>(index));
  const std::vector<double> depths = depth_profile(schedule.build, ev.tip, schedule.descent_only);
  std::vector<SignalFrame> frames;
  frames.reserve(depths.size());
  for (std::size_t k = 0; k < depths.size(); ++k) {
    IndentationPose pose{ev.x, ev.y, depths[k], ev.tip};
    const std::vector<double> capture = model.capture_cached(pose);
    const std::uint64_t seed = mix_seed({schedule.seed, static_cast<std::uint64_t>(ev.id), k});
    const RawOpticalFrame raw = model.make_frame(capture, noise, eff, seed);
    frames.push_back({ev.tip.class_id, ev.x, ev.y, depths[k], ev.id, static_cast<int>(k),
                      raw.features()});
  }
  return frames;
}

}  // namespace

Dataset collect(const SensorConfig& config, const IndentationSchedule& schedule,
                const CollectOptions& options) {
  validate(config);
  require(schedule.build == config.build, "schedule was made for build '" + schedule.build + "'");
  Dataset ds;
  ds.config = config;
  ds.schedule = schedule;
  ds.config_digest = config_digest(config);

  if (config.transduction == Transduction::kResistive) {
    ResistiveSensor sensor(config, schedule.seed);
    const double dwell = config.resistive.dwell;
    for (const IndentationEvent& ev : schedule.events) {
      try {
        sensor.advance(nullptr, kInterEventGap);
        sensor.capture_baseline();
        const std::vector<double> depths = depth_profile(schedule.build, ev.tip, schedule.descent_only);
        for (std::size_t k = 0; k < depths.size(); ++k) {
          IndentationPose pose{ev.x, ev.y, depths[k], ev.tip};
          sensor.advance(&pose, dwell);
          ds.frames.push_back({ev.tip.class_id, ev.x, ev.y, depths[k], ev.id,
                               static_cast<int>(k), sensor.frame()});
        }
      } catch (const Error& e) {
        fail(e.kind(), "event " + std::to_string(ev.id) + ": " + e.what());
      }
    }
    return ds;
  }

  std::shared_ptr<const OpticalModel> model = options.model;
  if (!model || config_digest(model->config()) != ds.config_digest) {
    model = std::make_shared<OpticalModel>(config, options.budget);
  }
  const std::size_t n = schedule.events.size();
  std::vector<std::vector<SignalFrame>> per_event(n);
  auto run = [&](std::size_t i) {
    try {
      per_event[i] = collect_optical_event(*model, config, schedule, i);
    } catch (const Error& e) {
      throw Error(e.kind(), "event " + std::to_string(schedule.events[i].id) + ": " + e.what());
    }
  };
  const int workers = std::max(1, options.workers);
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = static_cast<std::size_t>(w); i < n; i += static_cast<std::size_t>(workers)) run(i);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (auto& frames : per_event) {
    for (auto& f : frames) ds.frames.push_back(std::move(f));
  }
  return ds;
}

void validate(const Dataset& ds) {
  const std::size_t nf = ds.feature_count();
  for (const SignalFrame& f : ds.frames) {
    require(f.features.size() == nf, "frame feature length does not match the pair index");
    const IndenterTip tip = IndenterTip::from_class(f.tip_class);
    require(sensing_area(ds.config, tip).contains(f.x, f.y, 1e-9), "frame label outside the sensing area");
    const std::vector<double> prof = depth_profile(ds.schedule.build, tip, ds.schedule.descent_only);
    require(std::find(prof.begin(), prof.end(), f.d) != prof.end(), "frame depth not in the profile");
  }
}

Dataset merge(const std::vector<Dataset>& parts) {
  require(!parts.empty(), "nothing to merge");
  Dataset out = parts.front();
  out.frames.clear();
  int offset = 0;
  for (const Dataset& p : parts) {
    if (p.config_digest != out.config_digest) {
      fail(ErrorKind::kDigestMismatch, "cannot merge datasets from different configs");
    }
    int top = 0;
    for (SignalFrame f : p.frames) {
      top = std::max(top, f.event + 1);
      f.event += offset;
      out.frames.push_back(std::move(f));
    }
    offset += top;
  }
  return out;
}

}  // namespace tactile
