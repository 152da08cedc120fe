#include "tactile/config_io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "tactile/error.hpp"

namespace tactile {

namespace {

Json vec_json(const Vec3& v) { return Json::array({v.x, v.y, v.z}); }

Vec3 vec_from(const Json& j) {
  require(j.is_array() && j.size() == 3, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

template <typename T>
void read_opt(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Json to_json(const SensorConfig& c) {
  Json terminals = Json::array();
  for (const Terminal& t : c.terminals) {
    terminals.push_back({{"id", t.id},
                         {"role", to_string(t.role)},
                         {"position", vec_json(t.position)},
                         {"orientation", vec_json(t.orientation)},
                         {"active_area", t.active_area},
                         {"emission_half_angle", t.emission_half_angle},
                         {"acceptance_half_angle", t.acceptance_half_angle},
                         {"board", t.board}});
  }
  const NoiseParams& n = c.noise;
  const OpticsParams& o = c.optics;
  const MechanicsParams& m = c.mechanics;
  const ResistiveParams& r = c.resistive;
  return Json{
      {"build", c.build},
      {"slab_width", c.slab_width},
      {"slab_length", c.slab_length},
      {"slab_thickness", c.slab_thickness},
      {"transduction", to_string(c.transduction)},
      {"terminals", terminals},
      {"margin", c.margin},
      {"refractive_index_elastomer", c.refractive_index_elastomer},
      {"refractive_index_air", c.refractive_index_air},
      {"seed", c.seed},
      {"noise",
       {{"adc_full_scale", n.adc_full_scale},
        {"shot_noise_sigma", n.shot_noise_sigma},
        {"ambient_level", n.ambient_level},
        {"drift_rate", n.drift_rate},
        {"bond_detach", n.bond_detach},
        {"resistance_sigma", n.resistance_sigma}}},
      {"optics",
       {{"wall_reflectivity", o.wall_reflectivity},
        {"base_reflectivity", o.base_reflectivity},
        {"indenter_reflective", o.indenter_reflective},
        {"fresnel", o.fresnel},
        {"gain", o.gain},
        {"gain_target_fraction", o.gain_target_fraction},
        {"wall_mount_height", o.wall_mount_height}}},
      {"mechanics",
       {{"skirt_width", m.skirt_width},
        {"skirt_fraction", m.skirt_fraction},
        {"skirt_cutoff", m.skirt_cutoff},
        {"normal_step", m.normal_step},
        {"depth_cap_fraction", m.depth_cap_fraction},
        {"force_curve", "fitted beyond 0.3 mm"}}},
      {"resistive",
       {{"lattice_pitch", r.lattice_pitch},
        {"g0", r.g0},
        {"beta", r.beta},
        {"tau_load", r.tau_load},
        {"tau_unload", r.tau_unload},
        {"drift_sigma", r.drift_sigma},
        {"frame_period", r.frame_period},
        {"dwell", r.dwell},
        {"contact_halfwidth", r.contact_halfwidth}}},
  };
}

SensorConfig config_from_json(const Json& j) {
  SensorConfig c;
  try {
    c.build = j.at("build").get<std::string>();
    c.slab_width = j.at("slab_width").get<double>();
    c.slab_length = j.at("slab_length").get<double>();
    read_opt(j, "slab_thickness", c.slab_thickness);
    c.transduction = transduction_from_string(j.at("transduction").get<std::string>());
    read_opt(j, "margin", c.margin);
    read_opt(j, "refractive_index_elastomer", c.refractive_index_elastomer);
    read_opt(j, "refractive_index_air", c.refractive_index_air);
    read_opt(j, "seed", c.seed);
    for (const Json& t : j.at("terminals")) {
      Terminal term;
      term.id = t.at("id").get<int>();
      term.role = role_from_string(t.at("role").get<std::string>());
      term.position = vec_from(t.at("position"));
      term.orientation = vec_from(t.at("orientation"));
      read_opt(t, "active_area", term.active_area);
      read_opt(t, "emission_half_angle", term.emission_half_angle);
      read_opt(t, "acceptance_half_angle", term.acceptance_half_angle);
      read_opt(t, "board", term.board);
      c.terminals.push_back(term);
    }
    if (j.contains("noise")) {
      const Json& n = j.at("noise");
      read_opt(n, "adc_full_scale", c.noise.adc_full_scale);
      read_opt(n, "shot_noise_sigma", c.noise.shot_noise_sigma);
      read_opt(n, "ambient_level", c.noise.ambient_level);
      read_opt(n, "drift_rate", c.noise.drift_rate);
      read_opt(n, "bond_detach", c.noise.bond_detach);
      read_opt(n, "resistance_sigma", c.noise.resistance_sigma);
    }
    if (j.contains("optics")) {
      const Json& o = j.at("optics");
      read_opt(o, "wall_reflectivity", c.optics.wall_reflectivity);
      read_opt(o, "base_reflectivity", c.optics.base_reflectivity);
      read_opt(o, "indenter_reflective", c.optics.indenter_reflective);
      read_opt(o, "fresnel", c.optics.fresnel);
      read_opt(o, "gain", c.optics.gain);
      read_opt(o, "gain_target_fraction", c.optics.gain_target_fraction);
      read_opt(o, "wall_mount_height", c.optics.wall_mount_height);
    }
    if (j.contains("mechanics")) {
      const Json& m = j.at("mechanics");
      read_opt(m, "skirt_width", c.mechanics.skirt_width);
      read_opt(m, "skirt_fraction", c.mechanics.skirt_fraction);
      read_opt(m, "skirt_cutoff", c.mechanics.skirt_cutoff);
      read_opt(m, "normal_step", c.mechanics.normal_step);
      read_opt(m, "depth_cap_fraction", c.mechanics.depth_cap_fraction);
    }
    if (j.contains("resistive")) {
      const Json& r = j.at("resistive");
      read_opt(r, "lattice_pitch", c.resistive.lattice_pitch);
      read_opt(r, "g0", c.resistive.g0);
      read_opt(r, "beta", c.resistive.beta);
      read_opt(r, "tau_load", c.resistive.tau_load);
      read_opt(r, "tau_unload", c.resistive.tau_unload);
      read_opt(r, "drift_sigma", c.resistive.drift_sigma);
      read_opt(r, "frame_period", c.resistive.frame_period);
      read_opt(r, "dwell", c.resistive.dwell);
      read_opt(r, "contact_halfwidth", c.resistive.contact_halfwidth);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("malformed sensor config: ") + e.what());
  }
  validate(c);
  return c;
}

Json to_json(const IndenterTip& tip) {
  return {{"shape", to_string(tip.shape)},
          {"size_param", tip.size_param},
          {"orientation_deg", tip.orientation_deg},
          {"class_id", tip.class_id}};
}

IndenterTip tip_from_json(const Json& j) {
  IndenterTip tip;
  try {
    tip.shape = shape_from_string(j.at("shape").get<std::string>());
    tip.size_param = j.at("size_param").get<double>();
    tip.orientation_deg = j.at("orientation_deg").get<double>();
    tip.class_id = j.at("class_id").get<int>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, std::string("malformed tip: ") + e.what());
  }
  return tip;
}

SensorConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidArgument, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const SensorConfig& config, const std::filesystem::path& path) {
  write_file_atomic(path, to_json(config).dump(2) + "\n");
}

std::string canonical_dump(const Json& j) { return j.dump(); }

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kIo, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(ErrorKind::kIo, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kMissingInput, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace tactile
