#include "tactile/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tactile/error.hpp"

namespace tactile {

namespace {

constexpr double kBoundaryTol = 1e-9;

// Inward-facing wall frames for a W x L slab: origin corner, tangent along the wall, inward normal.
struct Wall {
  Vec3 origin;
  Vec3 tangent;
  Vec3 inward;
  double length;
};

std::vector<Wall> perimeter_walls(double w, double l) {
  // Counter-clockwise seen from above: south, east, north, west.
  return {
      {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, w},
      {{w, 0.0, 0.0}, {0.0, 1.0, 0.0}, {-1.0, 0.0, 0.0}, l},
      {{w, l, 0.0}, {-1.0, 0.0, 0.0}, {0.0, -1.0, 0.0}, w},
      {{0.0, l, 0.0}, {0.0, -1.0, 0.0}, {1.0, 0.0, 0.0}, l},
  };
}

double mount_height(const SensorConfig& c, double patch_side) {
  const double ceiling = c.slab_thickness - 0.5 * patch_side - 0.25;
  return std::clamp(c.optics.wall_mount_height, 0.5 * patch_side, ceiling);
}

Terminal optical_terminal(int id, TerminalRole role, Vec3 pos, Vec3 inward, double area) {
  Terminal t;
  t.id = id;
  t.role = role;
  t.position = pos;
  t.orientation = inward;
  t.active_area = area;
  return t;
}

// Perimeter-only optical layout: `per_wall` terminals uniformly spaced on each wall,
// emitters and receivers alternating around the ring.
SensorConfig perimeter_optical(std::string name, double side, int per_wall) {
  SensorConfig c;
  c.build = std::move(name);
  c.slab_width = side;
  c.slab_length = side;
  c.slab_thickness = 8.0;
  c.transduction = Transduction::kOptical;
  c.margin = 3.0;
  constexpr double kLedArea = 9.0;          // 3 mm lens
  constexpr double kDiodeArea = 2.65 * 2.65;
  int id = 0;
  for (const Wall& wall : perimeter_walls(side, side)) {
    for (int k = 0; k < per_wall; ++k) {
      const double s = wall.length * (2.0 * k + 1.0) / (2.0 * per_wall);
      const bool emitter = (id % 2) == 0;
      const double area = emitter ? kLedArea : kDiodeArea;
      Vec3 pos = wall.origin + wall.tangent * s;
      pos.z = mount_height(c, std::sqrt(area));
      c.terminals.push_back(optical_terminal(
          id, emitter ? TerminalRole::kEmitter : TerminalRole::kReceiver, pos, wall.inward, area));
      ++id;
    }
  }
  return c;
}

SensorConfig smt_layout() {
  SensorConfig c;
  c.build = "smt";
  c.slab_width = 38.0;
  c.slab_length = 38.0;
  c.slab_thickness = 8.0;
  c.transduction = Transduction::kOptical;
  c.margin = 3.5;
  constexpr double kLedArea = 1.6 * 0.8;
  constexpr double kDiodeArea = 4.0 * 4.5;
  constexpr double kBoardLength = 29.0;
  const double pitch = kBoardLength / 4.0;
  const double offsets[4] = {-1.5 * pitch, -0.5 * pitch, 0.5 * pitch, 1.5 * pitch};
  int id = 0;
  int board = 0;
  auto place = [&](Vec3 centre, Vec3 along, Vec3 inward) {
    for (int k = 0; k < 4; ++k) {
      const bool emitter = (k % 2) == 0;
      Terminal t = optical_terminal(id++, emitter ? TerminalRole::kEmitter : TerminalRole::kReceiver,
                                    centre + along * offsets[k], inward,
                                    emitter ? kLedArea : kDiodeArea);
      t.board = board;
      c.terminals.push_back(t);
    }
    ++board;
  };
  // Wall boards span the full layer height; components sit on the board centre line.
  const double zc = 0.5 * c.slab_thickness;
  for (const Wall& wall : perimeter_walls(c.slab_width, c.slab_length)) {
    Vec3 centre = wall.origin + wall.tangent * (0.5 * wall.length);
    centre.z = zc;
    place(centre, wall.tangent, wall.inward);
  }
  // Base boards: parallel to x, evenly spaced in y.
  for (int b = 1; b <= 3; ++b) {
    place({0.5 * c.slab_width, c.slab_length * b / 4.0, 0.0}, {1.0, 0.0, 0.0}, {0.0, 0.0, 1.0});
  }
  return c;
}

SensorConfig resistive_layout() {
  SensorConfig c;
  c.build = "resistive";
  c.slab_width = 24.0;
  c.slab_length = 18.0;
  c.slab_thickness = 6.0;
  c.transduction = Transduction::kResistive;
  c.margin = 1.0;
  int id = 0;
  for (const Wall& wall : perimeter_walls(c.slab_width, c.slab_length)) {
    Terminal t;
    t.id = id++;
    t.role = TerminalRole::kElectrode;
    t.position = wall.origin + wall.tangent * (0.5 * wall.length);
    t.position.z = 0.5 * c.slab_thickness;
    t.orientation = wall.inward;
    t.active_area = 2.0 * c.resistive.contact_halfwidth * c.slab_thickness;
    c.terminals.push_back(t);
  }
  return c;
}

bool on_boundary(const SensorConfig& c, const Vec3& p) {
  const bool inside = p.x >= -kBoundaryTol && p.x <= c.slab_width + kBoundaryTol &&
                      p.y >= -kBoundaryTol && p.y <= c.slab_length + kBoundaryTol &&
                      p.z >= -kBoundaryTol && p.z <= c.slab_thickness + kBoundaryTol;
  if (!inside) return false;
  return std::abs(p.x) <= kBoundaryTol || std::abs(p.x - c.slab_width) <= kBoundaryTol ||
         std::abs(p.y) <= kBoundaryTol || std::abs(p.y - c.slab_length) <= kBoundaryTol ||
         std::abs(p.z) <= kBoundaryTol;
}

}  // namespace

double SensorConfig::critical_angle_deg() const {
  return rad_to_deg(std::asin(refractive_index_air / refractive_index_elastomer));
}

double SensorConfig::skirt_width() const {
  return mechanics.skirt_width > 0.0 ? mechanics.skirt_width : 0.5 * slab_thickness;
}

std::vector<const Terminal*> SensorConfig::terminals_with(TerminalRole role) const {
  std::vector<const Terminal*> out;
  for (const Terminal& t : terminals) {
    if (t.role == role) out.push_back(&t);
  }
  std::sort(out.begin(), out.end(), [](const Terminal* a, const Terminal* b) { return a->id < b->id; });
  return out;
}

const Terminal& SensorConfig::terminal(int id) const {
  for (const Terminal& t : terminals) {
    if (t.id == id) return t;
  }
  fail(ErrorKind::kInvalidArgument, "no terminal with id " + std::to_string(id));
}

void validate(const SensorConfig& c) {
  require(c.slab_width > 0.0 && c.slab_length > 0.0, "slab dimensions must be positive");
  require(c.slab_thickness >= 1.0 && c.slab_thickness <= 20.0,
          "slab thickness must lie in [1, 20] mm");
  require(c.refractive_index_air >= 1.0 &&
              c.refractive_index_elastomer > c.refractive_index_air,
          "refractive indices must satisfy n_elastomer > n_air >= 1");
  require(c.margin >= 0.0, "margin must be non-negative");
  const NoiseParams& n = c.noise;
  require(n.adc_full_scale > 0.0 && n.shot_noise_sigma >= 0.0 && n.ambient_level >= 0.0 &&
              n.drift_rate >= 0.0 && n.resistance_sigma >= 0.0,
          "noise parameters must be non-negative");
  require(c.mechanics.skirt_fraction >= 0.0 && c.mechanics.skirt_fraction <= 1.0,
          "skirt fraction must lie in [0, 1]");
  require(c.resistive.tau_unload > c.resistive.tau_load && c.resistive.tau_load > 0.0,
          "hysteresis requires tau_unload > tau_load > 0");
  std::vector<int> ids;
  for (const Terminal& t : c.terminals) {
    ids.push_back(t.id);
    if (c.transduction == Transduction::kOptical) {
      require(t.role != TerminalRole::kElectrode, "optical sensors cannot carry electrodes");
    } else {
      require(t.role == TerminalRole::kElectrode, "resistive sensors carry electrodes only");
    }
    require(std::abs(norm(t.orientation) - 1.0) <= 1e-12,
            "terminal " + std::to_string(t.id) + " orientation is not unit length");
    require(on_boundary(c, t.position),
            "terminal " + std::to_string(t.id) + " is not on the cavity boundary");
    require(t.active_area > 0.0, "terminal active area must be positive");
  }
  std::sort(ids.begin(), ids.end());
  require(std::adjacent_find(ids.begin(), ids.end()) == ids.end(), "duplicate terminal ids");
}

std::string IndenterTip::name() const {
  switch (shape) {
    case TipShape::kHemisphere: return "hemisphere";
    case TipShape::kPlanarDisc: return "planar";
    case TipShape::kCorner: return "corner";
    case TipShape::kEdge90: {
      std::ostringstream os;
      os << "edge" << static_cast<int>(std::lround(orientation_deg));
      return os.str();
    }
  }
  return "unknown";
}

IndenterTip IndenterTip::hemisphere() { return {TipShape::kHemisphere, 6.0, 0.0, 1}; }
IndenterTip IndenterTip::planar_disc() { return {TipShape::kPlanarDisc, 15.0, 0.0, 2}; }
IndenterTip IndenterTip::corner() { return {TipShape::kCorner, 15.0, 0.0, 6}; }

IndenterTip IndenterTip::edge90(double orientation_deg) {
  const long o = std::lround(orientation_deg);
  require(o == 0 || o == 120 || o == 240, "edge tip orientation must be 0, 120 or 240 degrees");
  return {TipShape::kEdge90, 15.0, static_cast<double>(o), 3 + static_cast<int>(o / 120)};
}

IndenterTip IndenterTip::from_class(int class_id) {
  switch (class_id) {
    case 1: return hemisphere();
    case 2: return planar_disc();
    case 3: return edge90(0.0);
    case 4: return edge90(120.0);
    case 5: return edge90(240.0);
    case 6: return corner();
    default: fail(ErrorKind::kInvalidArgument, "tip class id must be in [1, 6]");
  }
}

std::vector<IndenterTip> all_tips() {
  std::vector<IndenterTip> tips;
  for (int k = 1; k <= 6; ++k) tips.push_back(IndenterTip::from_class(k));
  return tips;
}

std::size_t PairIndex::raw_length() const {
  if (transduction == Transduction::kResistive) return pairs.size();
  return receivers.size() * states.size();
}

SensorConfig build_layout(std::string_view build) {
  SensorConfig c;
  if (build == "resistive") {
    c = resistive_layout();
  } else if (build == "tht") {
    c = perimeter_optical("tht", 32.0, 4);
  } else if (build == "tht_large") {
    c = perimeter_optical("tht_large", 45.0, 4);
  } else if (build == "smt") {
    c = smt_layout();
  } else {
    fail(ErrorKind::kInvalidArgument, "unknown build '" + std::string(build) + "'");
  }
  validate(c);
  return c;
}

SensorConfig facing_pair_layout(double thickness, double separation) {
  SensorConfig c;
  c.build = "facing_pair";
  c.slab_width = separation;
  c.slab_length = separation;
  c.slab_thickness = thickness;
  c.transduction = Transduction::kOptical;
  c.margin = 1.0;
  const double led_area = 9.0;
  const double diode_area = 2.65 * 2.65;
  Vec3 e{0.0, 0.5 * separation, mount_height(c, std::sqrt(led_area))};
  Vec3 r{separation, 0.5 * separation, mount_height(c, std::sqrt(diode_area))};
  c.terminals.push_back(optical_terminal(0, TerminalRole::kEmitter, e, {1.0, 0.0, 0.0}, led_area));
  c.terminals.push_back(optical_terminal(1, TerminalRole::kReceiver, r, {-1.0, 0.0, 0.0}, diode_area));
  validate(c);
  return c;
}

PairIndex enumerate_pairs(const SensorConfig& config) {
  PairIndex index;
  index.transduction = config.transduction;
  require(config.terminals.size() >= 2, "at least two terminals are required");
  if (config.transduction == Transduction::kResistive) {
    const auto electrodes = config.terminals_with(TerminalRole::kElectrode);
    for (std::size_t a = 0; a < electrodes.size(); ++a) {
      for (std::size_t b = a + 1; b < electrodes.size(); ++b) {
        index.pairs.emplace_back(electrodes[a]->id, electrodes[b]->id);
      }
    }
    return index;
  }
  const auto emitters = config.terminals_with(TerminalRole::kEmitter);
  const auto receivers = config.terminals_with(TerminalRole::kReceiver);
  require(!emitters.empty() && !receivers.empty(),
          "optical sensors need at least one emitter and one receiver");
  for (const Terminal* e : emitters) {
    index.states.push_back(e->id);
    for (const Terminal* r : receivers) index.pairs.emplace_back(e->id, r->id);
  }
  index.states.push_back(-1);
  for (const Terminal* r : receivers) index.receivers.push_back(r->id);
  return index;
}

Rect sensing_area(const SensorConfig& config, const IndenterTip& tip) {
  const double inset = tip.radius() + config.margin;
  Rect r{inset, inset, config.slab_width - inset, config.slab_length - inset};
  require(r.width() >= 0.0 && r.height() >= 0.0,
          "tip '" + tip.name() + "' with margin does not fit inside the slab");
  return r;
}

std::vector<std::pair<double, double>> grid_points(const Rect& area, double pitch) {
  require(pitch > 0.0, "grid pitch must be positive");
  const int nx = static_cast<int>(std::floor(area.width() / pitch + 1e-9)) + 1;
  const int ny = static_cast<int>(std::floor(area.height() / pitch + 1e-9)) + 1;
  const double x0 = area.center_x() - 0.5 * pitch * (nx - 1);
  const double y0 = area.center_y() - 0.5 * pitch * (ny - 1);
  std::vector<std::pair<double, double>> pts;
  pts.reserve(static_cast<std::size_t>(nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) pts.emplace_back(x0 + pitch * i, y0 + pitch * j);
  }
  return pts;
}

std::string to_string(Transduction t) { return t == Transduction::kOptical ? "optical" : "resistive"; }

std::string to_string(TerminalRole r) {
  switch (r) {
    case TerminalRole::kEmitter: return "emitter";
    case TerminalRole::kReceiver: return "receiver";
    case TerminalRole::kElectrode: return "electrode";
  }
  return "unknown";
}

std::string to_string(TipShape s) {
  switch (s) {
    case TipShape::kHemisphere: return "hemisphere";
    case TipShape::kPlanarDisc: return "planar_disc";
    case TipShape::kEdge90: return "edge90";
    case TipShape::kCorner: return "corner";
  }
  return "unknown";
}

Transduction transduction_from_string(std::string_view s) {
  if (s == "optical") return Transduction::kOptical;
  if (s == "resistive") return Transduction::kResistive;
  fail(ErrorKind::kInvalidArgument, "unknown transduction '" + std::string(s) + "'");
}

TerminalRole role_from_string(std::string_view s) {
  if (s == "emitter") return TerminalRole::kEmitter;
  if (s == "receiver") return TerminalRole::kReceiver;
  if (s == "electrode") return TerminalRole::kElectrode;
  fail(ErrorKind::kInvalidArgument, "unknown terminal role '" + std::string(s) + "'");
}

TipShape shape_from_string(std::string_view s) {
  if (s == "hemisphere") return TipShape::kHemisphere;
  if (s == "planar_disc") return TipShape::kPlanarDisc;
  if (s == "edge90") return TipShape::kEdge90;
  if (s == "corner") return TipShape::kCorner;
  fail(ErrorKind::kInvalidArgument, "unknown tip shape '" + std::string(s) + "'");
}

}  // namespace tactile
