#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tactile/geometry.hpp"

namespace tactile {

enum class Transduction { kOptical, kResistive };
enum class TerminalRole { kEmitter, kReceiver, kElectrode };

struct Terminal {
  int id = 0;
  TerminalRole role = TerminalRole::kEmitter;
  Vec3 position;
  Vec3 orientation{0.0, 0.0, 1.0};  // unit vector pointing into the slab
  double active_area = 1.0;          // mm^2, square patch in the mounting plane
  double emission_half_angle = 60.0;    // degrees, emitters
  double acceptance_half_angle = 70.0;  // degrees, receivers
  int board = -1;                        // mounting board, -1 when not board-mounted
};

struct NoiseParams {
  double adc_full_scale = 1023.0;
  double shot_noise_sigma = 1.0;  // counts, at zero signal; grows with sqrt(level)
  double ambient_level = 120.0;   // counts under ambient lighting; dark datasets use 0
  double drift_rate = 0.0;        // fractional emitter efficiency loss per event
  bool bond_detach = false;
  double resistance_sigma = 0.5;  // ohms, resistive measurement noise
};

struct OpticsParams {
  double wall_reflectivity = 0.0;
  double base_reflectivity = 0.0;
  bool indenter_reflective = false;
  bool fresnel = false;                  // partial reflectance below the critical angle
  double gain = 0.0;                     // counts per unit captured fraction; 0 = auto
  double gain_target_fraction = 0.6;     // auto gain: strongest flat channel / full scale
  double wall_mount_height = 6.2;        // wall terminal centre above the base, mm
};

struct MechanicsParams {
  double skirt_width = 0.0;     // mm; 0 selects slab_thickness / 2
  double skirt_fraction = 0.5;  // skirt amplitude at the footprint boundary, fraction of depth
  double skirt_cutoff = 3.0;    // skirt support, in skirt widths
  double normal_step = 0.05;    // central-difference step for normals, mm
  double depth_cap_fraction = 0.75;
};

struct ResistiveParams {
  double lattice_pitch = 1.0;     // mm
  double g0 = 1e-3;               // S per lattice edge
  double beta = 8.0;              // strain sensitivity of the conductance law
  double tau_load = 0.3;          // s
  double tau_unload = 2.0;        // s
  double drift_sigma = 0.0;       // log-conductance random walk, per sqrt(second)
  double frame_period = 0.025;    // s, full six-pair frame
  double dwell = 0.5;             // s spent at each depth step before the frame is read
  double contact_halfwidth = 1.0; // mm, electrode patch half-width along its wall
};

struct SensorConfig {
  std::string build;  // "resistive", "tht", "tht_large", "smt", or a custom name
  double slab_width = 0.0;   // x extent, mm
  double slab_length = 0.0;  // y extent, mm
  double slab_thickness = 8.0;
  Transduction transduction = Transduction::kOptical;
  std::vector<Terminal> terminals;
  double margin = 0.0;
  double refractive_index_elastomer = 1.4;
  double refractive_index_air = 1.0;
  NoiseParams noise;
  OpticsParams optics;
  MechanicsParams mechanics;
  ResistiveParams resistive;
  unsigned long long seed = 1;

  double critical_angle_deg() const;
  double skirt_width() const;
  double depth_cap() const { return mechanics.depth_cap_fraction * slab_thickness; }
  std::vector<const Terminal*> terminals_with(TerminalRole role) const;
  const Terminal& terminal(int id) const;
};

/// Throws tactile::Error on any violated configuration invariant.
void validate(const SensorConfig& config);

enum class TipShape { kHemisphere, kPlanarDisc, kEdge90, kCorner };

struct IndenterTip {
  TipShape shape = TipShape::kHemisphere;
  double size_param = 6.0;  // mm: hemisphere/disc diameter, edge length, corner max width
  double orientation_deg = 0.0;
  int class_id = 1;

  double radius() const { return 0.5 * size_param; }
  std::string name() const;
  bool operator==(const IndenterTip&) const = default;

  static IndenterTip hemisphere();
  static IndenterTip planar_disc();
  static IndenterTip edge90(double orientation_deg);
  static IndenterTip corner();
  static IndenterTip from_class(int class_id);
};

/// The six tips in class-id order.
std::vector<IndenterTip> all_tips();

struct PairIndex {
  Transduction transduction = Transduction::kOptical;
  /// Resistive: unordered electrode pairs. Optical: (emitter, receiver) feature channels,
  /// emitter-major.
  std::vector<std::pair<int, int>> pairs;
  /// Optical excitation states: emitter id per state, -1 for the final all-off state.
  std::vector<int> states;
  std::vector<int> receivers;

  std::size_t feature_count() const { return pairs.size(); }
  std::size_t raw_length() const;
  bool operator==(const PairIndex&) const = default;
};

SensorConfig build_layout(std::string_view build);

/// Single facing emitter/receiver pair, used for layer-thickness studies.
SensorConfig facing_pair_layout(double thickness, double separation = 20.0);

PairIndex enumerate_pairs(const SensorConfig& config);

Rect sensing_area(const SensorConfig& config, const IndenterTip& tip);

/// Regular lattice of points at `pitch`, centred in `area`, row-major (y outer).
std::vector<std::pair<double, double>> grid_points(const Rect& area, double pitch);

std::string to_string(Transduction t);
std::string to_string(TerminalRole r);
std::string to_string(TipShape s);
Transduction transduction_from_string(std::string_view s);
TerminalRole role_from_string(std::string_view s);
TipShape shape_from_string(std::string_view s);

}  // namespace tactile
