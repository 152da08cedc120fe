#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "tactile/core_model.hpp"
#include "tactile/mechanics.hpp"
#include "tactile/rng.hpp"

namespace tactile {

struct ResistorEdge {
  int a = 0;
  int b = 0;
  double conductance = 0.0;  // siemens
};

/// Resistor graph with ideal electrodes. Each electrode shorts its bound nodes together.
class ResistorNetwork {
 public:
  ResistorNetwork(int node_count, std::vector<ResistorEdge> edges,
                  std::vector<std::vector<int>> electrodes);

  int node_count() const { return nodes_; }
  const std::vector<ResistorEdge>& edges() const { return edges_; }
  const std::vector<std::vector<int>>& electrodes() const { return electrodes_; }
  void set_conductances(const std::vector<double>& g);

  /// Two-terminal resistance between electrodes a and b (ohms): unit current in at a, out at b.
  double pair_resistance(int a, int b) const;
  /// Symmetric matrix of all electrode-pair resistances from one factorization.
  Eigen::MatrixXd all_pairs() const;

 private:
  int nodes_;
  std::vector<ResistorEdge> edges_;
  std::vector<std::vector<int>> electrodes_;
  std::vector<int> super_;  // node -> reduced index
  int super_count_ = 0;
};

double pair_resistance(const ResistorNetwork& network, std::pair<int, int> pair);

/// Regular cubic lattice filling the slab, edges carrying their midpoint for strain lookup.
struct Lattice {
  int nx = 0, ny = 0, nz = 0;
  double pitch = 1.0;
  std::vector<Vec3> edge_midpoints;
  ResistorNetwork network{0, {}, {}};
  std::vector<int> electrode_ids;  // terminal id per network electrode

  int node(int i, int j, int k) const { return (k * ny + j) * nx + i; }
};

/// Electrodes bind the boundary nodes on their wall within contact_halfwidth of the centre line.
Lattice build_lattice(const SensorConfig& config, double pitch = 0.0);

double strained_conductance(double g0, double strain, double beta);

struct HysteresisState {
  std::vector<double> strain;  // effective strain per edge
  double tau_load = 0.3;
  double tau_unload = 2.0;
  double drift_sigma = 0.0;     // per sqrt(second), log conductance
  Eigen::Vector3d drift{0.0, 0.0, 0.0};  // log-conductance offset, x gradient, y gradient

  static HysteresisState relaxed(const SensorConfig& config, std::size_t edges);
};

/// First-order lag toward the target with rate tau_load when loading and tau_unload when
/// relaxing, integrated exactly over dt. Drift advances when `rng` is given.
void step_hysteresis(HysteresisState& state, const std::vector<double>& target, double dt,
                     Rng* rng = nullptr);

/// Stateful resistive sensor on an event timeline.
class ResistiveSensor {
 public:
  ResistiveSensor(const SensorConfig& config, std::uint64_t seed);

  const SensorConfig& config() const { return config_; }
  const PairIndex& pairs() const { return pairs_; }
  const Lattice& lattice() const { return lattice_; }
  const HysteresisState& state() const { return state_; }
  double time() const { return time_; }

  /// Equilibrium per-edge strain for a pose; null pose means no contact.
  std::vector<double> target_strain(const IndentationPose* pose) const;
  /// Evolves hysteresis and drift for dt seconds while the indenter holds `pose`.
  void advance(const IndentationPose* pose, double dt);
  /// Absolute resistances for the current state, PairIndex order, ohms.
  std::vector<double> resistances() const;
  void capture_baseline();
  bool has_baseline() const { return baseline_.has_value(); }
  /// Baseline-subtracted resistances plus measurement noise; throws without a baseline.
  std::vector<double> frame();

 private:
  std::vector<double> conductances() const;

  SensorConfig config_;
  PairIndex pairs_;
  Lattice lattice_;
  HysteresisState state_;
  std::optional<std::vector<double>> baseline_;
  Rng drift_rng_;
  Rng noise_rng_;
  double time_ = 0.0;
};

/// Reads one frame: the sensor advances by one frame period at `pose`.
std::vector<double> resistive_frame(ResistiveSensor& sensor, const IndentationPose& pose);

}  // namespace tactile
