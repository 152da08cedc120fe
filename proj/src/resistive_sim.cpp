#include "tactile/resistive_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "tactile/error.hpp"

namespace tactile {

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

ResistorNetwork::ResistorNetwork(int node_count, std::vector<ResistorEdge> edges,
                                 std::vector<std::vector<int>> electrodes)
    : nodes_(node_count), edges_(std::move(edges)), electrodes_(std::move(electrodes)) {
  if (nodes_ == 0) return;
  require(nodes_ > 0, "network needs nodes");
  super_.assign(static_cast<std::size_t>(nodes_), -1);
  std::vector<int> parent(static_cast<std::size_t>(nodes_));
  std::iota(parent.begin(), parent.end(), 0);
  for (const ResistorEdge& e : edges_) {
    require(e.a >= 0 && e.a < nodes_ && e.b >= 0 && e.b < nodes_ && e.a != e.b,
            "resistor edge references an invalid node");
    require(e.conductance > 0.0 && std::isfinite(e.conductance), "conductances must be positive");
    parent[static_cast<std::size_t>(find_root(parent, e.a))] = find_root(parent, e.b);
  }
  require(electrodes_.size() >= 2, "network needs at least two electrodes");
  for (std::size_t k = 0; k < electrodes_.size(); ++k) {
    require(!electrodes_[k].empty(), "each electrode must bind at least one node");
    for (int n : electrodes_[k]) {
      require(n >= 0 && n < nodes_, "electrode binds an invalid node");
      require(super_[static_cast<std::size_t>(n)] < 0, "electrodes overlap");
      super_[static_cast<std::size_t>(n)] = static_cast<int>(k);
      parent[static_cast<std::size_t>(find_root(parent, n))] = find_root(parent, electrodes_[k][0]);
    }
  }
  const int root = find_root(parent, 0);
  for (int n = 1; n < nodes_; ++n) {
    if (find_root(parent, n) != root) fail(ErrorKind::kNumerical, "resistor network is disconnected");
  }
  super_count_ = static_cast<int>(electrodes_.size());
  for (int& s : super_) {
    if (s < 0) s = super_count_++;
  }
}

void ResistorNetwork::set_conductances(const std::vector<double>& g) {
  require(g.size() == edges_.size(), "conductance vector does not match the edge count");
  for (std::size_t k = 0; k < g.size(); ++k) {
    require(g[k] > 0.0 && std::isfinite(g[k]), "conductances must be positive");
    edges_[k].conductance = g[k];
  }
}

Eigen::MatrixXd ResistorNetwork::all_pairs() const {
  const int ne = static_cast<int>(electrodes_.size());
  const int ground = ne - 1;
  const int n = super_count_ - 1;
  auto reduced = [ground](int s) { return s < ground ? s : s - 1; };
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(edges_.size() * 4);
  for (const ResistorEdge& e : edges_) {
    const int sa = super_[static_cast<std::size_t>(e.a)];
    const int sb = super_[static_cast<std::size_t>(e.b)];
    if (sa == sb) continue;
    const double g = e.conductance;
    if (sa != ground) trip.emplace_back(reduced(sa), reduced(sa), g);
    if (sb != ground) trip.emplace_back(reduced(sb), reduced(sb), g);
    if (sa != ground && sb != ground) {
      trip.emplace_back(reduced(sa), reduced(sb), -g);
      trip.emplace_back(reduced(sb), reduced(sa), -g);
    }
  }
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
  if (solver.info() != Eigen::Success) fail(ErrorKind::kNumerical, "nodal system is singular");
  // Column a holds node potentials for unit current into electrode a, electrode `ground` at 0.
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, ground);
  for (int a = 0; a < ground; ++a) rhs(a, a) = 1.0;
  const Eigen::MatrixXd x = solver.solve(rhs);
  if (solver.info() != Eigen::Success) fail(ErrorKind::kNumerical, "nodal solve failed");
  auto pot = [&](int node_electrode, int source) {
    return node_electrode == ground || source == ground ? 0.0 : x(node_electrode, source);
  };
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(ne, ne);
  for (int a = 0; a < ne; ++a) {
    for (int b = a + 1; b < ne; ++b) {
      const double r = pot(a, a) - pot(b, a) - pot(a, b) + pot(b, b);
      R(a, b) = r;
      R(b, a) = r;
    }
  }
  return R;
}

double ResistorNetwork::pair_resistance(int a, int b) const {
  const int ne = static_cast<int>(electrodes_.size());
  require(a >= 0 && a < ne && b >= 0 && b < ne && a != b, "invalid electrode pair");
  return all_pairs()(a, b);
}

double pair_resistance(const ResistorNetwork& network, std::pair<int, int> pair) {
  return network.pair_resistance(pair.first, pair.second);
}

Lattice build_lattice(const SensorConfig& config, double pitch) {
  require(config.transduction == Transduction::kResistive, "lattice needs a resistive config");
  if (pitch <= 0.0) pitch = config.resistive.lattice_pitch;
  require(pitch > 0.0, "lattice pitch must be positive");
  auto cells = [pitch](double extent) {
    const double n = extent / pitch;
    require(std::abs(n - std::round(n)) < 1e-6, "slab extents must be multiples of the lattice pitch");
    return static_cast<int>(std::lround(n)) + 1;
  };
  Lattice lat;
  lat.pitch = pitch;
  lat.nx = cells(config.slab_width);
  lat.ny = cells(config.slab_length);
  lat.nz = cells(config.slab_thickness);
  // g0 is the edge conductance of a 1 mm lattice; a uniform medium keeps conductivity g0/mm.
  const double g0 = config.resistive.g0 * pitch;
  std::vector<ResistorEdge> edges;
  auto pos = [&](int i, int j, int k) { return Vec3{i * pitch, j * pitch, k * pitch}; };
  for (int k = 0; k < lat.nz; ++k) {
    for (int j = 0; j < lat.ny; ++j) {
      for (int i = 0; i < lat.nx; ++i) {
        const int here = lat.node(i, j, k);
        // Finite-volume weights: an edge on a boundary face carries half the cross-section.
        auto face = [](int idx, int n) { return idx == 0 || idx == n - 1 ? 0.5 : 1.0; };
        auto link = [&](int i2, int j2, int k2) {
          double w = 1.0;
          if (i2 == i) w *= face(i, lat.nx);
          if (j2 == j) w *= face(j, lat.ny);
          if (k2 == k) w *= face(k, lat.nz);
          edges.push_back({here, lat.node(i2, j2, k2), g0 * w});
          lat.edge_midpoints.push_back((pos(i, j, k) + pos(i2, j2, k2)) * 0.5);
        };
        if (i + 1 < lat.nx) link(i + 1, j, k);
        if (j + 1 < lat.ny) link(i, j + 1, k);
        if (k + 1 < lat.nz) link(i, j, k + 1);
      }
    }
  }
  const double hw = config.resistive.contact_halfwidth + 1e-9;
  std::vector<std::vector<int>> electrodes;
  for (const Terminal* t : config.terminals_with(TerminalRole::kElectrode)) {
    std::vector<int> bound;
    const Vec3& p = t->position;
    const Vec3& o = t->orientation;
    for (int k = 0; k < lat.nz; ++k) {
      for (int j = 0; j < lat.ny; ++j) {
        for (int i = 0; i < lat.nx; ++i) {
          const Vec3 q = pos(i, j, k);
          bool on = false;
          if (std::abs(o.x) > 0.5) {
            on = std::abs(q.x - p.x) < 1e-9 && std::abs(q.y - p.y) <= hw;
          } else if (std::abs(o.y) > 0.5) {
            on = std::abs(q.y - p.y) < 1e-9 && std::abs(q.x - p.x) <= hw;
          } else {
            on = std::abs(q.z - p.z) < 1e-9 && std::abs(q.x - p.x) <= hw &&
                 std::abs(q.y - p.y) <= hw;
          }
          if (on) bound.push_back(lat.node(i, j, k));
        }
      }
    }
    require(!bound.empty(), "electrode " + std::to_string(t->id) + " binds no lattice node");
    electrodes.push_back(std::move(bound));
    lat.electrode_ids.push_back(t->id);
  }
  lat.network = ResistorNetwork(lat.nx * lat.ny * lat.nz, std::move(edges), std::move(electrodes));
  return lat;
}

double strained_conductance(double g0, double strain, double beta) {
  require(strain >= 0.0, "effective strain must be non-negative");
  return g0 * std::exp(beta * strain);
}

HysteresisState HysteresisState::relaxed(const SensorConfig& config, std::size_t edges) {
  HysteresisState s;
  s.strain.assign(edges, 0.0);
  s.tau_load = config.resistive.tau_load;
  s.tau_unload = config.resistive.tau_unload;
  s.drift_sigma = config.resistive.drift_sigma;
  return s;
}

void step_hysteresis(HysteresisState& state, const std::vector<double>& target, double dt, Rng* rng) {
  require(dt > 0.0, "hysteresis step needs dt > 0");
  require(target.size() == state.strain.size(), "strain target does not match the edge count");
  const double a_load = 1.0 - std::exp(-dt / state.tau_load);
  const double a_unload = 1.0 - std::exp(-dt / state.tau_unload);
  for (std::size_t k = 0; k < target.size(); ++k) {
    double& e = state.strain[k];
    const double a = target[k] > e ? a_load : a_unload;
    e = std::max(0.0, e + a * (target[k] - e));
  }
  if (rng && state.drift_sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, state.drift_sigma * std::sqrt(dt));
    for (int i = 0; i < 3; ++i) state.drift[i] += gauss(*rng);
  }
}

ResistiveSensor::ResistiveSensor(const SensorConfig& config, std::uint64_t seed)
    : config_(config),
      pairs_(enumerate_pairs(config)),
      lattice_(build_lattice(config)),
      drift_rng_(make_rng({seed, 0xD21Fu})),
      noise_rng_(make_rng({seed, 0x4015u})) {
  state_ = HysteresisState::relaxed(config_, lattice_.edge_midpoints.size());
}

std::vector<double> ResistiveSensor::target_strain(const IndentationPose* pose) const {
  std::vector<double> eps(lattice_.edge_midpoints.size(), 0.0);
  if (!pose || pose->depth <= 0.0) return eps;
  const SurfaceField field = deform(config_, *pose);
  const StrainField strain = strain_field(field, config_);
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const Vec3& m = lattice_.edge_midpoints[k];
    eps[k] = strain.at(m.x, m.y, m.z);
  }
  return eps;
}

void ResistiveSensor::advance(const IndentationPose* pose, double dt) {
  step_hysteresis(state_, target_strain(pose), dt, &drift_rng_);
  time_ += dt;
}

std::vector<double> ResistiveSensor::conductances() const {
  const ResistiveParams& rp = config_.resistive;
  const double W = config_.slab_width;
  const double L = config_.slab_length;
  std::vector<double> g(state_.strain.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Vec3& m = lattice_.edge_midpoints[k];
    const double drift = state_.drift[0] + state_.drift[1] * (m.x / W - 0.5) +
                         state_.drift[2] * (m.y / L - 0.5);
    const double base = lattice_.network.edges()[k].conductance;
    g[k] = strained_conductance(base, state_.strain[k], rp.beta) * std::exp(drift);
  }
  return g;
}

std::vector<double> ResistiveSensor::resistances() const {
  ResistorNetwork net = lattice_.network;
  net.set_conductances(conductances());
  const Eigen::MatrixXd R = net.all_pairs();
  auto slot = [this](int id) {
    const auto it = std::find(lattice_.electrode_ids.begin(), lattice_.electrode_ids.end(), id);
    return static_cast<int>(it - lattice_.electrode_ids.begin());
  };
  std::vector<double> out;
  for (const auto& [a, b] : pairs_.pairs) out.push_back(R(slot(a), slot(b)));
  return out;
}

void ResistiveSensor::capture_baseline() { baseline_ = resistances(); }

std::vector<double> ResistiveSensor::frame() {
  if (!baseline_) fail(ErrorKind::kInvalidArgument, "resistive frame requested before a baseline capture");
  std::vector<double> r = resistances();
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t k = 0; k < r.size(); ++k) {
    r[k] = r[k] - (*baseline_)[k] + config_.noise.resistance_sigma * gauss(noise_rng_);
  }
  return r;
}

std::vector<double> resistive_frame(ResistiveSensor& sensor, const IndentationPose& pose) {
  sensor.advance(&pose, sensor.config().resistive.frame_period);
  return sensor.frame();
}

}  // namespace tactile
