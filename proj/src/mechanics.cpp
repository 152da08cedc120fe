#include "tactile/mechanics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "tactile/error.hpp"

namespace tactile {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Depth/force knots read off the stiffness curve; the first three are the stated anchors.
constexpr std::array<std::pair<double, double>, 8> kForceKnots{{
    {0.0, 0.0},
    {0.1, 0.11},
    {0.3, 0.55},
    {1.0, 2.4},
    {2.0, 5.5},
    {3.0, 9.2},
    {4.0, 13.6},
    {5.0, 18.8},
}};

}  // namespace

SurfaceField::SurfaceField(const SensorConfig& config, const IndentationPose& pose)
    : pose_(pose), depth_(std::max(pose.depth, 0.0)) {
  const MechanicsParams& m = config.mechanics;
  width_ = config.skirt_width();
  cutoff_ = m.skirt_cutoff;
  cutoff_floor_ = cutoff_ > 0.0 ? std::exp(-0.5 * cutoff_ * cutoff_) : 0.0;
  normal_step_ = m.normal_step;
  const double o = deg_to_rad(pose.tip.orientation_deg);
  cos_o_ = std::cos(o);
  sin_o_ = std::sin(o);
  if (flat()) return;

  const double d = depth_;
  const double r = pose.tip.radius();
  edge_level_ = m.skirt_fraction * d;
  const double sink = d - edge_level_;  // profile drop from apex to the footprint boundary
  switch (pose.tip.shape) {
    case TipShape::kHemisphere:
      core_ = sink < r ? std::sqrt(r * r - (r - sink) * (r - sink)) : r;
      core_bound_ = r;
      core_radius_ = core_;
      skirt_peak_ = core_ < r ? edge_level_ : d - r;
      break;
    case TipShape::kPlanarDisc:
      core_ = r;
      core_bound_ = r;
      core_radius_ = r;
      skirt_peak_ = d;
      break;
    case TipShape::kEdge90:
      core_ = std::min(sink, r);
      core_bound_ = std::hypot(r, std::min(d, r));
      core_radius_ = std::hypot(core_, r);
      skirt_peak_ = d;
      break;
    case TipShape::kCorner:
      core_ = std::min(sink, r);
      core_bound_ = std::sqrt(2.0) * std::min(d, r);
      core_radius_ = std::sqrt(2.0) * core_;
      skirt_peak_ = d - core_;
      break;
  }
  support_radius_ = cutoff_ > 0.0 ? std::max(core_bound_, core_radius_) + cutoff_ * width_
                                  : std::numeric_limits<double>::infinity();
}

double SurfaceField::skirt(double amplitude, double delta) const {
  if (amplitude <= 0.0) return 0.0;
  if (cutoff_ > 0.0 && delta >= cutoff_ * width_) return 0.0;
  const double g = std::exp(-0.5 * delta * delta / (width_ * width_));
  return amplitude * (g - cutoff_floor_) / (1.0 - cutoff_floor_);
}

SurfaceField::Local SurfaceField::evaluate(double x, double y) const {
  const double dx = x - pose_.x;
  const double dy = y - pose_.y;
  const double d = depth_;
  const double r = pose_.tip.radius();
  switch (pose_.tip.shape) {
    case TipShape::kHemisphere: {
      const double rho = std::hypot(dx, dy);
      const double profile = rho <= r ? d - (r - std::sqrt(r * r - rho * rho)) : kNegInf;
      if (rho <= core_) return {profile, 0.0};
      const double amplitude = core_ < r ? edge_level_ : d - r;
      return {profile, skirt(amplitude, rho - core_)};
    }
    case TipShape::kPlanarDisc: {
      const double rho = std::hypot(dx, dy);
      if (rho <= r) return {d, 0.0};
      return {kNegInf, skirt(d, rho - r)};
    }
    case TipShape::kEdge90: {
      // s across the edge line, t along it.
      const double t = dx * cos_o_ + dy * sin_o_;
      const double s = -dx * sin_o_ + dy * cos_o_;
      const double profile = std::abs(t) <= r ? d - std::abs(s) : kNegInf;
      const double sq = std::clamp(s, -core_, core_);
      const double tq = std::clamp(t, -r, r);
      const double delta = std::hypot(s - sq, t - tq);
      if (delta <= 0.0) return {profile, 0.0};
      return {profile, skirt(d - std::abs(sq), delta)};
    }
    case TipShape::kCorner: {
      const double u = dx * cos_o_ + dy * sin_o_;
      const double v = -dx * sin_o_ + dy * cos_o_;
      const double cheb = std::max(std::abs(u), std::abs(v));
      const double profile = cheb <= r ? d - cheb : kNegInf;
      const double uq = std::clamp(u, -core_, core_);
      const double vq = std::clamp(v, -core_, core_);
      const double delta = std::hypot(u - uq, v - vq);
      if (delta <= 0.0) return {profile, 0.0};
      return {profile, skirt(d - std::max(std::abs(uq), std::abs(vq)), delta)};
    }
  }
  return {kNegInf, 0.0};
}

double SurfaceField::height(double x, double y) const {
  if (flat()) return 0.0;
  const Local l = evaluate(x, y);
  return std::max({l.profile, l.skirt, 0.0});
}

double SurfaceField::tip_profile(double x, double y) const {
  if (flat()) return kNegInf;
  return evaluate(x, y).profile;
}

bool SurfaceField::in_contact(double x, double y) const {
  if (flat()) return false;
  const Local l = evaluate(x, y);
  return l.profile > 0.0 && l.profile >= l.skirt;
}

Vec3 SurfaceField::normal(double x, double y) const {
  if (flat()) return {0.0, 0.0, 1.0};
  const double h = normal_step_;
  // The surface sits at z = T - height, so its upward normal is (dh/dx, dh/dy, 1).
  const double gx = (height(x + h, y) - height(x - h, y)) / (2.0 * h);
  const double gy = (height(x, y + h) - height(x, y - h)) / (2.0 * h);
  return normalized(Vec3{gx, gy, 1.0});
}

double SurfaceField::reach(double h) const {
  if (flat()) return 0.0;
  if (h <= 0.0) return support_radius_;
  const double d = depth_;
  if (h > d) return 0.0;
  const double r = pose_.tip.radius();
  double profile = 0.0;
  switch (pose_.tip.shape) {
    case TipShape::kHemisphere: {
      const double c = r - (d - h);
      profile = c > 0.0 ? std::sqrt(std::max(0.0, r * r - c * c)) : r;
      break;
    }
    case TipShape::kPlanarDisc: profile = r; break;
    case TipShape::kEdge90: profile = std::hypot(r, std::min(d - h, r)); break;
    case TipShape::kCorner: profile = std::sqrt(2.0) * std::min(d - h, r); break;
  }
  double skirt_reach = 0.0;
  if (h < skirt_peak_) {
    // Invert the truncated Gaussian: skirt(A, delta) = h.
    const double g = h * (1.0 - cutoff_floor_) / skirt_peak_ + cutoff_floor_;
    const double delta = g < 1.0 ? width_ * std::sqrt(-2.0 * std::log(g)) : 0.0;
    skirt_reach = core_radius_ + delta;
  }
  return std::min(support_radius_, std::max(profile, skirt_reach) + 1e-9);
}

SurfaceField deform(const SensorConfig& config, const IndentationPose& pose) {
  require(std::isfinite(pose.x) && std::isfinite(pose.y) && std::isfinite(pose.depth),
          "indentation pose must be finite");
  require(pose.depth <= config.depth_cap() + 1e-12,
          "indentation depth exceeds the cap of " + std::to_string(config.depth_cap()) + " mm");
  const Rect area = sensing_area(config, pose.tip);
  require(area.contains(pose.x, pose.y, 1e-9), "indentation pose lies outside the sensing area");
  return SurfaceField(config, pose);
}

double StrainField::at(double x, double y, double z) const {
  const double frac = std::clamp(z / thickness_, 0.0, 1.0);
  const double eps = field_->height(x, y) / thickness_ * frac;
  return std::clamp(eps, 0.0, 0.75);
}

StrainField strain_field(const SurfaceField& field, const SensorConfig& config) {
  return StrainField(field, config);
}

double depth_to_force(double depth_mm) {
  require(depth_mm >= 0.0 && depth_mm <= 5.0, "depth_to_force expects a depth in [0, 5] mm");
  for (std::size_t k = 1; k < kForceKnots.size(); ++k) {
    const auto [d1, f1] = kForceKnots[k];
    if (depth_mm <= d1) {
      const auto [d0, f0] = kForceKnots[k - 1];
      return f0 + (f1 - f0) * (depth_mm - d0) / (d1 - d0);
    }
  }
  return kForceKnots.back().second;
}

}  // namespace tactile
