#pragma once

#include "tactile/core_model.hpp"

namespace tactile {

struct IndentationPose {
  double x = 0.0;
  double y = 0.0;
  double depth = 0.0;  // mm, positive into the slab, 0 = surface contact
  IndenterTip tip;
};

/// Deformed top surface under a posed indenter.
///
/// Heights are downward displacements from the rest surface. Inside the footprint (where the
/// tip's penetration profile reaches the skirt amplitude h_edge = skirt_fraction * depth, or the
/// tip wall height for flat cuts) the surface follows the tip. Outside it a truncated Gaussian
/// skirt of width w decays from h_edge to zero at skirt_cutoff * w. The result is continuous,
/// never interpenetrates the tip, and is exactly zero outside a bounded support disc.
class SurfaceField {
 public:
  /// Flat, undeformed surface.
  SurfaceField() = default;
  SurfaceField(const SensorConfig& config, const IndentationPose& pose);

  double height(double x, double y) const;
  /// Tip penetration below the rest surface at (x, y); -infinity outside the tip planform.
  double tip_profile(double x, double y) const;
  /// True where the elastomer touches the tip, i.e. the elastomer-air interface is gone.
  bool in_contact(double x, double y) const;
  /// Outward (upward) unit normal of the deformed surface.
  Vec3 normal(double x, double y) const;

  bool flat() const { return depth_ <= 0.0; }
  double max_height() const { return flat() ? 0.0 : depth_; }
  double support_radius() const { return support_radius_; }
  double center_x() const { return pose_.x; }
  double center_y() const { return pose_.y; }
  /// Conservative radius beyond which height() < h. For h <= 0 this is the support radius.
  double reach(double h) const;
  const IndentationPose& pose() const { return pose_; }

 private:
  struct Local {
    double profile;
    double skirt;
  };
  Local evaluate(double x, double y) const;
  double skirt(double amplitude, double delta) const;

  IndentationPose pose_;
  double depth_ = 0.0;
  double edge_level_ = 0.0;  // skirt_fraction * depth
  double width_ = 1.0;
  double cutoff_ = 3.0;
  double cutoff_floor_ = 0.0;
  double normal_step_ = 0.05;
  double cos_o_ = 1.0;
  double sin_o_ = 0.0;
  double core_ = 0.0;         // hemisphere/disc: core radius; edge/corner: core half-width
  double core_bound_ = 0.0;   // radius bounding every point with positive profile
  double core_radius_ = 0.0;  // radius bounding the footprint core
  double skirt_peak_ = 0.0;   // largest skirt amplitude
  double support_radius_ = 0.0;
};

/// Throws when the pose leaves its tip's sensing area or exceeds the depth cap.
SurfaceField deform(const SensorConfig& config, const IndentationPose& pose);

/// Compressive strain: surface displacement over thickness, attenuated linearly to zero at the base.
class StrainField {
 public:
  StrainField(const SurfaceField& field, const SensorConfig& config)
      : field_(&field), thickness_(config.slab_thickness) {}
  /// z is measured up from the base.
  double at(double x, double y, double z) const;

 private:
  const SurfaceField* field_;
  double thickness_;
};

StrainField strain_field(const SurfaceField& field, const SensorConfig& config);

/// Load (N) for an indentation depth in [0, 5] mm, hemispherical 6 mm tip, 1:20 PDMS.
double depth_to_force(double depth_mm);

}  // namespace tactile
