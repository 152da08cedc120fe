#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tactile/evaluation.hpp"

namespace tactile {

/// depth,count,sparse,loc_median,loc_mean,loc_std,depth_median,depth_mean,depth_std
std::string error_table_csv(const ErrorTable& table);
/// depth,count,rate
std::string curve_csv(const std::vector<CurvePoint>& curve);
/// t,x,y,d,px,py,pd per frame.
std::string predictions_csv(const Eigen::MatrixXd& predicted, const std::vector<SignalFrame>& truth);

inline constexpr double kArrowPixelsPerMm = 10.0;

/// One panel per depth bin; each frame in the bin draws an arrow from its true location to the
/// predicted one. Coordinates are mm scaled by kArrowPixelsPerMm.
std::string arrow_plot_svg(const Eigen::MatrixXd& predicted, const std::vector<SignalFrame>& truth,
                           const std::vector<double>& bins, const Rect& area);

/// Arrow panel count in a rendered plot.
int svg_panel_count(const std::string& svg);

/// Creates the directory if needed and writes the file atomically; kIo on failure.
void write_output(const std::filesystem::path& path, const std::string& contents);

}  // namespace tactile
