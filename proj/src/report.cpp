#include "tactile/report.hpp"

#include <cmath>
#include <cstdio>

#include "tactile/config_io.hpp"
#include "tactile/error.hpp"

namespace tactile {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

constexpr const char* kPanelTag = "<g class=\"panel\"";

}  // namespace

std::string error_table_csv(const ErrorTable& t) {
  std::string out =
      "depth,count,sparse,loc_median,loc_mean,loc_std,depth_median,depth_mean,depth_std\n";
  for (const ErrorRow& r : t.rows) {
    out += num(r.depth) + ',' + std::to_string(r.count) + ',' + (r.sparse ? "1" : "0");
    for (double v : {r.location.median, r.location.mean, r.location.std, r.depth_error.median,
                     r.depth_error.mean, r.depth_error.std}) {
      out += ',' + num(v);
    }
    out += '\n';
  }
  return out;
}

std::string curve_csv(const std::vector<CurvePoint>& c) {
  std::string out = "depth,count,rate\n";
  for (const CurvePoint& p : c) out += num(p.depth) + ',' + std::to_string(p.count) + ',' + num(p.rate) + '\n';
  return out;
}

std::string predictions_csv(const Eigen::MatrixXd& predicted, const std::vector<SignalFrame>& truth) {
  require(predicted.rows() == static_cast<Eigen::Index>(truth.size()) && predicted.cols() == 3,
          "predictions must be (x, y, d) rows aligned with the frames");
  std::string out = "t,x,y,d,px,py,pd\n";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const SignalFrame& f = truth[i];
    out += std::to_string(f.tip_class) + ',' + num(f.x) + ',' + num(f.y) + ',' + num(f.d) + ',' +
           num(predicted(r, 0)) + ',' + num(predicted(r, 1)) + ',' + num(predicted(r, 2)) + '\n';
  }
  return out;
}

std::string arrow_plot_svg(const Eigen::MatrixXd& predicted, const std::vector<SignalFrame>& truth,
                           const std::vector<double>& bins, const Rect& area) {
  require(predicted.rows() == static_cast<Eigen::Index>(truth.size()) && predicted.cols() >= 2,
          "predictions must be aligned with the frames");
  const double s = kArrowPixelsPerMm;
  const double pad = 4.0;  // mm around the sensing area
  const double pw = (area.width() + 2.0 * pad) * s;
  const double ph = (area.height() + 2.0 * pad) * s;
  const double title = 24.0;
  const double width = pw * static_cast<double>(bins.size());
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(width) +
                    "\" height=\"" + px(ph + title) + "\" viewBox=\"0 0 " + px(width) + ' ' +
                    px(ph + title) + "\">\n";
  out +=
      "<defs><marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"6\" "
      "markerHeight=\"6\" orient=\"auto-start-reverse\"><path d=\"M0,0 L10,5 L0,10 z\"/></marker></defs>\n";
  for (std::size_t b = 0; b < bins.size(); ++b) {
    const double ox = pw * static_cast<double>(b);
    // y grows upward in sensor coordinates.
    auto sx = [&](double x) { return ox + (x - area.x0 + pad) * s; };
    auto sy = [&](double y) { return title + (area.y1 + pad - y) * s; };
    out += std::string(kPanelTag) + " data-depth=\"" + num(bins[b]) + "\">\n";
    out += "<text x=\"" + px(ox + 0.5 * pw) + "\" y=\"16\" text-anchor=\"middle\" font-size=\"14\">d = " +
           num(bins[b]) + " mm</text>\n";
    out += "<rect x=\"" + px(sx(area.x0)) + "\" y=\"" + px(sy(area.y1)) + "\" width=\"" +
           px(area.width() * s) + "\" height=\"" + px(area.height() * s) +
           "\" fill=\"none\" stroke=\"#888\"/>\n";
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const SignalFrame& f = truth[i];
      if (std::abs(f.d - bins[b]) > kBinHalfWidth + 1e-9) continue;
      const auto r = static_cast<Eigen::Index>(i);
      out += "<line class=\"arrow\" x1=\"" + px(sx(f.x)) + "\" y1=\"" + px(sy(f.y)) + "\" x2=\"" +
             px(sx(predicted(r, 0))) + "\" y2=\"" + px(sy(predicted(r, 1))) +
             "\" stroke=\"#1f4e9c\" stroke-width=\"1\" marker-end=\"url(#head)\"/>\n";
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

int svg_panel_count(const std::string& svg) {
  int n = 0;
  for (std::size_t pos = svg.find(kPanelTag); pos != std::string::npos; pos = svg.find(kPanelTag, pos + 1)) ++n;
  return n;
}

void write_output(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorKind::kIo, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  write_file_atomic(path, contents);
}

}  // namespace tactile
