#pragma once

#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mwdenoise/image.hpp"

namespace mwd {

enum class RoiRole { object, background };

inline const char* to_string(RoiRole r) {
  return r == RoiRole::object ? "object" : "background";
}

/// Rectangular pixel region. Origin is the top-left corner.
struct Roi {
  int row = 0;
  int col = 0;
  int height = 0;
  int width = 0;
  RoiRole role = RoiRole::object;
};

inline void validate_roi(const Image& img, const Roi& r) {
  if (r.height < 1 || r.width < 1)
    throw DataError("roi: area must be at least one pixel");
  if (r.row < 0 || r.col < 0 || r.row + r.height > img.height ||
      r.col + r.width > img.width) {
    std::ostringstream os;
    os << "roi: region [" << r.row << "," << r.col << " " << r.height << "x"
       << r.width << "] outside " << img.height << "x" << img.width << " image";
    throw DataError(os.str());
  }
}

namespace detail {

struct RoiStats {
  double mean;
  double pop_std;
};

inline RoiStats roi_stats(const Image& img, const Roi& r) {
  validate_roi(img, r);
  double sum = 0.0;
  for (int y = r.row; y < r.row + r.height; ++y)
    for (int x = r.col; x < r.col + r.width; ++x) sum += double(img.at(y, x));
  const double n = double(r.height) * double(r.width);
  const double mean = sum / n;
  double ss = 0.0;
  for (int y = r.row; y < r.row + r.height; ++y)
    for (int x = r.col; x < r.col + r.width; ++x) {
      const double d = double(img.at(y, x)) - mean;
      ss += d * d;
    }
  return {mean, std::sqrt(ss / n)};
}

}  // namespace detail

/// Peak signal-to-noise ratio in dB against a ground truth, with MSE taken
/// over all pixels (population 1/MN). Identical images give +infinity.
inline double psnr(const Image& output, const Image& ground_truth,
                   double i_max = 1.0) {
  require_same_dims(output, ground_truth, "psnr");
  if (!(i_max > 0)) throw ConfigError("psnr: i_max must be > 0");
  double acc = 0.0;
  for (std::int64_t i = 0; i < output.numel(); ++i) {
    const double d = double(ground_truth.pixels[size_t(i)]) -
                     double(output.pixels[size_t(i)]);
    acc += d * d;
  }
  const double mse = acc / double(output.numel());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(i_max / std::sqrt(mse));
}

/// Structural similarity, GLOBAL single-window form: one mean, variance and
/// covariance per image over all pixels (population statistics), then
///   ((2 mu_x mu_y + k1) (2 cov + k2)) / ((mu_x^2 + mu_y^2 + k1)(var_x + var_y + k2)).
/// This is not the sliding-window SSIM; values differ from windowed
/// implementations. Identical inputs give exactly 1.0.
inline double ssim(const Image& output, const Image& ground_truth,
                   double k1 = 1e-4, double k2 = 9e-4) {
  require_same_dims(output, ground_truth, "ssim");
  const double n = double(output.numel());
  double sx = 0.0, sy = 0.0;
  for (std::int64_t i = 0; i < output.numel(); ++i) {
    sx += double(output.pixels[size_t(i)]);
    sy += double(ground_truth.pixels[size_t(i)]);
  }
  const double mx = sx / n, my = sy / n;
  double vx = 0.0, vy = 0.0, cov = 0.0;
  for (std::int64_t i = 0; i < output.numel(); ++i) {
    const double dx = double(output.pixels[size_t(i)]) - mx;
    const double dy = double(ground_truth.pixels[size_t(i)]) - my;
    vx += dx * dx;
    vy += dy * dy;
    cov += dx * dy;
  }
  vx /= n;
  vy /= n;
  cov /= n;
  return ((2.0 * mx * my + k1) * (2.0 * cov + k2)) /
         ((mx * mx + my * my + k1) * (vx + vy + k2));
}

/// Contrast-to-noise ratio in dB from a single image: mean object intensity
/// against mean background intensity over the background deviation, each side
/// first averaged across its ROIs. Returns nullopt when the contrast is
/// non-positive or the background is exactly flat (log undefined).
inline std::optional<double> cnr(const Image& img,
                                 const std::vector<Roi>& rois) {
  double obj_sum = 0.0, bg_mean_sum = 0.0, bg_std_sum = 0.0;
  int n_obj = 0, n_bg = 0;
  for (const Roi& r : rois) {
    const detail::RoiStats s = detail::roi_stats(img, r);
    if (r.role == RoiRole::object) {
      obj_sum += s.mean;
      ++n_obj;
    } else {
      bg_mean_sum += s.mean;
      bg_std_sum += s.pop_std;
      ++n_bg;
    }
  }
  if (n_obj < 1 || n_bg < 1)
    throw DataError("cnr: need at least one object and one background roi");
  const double mu_obj = obj_sum / n_obj;
  const double mu_bg = bg_mean_sum / n_bg;
  const double sigma_bg = bg_std_sum / n_bg;
  if (!(mu_obj > mu_bg) || !(sigma_bg > 0.0)) return std::nullopt;
  return 20.0 * std::log10((mu_obj - mu_bg) / sigma_bg);
}

/// mm -> pixel ROI conversion: sizes round to the nearest pixel (at least 1),
/// the box is centered on the physical point rounded to the nearest pixel.
inline std::vector<Roi> rois_from_physical(
    const Image& img, const std::vector<std::pair<double, double>>& centers_mm,
    std::pair<double, double> size_mm, RoiRole role) {
  const double sp = double(img.pixel_spacing_mm);
  const int h = std::max(1, int(std::llround(size_mm.first / sp)));
  const int w = std::max(1, int(std::llround(size_mm.second / sp)));
  std::vector<Roi> out;
  out.reserve(centers_mm.size());
  for (const auto& [cy_mm, cx_mm] : centers_mm) {
    Roi r;
    r.height = h;
    r.width = w;
    r.row = int(std::llround(cy_mm / sp - h / 2.0));
    r.col = int(std::llround(cx_mm / sp - w / 2.0));
    r.role = role;
    if (r.row < 0 || r.col < 0 || r.row + h > img.height || r.col + w > img.width) {
      std::ostringstream os;
      os << "roi: center (" << cy_mm << ", " << cx_mm << ") mm with size "
         << size_mm.first << "x" << size_mm.second << " mm falls outside the "
         << img.height << "x" << img.width << " image";
      throw DataError(os.str());
    }
    out.push_back(r);
  }
  return out;
}

/// Evaluation-time clamp; the network itself is never clamped.
inline Image clamp01(const Image& img) {
  Image out = img;
  for (float& v : out.pixels) v = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return out;
}

/// Sub-region copy (same spacing); used for per-glyph metric evaluation.
inline Image crop(const Image& img, const Roi& r) {
  validate_roi(img, r);
  Image out(r.height, r.width, img.pixel_spacing_mm);
  for (int y = 0; y < r.height; ++y)
    for (int x = 0; x < r.width; ++x) out.at(y, x) = img.at(r.row + y, r.col + x);
  return out;
}

struct MetricReport {
  double psnr_db = 0.0;  // may be +infinity
  double ssim_value = 0.0;
  std::optional<double> cnr_db;  // nullopt = undefined (non-positive contrast)
  double i_max = 1.0;
  double k1 = 1e-4;
  double k2 = 9e-4;
  std::vector<Roi> rois;
};

inline std::string format_psnr(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

inline std::string format_cnr(const std::optional<double>& v) {
  if (!v) return "undefined";
  std::ostringstream os;
  os.precision(9);
  os << *v;
  return os.str();
}

/// One ROI per line: role center_row_mm center_col_mm h_mm w_mm. Blank lines
/// and lines starting with '#' are skipped.
inline std::vector<Roi> parse_roi_spec(std::istream& in, const Image& img) {
  std::vector<Roi> rois;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string role_str;
    double cy, cx, h_mm, w_mm;
    if (!(ls >> role_str >> cy >> cx >> h_mm >> w_mm))
      throw DataError("roi spec: malformed line " + std::to_string(lineno));
    RoiRole role;
    if (role_str == "object")
      role = RoiRole::object;
    else if (role_str == "background")
      role = RoiRole::background;
    else
      throw DataError("roi spec: unknown role '" + role_str + "' on line " +
                      std::to_string(lineno));
    auto converted = rois_from_physical(img, {{cy, cx}}, {h_mm, w_mm}, role);
    rois.push_back(converted.front());
  }
  return rois;
}

}  // namespace mwd
