#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mwdenoise/image.hpp"
#include "mwdenoise/metrics.hpp"
#include "mwdenoise/rng.hpp"

namespace mwd {

/// Synthetic stand-ins for the physical test objects: free-hand stroke
/// structures, letter phantoms, and line targets stacked in depth.
enum class SceneKind { strokes, letters, depth_targets };

inline const char* to_string(SceneKind k) {
  switch (k) {
    case SceneKind::strokes: return "strokes";
    case SceneKind::letters: return "letters";
    default: return "depth_targets";
  }
}

inline SceneKind scene_from_string(const std::string& s) {
  if (s == "strokes") return SceneKind::strokes;
  if (s == "letters") return SceneKind::letters;
  if (s == "depth_targets") return SceneKind::depth_targets;
  throw ConfigError("unknown scene kind '" + s + "'");
}

/// Maps a fluence label to the synthetic degradation it stands for:
/// noisy = alpha * clean + N(0, sigma^2). The labels are the measurement
/// campaign's pulse energies; the (alpha, sigma) values are constants chosen
/// so baseline PSNR ladders strictly downward with the label.
struct DegradationPreset {
  std::string label;
  double alpha = 1.0;  // in (0, 1]
  double sigma = 0.0;  // >= 0
};

inline std::vector<DegradationPreset> laser_presets() {
  return {{"17mJ", 1.00, 0.00},
          {"0.95mJ", 0.80, 0.08},
          {"0.25mJ", 0.65, 0.15},
          {"0.065mJ", 0.50, 0.25},
          {"0.016mJ", 0.35, 0.40}};
}

inline std::vector<DegradationPreset> led_presets() {
  return {{"160uJ", 1.00, 0.00}, {"80uJ", 0.70, 0.10}, {"40uJ", 0.50, 0.20}};
}

/// Accepts a known label or "custom:ALPHA:SIGMA".
inline DegradationPreset parse_preset(const std::string& label) {
  for (const auto& p : laser_presets())
    if (p.label == label) return p;
  for (const auto& p : led_presets())
    if (p.label == label) return p;
  if (label.rfind("custom:", 0) == 0) {
    const auto rest = label.substr(7);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        DegradationPreset p;
        p.label = label;
        p.alpha = std::stod(rest.substr(0, colon));
        p.sigma = std::stod(rest.substr(colon + 1));
        if (p.alpha > 0 && p.alpha <= 1 && p.sigma >= 0) return p;
      } catch (const std::exception&) {
      }
    }
  }
  throw ConfigError("unknown degradation preset '" + label +
                    "' (expected a fluence label or custom:ALPHA:SIGMA)");
}

struct PhantomSpec {
  SceneKind scene = SceneKind::strokes;
  int height = 64;
  int width = 64;
  float pixel_spacing_mm = 0.1f;
  int scene_count = 1;
  std::uint64_t seed = 0;
  // strokes
  int stroke_count = 6;
  double stroke_width_px = 1.5;
  double stroke_intensity = 1.0;
  double blur_sigma_px = 0.7;
  // letters
  std::string text = "UCSD";
  // depth targets
  std::vector<double> depths_mm = {2.5, 7.5, 12.5, 17.5, 22.5};
  double attenuation_per_mm = 0.0;
};

inline void validate(const PhantomSpec& spec) {
  if (spec.height < 4 || spec.width < 4)
    throw ConfigError("phantom: dims must be at least 4x4, got " +
                      std::to_string(spec.height) + "x" +
                      std::to_string(spec.width));
  if (!(spec.pixel_spacing_mm > 0))
    throw ConfigError("phantom: pixel spacing must be > 0");
  if (spec.scene_count < 1)
    throw ConfigError("phantom: scene_count must be >= 1");
  if (spec.stroke_count < 0) throw ConfigError("phantom: stroke_count < 0");
  if (!(spec.stroke_width_px > 0))
    throw ConfigError("phantom: stroke_width_px must be > 0");
  if (spec.blur_sigma_px < 0)
    throw ConfigError("phantom: blur_sigma_px must be >= 0");
  if (spec.scene == SceneKind::depth_targets) {
    if (spec.depths_mm.empty())
      throw ConfigError("phantom: depth scene needs at least one depth");
    if (spec.attenuation_per_mm < 0)
      throw ConfigError("phantom: attenuation must be >= 0");
  }
}

namespace detail {

/// Separable Gaussian blur with edge clamping; radius 3 sigma.
inline void blur_inplace(Image& img, double sigma) {
  if (sigma <= 0) return;
  const int radius = std::max(1, int(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(size_t(2 * radius + 1));
  double ksum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[size_t(i + radius)] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    ksum += kernel[size_t(i + radius)];
  }
  for (double& k : kernel) k /= ksum;

  Image tmp = img;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int xx = std::clamp(x + i, 0, img.width - 1);
        acc += kernel[size_t(i + radius)] * double(img.at(y, xx));
      }
      tmp.at(y, x) = float(acc);
    }
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int yy = std::clamp(y + i, 0, img.height - 1);
        acc += kernel[size_t(i + radius)] * double(tmp.at(yy, x));
      }
      img.at(y, x) = float(acc);
    }
}

/// Anti-aliased thick segment, max-blended so crossings stay <= intensity.
inline void draw_segment(Image& img, double y0, double x0, double y1, double x1,
                         double width_px, double intensity) {
  const double half = width_px / 2.0;
  const int ymin = std::max(0, int(std::floor(std::min(y0, y1) - half - 1)));
  const int ymax = std::min(img.height - 1, int(std::ceil(std::max(y0, y1) + half + 1)));
  const int xmin = std::max(0, int(std::floor(std::min(x0, x1) - half - 1)));
  const int xmax = std::min(img.width - 1, int(std::ceil(std::max(x0, x1) + half + 1)));
  const double dy = y1 - y0, dx = x1 - x0;
  const double len2 = dy * dy + dx * dx;
  for (int y = ymin; y <= ymax; ++y)
    for (int x = xmin; x <= xmax; ++x) {
      double t = 0.0;
      if (len2 > 0) t = std::clamp(((y - y0) * dy + (x - x0) * dx) / len2, 0.0, 1.0);
      const double py = y0 + t * dy, px = x0 + t * dx;
      const double dist = std::hypot(y - py, x - px);
      const double cover = std::clamp(half + 0.5 - dist, 0.0, 1.0);
      if (cover > 0) img.at(y, x) = std::max(img.at(y, x), float(intensity * cover));
    }
}

// 5x7 bitmaps for A–Z, 0–9; each row is 5 bits, MSB = leftmost column.
inline const unsigned char* glyph5x7(char ch) {
  static const unsigned char font[36][7] = {
      {0x0e, 0x11, 0x11, 0x1f, 0x11, 0x11, 0x11},  // A
      {0x1e, 0x11, 0x11, 0x1e, 0x11, 0x11, 0x1e},  // B
      {0x0e, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0e},  // C
      {0x1e, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1e},  // D
      {0x1f, 0x10, 0x10, 0x1e, 0x10, 0x10, 0x1f},  // E
      {0x1f, 0x10, 0x10, 0x1e, 0x10, 0x10, 0x10},  // F
      {0x0e, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0f},  // G
      {0x11, 0x11, 0x11, 0x1f, 0x11, 0x11, 0x11},  // H
      {0x0e, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0e},  // I
      {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0c},  // J
      {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11},  // K
      {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1f},  // L
      {0x11, 0x1b, 0x15, 0x15, 0x11, 0x11, 0x11},  // M
      {0x11, 0x19, 0x15, 0x13, 0x11, 0x11, 0x11},  // N
      {0x0e, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0e},  // O
      {0x1e, 0x11, 0x11, 0x1e, 0x10, 0x10, 0x10},  // P
      {0x0e, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0d},  // Q
      {0x1e, 0x11, 0x11, 0x1e, 0x14, 0x12, 0x11},  // R
      {0x0f, 0x10, 0x10, 0x0e, 0x01, 0x01, 0x1e},  // S
      {0x1f, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},  // T
      {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0e},  // U
      {0x11, 0x11, 0x11, 0x11, 0x11, 0x0a, 0x04},  // V
      {0x11, 0x11, 0x11, 0x15, 0x15, 0x1b, 0x11},  // W
      {0x11, 0x0a, 0x04, 0x04, 0x04, 0x0a, 0x11},  // X
      {0x11, 0x11, 0x0a, 0x04, 0x04, 0x04, 0x04},  // Y
      {0x1f, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1f},  // Z
      {0x0e, 0x13, 0x15, 0x15, 0x15, 0x19, 0x0e},  // 0
      {0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e},  // 1
      {0x0e, 0x11, 0x01, 0x06, 0x08, 0x10, 0x1f},  // 2
      {0x0e, 0x11, 0x01, 0x06, 0x01, 0x11, 0x0e},  // 3
      {0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02},  // 4
      {0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e},  // 5
      {0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e},  // 6
      {0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // 7
      {0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e},  // 8
      {0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c},  // 9
  };
  if (ch >= 'A' && ch <= 'Z') return font[ch - 'A'];
  if (ch >= '0' && ch <= '9') return font[26 + (ch - '0')];
  return nullptr;  // anything else renders blank
}

}  // namespace detail

/// Per-glyph cells of a letter scene, left to right; used to evaluate metrics
/// per letter.
inline std::vector<Roi> letter_cells(const PhantomSpec& spec) {
  validate(spec);
  const int n = std::max(1, int(spec.text.size()));
  const int cell_w = spec.width / n;
  std::vector<Roi> cells;
  for (int i = 0; i < int(spec.text.size()); ++i)
    cells.push_back(Roi{0, i * cell_w, spec.height, cell_w, RoiRole::object});
  return cells;
}

/// Center row (px) of the line target at a given depth.
inline int depth_row(const PhantomSpec& spec, double depth_mm) {
  return int(std::llround(depth_mm / double(spec.pixel_spacing_mm)));
}

/// Deterministic clean scene number `index` of the spec.
inline Image generate_scene(const PhantomSpec& spec, int index) {
  validate(spec);
  if (index < 0 || index >= spec.scene_count)
    throw ConfigError("phantom: scene index " + std::to_string(index) +
                      " outside 0.." + std::to_string(spec.scene_count - 1));
  Image img(spec.height, spec.width, spec.pixel_spacing_mm);
  std::mt19937_64 rng(mix_seed(spec.seed, std::uint64_t(index)));

  switch (spec.scene) {
    case SceneKind::strokes: {
      std::uniform_real_distribution<double> ypos(0.0, spec.height - 1.0);
      std::uniform_real_distribution<double> xpos(0.0, spec.width - 1.0);
      std::uniform_int_distribution<int> nseg(1, 3);
      std::uniform_real_distribution<double> gain(0.7, 1.0);
      for (int s = 0; s < spec.stroke_count; ++s) {
        const int segments = nseg(rng);
        const double intensity = spec.stroke_intensity * gain(rng);
        double y = ypos(rng), x = xpos(rng);
        for (int k = 0; k < segments; ++k) {
          const double y2 = ypos(rng), x2 = xpos(rng);
          detail::draw_segment(img, y, x, y2, x2, spec.stroke_width_px, intensity);
          y = y2;
          x = x2;
        }
      }
      detail::blur_inplace(img, spec.blur_sigma_px);
      break;
    }
    case SceneKind::letters: {
      const auto cells = letter_cells(spec);
      for (size_t i = 0; i < spec.text.size(); ++i) {
        const unsigned char* glyph = detail::glyph5x7(spec.text[i]);
        if (!glyph) continue;
        const Roi& cell = cells[i];
        const int scale = std::max(1, std::min((cell.width - 2) / 5,
                                               (spec.height - 2) / 7));
        const int gw = 5 * scale, gh = 7 * scale;
        const int oy = cell.row + (spec.height - gh) / 2;
        const int ox = cell.col + (cell.width - gw) / 2;
        for (int ry = 0; ry < 7; ++ry)
          for (int rx = 0; rx < 5; ++rx) {
            if (!(glyph[ry] & (1 << (4 - rx)))) continue;
            for (int sy = 0; sy < scale; ++sy)
              for (int sx = 0; sx < scale; ++sx) {
                const int y = oy + ry * scale + sy, x = ox + rx * scale + sx;
                if (y >= 0 && y < spec.height && x >= 0 && x < spec.width)
                  img.at(y, x) = float(spec.stroke_intensity);
              }
          }
      }
      break;
    }
    case SceneKind::depth_targets: {
      // Horizontal line targets, 1 mm thick, spanning the middle fifth of the
      // width, one per requested depth. Margins stay empty so background ROIs
      // at the same depth see pure noise after degradation.
      const double sp = double(spec.pixel_spacing_mm);
      const int thick = std::max(1, int(std::llround(1.0 / sp)));
      const int x0 = spec.width * 2 / 5, x1 = spec.width * 3 / 5;
      for (double d : spec.depths_mm) {
        const int row_c = depth_row(spec, d);
        const int r0 = row_c - thick / 2;
        if (r0 < 0 || r0 + thick > spec.height)
          throw ConfigError("phantom: depth " + std::to_string(d) +
                            " mm target does not fit the image");
        for (int y = r0; y < r0 + thick; ++y)
          for (int x = x0; x < x1; ++x)
            img.at(y, x) = float(spec.stroke_intensity);
      }
      break;
    }
  }
  return img;
}

inline std::vector<Image> generate_clean(const PhantomSpec& spec) {
  validate(spec);
  std::vector<Image> scenes;
  scenes.reserve(size_t(spec.scene_count));
  for (int i = 0; i < spec.scene_count; ++i)
    scenes.push_back(generate_scene(spec, i));
  return scenes;
}

/// noisy = alpha * clean + N(0, sigma^2) i.i.d. per pixel. For depth scenes
/// pass attenuation_per_mm > 0: alpha additionally decays as
/// exp(-attenuation * depth) with depth taken at the pixel-center row.
inline Image degrade(const Image& clean, const DegradationPreset& preset,
                     std::uint64_t seed, double attenuation_per_mm = 0.0) {
  if (!(preset.alpha > 0 && preset.alpha <= 1))
    throw ConfigError("degrade: alpha must be in (0, 1]");
  if (preset.sigma < 0) throw ConfigError("degrade: sigma must be >= 0");
  if (attenuation_per_mm < 0)
    throw ConfigError("degrade: attenuation must be >= 0");

  Image noisy = clean;
  for (int y = 0; y < clean.height; ++y) {
    const double depth = (y + 0.5) * double(clean.pixel_spacing_mm);
    const double a = preset.alpha * std::exp(-attenuation_per_mm * depth);
    for (int x = 0; x < clean.width; ++x)
      noisy.at(y, x) = float(a * double(clean.at(y, x)));
  }
  if (preset.sigma > 0) {
    std::mt19937_64 rng(splitmix64(seed));
    std::normal_distribution<double> noise(0.0, preset.sigma);
    for (float& v : noisy.pixels) v = float(double(v) + noise(rng));
  }
  return noisy;
}

}  // namespace mwd
