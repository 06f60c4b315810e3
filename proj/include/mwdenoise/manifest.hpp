#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mwdenoise/dataset.hpp"
#include "mwdenoise/phantom.hpp"

namespace mwd {

/// One dataset pair as recorded in a manifest: which clean scene, which
/// degradation, which noise stream, and where the rendered files live
/// (paths relative to the manifest, informational for eval/denoise).
struct PairEntry {
  int scene_index = 0;
  std::string preset_label;
  std::uint64_t noise_seed = 0;
  std::string noisy_file;
  std::string clean_file;
};

/// Everything needed to regenerate a dataset bit-identically.
struct DatasetRecipe {
  PhantomSpec spec;
  std::vector<PairEntry> pairs;
};

inline std::string pair_stem(int pair_index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "pair%05d", pair_index);
  return buf;
}

/// Cartesian pairing of scenes with presets, scene-major. Each pair gets its
/// own noise stream derived from `noise_seed` and the pair index.
inline DatasetRecipe make_recipe(const PhantomSpec& spec,
                                 const std::vector<DegradationPreset>& presets,
                                 std::uint64_t noise_seed) {
  validate(spec);
  if (presets.empty()) throw ConfigError("dataset: no degradation presets");
  DatasetRecipe recipe;
  recipe.spec = spec;
  int k = 0;
  for (int i = 0; i < spec.scene_count; ++i)
    for (const auto& p : presets) {
      PairEntry e;
      e.scene_index = i;
      e.preset_label = p.label;
      e.noise_seed = mix_seed(noise_seed, std::uint64_t(k));
      e.noisy_file = pair_stem(k) + "_noisy.paif";
      e.clean_file = pair_stem(k) + "_clean.paif";
      recipe.pairs.push_back(e);
      ++k;
    }
  return recipe;
}

inline ImagePair realize_pair(const DatasetRecipe& recipe, const PairEntry& e) {
  const Image clean = generate_scene(recipe.spec, e.scene_index);
  const DegradationPreset preset = parse_preset(e.preset_label);
  const double atten = recipe.spec.scene == SceneKind::depth_targets
                           ? recipe.spec.attenuation_per_mm
                           : 0.0;
  return {degrade(clean, preset, e.noise_seed, atten), clean, e.preset_label};
}

inline PairedDataset build_dataset(const DatasetRecipe& recipe) {
  PairedDataset ds;
  ds.pairs.reserve(recipe.pairs.size());
  for (const auto& e : recipe.pairs) ds.pairs.push_back(realize_pair(recipe, e));
  return ds;
}

inline PairedDataset build_dataset(const PhantomSpec& spec,
                                   const std::vector<DegradationPreset>& presets,
                                   std::uint64_t noise_seed) {
  return build_dataset(make_recipe(spec, presets, noise_seed));
}

namespace detail {

inline std::string join_depths(const std::vector<double>& depths) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < depths.size(); ++i) {
    if (i) os << ',';
    os << depths[i];
  }
  return os.str();
}

inline std::vector<double> parse_depths(const std::string& s) {
  std::vector<double> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

}  // namespace detail

/// Plain-text manifest: key/value header describing the scene spec, then one
/// line per pair. Loading regenerates the exact dataset without touching the
/// rendered image files.
inline void write_manifest(std::ostream& out, const DatasetRecipe& recipe) {
  const PhantomSpec& s = recipe.spec;
  out << "# dataset manifest, regenerable: pair lines are (scene_index, preset,"
         " noise_seed, files)\n";
  out << "format 1\n";
  out << "scene " << to_string(s.scene) << "\n";
  out << "height " << s.height << "\n";
  out << "width " << s.width << "\n";
  out.precision(17);
  out << "spacing_mm " << s.pixel_spacing_mm << "\n";
  out << "scene_count " << s.scene_count << "\n";
  out << "seed " << s.seed << "\n";
  out << "stroke_count " << s.stroke_count << "\n";
  out << "stroke_width_px " << s.stroke_width_px << "\n";
  out << "stroke_intensity " << s.stroke_intensity << "\n";
  out << "blur_sigma_px " << s.blur_sigma_px << "\n";
  out << "text " << s.text << "\n";
  out << "depths_mm " << detail::join_depths(s.depths_mm) << "\n";
  out << "attenuation_per_mm " << s.attenuation_per_mm << "\n";
  out << "pairs " << recipe.pairs.size() << "\n";
  for (const auto& e : recipe.pairs)
    out << e.scene_index << ' ' << e.preset_label << ' ' << e.noise_seed << ' '
        << e.noisy_file << ' ' << e.clean_file << "\n";
  if (!out) throw DataError("manifest: write failed");
}

inline DatasetRecipe read_manifest(std::istream& in) {
  DatasetRecipe recipe;
  PhantomSpec& s = recipe.spec;
  std::string line;
  long pairs_expected = -1;
  int lineno = 0;
  while (pairs_expected < 0 && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    std::string rest;
    std::getline(ls, rest);
    const auto start = rest.find_first_not_of(" \t");
    rest = start == std::string::npos ? std::string() : rest.substr(start);
    if (!rest.empty() && rest.back() == '\r') rest.pop_back();
    try {
      if (key == "format") {
        if (rest != "1") throw DataError("manifest: unsupported format " + rest);
      } else if (key == "scene") s.scene = scene_from_string(rest);
      else if (key == "height") s.height = std::stoi(rest);
      else if (key == "width") s.width = std::stoi(rest);
      else if (key == "spacing_mm") s.pixel_spacing_mm = std::stof(rest);
      else if (key == "scene_count") s.scene_count = std::stoi(rest);
      else if (key == "seed") s.seed = std::stoull(rest);
      else if (key == "stroke_count") s.stroke_count = std::stoi(rest);
      else if (key == "stroke_width_px") s.stroke_width_px = std::stod(rest);
      else if (key == "stroke_intensity") s.stroke_intensity = std::stod(rest);
      else if (key == "blur_sigma_px") s.blur_sigma_px = std::stod(rest);
      else if (key == "text") s.text = rest;
      else if (key == "depths_mm") s.depths_mm = detail::parse_depths(rest);
      else if (key == "attenuation_per_mm") s.attenuation_per_mm = std::stod(rest);
      else if (key == "pairs") pairs_expected = std::stol(rest);
      else throw DataError("manifest: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw DataError("manifest: bad value on line " + std::to_string(lineno));
    } catch (const std::out_of_range&) {
      throw DataError("manifest: value out of range on line " + std::to_string(lineno));
    }
  }
  if (pairs_expected < 0) throw DataError("manifest: missing 'pairs' line");
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    PairEntry e;
    if (!(ls >> e.scene_index >> e.preset_label >> e.noise_seed >>
          e.noisy_file >> e.clean_file))
      throw DataError("manifest: malformed pair line " + std::to_string(lineno));
    recipe.pairs.push_back(e);
  }
  if (long(recipe.pairs.size()) != pairs_expected)
    throw DataError("manifest: expected " + std::to_string(pairs_expected) +
                    " pairs, found " + std::to_string(recipe.pairs.size()));
  validate(s);
  return recipe;
}

}  // namespace mwd
