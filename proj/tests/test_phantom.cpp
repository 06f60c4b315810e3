#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mwdenoise/manifest.hpp"
#include "mwdenoise/metrics.hpp"
#include "mwdenoise/phantom.hpp"

using mwd::DegradationPreset;
using mwd::Image;
using mwd::PhantomSpec;
using mwd::SceneKind;

namespace {

PhantomSpec stroke_spec() {
  PhantomSpec spec;
  spec.scene = SceneKind::strokes;
  spec.height = 64;
  spec.width = 64;
  spec.scene_count = 4;
  spec.seed = 77;
  return spec;
}

PhantomSpec depth_spec() {
  PhantomSpec spec;
  spec.scene = SceneKind::depth_targets;
  spec.height = 256;
  spec.width = 256;
  spec.pixel_spacing_mm = 0.1f;
  spec.attenuation_per_mm = 0.06;
  return spec;
}

}  // namespace

TEST(Presets, LaserLadderOrdering) {
  const auto ladder = mwd::laser_presets();
  ASSERT_EQ(ladder.size(), 5u);
  EXPECT_EQ(ladder.front().label, "17mJ");
  EXPECT_EQ(ladder.front().alpha, 1.0);
  EXPECT_EQ(ladder.front().sigma, 0.0);
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    EXPECT_LT(ladder[i].alpha, ladder[i - 1].alpha) << ladder[i].label;
    EXPECT_GT(ladder[i].sigma, ladder[i - 1].sigma) << ladder[i].label;
  }
}

TEST(Presets, LedLadderOrdering) {
  const auto ladder = mwd::led_presets();
  ASSERT_EQ(ladder.size(), 3u);
  EXPECT_EQ(ladder.front().sigma, 0.0);
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    EXPECT_LT(ladder[i].alpha, ladder[i - 1].alpha);
    EXPECT_GT(ladder[i].sigma, ladder[i - 1].sigma);
  }
  EXPECT_EQ(ladder.back().label, "40uJ");
  EXPECT_EQ(ladder.back().alpha, 0.5);
  EXPECT_EQ(ladder.back().sigma, 0.2);
}

TEST(Presets, ParseKnownAndCustomLabels) {
  const DegradationPreset a = mwd::parse_preset("0.25mJ");
  EXPECT_EQ(a.alpha, 0.65);
  EXPECT_EQ(a.sigma, 0.15);
  const DegradationPreset b = mwd::parse_preset("custom:0.5:0.2");
  EXPECT_EQ(b.alpha, 0.5);
  EXPECT_EQ(b.sigma, 0.2);
  EXPECT_THROW(mwd::parse_preset("11mJ"), mwd::ConfigError);
  EXPECT_THROW(mwd::parse_preset("custom:1.5:0.2"), mwd::ConfigError);
  EXPECT_THROW(mwd::parse_preset("custom:0.5"), mwd::ConfigError);
  EXPECT_THROW(mwd::parse_preset("custom:x:y"), mwd::ConfigError);
}

TEST(PhantomSpecValidation, RejectsBadValues) {
  PhantomSpec s = stroke_spec();
  s.height = 2;
  EXPECT_THROW(mwd::validate(s), mwd::ConfigError);
  s = stroke_spec();
  s.pixel_spacing_mm = 0.0f;
  EXPECT_THROW(mwd::validate(s), mwd::ConfigError);
  s = stroke_spec();
  s.scene_count = 0;
  EXPECT_THROW(mwd::validate(s), mwd::ConfigError);
  s = stroke_spec();
  s.stroke_width_px = 0.0;
  EXPECT_THROW(mwd::validate(s), mwd::ConfigError);
  s = depth_spec();
  s.depths_mm.clear();
  EXPECT_THROW(mwd::validate(s), mwd::ConfigError);
  EXPECT_NO_THROW(mwd::validate(depth_spec()));
}

TEST(Strokes, ZeroCountRendersBlank) {
  PhantomSpec spec = stroke_spec();
  spec.stroke_count = 0;
  const Image img = mwd::generate_scene(spec, 0);
  for (float v : img.pixels) EXPECT_EQ(v, 0.0f);
}

TEST(Strokes, DeterministicPerIndexAndDistinctAcrossIndices) {
  const PhantomSpec spec = stroke_spec();
  const Image a = mwd::generate_scene(spec, 1);
  const Image b = mwd::generate_scene(spec, 1);
  const Image c = mwd::generate_scene(spec, 2);
  EXPECT_EQ(a.pixels, b.pixels);
  EXPECT_NE(a.pixels, c.pixels);
  EXPECT_THROW(mwd::generate_scene(spec, 4), mwd::ConfigError);
  EXPECT_THROW(mwd::generate_scene(spec, -1), mwd::ConfigError);
}

TEST(Strokes, IntensityStaysInsideConfiguredRange) {
  const PhantomSpec spec = stroke_spec();
  for (int i = 0; i < spec.scene_count; ++i) {
    const Image img = mwd::generate_scene(spec, i);
    float mx = 0.0f;
    for (float v : img.pixels) {
      EXPECT_GE(v, 0.0f);
      EXPECT_LE(v, float(spec.stroke_intensity) + 1e-5f);
      mx = std::max(mx, v);
    }
    EXPECT_GT(mx, 0.3f) << "scene " << i << " rendered nearly blank";
  }
}

TEST(Letters, RendersGlyphsInsideTheirCells) {
  PhantomSpec spec;
  spec.scene = SceneKind::letters;
  spec.height = 64;
  spec.width = 256;
  spec.text = "UCSD";
  const Image img = mwd::generate_scene(spec, 0);

  const auto cells = mwd::letter_cells(spec);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].width, 64);
  EXPECT_EQ(cells[1].col, 64);
  for (const auto& cell : cells) {
    double sum = 0.0;
    for (int y = 0; y < cell.height; ++y)
      for (int x = 0; x < cell.width; ++x) sum += img.at(y, cell.col + x);
    EXPECT_GT(sum, 0.0);  // every glyph drew something
  }
  // binary image at full intensity
  for (float v : img.pixels) EXPECT_TRUE(v == 0.0f || v == 1.0f);
}

TEST(Letters, UnsupportedCharactersRenderBlank) {
  PhantomSpec spec;
  spec.scene = SceneKind::letters;
  spec.height = 32;
  spec.width = 32;
  spec.text = "-";
  const Image img = mwd::generate_scene(spec, 0);
  for (float v : img.pixels) EXPECT_EQ(v, 0.0f);
}

TEST(DepthTargets, BarsLandAtTheRequestedDepths) {
  const PhantomSpec spec = depth_spec();
  const Image img = mwd::generate_scene(spec, 0);

  const std::vector<int> rows = {25, 75, 125, 175, 225};
  ASSERT_EQ(spec.depths_mm.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    EXPECT_EQ(mwd::depth_row(spec, spec.depths_mm[i]), rows[i]);

  const int x0 = 256 * 2 / 5, x1 = 256 * 3 / 5;  // bar span
  for (int row : rows) {
    // 1 mm thickness at 0.1 mm spacing = 10 px, starting at row - 5
    for (int y = row - 5; y < row + 5; ++y) {
      EXPECT_EQ(img.at(y, x0), 1.0f) << "row " << y;
      EXPECT_EQ(img.at(y, x1 - 1), 1.0f);
      EXPECT_EQ(img.at(y, x0 - 1), 0.0f);  // margins stay empty
      EXPECT_EQ(img.at(y, x1), 0.0f);
    }
    EXPECT_EQ(img.at(row - 6, (x0 + x1) / 2), 0.0f);
    EXPECT_EQ(img.at(row + 5, (x0 + x1) / 2), 0.0f);
  }
  // entire left/right margins are exactly empty
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < x0; ++x) EXPECT_EQ(img.at(y, x), 0.0f);
}

TEST(DepthTargets, RejectsDepthOutsideTheImage) {
  PhantomSpec spec = depth_spec();
  spec.depths_mm = {30.0};  // image is 25.6 mm deep
  EXPECT_THROW(mwd::generate_scene(spec, 0), mwd::ConfigError);
}

TEST(Degrade, IdentityPresetIsBitExact) {
  const Image clean = mwd::generate_scene(stroke_spec(), 0);
  const Image noisy = mwd::degrade(clean, {"17mJ", 1.0, 0.0}, 123);
  EXPECT_EQ(noisy.pixels, clean.pixels);
}

TEST(Degrade, PureAttenuationScalesExactly) {
  const Image clean = mwd::generate_scene(stroke_spec(), 0);
  const Image noisy = mwd::degrade(clean, {"half", 0.5, 0.0}, 123);
  for (std::int64_t i = 0; i < clean.numel(); ++i)
    EXPECT_EQ(noisy.pixels[size_t(i)], 0.5f * clean.pixels[size_t(i)]);
}

TEST(Degrade, NoiseMatchesRequestedDistribution) {
  Image zeros(128, 128, 0.1f);  // 16384 samples of pure N(0, sigma^2)
  const Image noisy = mwd::degrade(zeros, {"n", 1.0, 0.2}, 9001);
  double mean = 0.0;
  for (float v : noisy.pixels) mean += double(v);
  mean /= double(noisy.numel());
  double var = 0.0;
  for (float v : noisy.pixels) var += (double(v) - mean) * (double(v) - mean);
  var /= double(noisy.numel());
  const double sd = std::sqrt(var);
  // SE(mean) = sigma/sqrt(n) ~= 0.0016; SE(sd) ~= sigma/sqrt(2n) ~= 0.0011
  EXPECT_LT(std::abs(mean), 4.0 * 0.2 / 128.0);
  EXPECT_NEAR(sd, 0.2, 0.05 * 0.2);
}

TEST(Degrade, SeedControlsTheNoiseStream) {
  const Image clean = mwd::generate_scene(stroke_spec(), 0);
  const DegradationPreset p{"40uJ", 0.5, 0.2};
  const Image a = mwd::degrade(clean, p, 5);
  const Image b = mwd::degrade(clean, p, 5);
  const Image c = mwd::degrade(clean, p, 6);
  EXPECT_EQ(a.pixels, b.pixels);
  EXPECT_NE(a.pixels, c.pixels);
}

TEST(Degrade, DepthwiseAttenuationDecaysExponentially) {
  Image ones(64, 8, 0.1f);
  std::fill(ones.pixels.begin(), ones.pixels.end(), 1.0f);
  const Image out = mwd::degrade(ones, {"id", 1.0, 0.0}, 0, 0.5);
  for (int y = 0; y < out.height; ++y) {
    const double want = std::exp(-0.5 * (y + 0.5) * 0.1);
    EXPECT_NEAR(out.at(y, 0), want, 1e-6 * want) << "row " << y;
    if (y > 0) EXPECT_LT(out.at(y, 0), out.at(y - 1, 0));
  }
}

TEST(Degrade, LaserLadderDegradesPsnrMonotonically) {
  PhantomSpec spec = stroke_spec();
  spec.scene_count = 1;
  const Image clean = mwd::generate_scene(spec, 0);
  std::vector<double> psnrs;
  int k = 0;
  for (const auto& p : mwd::laser_presets())
    psnrs.push_back(mwd::psnr(mwd::degrade(clean, p, 40 + k++), clean));
  EXPECT_TRUE(std::isinf(psnrs.front()));  // lossless top rung
  for (std::size_t i = 1; i < psnrs.size(); ++i)
    EXPECT_LT(psnrs[i], psnrs[i - 1]) << "rung " << i;
}

TEST(Dataset, SceneMajorCartesianLayout) {
  PhantomSpec spec = stroke_spec();
  spec.scene_count = 10;
  const auto recipe = mwd::make_recipe(spec, mwd::led_presets(), 99);
  ASSERT_EQ(recipe.pairs.size(), 30u);
  for (int k = 0; k < 30; ++k) {
    EXPECT_EQ(recipe.pairs[size_t(k)].scene_index, k / 3);
    EXPECT_EQ(recipe.pairs[size_t(k)].preset_label,
              mwd::led_presets()[size_t(k % 3)].label);
  }
  EXPECT_EQ(recipe.pairs[0].noisy_file, "pair00000_noisy.paif");
  EXPECT_EQ(recipe.pairs[29].clean_file, "pair00029_clean.paif");
  // noise streams are distinct per pair
  EXPECT_NE(recipe.pairs[0].noise_seed, recipe.pairs[1].noise_seed);

  const mwd::PairedDataset ds = mwd::build_dataset(recipe);
  ASSERT_EQ(ds.size(), 30u);
  EXPECT_EQ(ds.pairs[0].preset_label, "160uJ");
  // same clean scene across a scene's presets
  EXPECT_EQ(ds.pairs[0].clean.pixels, ds.pairs[1].clean.pixels);
  EXPECT_NE(ds.pairs[0].clean.pixels, ds.pairs[3].clean.pixels);
}

TEST(Dataset, RebuildIsBitIdentical) {
  PhantomSpec spec = stroke_spec();
  spec.scene_count = 3;
  const auto recipe = mwd::make_recipe(spec, mwd::led_presets(), 7);
  const auto a = mwd::build_dataset(recipe);
  const auto b = mwd::build_dataset(recipe);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.pairs[i].noisy.pixels, b.pairs[i].noisy.pixels);
    EXPECT_EQ(a.pairs[i].clean.pixels, b.pairs[i].clean.pixels);
  }
}

TEST(Manifest, RoundTripRegeneratesTheSameDataset) {
  PhantomSpec spec = depth_spec();
  spec.height = 64;
  spec.width = 64;
  spec.depths_mm = {2.5, 5.0};
  spec.scene_count = 2;
  spec.seed = 31;
  const auto recipe = mwd::make_recipe(spec, {mwd::parse_preset("40uJ")}, 55);

  std::stringstream buf;
  mwd::write_manifest(buf, recipe);
  const auto loaded = mwd::read_manifest(buf);

  EXPECT_EQ(loaded.spec.scene, spec.scene);
  EXPECT_EQ(loaded.spec.height, spec.height);
  EXPECT_EQ(loaded.spec.width, spec.width);
  EXPECT_EQ(loaded.spec.pixel_spacing_mm, spec.pixel_spacing_mm);
  EXPECT_EQ(loaded.spec.scene_count, spec.scene_count);
  EXPECT_EQ(loaded.spec.seed, spec.seed);
  EXPECT_EQ(loaded.spec.depths_mm, spec.depths_mm);
  EXPECT_EQ(loaded.spec.attenuation_per_mm, spec.attenuation_per_mm);
  ASSERT_EQ(loaded.pairs.size(), recipe.pairs.size());
  for (std::size_t i = 0; i < recipe.pairs.size(); ++i) {
    EXPECT_EQ(loaded.pairs[i].scene_index, recipe.pairs[i].scene_index);
    EXPECT_EQ(loaded.pairs[i].preset_label, recipe.pairs[i].preset_label);
    EXPECT_EQ(loaded.pairs[i].noise_seed, recipe.pairs[i].noise_seed);
    EXPECT_EQ(loaded.pairs[i].noisy_file, recipe.pairs[i].noisy_file);
  }

  const auto original = mwd::build_dataset(recipe);
  const auto regenerated = mwd::build_dataset(loaded);
  ASSERT_EQ(original.size(), regenerated.size());
  for (std::size_t i = 0; i < original.size(); ++i) {
    EXPECT_EQ(original.pairs[i].noisy.pixels, regenerated.pairs[i].noisy.pixels);
    EXPECT_EQ(original.pairs[i].clean.pixels, regenerated.pairs[i].clean.pixels);
  }
}

TEST(Manifest, RejectsUnknownKeysAndCountMismatch) {
  std::istringstream unknown("format 1\nflavor vanilla\npairs 0\n");
  EXPECT_THROW(mwd::read_manifest(unknown), mwd::DataError);

  std::istringstream short_count(
      "format 1\npairs 2\n"
      "0 40uJ 11 a_noisy.paif a_clean.paif\n");
  EXPECT_THROW(mwd::read_manifest(short_count), mwd::DataError);

  std::istringstream missing("format 1\nheight 64\n");
  EXPECT_THROW(mwd::read_manifest(missing), mwd::DataError);

  std::istringstream badnum("format 1\nheight notanumber\npairs 0\n");
  EXPECT_THROW(mwd::read_manifest(badnum), mwd::DataError);
}
