#include <gtest/gtest.h>

#include <cstdio>
#include <random>
#include <string>

#include "mwdenoise/io.hpp"

using mwd::Image;
using mwd::ModelConfig;
using mwd::ModelParams;

namespace {

std::string temp_path(const std::string& name) {
  return testing::TempDir() + "mwdenoise_" + name;
}

Image random_image(int h, int w, std::uint64_t seed) {
  Image img(h, w, 0.25f);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-2.0f, 2.0f);
  for (auto& v : img.pixels) v = dist(rng);
  return img;
}

// re-seal a tampered checkpoint payload so only the intended fault remains
std::string reseal(std::string payload) {
  payload.resize(payload.size() - 8);
  const auto n = std::uint32_t(payload.size());
  const std::uint32_t c = mwd::crc32(payload.data(), payload.size());
  mwd::detail::put_u32(payload, n);
  mwd::detail::put_u32(payload, c);
  return payload;
}

}  // namespace

TEST(Crc32, MatchesTheStandardCheckValue) {
  const char* msg = "123456789";
  EXPECT_EQ(mwd::crc32(msg, 9), 0xCBF43926u);
  EXPECT_EQ(mwd::crc32(msg, 0), 0x00000000u);
}

TEST(Paif, EncodeDecodeIsBitIdentical) {
  const Image img = random_image(13, 7, 1);
  const Image back = mwd::decode_image(mwd::encode_image(img), "buf");
  EXPECT_EQ(back.height, img.height);
  EXPECT_EQ(back.width, img.width);
  EXPECT_EQ(back.pixel_spacing_mm, img.pixel_spacing_mm);
  EXPECT_EQ(back.pixels, img.pixels);
}

TEST(Paif, FileRoundTrip) {
  const std::string path = temp_path("roundtrip.paif");
  const Image img = random_image(8, 8, 2);
  mwd::write_image(path, img);
  const Image back = mwd::read_image(path);
  EXPECT_EQ(back.pixels, img.pixels);
  std::remove(path.c_str());
  EXPECT_THROW(mwd::read_image(path), mwd::DataError);  // gone now
}

TEST(Paif, RejectsCorruptInputs) {
  const Image img = random_image(4, 4, 3);
  std::string good = mwd::encode_image(img);

  std::string bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(mwd::decode_image(bad_magic, "t"), mwd::DataError);

  std::string bad_version = good;
  bad_version[4] = 9;
  EXPECT_THROW(mwd::decode_image(bad_version, "t"), mwd::DataError);

  std::string truncated = good.substr(0, good.size() - 5);
  EXPECT_THROW(mwd::decode_image(truncated, "t"), mwd::DataError);

  std::string extra = good + "zz";
  EXPECT_THROW(mwd::decode_image(extra, "t"), mwd::DataError);

  std::string bad_spacing = good;
  bad_spacing[16] = 0;  // f32 spacing bytes -> +0.0
  bad_spacing[17] = 0;
  bad_spacing[18] = 0;
  bad_spacing[19] = 0;
  EXPECT_THROW(mwd::decode_image(bad_spacing, "t"), mwd::DataError);

  EXPECT_THROW(mwd::decode_image(std::string("PA"), "t"), mwd::DataError);
}

TEST(Pavf, VolumeRoundTripPreservesFrames) {
  const std::string path = temp_path("stack.pavf");
  std::vector<Image> frames = {random_image(6, 5, 4), random_image(6, 5, 5),
                               random_image(6, 5, 6)};
  mwd::write_volume(path, frames);
  const auto back = mwd::read_volume(path);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].pixels, frames[i].pixels);
    EXPECT_EQ(back[i].pixel_spacing_mm, frames[i].pixel_spacing_mm);
  }
  std::remove(path.c_str());
}

TEST(Pavf, RejectsInconsistentFrames) {
  const std::string path = temp_path("bad.pavf");
  EXPECT_THROW(mwd::write_volume(path, {}), mwd::DataError);
  EXPECT_THROW(
      mwd::write_volume(path, {random_image(4, 4, 7), random_image(4, 5, 8)}),
      mwd::DataError);
  std::vector<Image> frames = {random_image(4, 4, 9), random_image(4, 4, 10)};
  frames[1].pixel_spacing_mm = 0.5f;
  EXPECT_THROW(mwd::write_volume(path, frames), mwd::DataError);
}

TEST(Pavf, RefusesSingleFrameMagic) {
  const std::string path = temp_path("confused.paif");
  mwd::write_image(path, random_image(4, 4, 11));
  try {
    mwd::read_volume(path);
    FAIL() << "expected DataError";
  } catch (const mwd::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("PAVF"), std::string::npos);
  }
  std::remove(path.c_str());
}

TEST(Checkpoint, RoundTripIsBitIdentical) {
  ModelConfig cfg;
  cfg.levels = 2;
  cfg.convs_per_block = 2;
  cfg.channel_schedule = {16, 32};
  cfg.residual_mode = true;
  const ModelParams<float> model = mwd::build_model<float>(cfg, 123);

  const std::string path = temp_path("model.mwck");
  mwd::save_checkpoint(path, model);
  const ModelParams<float> back = mwd::load_checkpoint(path);

  EXPECT_EQ(back.config.levels, cfg.levels);
  EXPECT_EQ(back.config.convs_per_block, cfg.convs_per_block);
  EXPECT_EQ(back.config.input_channels, cfg.input_channels);
  EXPECT_EQ(back.config.residual_mode, cfg.residual_mode);
  EXPECT_EQ(back.config.channel_schedule, cfg.channel_schedule);
  ASSERT_EQ(back.layers.size(), model.layers.size());
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    EXPECT_EQ(back.layers[i].weights.data, model.layers[i].weights.data);
    EXPECT_EQ(back.layers[i].bias, model.layers[i].bias);
  }
  std::remove(path.c_str());
}

TEST(Checkpoint, DetectsSingleByteCorruption) {
  ModelConfig cfg;
  cfg.levels = 1;
  cfg.convs_per_block = 1;
  cfg.channel_schedule = {4};
  const std::string good = mwd::encode_checkpoint(mwd::build_model<float>(cfg, 1));

  std::string flipped = good;
  flipped[good.size() / 2] = char(flipped[good.size() / 2] ^ 0x40);
  try {
    mwd::decode_checkpoint(flipped, "t");
    FAIL() << "expected DataError";
  } catch (const mwd::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("checksum"), std::string::npos);
  }
}

TEST(Checkpoint, DetectsTruncationBadMagicAndBadConfig) {
  ModelConfig cfg;
  cfg.levels = 1;
  cfg.convs_per_block = 1;
  cfg.channel_schedule = {4};
  const std::string good = mwd::encode_checkpoint(mwd::build_model<float>(cfg, 2));

  EXPECT_THROW(mwd::decode_checkpoint(good.substr(0, 6), "t"), mwd::DataError);
  EXPECT_THROW(mwd::decode_checkpoint(good.substr(0, good.size() - 1), "t"),
               mwd::DataError);

  std::string bad_magic = good;
  bad_magic[0] = 'Z';
  EXPECT_THROW(mwd::decode_checkpoint(reseal(bad_magic), "t"), mwd::DataError);

  std::string zero_levels = good;
  zero_levels[8] = 0;  // config block starts after magic+version
  try {
    mwd::decode_checkpoint(reseal(zero_levels), "t");
    FAIL() << "expected DataError";
  } catch (const mwd::DataError& e) {
    EXPECT_NE(std::string(e.what()).find("config"), std::string::npos);
  }

  std::string padded = good;
  padded.insert(padded.size() - 8, "\0\0\0\0", 4);
  EXPECT_THROW(mwd::decode_checkpoint(reseal(padded), "t"), mwd::DataError);
}

TEST(Checkpoint, RefusesModelInconsistentWithItsConfig) {
  ModelConfig cfg;
  cfg.levels = 1;
  cfg.convs_per_block = 1;
  cfg.channel_schedule = {4};
  ModelParams<float> model = mwd::build_model<float>(cfg, 3);
  model.layers.pop_back();
  EXPECT_THROW(mwd::encode_checkpoint(model), mwd::ConfigError);
}

TEST(Pgm, WritesBigEndianSixteenBit) {
  const std::string path = temp_path("view.pgm");
  Image img(1, 3, 0.1f);
  img.pixels = {0.0f, 0.5f, 2.0f};  // 2.0 clamps to full scale
  mwd::write_pgm16(path, img);
  const std::string buf = mwd::detail::slurp(path);
  const std::string header = "P5\n3 1\n65535\n";
  ASSERT_EQ(buf.size(), header.size() + 6);
  EXPECT_EQ(buf.substr(0, header.size()), header);
  const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + header.size());
  EXPECT_EQ(p[0], 0x00);
  EXPECT_EQ(p[1], 0x00);
  EXPECT_EQ((unsigned(p[2]) << 8) | p[3], 32768u);  // lround(0.5 * 65535)
  EXPECT_EQ(p[4], 0xff);
  EXPECT_EQ(p[5], 0xff);
}
