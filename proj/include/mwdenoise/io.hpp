#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "mwdenoise/image.hpp"
#include "mwdenoise/model.hpp"

namespace mwd {
namespace detail {

// All on-disk multi-byte values are little-endian, packed explicitly so the
// formats do not depend on host byte order.

inline void put_u32(std::string& buf, std::uint32_t v) {
  buf.push_back(char(v & 0xff));
  buf.push_back(char((v >> 8) & 0xff));
  buf.push_back(char((v >> 16) & 0xff));
  buf.push_back(char((v >> 24) & 0xff));
}

inline void put_f32(std::string& buf, float v) {
  put_u32(buf, std::bit_cast<std::uint32_t>(v));
}

struct ByteReader {
  const std::string& buf;
  std::size_t pos = 0;
  std::string what;

  ByteReader(const std::string& b, std::string name) : buf(b), what(std::move(name)) {}

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw DataError(what + ": truncated file");
  }
  std::uint32_t u32() {
    need(4);
    const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
    pos += 4;
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
           (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
  }
  float f32() { return std::bit_cast<float>(u32()); }
  void magic(const char* m) {
    need(4);
    if (buf.compare(pos, 4, m) != 0)
      throw DataError(what + ": bad magic, not a " + m + " file");
    pos += 4;
  }
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "' for reading");
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError("read failed on '" + path + "'");
  return buf;
}

inline void spill(const std::string& path, const std::string& buf) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out.write(buf.data(), std::streamsize(buf.size()));
  if (!out) throw DataError("write failed on '" + path + "'");
}

inline const std::array<std::uint32_t, 256>& crc32_table() {
  static const std::array<std::uint32_t, 256> table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  return table;
}

}  // namespace detail

inline std::uint32_t crc32(const void* data, std::size_t len) {
  const auto& table = detail::crc32_table();
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint32_t c = 0xffffffffu;
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ p[i]) & 0xffu] ^ (c >> 8);
  return c ^ 0xffffffffu;
}

// ---------------------------------------------------------------------------
// PAIF — single frame: "PAIF", u32 version, u32 height, u32 width,
// f32 pixel_spacing_mm, then height*width f32 pixels, row-major.

inline constexpr std::uint32_t kPaifVersion = 1;

inline std::string encode_image(const Image& img) {
  std::string buf;
  buf.reserve(20 + 4 * std::size_t(img.numel()));
  buf += "PAIF";
  detail::put_u32(buf, kPaifVersion);
  detail::put_u32(buf, std::uint32_t(img.height));
  detail::put_u32(buf, std::uint32_t(img.width));
  detail::put_f32(buf, img.pixel_spacing_mm);
  for (float v : img.pixels) detail::put_f32(buf, v);
  return buf;
}

inline Image decode_image(const std::string& buf, const std::string& name) {
  detail::ByteReader r(buf, name);
  r.magic("PAIF");
  const std::uint32_t version = r.u32();
  if (version != kPaifVersion)
    throw DataError(name + ": unsupported PAIF version " + std::to_string(version));
  const std::uint32_t h = r.u32(), w = r.u32();
  const float spacing = r.f32();
  if (h < 1 || w < 1 || h > (1u << 20) || w > (1u << 20))
    throw DataError(name + ": implausible dims");
  if (!(spacing > 0)) throw DataError(name + ": pixel spacing must be > 0");
  if (buf.size() != r.pos + 4 * std::size_t(h) * std::size_t(w))
    throw DataError(name + ": payload length does not match declared dims");
  Image img(int(h), int(w), spacing);
  for (auto& v : img.pixels) v = r.f32();
  return img;
}

inline void write_image(const std::string& path, const Image& img) {
  detail::spill(path, encode_image(img));
}

inline Image read_image(const std::string& path) {
  return decode_image(detail::slurp(path), path);
}

// ---------------------------------------------------------------------------
// PAVF — frame stack: "PAVF", u32 version, u32 frames, u32 height, u32 width,
// f32 spacing, then frames*height*width f32. All frames share dims/spacing.

inline constexpr std::uint32_t kPavfVersion = 1;

inline void write_volume(const std::string& path, const std::vector<Image>& frames) {
  if (frames.empty()) throw DataError("volume: no frames to stack");
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (!frames[i].same_dims(frames[0]))
      throw DataError("volume: frame " + std::to_string(i) + " dims differ");
    if (frames[i].pixel_spacing_mm != frames[0].pixel_spacing_mm)
      throw DataError("volume: frame " + std::to_string(i) + " spacing differs");
  }
  std::string buf;
  buf += "PAVF";
  detail::put_u32(buf, kPavfVersion);
  detail::put_u32(buf, std::uint32_t(frames.size()));
  detail::put_u32(buf, std::uint32_t(frames[0].height));
  detail::put_u32(buf, std::uint32_t(frames[0].width));
  detail::put_f32(buf, frames[0].pixel_spacing_mm);
  for (const Image& f : frames)
    for (float v : f.pixels) detail::put_f32(buf, v);
  detail::spill(path, buf);
}

inline std::vector<Image> read_volume(const std::string& path) {
  const std::string buf = detail::slurp(path);
  detail::ByteReader r(buf, path);
  r.magic("PAVF");
  const std::uint32_t version = r.u32();
  if (version != kPavfVersion)
    throw DataError(path + ": unsupported PAVF version " + std::to_string(version));
  const std::uint32_t n = r.u32(), h = r.u32(), w = r.u32();
  const float spacing = r.f32();
  if (n < 1 || h < 1 || w < 1) throw DataError(path + ": implausible dims");
  if (!(spacing > 0)) throw DataError(path + ": pixel spacing must be > 0");
  if (buf.size() != r.pos + 4 * std::size_t(n) * h * w)
    throw DataError(path + ": payload length does not match declared dims");
  std::vector<Image> frames;
  frames.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Image img(int(h), int(w), spacing);
    for (auto& v : img.pixels) v = r.f32();
    frames.push_back(std::move(img));
  }
  return frames;
}

// ---------------------------------------------------------------------------
// MWCK — checkpoint: "MWCK", u32 version, config block (levels,
// convs_per_block, input_channels, residual flag, schedule length, schedule
// entries), each layer's weights then bias as f32 in builder order, and a
// trailer of u32 payload length + u32 CRC-32 over everything before it.

inline constexpr std::uint32_t kCheckpointVersion = 1;

inline std::string encode_checkpoint(const ModelParams<float>& model) {
  validate(model.config);
  if (int(model.layers.size()) != model.config.layer_count())
    throw ConfigError("checkpoint: model layer count does not match config");
  std::string buf;
  buf += "MWCK";
  detail::put_u32(buf, kCheckpointVersion);
  const ModelConfig& c = model.config;
  detail::put_u32(buf, std::uint32_t(c.levels));
  detail::put_u32(buf, std::uint32_t(c.convs_per_block));
  detail::put_u32(buf, std::uint32_t(c.input_channels));
  detail::put_u32(buf, c.residual_mode ? 1 : 0);
  detail::put_u32(buf, std::uint32_t(c.channel_schedule.size()));
  for (int w : c.channel_schedule) detail::put_u32(buf, std::uint32_t(w));
  for (const auto& layer : model.layers) {
    for (float v : layer.weights.data) detail::put_f32(buf, v);
    for (float v : layer.bias) detail::put_f32(buf, v);
  }
  const std::uint32_t payload = std::uint32_t(buf.size());
  const std::uint32_t checksum = crc32(buf.data(), buf.size());
  detail::put_u32(buf, payload);
  detail::put_u32(buf, checksum);
  return buf;
}

inline ModelParams<float> decode_checkpoint(const std::string& buf,
                                            const std::string& name) {
  if (buf.size() < 8) throw DataError(name + ": truncated file");
  {
    detail::ByteReader tr(buf, name);
    tr.pos = buf.size() - 8;
    const std::uint32_t payload = tr.u32();
    const std::uint32_t checksum = tr.u32();
    if (payload != buf.size() - 8)
      throw DataError(name + ": trailer length does not match file size");
    if (crc32(buf.data(), payload) != checksum)
      throw DataError(name + ": checksum mismatch, file corrupt");
  }
  detail::ByteReader r(buf, name);
  r.magic("MWCK");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion)
    throw DataError(name + ": unsupported checkpoint version " +
                    std::to_string(version));
  ModelConfig cfg;
  cfg.levels = int(r.u32());
  cfg.convs_per_block = int(r.u32());
  cfg.input_channels = int(r.u32());
  cfg.residual_mode = r.u32() != 0;
  const std::uint32_t sched_len = r.u32();
  if (sched_len > 64) throw DataError(name + ": implausible schedule length");
  cfg.channel_schedule.clear();
  for (std::uint32_t i = 0; i < sched_len; ++i)
    cfg.channel_schedule.push_back(int(r.u32()));
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw DataError(name + ": invalid config in checkpoint (" + e.what() + ")");
  }
  ModelParams<float> model;
  model.config = cfg;
  for (const auto& [c_in, c_out] : layer_plan(cfg)) {
    ConvLayer<float> layer(c_out, c_in);
    for (auto& v : layer.weights.data) v = r.f32();
    for (auto& v : layer.bias) v = r.f32();
    model.layers.push_back(std::move(layer));
  }
  if (r.pos != buf.size() - 8)
    throw DataError(name + ": unexpected trailing bytes before trailer");
  return model;
}

inline void save_checkpoint(const std::string& path, const ModelParams<float>& model) {
  detail::spill(path, encode_checkpoint(model));
}

inline ModelParams<float> load_checkpoint(const std::string& path) {
  return decode_checkpoint(detail::slurp(path), path);
}

// ---------------------------------------------------------------------------
// 16-bit PGM export for eyeballing; values clamped to [0,1] and scaled to
// 0..65535 (big-endian per the PGM spec). Lossy by design — never read back.

inline void write_pgm16(const std::string& path, const Image& img) {
  std::string buf = "P5\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n65535\n";
  for (float v : img.pixels) {
    const float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
    const auto q = std::uint16_t(std::lround(double(c) * 65535.0));
    buf.push_back(char((q >> 8) & 0xff));
    buf.push_back(char(q & 0xff));
  }
  detail::spill(path, buf);
}

}  // namespace mwd
