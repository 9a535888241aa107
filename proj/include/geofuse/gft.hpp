#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "geofuse/fusion.hpp"
#include "geofuse/grid.hpp"
#include "geofuse/linalg.hpp"

namespace geofuse {

// GFT container, little-endian:
//   magic "GFT1" | u32 C | u64 H | u64 W | u8 dtype (1 = f32) |
//   u8 has_transform | [6 x f64: origin_x pixel_w shear_x origin_y shear_y pixel_h] |
//   u32 provenance length | UTF-8 blob (one line per channel) |
//   C*H*W f32 values, channel-major, row-major within channel.

namespace detail {

inline void put_bytes(std::string& out, const void* p, size_t n) {
  out.append(static_cast<const char*>(p), n);
}

template <typename T>
inline void put_le(std::string& out, T v) {
  // Little-endian host assumed; memcpy keeps it UB-free.
  put_bytes(out, &v, sizeof(T));
}

template <typename T>
inline T get_le(std::string_view bytes, size_t& off) {
  if (off + sizeof(T) > bytes.size()) throw format_error("gft: truncated payload");
  T v;
  std::memcpy(&v, bytes.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

static_assert(sizeof(float) == 4 && sizeof(double) == 8, "IEEE-754 layout expected");

}  // namespace detail

constexpr uint8_t kGftDtypeF32 = 1;

/// Serializes a fused tensor. Values are stored as 32-bit floats, so tensors
/// whose values are f32-representable round-trip bit-exactly.
inline std::string write_gft(const FusedTensor& tensor) {
  if (tensor.channels.empty()) throw format_error("gft: refusing to write an empty tensor");
  if (tensor.provenance.size() != tensor.channels.size())
    throw format_error("gft: provenance length must equal channel count");
  const Grid& first = tensor.channels[0];
  for (size_t i = 1; i < tensor.channels.size(); ++i)
    if (!first.same_geometry(tensor.channels[i]))
      throw alignment_error("gft: channel " + std::to_string(i) + " is misaligned");

  std::string prov;
  for (const auto& p : tensor.provenance) {
    if (p.source.find_first_of("\t\n") != std::string::npos ||
        p.norm.find_first_of("\t\n") != std::string::npos)
      throw format_error("gft: provenance fields must not contain tabs or newlines");
    prov += p.source + "\t" + p.norm + "\n";
  }

  std::string out;
  out.reserve(64 + prov.size() + tensor.channels.size() * first.size() * 4);
  out += "GFT1";
  detail::put_le<uint32_t>(out, static_cast<uint32_t>(tensor.channels.size()));
  detail::put_le<uint64_t>(out, static_cast<uint64_t>(first.height));
  detail::put_le<uint64_t>(out, static_cast<uint64_t>(first.width));
  detail::put_le<uint8_t>(out, kGftDtypeF32);
  detail::put_le<uint8_t>(out, 1);
  const GeoTransform& t = first.transform;
  for (double v : {t.origin_x, t.pixel_w, t.shear_x, t.origin_y, t.shear_y, t.pixel_h})
    detail::put_le<double>(out, v);
  detail::put_le<uint32_t>(out, static_cast<uint32_t>(prov.size()));
  out += prov;
  for (const Grid& ch : tensor.channels) {
    for (double v : ch.data) {
      if (!std::isfinite(v)) throw data_error("gft: non-finite value refused at write");
      detail::put_le<float>(out, static_cast<float>(v));
    }
  }
  return out;
}

inline FusedTensor read_gft(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != "GFT1") throw format_error("gft: bad magic");
  size_t off = 4;
  uint32_t channel_count = detail::get_le<uint32_t>(bytes, off);
  uint64_t height = detail::get_le<uint64_t>(bytes, off);
  uint64_t width = detail::get_le<uint64_t>(bytes, off);
  uint8_t dtype = detail::get_le<uint8_t>(bytes, off);
  if (dtype != kGftDtypeF32) throw format_error("gft: unknown dtype code " + std::to_string(dtype));
  uint8_t has_transform = detail::get_le<uint8_t>(bytes, off);
  if (has_transform > 1) throw format_error("gft: bad transform flag");
  if (channel_count == 0 || height == 0 || width == 0) throw format_error("gft: empty dimensions");
  if (height > (1u << 24) || width > (1u << 24) || channel_count > (1u << 20))
    throw format_error("gft: implausible dimensions");

  GeoTransform t;
  if (has_transform) {
    t.origin_x = detail::get_le<double>(bytes, off);
    t.pixel_w = detail::get_le<double>(bytes, off);
    t.shear_x = detail::get_le<double>(bytes, off);
    t.origin_y = detail::get_le<double>(bytes, off);
    t.shear_y = detail::get_le<double>(bytes, off);
    t.pixel_h = detail::get_le<double>(bytes, off);
  }

  uint32_t prov_len = detail::get_le<uint32_t>(bytes, off);
  if (off + prov_len > bytes.size()) throw format_error("gft: truncated provenance blob");
  std::string_view prov = bytes.substr(off, prov_len);
  off += prov_len;

  FusedTensor tensor;
  size_t line_start = 0;
  while (line_start < prov.size()) {
    size_t eol = prov.find('\n', line_start);
    if (eol == std::string_view::npos) throw format_error("gft: provenance line missing newline");
    std::string_view line = prov.substr(line_start, eol - line_start);
    size_t tab = line.find('\t');
    if (tab == std::string_view::npos) throw format_error("gft: provenance line missing field separator");
    tensor.provenance.push_back({std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))});
    line_start = eol + 1;
  }
  if (tensor.provenance.size() != channel_count)
    throw format_error("gft: provenance lines (" + std::to_string(tensor.provenance.size()) +
                       ") != channel count (" + std::to_string(channel_count) + ")");

  size_t values = static_cast<size_t>(channel_count) * height * width;
  if (off + values * 4 != bytes.size())
    throw format_error("gft: payload size mismatch (expected " + std::to_string(values * 4) +
                       " value bytes, have " + std::to_string(bytes.size() - off) + ")");

  for (uint32_t c = 0; c < channel_count; ++c) {
    Grid g(static_cast<int>(width), static_cast<int>(height), GridKind::continuous);
    if (has_transform) g.transform = t;
    for (size_t i = 0; i < g.size(); ++i)
      g.data[i] = static_cast<double>(detail::get_le<float>(bytes, off));
    tensor.channels.push_back(std::move(g));
  }
  return tensor;
}

/// Weight-blob convention: a C=1 tensor whose H x W payload is a rows x cols
/// matrix. Used for projection and encoder weights.
inline std::string write_weight_blob(const Mat& m, const std::string& name) {
  FusedTensor t;
  Grid g(static_cast<int>(m.cols), static_cast<int>(m.rows), GridKind::continuous);
  g.data.assign(m.a.begin(), m.a.end());
  t.channels.push_back(std::move(g));
  t.provenance.push_back({name, "weights"});
  return write_gft(t);
}

inline Mat read_weight_blob(std::string_view bytes) {
  FusedTensor t = read_gft(bytes);
  if (t.channels.size() != 1) throw format_error("weight blob: expected a single channel");
  const Grid& g = t.channels[0];
  Mat m(static_cast<size_t>(g.height), static_cast<size_t>(g.width));
  m.a.assign(g.data.begin(), g.data.end());
  return m;
}

}  // namespace geofuse
