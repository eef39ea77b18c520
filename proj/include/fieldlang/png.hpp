#pragma once

// Minimal 8-bit RGB PNG writer/reader (filter type 0 only) over zlib, plus
// the NormMeta JSON sidecar written next to exported images.

#include <zlib.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "fieldlang/codec.hpp"

namespace fieldlang {

namespace detail {

inline void put_u32_be(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline std::uint32_t get_u32_be(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

inline void put_chunk(std::vector<unsigned char>& out, const char type[4], const std::vector<unsigned char>& data) {
  put_u32_be(out, static_cast<std::uint32_t>(data.size()));
  const std::size_t start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data.begin(), data.end());
  const uLong crc = crc32(0L, out.data() + start, static_cast<uInt>(out.size() - start));
  put_u32_be(out, static_cast<std::uint32_t>(crc));
}

inline constexpr std::array<unsigned char, 8> kPngSignature = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

}  // namespace detail

/// PNG bytes with the top image row at y_max.
inline std::vector<unsigned char> encode_png(const RgbFieldImage& img) {
  std::vector<unsigned char> raw;
  raw.reserve(img.height * (1 + img.width * 3));
  for (std::size_t k = 0; k < img.height; ++k) {
    const std::size_t row = img.height - 1 - k;
    raw.push_back(0);
    const auto* begin = img.pixels.data() + row * img.width * 3;
    raw.insert(raw.end(), begin, begin + img.width * 3);
  }
  uLongf packed_size = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> packed(packed_size);
  if (compress2(packed.data(), &packed_size, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
    throw Error(ErrorKind::Io, "zlib compression failed");
  packed.resize(packed_size);

  std::vector<unsigned char> out(detail::kPngSignature.begin(), detail::kPngSignature.end());
  std::vector<unsigned char> ihdr;
  detail::put_u32_be(ihdr, static_cast<std::uint32_t>(img.width));
  detail::put_u32_be(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.insert(ihdr.end(), {8, 2, 0, 0, 0});  // depth 8, truecolour, deflate, filter 0, no interlace
  detail::put_chunk(out, "IHDR", ihdr);
  detail::put_chunk(out, "IDAT", packed);
  detail::put_chunk(out, "IEND", {});
  return out;
}

/// Reads back PNGs produced by encode_png (no metadata is restored).
inline RgbFieldImage decode_png(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), detail::kPngSignature.data(), 8) != 0)
    throw Error(ErrorKind::BadMagic, "not a PNG file");
  std::size_t pos = 8, width = 0, height = 0;
  std::vector<unsigned char> idat;
  while (pos + 12 <= bytes.size()) {
    const std::uint32_t len = detail::get_u32_be(bytes.data() + pos);
    const std::string type(reinterpret_cast<const char*>(bytes.data() + pos + 4), 4);
    if (pos + 12 + len > bytes.size()) throw Error(ErrorKind::Truncated, "PNG chunk overruns the file");
    const unsigned char* data = bytes.data() + pos + 8;
    if (type == "IHDR") {
      width = detail::get_u32_be(data);
      height = detail::get_u32_be(data + 4);
      if (data[8] != 8 || data[9] != 2 || data[12] != 0)
        throw Error(ErrorKind::Parse, "only 8-bit non-interlaced RGB PNGs are supported");
    } else if (type == "IDAT") {
      idat.insert(idat.end(), data, data + len);
    } else if (type == "IEND") {
      break;
    }
    pos += 12 + len;
  }
  std::vector<unsigned char> raw(height * (1 + width * 3));
  uLongf raw_size = static_cast<uLongf>(raw.size());
  if (uncompress(raw.data(), &raw_size, idat.data(), static_cast<uLong>(idat.size())) != Z_OK ||
      raw_size != raw.size())
    throw Error(ErrorKind::Parse, "PNG image data is corrupt");
  RgbFieldImage img(width, height);
  for (std::size_t k = 0; k < height; ++k) {
    const unsigned char* line = raw.data() + k * (1 + width * 3);
    if (line[0] != 0) throw Error(ErrorKind::Parse, "unsupported PNG row filter");
    std::memcpy(img.pixels.data() + (height - 1 - k) * width * 3, line + 1, width * 3);
  }
  return img;
}

/// Writes `<path>` and the NormMeta sidecar `<path without .png>.norm.json`.
inline void export_png(const RgbFieldImage& img, const std::filesystem::path& path) {
  const auto bytes = encode_png(img);
  detail::write_bytes(path, bytes.data(), bytes.size());
  if (img.meta) {
    auto meta_path = path;
    meta_path.replace_extension(".norm.json");
    detail::write_text(meta_path, json(*img.meta).dump(2) + "\n");
  }
}

}  // namespace fieldlang
