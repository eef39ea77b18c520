#pragma once

// FLD1 binary snapshots, CSV import/export and the JSON property sidecar.
//
// FLD1 layout (all little-endian):
//   bytes 0..3    "FLD1"
//   bytes 4..7    u32 width
//   bytes 8..11   u32 height
//   bytes 12..15  u32 reserved, always 0
//   then u, v, p as row-major f64 planes.
// The domain bounds are not part of FLD1; they live in the sidecar.

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fieldlang/field.hpp"
#include "fieldlang/serialize.hpp"

namespace fieldlang {

inline constexpr std::array<char, 4> kFieldMagic = {'F', 'L', 'D', '1'};
inline constexpr std::size_t kFieldHeaderBytes = 16;

namespace detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline void put_f64(std::vector<unsigned char>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void put_f32(std::vector<unsigned char>& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

inline std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

inline double get_f64(const unsigned char* p) { return std::bit_cast<double>(get_u64(p)); }
inline float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

inline std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::Io, "read failed for '" + path.string() + "'");
  return bytes;
}

inline void write_bytes(const std::filesystem::path& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  write_bytes(path, text.data(), text.size());
}

inline std::string read_text(const std::filesystem::path& path) {
  auto bytes = read_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

}  // namespace detail

inline std::vector<unsigned char> encode_field(const FieldSnapshot& s) {
  require_valid(s);
  std::vector<unsigned char> out;
  out.reserve(kFieldHeaderBytes + 3 * 8 * s.grid.cell_count());
  out.insert(out.end(), kFieldMagic.begin(), kFieldMagic.end());
  detail::put_u32(out, static_cast<std::uint32_t>(s.grid.width));
  detail::put_u32(out, static_cast<std::uint32_t>(s.grid.height));
  detail::put_u32(out, 0);
  for (const ScalarGrid* g : {&s.u, &s.v, &s.p})
    for (double x : g->values) detail::put_f64(out, x);
  return out;
}

/// Decodes an FLD1 byte image onto `bounds` (unit square when absent).
inline FieldSnapshot decode_field(const std::vector<unsigned char>& bytes,
                                  std::optional<GridSpec> bounds = std::nullopt) {
  if (bytes.size() < kFieldMagic.size())
    throw Error(ErrorKind::Truncated, "file shorter than the FLD1 magic");
  if (std::memcmp(bytes.data(), kFieldMagic.data(), kFieldMagic.size()) != 0)
    throw Error(ErrorKind::BadMagic, "expected magic FLD1");
  if (bytes.size() < kFieldHeaderBytes) throw Error(ErrorKind::Truncated, "header is incomplete");
  const std::uint32_t width = detail::get_u32(bytes.data() + 4);
  const std::uint32_t height = detail::get_u32(bytes.data() + 8);
  const std::uint32_t reserved = detail::get_u32(bytes.data() + 12);
  if (reserved != 0) throw Error(ErrorKind::DimensionMismatch, "reserved header word is not zero");
  if (width < 2 || height < 2)
    throw Error(ErrorKind::DimensionMismatch,
                "dimensions " + std::to_string(width) + "x" + std::to_string(height) + " below 2x2");
  const std::uint64_t cells = std::uint64_t{width} * height;
  const std::uint64_t expected = kFieldHeaderBytes + cells * 3 * 8;
  if (bytes.size() < expected)
    throw Error(ErrorKind::Truncated, "payload has " + std::to_string(bytes.size()) +
                                          " bytes, header implies " + std::to_string(expected));
  if (bytes.size() > expected)
    throw Error(ErrorKind::DimensionMismatch, "payload has " + std::to_string(bytes.size() - expected) +
                                                  " trailing bytes beyond the declared grid");

  GridSpec grid = bounds.value_or(GridSpec::unit(2));
  grid.width = width;
  grid.height = height;
  grid.check();
  FieldSnapshot s(grid);
  const unsigned char* cursor = bytes.data() + kFieldHeaderBytes;
  const char* names[] = {"u", "v", "p"};
  int channel = 0;
  for (ScalarGrid* g : {&s.u, &s.v, &s.p}) {
    for (std::size_t i = 0; i < cells; ++i, cursor += 8) {
      const double x = detail::get_f64(cursor);
      if (!std::isfinite(x))
        throw Error(ErrorKind::NonFinite, std::string("non-finite value in ") + names[channel] +
                                              " at (" + std::to_string(i / width) + "," +
                                              std::to_string(i % width) + ")");
      g->values[i] = x;
    }
    ++channel;
  }
  return s;
}

inline void save_field(const FieldSnapshot& s, const std::filesystem::path& path) {
  auto bytes = encode_field(s);
  detail::write_bytes(path, bytes.data(), bytes.size());
}

inline FieldSnapshot load_field(const std::filesystem::path& path,
                                std::optional<GridSpec> bounds = std::nullopt) {
  return decode_field(detail::read_bytes(path), bounds);
}

// ---------------------------------------------------------------------------
// CSV

/// Writes one channel as `height` lines of `width` comma-separated values,
/// line i holding grid row i (y_min first). 17 significant digits.
inline std::string channel_to_csv(const ScalarGrid& g) {
  std::string out;
  char buf[32];
  for (std::size_t r = 0; r < g.height; ++r) {
    for (std::size_t c = 0; c < g.width; ++c) {
      if (c) out.push_back(',');
      const int n = std::snprintf(buf, sizeof buf, "%.17g", g.at(r, c));
      out.append(buf, static_cast<std::size_t>(n));
    }
    out.push_back('\n');
  }
  return out;
}

inline ScalarGrid channel_from_csv(const std::string& text, std::size_t width, std::size_t height,
                                   const std::string& label = "csv") {
  ScalarGrid g(width, height);
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (row >= height)
      throw Error(ErrorKind::DimensionMismatch,
                  label + ": more than " + std::to_string(height) + " rows");
    std::size_t col = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      const auto first = cell.find_first_not_of(" \t");
      const auto last = cell.find_last_not_of(" \t");
      cell = first == std::string::npos ? std::string() : cell.substr(first, last - first + 1);
      if (col >= width)
        throw Error(ErrorKind::DimensionMismatch, label + ": ragged row " + std::to_string(row) +
                                                      " has more than " + std::to_string(width) +
                                                      " columns");
      double value = 0.0;
      const char* b = cell.data();
      const char* e = cell.data() + cell.size();
      if (!cell.empty() && *b == '+') ++b;
      auto [ptr, ec] = std::from_chars(b, e, value);
      if (cell.empty() || ec != std::errc() || ptr != e)
        throw Error(ErrorKind::Parse, label + ": non-numeric cell '" + cell + "' at row " +
                                          std::to_string(row) + ", column " + std::to_string(col));
      g.at(row, col) = value;
      ++col;
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (col != width)
      throw Error(ErrorKind::DimensionMismatch, label + ": ragged row " + std::to_string(row) +
                                                    " has " + std::to_string(col) + " columns, expected " +
                                                    std::to_string(width));
    ++row;
  }
  if (row != height)
    throw Error(ErrorKind::DimensionMismatch,
                label + ": " + std::to_string(row) + " rows, expected " + std::to_string(height));
  return g;
}

inline FieldSnapshot import_csv(const std::filesystem::path& u_path, const std::filesystem::path& v_path,
                                const std::filesystem::path& p_path, const GridSpec& grid) {
  grid.check();
  FieldSnapshot s(grid);
  s.u = channel_from_csv(detail::read_text(u_path), grid.width, grid.height, u_path.string());
  s.v = channel_from_csv(detail::read_text(v_path), grid.width, grid.height, v_path.string());
  s.p = channel_from_csv(detail::read_text(p_path), grid.width, grid.height, p_path.string());
  require_valid(s);
  return s;
}

inline void export_csv(const FieldSnapshot& s, const std::filesystem::path& u_path,
                       const std::filesystem::path& v_path, const std::filesystem::path& p_path) {
  require_valid(s);
  detail::write_text(u_path, channel_to_csv(s.u));
  detail::write_text(v_path, channel_to_csv(s.v));
  detail::write_text(p_path, channel_to_csv(s.p));
}

// ---------------------------------------------------------------------------
// Sidecar `<name>.props.json`: keys rho, mu, U, L, optional "domain"
// {x_min, x_max, y_min, y_max} and optional "truth" (GroundTruth).

struct Sidecar {
  FluidProperties props;
  std::optional<GridSpec> domain;
  std::optional<GroundTruth> truth;
};

inline std::filesystem::path sidecar_path_for(const std::filesystem::path& field_path) {
  auto p = field_path;
  p.replace_extension(".props.json");
  return p;
}

inline json sidecar_to_json(const Sidecar& sc) {
  json j = sc.props;
  if (sc.domain)
    j["domain"] = {{"x_min", sc.domain->x_min},
                   {"x_max", sc.domain->x_max},
                   {"y_min", sc.domain->y_min},
                   {"y_max", sc.domain->y_max}};
  if (sc.truth) j["truth"] = *sc.truth;
  return j;
}

inline Sidecar sidecar_from_json(const json& j) {
  Sidecar sc;
  sc.props = j.get<FluidProperties>();
  if (auto p = sc.props.problem()) throw Error(ErrorKind::Parse, "sidecar: " + *p);
  if (auto it = j.find("domain"); it != j.end()) {
    GridSpec d = GridSpec::unit(2);
    d.x_min = detail::required<double>(*it, "x_min");
    d.x_max = detail::required<double>(*it, "x_max");
    d.y_min = detail::required<double>(*it, "y_min");
    d.y_max = detail::required<double>(*it, "y_max");
    if (auto p = d.problem()) throw Error(ErrorKind::Parse, "sidecar domain: " + *p);
    sc.domain = d;
  }
  if (auto it = j.find("truth"); it != j.end() && !it->is_null()) sc.truth = it->get<GroundTruth>();
  return sc;
}

inline void save_sidecar(const Sidecar& sc, const std::filesystem::path& path) {
  detail::write_text(path, sidecar_to_json(sc).dump(2) + "\n");
}

inline Sidecar load_sidecar(const std::filesystem::path& path) {
  const std::string text = detail::read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return sidecar_from_json(j);
}

/// A field file plus its sidecar, with the sidecar's domain applied.
struct LoadedCase {
  FieldSnapshot snapshot;
  Sidecar sidecar;
};

inline LoadedCase load_case(const std::filesystem::path& field_path,
                            std::optional<std::filesystem::path> sidecar_path = std::nullopt) {
  const auto sc_path = sidecar_path.value_or(sidecar_path_for(field_path));
  if (!std::filesystem::exists(sc_path))
    throw Error(ErrorKind::Io, "missing sidecar '" + sc_path.string() + "'");
  Sidecar sc = load_sidecar(sc_path);
  return {load_field(field_path, sc.domain), sc};
}

}  // namespace fieldlang
