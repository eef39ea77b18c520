#pragma once

// Field compression: min-max normalisation to an 8-bit RGB image
// (R = u, G = v, B = p), non-overlapping patch extraction, a k-means
// vector-quantisation codebook, token encode/decode and reconstruction stats.
//
// Image row 0 is grid row 0 (y_min); PNG export flips to the usual top-down
// order.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fieldlang/field.hpp"
#include "fieldlang/field_io.hpp"
#include "fieldlang/serialize.hpp"

namespace fieldlang {

struct ChannelRange {
  double min = 0.0;
  double max = 0.0;

  double span() const { return max - min; }
  friend bool operator==(const ChannelRange&, const ChannelRange&) = default;
};

struct NormMeta {
  ChannelRange u, v, p;

  const ChannelRange& channel(int c) const { return c == 0 ? u : (c == 1 ? v : p); }
  friend bool operator==(const NormMeta&, const NormMeta&) = default;
};

struct RgbFieldImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, RGB interleaved
  std::optional<NormMeta> meta;

  RgbFieldImage() = default;
  RgbFieldImage(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h * 3, 0) {}

  std::uint8_t& at(std::size_t row, std::size_t col, int ch) { return pixels[(row * width + col) * 3 + ch]; }
  std::uint8_t at(std::size_t row, std::size_t col, int ch) const { return pixels[(row * width + col) * 3 + ch]; }

  friend bool operator==(const RgbFieldImage&, const RgbFieldImage&) = default;
};

namespace detail {

inline std::uint8_t round_half_up_byte(double x) {
  const double r = std::floor(x + 0.5);
  if (r <= 0.0) return 0;
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

inline ChannelRange range_of(const ScalarGrid& g) {
  ChannelRange r{g.values.front(), g.values.front()};
  for (double x : g.values) {
    r.min = std::min(r.min, x);
    r.max = std::max(r.max, x);
  }
  return r;
}

}  // namespace detail

/// byte = round_half_up(255 (c - min) / (max - min)); a constant channel maps to 0.
inline RgbFieldImage to_rgb(const FieldSnapshot& s) {
  require_valid(s);
  RgbFieldImage img(s.grid.width, s.grid.height);
  NormMeta meta{detail::range_of(s.u), detail::range_of(s.v), detail::range_of(s.p)};
  const ScalarGrid* channels[] = {&s.u, &s.v, &s.p};
  for (int ch = 0; ch < 3; ++ch) {
    const auto& range = meta.channel(ch);
    const auto& g = *channels[ch];
    if (range.max == range.min) continue;
    const double span = range.span();
    for (std::size_t i = 0; i < g.size(); ++i)
      img.pixels[i * 3 + static_cast<std::size_t>(ch)] =
          detail::round_half_up_byte(255.0 * (g.values[i] - range.min) / span);
  }
  img.meta = meta;
  return img;
}

/// c = min + byte/255 (max - min); byte 255 is exactly max.
inline FieldSnapshot from_rgb(const RgbFieldImage& img, std::optional<GridSpec> bounds = std::nullopt) {
  if (!img.meta) throw Error(ErrorKind::InvalidArgument, "image carries no normalisation metadata");
  GridSpec grid = bounds.value_or(GridSpec::unit(2));
  grid.width = img.width;
  grid.height = img.height;
  grid.check();
  FieldSnapshot s(grid);
  ScalarGrid* channels[] = {&s.u, &s.v, &s.p};
  for (int ch = 0; ch < 3; ++ch) {
    const auto& range = img.meta->channel(ch);
    auto& g = *channels[ch];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const std::uint8_t b = img.pixels[i * 3 + static_cast<std::size_t>(ch)];
      if (range.max == range.min)
        g.values[i] = range.min;
      else if (b == 255)
        g.values[i] = range.max;
      else
        g.values[i] = range.min + (static_cast<double>(b) / 255.0) * range.span();
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// Patches

/// Flat N x dim matrix of patch vectors (byte values stored as float).
struct PatchMatrix {
  std::size_t dim = 0;
  std::size_t patch_size = 0;
  std::size_t patch_rows = 0;
  std::size_t patch_cols = 0;
  std::vector<float> values;

  std::size_t count() const { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }

  void append(const PatchMatrix& other) {
    if (dim == 0) {
      dim = other.dim;
      patch_size = other.patch_size;
    }
    if (other.dim != dim) throw Error(ErrorKind::DimensionMismatch, "patch dimension differs");
    values.insert(values.end(), other.values.begin(), other.values.end());
    patch_rows = patch_cols = 0;
  }
};

/// Non-overlapping s x s patches in row-major patch order, each flattened
/// row-major with the channel index fastest.
inline PatchMatrix extract_patches(const RgbFieldImage& img, std::size_t s) {
  if (s == 0 || img.width % s != 0 || img.height % s != 0)
    throw Error(ErrorKind::DimensionMismatch, "patch size " + std::to_string(s) + " does not divide " +
                                                  std::to_string(img.width) + "x" + std::to_string(img.height));
  PatchMatrix m;
  m.patch_size = s;
  m.dim = s * s * 3;
  m.patch_rows = img.height / s;
  m.patch_cols = img.width / s;
  m.values.reserve(m.patch_rows * m.patch_cols * m.dim);
  for (std::size_t pr = 0; pr < m.patch_rows; ++pr)
    for (std::size_t pc = 0; pc < m.patch_cols; ++pc)
      for (std::size_t r = 0; r < s; ++r)
        for (std::size_t c = 0; c < s; ++c)
          for (int ch = 0; ch < 3; ++ch) m.values.push_back(img.at(pr * s + r, pc * s + c, ch));
  return m;
}

// ---------------------------------------------------------------------------
// Codebook

struct Codebook {
  std::size_t entry_count = 0;
  std::size_t patch_size = 0;
  std::uint64_t seed = 0;
  std::vector<float> entries;  // entry_count x dim
  /// Inertia after each assignment step of training (not serialised).
  std::vector<double> inertia_history;

  std::size_t dim() const { return patch_size * patch_size * 3; }
  std::span<const float> entry(std::size_t k) const { return {entries.data() + k * dim(), dim()}; }

  /// Equality of the serialised content.
  bool same_entries(const Codebook& o) const {
    return entry_count == o.entry_count && patch_size == o.patch_size && seed == o.seed && entries == o.entries;
  }
};

struct TrainOptions {
  std::size_t max_iterations = 100;
  double relative_tolerance = 1e-6;
};

namespace detail {

inline double sq_dist(std::span<const float> a, std::span<const float> b, double stop) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    d += t * t;
    if ((i & 63) == 63 && d > stop) return d;
  }
  return d;
}

inline double sq_dist(std::span<const float> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = static_cast<double>(a[i]) - b[i];
    d += t * t;
  }
  return d;
}

/// Nearest row of `centers` (K x dim); ties keep the lowest index.
inline std::size_t nearest(std::span<const float> x, const std::vector<float>& centers, std::size_t k_count,
                           double* out_dist = nullptr) {
  const std::size_t dim = x.size();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < k_count; ++k) {
    const double d = sq_dist(x, {centers.data() + k * dim, dim}, best_d);
    if (d < best_d) best_d = d, best = k;
  }
  if (out_dist) *out_dist = best_d;
  return best;
}

inline double rng_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

/// Lloyd's k-means with k-means++ seeding. Empty clusters are reseeded at the
/// point farthest from its centre. Final entries are rounded to byte values,
/// so decoding reproduces an entry exactly and encode(decode(t)) == t.
inline Codebook train_codebook(const PatchMatrix& patches, std::size_t k_count, std::uint64_t seed,
                               const TrainOptions& opts = {}) {
  const std::size_t n = patches.count(), dim = patches.dim;
  if (k_count < 2) throw Error(ErrorKind::InvalidArgument, "codebook needs at least 2 entries");
  if (n < k_count)
    throw Error(ErrorKind::InvalidArgument,
                "need at least " + std::to_string(k_count) + " patches, got " + std::to_string(n));
  if (patches.patch_size * patches.patch_size * 3 != dim)
    throw Error(ErrorKind::InvalidArgument, "patch matrix is missing its patch size");

  std::mt19937_64 rng(seed);
  std::vector<double> centers(k_count * dim);
  auto set_center = [&](std::size_t k, std::span<const float> x) {
    for (std::size_t d = 0; d < dim; ++d) centers[k * dim + d] = x[d];
  };

  // k-means++ seeding
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<char> chosen(n, 0);
  std::size_t first = static_cast<std::size_t>(detail::rng_unit(rng) * static_cast<double>(n));
  first = std::min(first, n - 1);
  set_center(0, patches.row(first));
  chosen[first] = 1;
  for (std::size_t k = 1; k < k_count; ++k) {
    const std::span<const double> prev{centers.data() + (k - 1) * dim, dim};
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], detail::sq_dist(patches.row(i), prev));
      total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = detail::rng_unit(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        acc += d2[i];
        pick = i;
        if (acc > target) break;
      }
    } else {
      for (std::size_t i = 0; i < n && pick == n; ++i)
        if (!chosen[i]) pick = i;
    }
    set_center(k, patches.row(pick));
    chosen[pick] = 1;
  }

  Codebook cb;
  cb.entry_count = k_count;
  cb.patch_size = patches.patch_size;
  cb.seed = seed;

  std::vector<std::size_t> assign(n);
  std::vector<double> dist(n);
  std::vector<std::size_t> counts(k_count);
  double prev_inertia = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // Distances against the double centres keep the Lloyd descent exact.
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < k_count; ++k) {
        const double d = detail::sq_dist(patches.row(i), {centers.data() + k * dim, dim});
        if (d < best_d) best_d = d, best = k;
      }
      assign[i] = best;
      dist[i] = best_d;
      inertia += best_d;
    }
    cb.inertia_history.push_back(inertia);
    if (inertia == 0.0) break;
    if (std::isfinite(prev_inertia) && (prev_inertia - inertia) < opts.relative_tolerance * prev_inertia) break;
    prev_inertia = inertia;

    std::fill(centers.begin(), centers.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      const auto x = patches.row(i);
      double* c = centers.data() + assign[i] * dim;
      for (std::size_t d = 0; d < dim; ++d) c[d] += x[d];
    }
    std::vector<char> taken(n, 0);
    for (std::size_t k = 0; k < k_count; ++k) {
      if (counts[k] > 0) {
        double* c = centers.data() + k * dim;
        for (std::size_t d = 0; d < dim; ++d) c[d] /= static_cast<double>(counts[k]);
        continue;
      }
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i)
        if (!taken[i] && dist[i] > far_d) far_d = dist[i], far = i;
      taken[far] = 1;
      dist[far] = 0.0;
      set_center(k, patches.row(far));
    }
  }

  cb.entries.resize(k_count * dim);
  for (std::size_t i = 0; i < centers.size(); ++i)
    cb.entries[i] = static_cast<float>(detail::round_half_up_byte(centers[i]));
  return cb;
}

// ---------------------------------------------------------------------------
// Tokens

struct TokenSequence {
  std::vector<std::uint32_t> tokens;
  std::size_t patch_rows = 0;
  std::size_t patch_cols = 0;
  std::size_t patch_size = 0;
  std::optional<NormMeta> meta;
};

inline TokenSequence encode(const RgbFieldImage& img, const Codebook& cb) {
  if (cb.patch_size == 0 || img.width % cb.patch_size != 0 || img.height % cb.patch_size != 0)
    throw Error(ErrorKind::DimensionMismatch, "codebook patch size " + std::to_string(cb.patch_size) +
                                                  " does not divide " + std::to_string(img.width) + "x" +
                                                  std::to_string(img.height));
  const auto patches = extract_patches(img, cb.patch_size);
  TokenSequence seq;
  seq.patch_rows = patches.patch_rows;
  seq.patch_cols = patches.patch_cols;
  seq.patch_size = cb.patch_size;
  seq.meta = img.meta;
  seq.tokens.reserve(patches.count());
  for (std::size_t i = 0; i < patches.count(); ++i)
    seq.tokens.push_back(static_cast<std::uint32_t>(detail::nearest(patches.row(i), cb.entries, cb.entry_count)));
  return seq;
}

inline RgbFieldImage decode(const TokenSequence& seq, const Codebook& cb) {
  const std::size_t s = cb.patch_size;
  if (seq.patch_size != 0 && seq.patch_size != s)
    throw Error(ErrorKind::DimensionMismatch, "token sequence was encoded with a different patch size");
  if (seq.tokens.size() != seq.patch_rows * seq.patch_cols)
    throw Error(ErrorKind::DimensionMismatch, "token count does not match the patch grid");
  RgbFieldImage img(seq.patch_cols * s, seq.patch_rows * s);
  img.meta = seq.meta;
  for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
    const std::uint32_t token = seq.tokens[t];
    if (token >= cb.entry_count)
      throw Error(ErrorKind::OutOfRange, "token " + std::to_string(token) + " outside codebook of " +
                                             std::to_string(cb.entry_count));
    const auto e = cb.entry(token);
    const std::size_t pr = t / seq.patch_cols, pc = t % seq.patch_cols;
    std::size_t k = 0;
    for (std::size_t r = 0; r < s; ++r)
      for (std::size_t c = 0; c < s; ++c)
        for (int ch = 0; ch < 3; ++ch) img.at(pr * s + r, pc * s + c, ch) = detail::round_half_up_byte(e[k++]);
  }
  return img;
}

struct CompressionStats {
  std::size_t cell_count = 0;    // H x W, one scalar per channel
  std::size_t scalar_count = 0;  // 3 H W
  std::size_t token_count = 0;
  double reduction = 0.0;             // 1 - tokens / (H W)
  double reduction_per_scalar = 0.0;  // 1 - tokens / (3 H W)
  double rmse_u = 0.0, rmse_v = 0.0, rmse_p = 0.0;
};

inline CompressionStats compression_stats(const FieldSnapshot& original, const TokenSequence& seq,
                                          const Codebook& cb) {
  require_valid(original);
  CompressionStats st;
  st.cell_count = original.grid.cell_count();
  st.scalar_count = 3 * st.cell_count;
  st.token_count = seq.tokens.size();
  st.reduction = 1.0 - static_cast<double>(st.token_count) / static_cast<double>(st.cell_count);
  st.reduction_per_scalar = 1.0 - static_cast<double>(st.token_count) / static_cast<double>(st.scalar_count);
  TokenSequence with_meta = seq;
  if (!with_meta.meta) with_meta.meta = to_rgb(original).meta;
  const FieldSnapshot rec = from_rgb(decode(with_meta, cb), original.grid);
  if (rec.grid.width != original.grid.width || rec.grid.height != original.grid.height)
    throw Error(ErrorKind::DimensionMismatch, "reconstruction size differs from the original");
  auto rmse = [](const ScalarGrid& a, const ScalarGrid& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
    return std::sqrt(acc / static_cast<double>(a.size()));
  };
  st.rmse_u = rmse(original.u, rec.u);
  st.rmse_v = rmse(original.v, rec.v);
  st.rmse_p = rmse(original.p, rec.p);
  return st;
}

// ---------------------------------------------------------------------------
// Files: FCB1 codebook, JSON for tokens / stats / NormMeta

inline constexpr std::array<char, 4> kCodebookMagic = {'F', 'C', 'B', '1'};

inline std::vector<unsigned char> encode_codebook(const Codebook& cb) {
  std::vector<unsigned char> out(kCodebookMagic.begin(), kCodebookMagic.end());
  detail::put_u32(out, static_cast<std::uint32_t>(cb.entry_count));
  detail::put_u32(out, static_cast<std::uint32_t>(cb.patch_size));
  detail::put_u64(out, cb.seed);
  for (float f : cb.entries) detail::put_f32(out, f);
  return out;
}

inline Codebook decode_codebook(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4) throw Error(ErrorKind::Truncated, "codebook shorter than its magic");
  if (std::memcmp(bytes.data(), kCodebookMagic.data(), 4) != 0) throw Error(ErrorKind::BadMagic, "expected FCB1");
  if (bytes.size() < 20) throw Error(ErrorKind::Truncated, "codebook header is incomplete");
  Codebook cb;
  cb.entry_count = detail::get_u32(bytes.data() + 4);
  cb.patch_size = detail::get_u32(bytes.data() + 8);
  cb.seed = detail::get_u64(bytes.data() + 12);
  if (cb.entry_count < 2 || cb.patch_size == 0)
    throw Error(ErrorKind::DimensionMismatch, "codebook header has K < 2 or zero patch size");
  const std::uint64_t floats = std::uint64_t{cb.entry_count} * cb.dim();
  const std::uint64_t expected = 20 + floats * 4;
  if (bytes.size() < expected) throw Error(ErrorKind::Truncated, "codebook payload is incomplete");
  if (bytes.size() > expected) throw Error(ErrorKind::DimensionMismatch, "codebook has trailing bytes");
  cb.entries.resize(floats);
  for (std::size_t i = 0; i < floats; ++i) {
    cb.entries[i] = detail::get_f32(bytes.data() + 20 + 4 * i);
    if (!std::isfinite(cb.entries[i])) throw Error(ErrorKind::NonFinite, "non-finite codebook entry");
  }
  return cb;
}

inline void save_codebook(const Codebook& cb, const std::filesystem::path& path) {
  const auto bytes = encode_codebook(cb);
  detail::write_bytes(path, bytes.data(), bytes.size());
}

inline Codebook load_codebook(const std::filesystem::path& path) {
  return decode_codebook(detail::read_bytes(path));
}

inline json tokens_to_json(const TokenSequence& seq) { return json(seq.tokens); }

inline TokenSequence tokens_from_json(const json& j, std::size_t patch_rows, std::size_t patch_cols) {
  if (!j.is_array()) throw Error(ErrorKind::Parse, "token sequence must be a JSON array");
  TokenSequence seq;
  seq.tokens = j.get<std::vector<std::uint32_t>>();
  seq.patch_rows = patch_rows;
  seq.patch_cols = patch_cols;
  return seq;
}

inline void to_json(json& j, const ChannelRange& r) { j = json{{"min", r.min}, {"max", r.max}}; }
inline void from_json(const json& j, ChannelRange& r) {
  r.min = detail::required<double>(j, "min");
  r.max = detail::required<double>(j, "max");
}
inline void to_json(json& j, const NormMeta& m) { j = json{{"u", m.u}, {"v", m.v}, {"p", m.p}}; }
inline void from_json(const json& j, NormMeta& m) {
  m.u = detail::required<ChannelRange>(j, "u");
  m.v = detail::required<ChannelRange>(j, "v");
  m.p = detail::required<ChannelRange>(j, "p");
}

inline void to_json(json& j, const CompressionStats& st) {
  j = json{{"cell_count", st.cell_count},
           {"scalar_count", st.scalar_count},
           {"token_count", st.token_count},
           {"reduction", st.reduction},
           {"reduction_per_scalar", st.reduction_per_scalar},
           {"rmse", {{"u", st.rmse_u}, {"v", st.rmse_v}, {"p", st.rmse_p}}}};
}

}  // namespace fieldlang
