#pragma once

// Analytic flow generators with exact annotations. All generators work on
// the unit square and are deterministic in their arguments.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "fieldlang/features.hpp"
#include "fieldlang/field.hpp"

namespace fieldlang {

struct SynthCase {
  std::string name;
  FieldSnapshot snapshot;
  GroundTruth truth;
  FluidProperties props;
  std::vector<std::string> warnings;
};

struct LambOseenSpec {
  Point center{0.5, 0.5};
  double circulation = 1.0;
  double core_radius = 0.05;
};

namespace detail {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline void require_side(std::size_t n, std::size_t min_n, const char* what) {
  if (n < min_n)
    throw Error(ErrorKind::InvalidArgument,
                std::string(what) + " needs n >= " + std::to_string(min_n) + ", got " + std::to_string(n));
}

/// Ground-truth U_max annotated on the node set (lowest row-major index on ties).
inline ValueAt node_speed_max(const FieldSnapshot& s) {
  ValueAt best{-1.0, {}};
  for (std::size_t r = 0; r < s.grid.height; ++r)
    for (std::size_t c = 0; c < s.grid.width; ++c) {
      const double sp = std::hypot(s.u.at(r, c), s.v.at(r, c));
      if (sp > best.value) best = {sp, s.grid.node(r, c)};
    }
  return best;
}

/// Swirl velocity of a Lamb-Oseen vortex; finite limit near the axis.
inline double lamb_oseen_swirl(double r, double gamma, double rc) {
  if (r < 1e-12) return gamma * r / (kTwoPi * rc * rc);
  return gamma / (kTwoPi * r) * (1.0 - std::exp(-(r * r) / (rc * rc)));
}

inline void add_lamb_oseen(FieldSnapshot& s, const LambOseenSpec& spec) {
  for (std::size_t r = 0; r < s.grid.height; ++r) {
    for (std::size_t c = 0; c < s.grid.width; ++c) {
      const double dx = s.grid.x_at(c) - spec.center.x;
      const double dy = s.grid.y_at(r) - spec.center.y;
      const double rad = std::hypot(dx, dy);
      if (rad < 1e-12) {
        // u_theta / r in the small-radius limit.
        const double k = spec.circulation / (kTwoPi * spec.core_radius * spec.core_radius);
        s.u.at(r, c) += -k * dy;
        s.v.at(r, c) += k * dx;
        continue;
      }
      const double ut = lamb_oseen_swirl(rad, spec.circulation, spec.core_radius);
      s.u.at(r, c) += -ut * dy / rad;
      s.v.at(r, c) += ut * dx / rad;
    }
  }
}

inline VortexDescriptor lamb_oseen_truth(const LambOseenSpec& spec) {
  VortexDescriptor v;
  v.center = spec.center;
  v.length = 2.0 * spec.core_radius;
  v.height = 2.0 * spec.core_radius;
  v.equivalent_radius = spec.core_radius;
  v.circulation = spec.circulation;
  v.direction = rotation_of(spec.circulation);
  v.peak_vorticity = spec.circulation / (std::numbers::pi * spec.core_radius * spec.core_radius);
  return v;
}

inline void sort_truth_vortices(std::vector<VortexDescriptor>& vs) {
  std::stable_sort(vs.begin(), vs.end(), [](const VortexDescriptor& a, const VortexDescriptor& b) {
    const double ga = std::abs(a.circulation), gb = std::abs(b.circulation);
    if (ga != gb) return ga > gb;
    if (a.center.y != b.center.y) return a.center.y < b.center.y;
    return a.center.x < b.center.x;
  });
}

}  // namespace detail

/// u = A sin(2 pi x) cos(2 pi y), v = -A cos(2 pi x) sin(2 pi y),
/// p = -A^2/4 (cos(4 pi x) + cos(4 pi y)); omega = 4 pi A sin(2 pi x) sin(2 pi y).
inline SynthCase gen_taylor_green(std::size_t n, double amplitude = 1.0) {
  detail::require_side(n, 16, "taylor-green");
  if (!(amplitude > 0.0 && std::isfinite(amplitude)))
    throw Error(ErrorKind::InvalidArgument, "taylor-green amplitude must be > 0");
  using detail::kTwoPi;
  SynthCase sc;
  sc.name = "taylor-green";
  sc.snapshot = FieldSnapshot(GridSpec::unit(n));
  auto& s = sc.snapshot;
  for (std::size_t r = 0; r < n; ++r) {
    const double y = s.grid.y_at(r);
    for (std::size_t c = 0; c < n; ++c) {
      const double x = s.grid.x_at(c);
      s.u.at(r, c) = amplitude * std::sin(kTwoPi * x) * std::cos(kTwoPi * y);
      s.v.at(r, c) = -amplitude * std::cos(kTwoPi * x) * std::sin(kTwoPi * y);
      s.p.at(r, c) = -0.25 * amplitude * amplitude * (std::cos(2.0 * kTwoPi * x) + std::cos(2.0 * kTwoPi * y));
    }
  }
  const double gamma = 4.0 * amplitude / std::numbers::pi;  // quadrant integral of omega
  const double peak = 4.0 * std::numbers::pi * amplitude;
  const struct {
    Point c;
    int sign;
  } cells[] = {{{0.25, 0.25}, 1}, {{0.75, 0.25}, -1}, {{0.25, 0.75}, -1}, {{0.75, 0.75}, 1}};
  for (const auto& cell : cells) {
    VortexDescriptor v;
    v.center = cell.c;
    v.length = 0.5;
    v.height = 0.5;
    v.equivalent_radius = std::sqrt(0.25 / std::numbers::pi);
    v.circulation = cell.sign * gamma;
    v.direction = rotation_of(v.circulation);
    v.peak_vorticity = cell.sign * peak;
    sc.truth.vortices.push_back(v);
  }
  sc.props = {1.0, 0.01, amplitude, 1.0};
  sc.truth.flow_class = FlowLabel::VortexArray;
  sc.truth.reynolds = reynolds_number(sc.props);
  const auto um = detail::node_speed_max(s);
  sc.truth.u_max_value = um.value;
  sc.truth.u_max_location = um.location;
  return sc;
}

/// Superposed Lamb-Oseen vortices, p = 0. Centres closer than 4 max(r_c)
/// produce a warning, not an error.
inline SynthCase gen_lamb_oseen(std::size_t n, const std::vector<LambOseenSpec>& vortices) {
  detail::require_side(n, 16, "lamb-oseen");
  if (vortices.empty()) throw Error(ErrorKind::InvalidArgument, "lamb-oseen needs at least one vortex");
  SynthCase sc;
  sc.name = "lamb-oseen";
  sc.snapshot = FieldSnapshot(GridSpec::unit(n));
  for (const auto& spec : vortices) {
    if (!(spec.core_radius > 0.0 && std::isfinite(spec.core_radius)))
      throw Error(ErrorKind::InvalidArgument, "core radius must be > 0");
    if (!(std::isfinite(spec.circulation) && spec.circulation != 0.0))
      throw Error(ErrorKind::InvalidArgument, "circulation must be finite and non-zero");
    if (!sc.snapshot.grid.contains(spec.center))
      throw Error(ErrorKind::InvalidArgument, "vortex centre outside the domain");
  }
  for (std::size_t i = 0; i < vortices.size(); ++i)
    for (std::size_t j = i + 1; j < vortices.size(); ++j) {
      const double need = 4.0 * std::max(vortices[i].core_radius, vortices[j].core_radius);
      if (distance(vortices[i].center, vortices[j].center) < need)
        sc.warnings.push_back("vortices " + std::to_string(i) + " and " + std::to_string(j) +
                              " are closer than 4 core radii");
    }

  double swirl = 0.0, length = 0.0;
  for (const auto& spec : vortices) {
    detail::add_lamb_oseen(sc.snapshot, spec);
    sc.truth.vortices.push_back(detail::lamb_oseen_truth(spec));
    const double ref = std::abs(spec.circulation) / (detail::kTwoPi * spec.core_radius);
    if (ref > swirl) swirl = ref, length = 2.0 * spec.core_radius;
  }
  detail::sort_truth_vortices(sc.truth.vortices);
  sc.props = {1.0, 1e-3, swirl, length};
  sc.truth.flow_class = topology_label(sc.truth.vortices, sc.snapshot.grid);
  sc.truth.reynolds = reynolds_number(sc.props);
  const auto um = detail::node_speed_max(sc.snapshot);
  sc.truth.u_max_value = um.value;
  sc.truth.u_max_location = um.location;
  return sc;
}

/// Plane Poiseuille profile u = u_max 4y(1-y), v = 0, p falling linearly in x.
inline SynthCase gen_channel(std::size_t n, double u_max) {
  detail::require_side(n, 16, "channel");
  if (!(u_max > 0.0 && std::isfinite(u_max))) throw Error(ErrorKind::InvalidArgument, "u_max must be > 0");
  SynthCase sc;
  sc.name = "channel";
  sc.snapshot = FieldSnapshot(GridSpec::unit(n));
  auto& s = sc.snapshot;
  for (std::size_t r = 0; r < n; ++r) {
    const double y = s.grid.y_at(r);
    for (std::size_t c = 0; c < n; ++c) {
      s.u.at(r, c) = u_max * 4.0 * y * (1.0 - y);
      s.v.at(r, c) = 0.0;
      s.p.at(r, c) = 8.0 * u_max * (1.0 - s.grid.x_at(c));
    }
  }
  sc.props = {1.0, 0.01, u_max, 1.0};
  sc.truth.flow_class = FlowLabel::Channel;
  sc.truth.reynolds = reynolds_number(sc.props);
  sc.truth.u_max_value = u_max;
  sc.truth.u_max_location = {s.grid.x_min, 0.5};
  return sc;
}

struct CavityProxyShape {
  double lid_fraction = 0.05;
  double blend_depth = 0.30;
  double vortex_circulation = -0.25;
  double vortex_core_radius = 0.05;
};

/// Lid-driven cavity stand-in: one clockwise Lamb-Oseen vortex at the centre,
/// u = 1 (v = 0) in the top 5% of rows, and a smoothstep blend between the
/// two underneath the lid. Properties are rho = U = L = 1, mu = 1/re_target.
inline SynthCase gen_cavity_proxy(std::size_t n, double re_target, const CavityProxyShape& shape = {}) {
  detail::require_side(n, 32, "cavity");
  if (!(re_target > 0.0 && std::isfinite(re_target)))
    throw Error(ErrorKind::InvalidArgument, "re_target must be > 0");
  SynthCase sc;
  sc.name = "cavity";
  sc.snapshot = FieldSnapshot(GridSpec::unit(n));
  auto& s = sc.snapshot;
  const LambOseenSpec spec{{0.5, 0.5}, shape.vortex_circulation, shape.vortex_core_radius};
  detail::add_lamb_oseen(s, spec);
  const std::size_t lid_rows =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(shape.lid_fraction * static_cast<double>(n))));
  const double lid_bottom = s.grid.y_at(n - lid_rows);
  const double blend_bottom = lid_bottom - shape.blend_depth;
  for (std::size_t r = 0; r < n; ++r) {
    const double y = s.grid.y_at(r);
    double weight = 0.0;
    if (r >= n - lid_rows) {
      weight = 1.0;
    } else if (y > blend_bottom) {
      const double t = (y - blend_bottom) / shape.blend_depth;
      weight = t * t * (3.0 - 2.0 * t);
    }
    if (weight == 0.0) continue;
    for (std::size_t c = 0; c < n; ++c) {
      s.u.at(r, c) = weight * 1.0 + (1.0 - weight) * s.u.at(r, c);
      s.v.at(r, c) = (1.0 - weight) * s.v.at(r, c);
    }
  }
  sc.props = {1.0, 1.0 / re_target, 1.0, 1.0};
  sc.truth.flow_class = FlowLabel::LidDrivenCavity;
  sc.truth.reynolds = re_target;
  sc.truth.vortices.push_back(detail::lamb_oseen_truth(spec));
  const auto um = detail::node_speed_max(s);
  sc.truth.u_max_value = um.value;
  sc.truth.u_max_location = um.location;
  return sc;
}

inline SynthCase gen_uniform(std::size_t n, double u0, double v0) {
  detail::require_side(n, 2, "uniform");
  if (!std::isfinite(u0) || !std::isfinite(v0))
    throw Error(ErrorKind::InvalidArgument, "uniform velocity must be finite");
  SynthCase sc;
  sc.name = "uniform";
  sc.snapshot = FieldSnapshot(GridSpec::unit(n));
  std::fill(sc.snapshot.u.values.begin(), sc.snapshot.u.values.end(), u0);
  std::fill(sc.snapshot.v.values.begin(), sc.snapshot.v.values.end(), v0);
  sc.props = {1.0, 0.01, std::hypot(u0, v0), 1.0};
  sc.truth.flow_class = FlowLabel::Uniform;
  sc.truth.reynolds = reynolds_number(sc.props);
  sc.truth.u_max_value = std::hypot(u0, v0);
  sc.truth.u_max_location = {sc.snapshot.grid.x_min, sc.snapshot.grid.y_min};
  return sc;
}

// ---------------------------------------------------------------------------
// Randomised Lamb-Oseen configurations and the fixed evaluation suite

struct LambOseenSampling {
  std::size_t min_count = 1;
  std::size_t max_count = 4;
  double rc_min = 0.03, rc_max = 0.08;
  double gamma_min = 0.5, gamma_max = 2.0;
  double center_min = 0.15, center_max = 0.85;
  /// Reject pairs whose x or y offsets fall inside this band, so the
  /// row/column grouping of the classifier is never borderline.
  double ambiguous_lo = 0.025, ambiguous_hi = 0.075;
};

namespace detail {

inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * unit_uniform(rng);
}

}  // namespace detail

/// Draws one configuration; centres are at least 4 max(r_c) apart.
inline std::vector<LambOseenSpec> sample_lamb_oseen(std::mt19937_64& rng, const LambOseenSampling& cfg = {}) {
  const std::size_t span = cfg.max_count - cfg.min_count + 1;
  std::size_t count = cfg.min_count + static_cast<std::size_t>(rng() % span);
  for (;;) {
    for (int attempt = 0; attempt < 2000; ++attempt) {
      std::vector<LambOseenSpec> specs;
      for (std::size_t k = 0; k < count; ++k) {
        LambOseenSpec spec;
        spec.core_radius = detail::uniform_in(rng, cfg.rc_min, cfg.rc_max);
        const double mag = detail::uniform_in(rng, cfg.gamma_min, cfg.gamma_max);
        spec.circulation = (rng() & 1) ? mag : -mag;
        spec.center = {detail::uniform_in(rng, cfg.center_min, cfg.center_max),
                       detail::uniform_in(rng, cfg.center_min, cfg.center_max)};
        specs.push_back(spec);
      }
      bool ok = true;
      for (std::size_t i = 0; ok && i < count; ++i)
        for (std::size_t j = i + 1; ok && j < count; ++j) {
          const double need = 4.0 * std::max(specs[i].core_radius, specs[j].core_radius);
          if (distance(specs[i].center, specs[j].center) < need) ok = false;
          const double ax = std::abs(specs[i].center.x - specs[j].center.x);
          const double ay = std::abs(specs[i].center.y - specs[j].center.y);
          if ((ax > cfg.ambiguous_lo && ax < cfg.ambiguous_hi) || (ay > cfg.ambiguous_lo && ay < cfg.ambiguous_hi))
            ok = false;
        }
      if (ok) return specs;
    }
    if (count == 1) throw Error(ErrorKind::InvalidArgument, "sampling constraints are unsatisfiable");
    --count;
  }
}

/// The fixed evaluation suite: 20 uniform, 20 channel, 20 Taylor-Green,
/// 40 cavity proxies and 120 random Lamb-Oseen configurations.
inline std::vector<SynthCase> build_suite(std::size_t n, std::uint64_t seed = 42) {
  std::vector<SynthCase> suite;
  auto push = [&](SynthCase sc, const std::string& name) {
    sc.name = name;
    suite.push_back(std::move(sc));
  };
  char buf[64];
  for (int k = 0; k < 20; ++k) {
    const double u0 = k == 0 ? 0.0 : 0.1 * k;
    const double v0 = k == 0 ? 0.0 : 0.05 * (k % 7) - 0.15;
    std::snprintf(buf, sizeof buf, "uniform-%02d", k);
    push(gen_uniform(n, u0, v0), buf);
  }
  for (int k = 0; k < 20; ++k) {
    std::snprintf(buf, sizeof buf, "channel-%02d", k);
    push(gen_channel(n, 0.25 + 0.25 * k), buf);
  }
  for (int k = 0; k < 20; ++k) {
    std::snprintf(buf, sizeof buf, "taylor-green-%02d", k);
    push(gen_taylor_green(n, 0.5 + 0.25 * k), buf);
  }
  for (int k = 0; k < 40; ++k) {
    std::snprintf(buf, sizeof buf, "cavity-%02d", k);
    push(gen_cavity_proxy(n, 10.0 + 25.0 * k), buf);
  }
  std::mt19937_64 rng(seed);
  for (int k = 0; k < 120; ++k) {
    std::snprintf(buf, sizeof buf, "lamb-oseen-%03d", k);
    push(gen_lamb_oseen(n, sample_lamb_oseen(rng)), buf);
  }
  return suite;
}

}  // namespace fieldlang
