#pragma once

// Deterministic physical feature extraction: vorticity and Q fields, vortex
// detection, Reynolds number, key values and the rule-based flow classifier.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "fieldlang/field.hpp"
#include "fieldlang/serialize.hpp"

namespace fieldlang {

// ---------------------------------------------------------------------------
// Velocity gradients

struct VelocityGradient {
  ScalarGrid du_dx, du_dy, dv_dx, dv_dy;
};

namespace detail {

// Central differences in the interior, first-order one-sided at the edges.
// Exact for affine data.
inline double diff_x(const ScalarGrid& f, std::size_t r, std::size_t c, double dx) {
  if (c == 0) return (f.at(r, 1) - f.at(r, 0)) / dx;
  if (c + 1 == f.width) return (f.at(r, c) - f.at(r, c - 1)) / dx;
  return (f.at(r, c + 1) - f.at(r, c - 1)) / (2.0 * dx);
}

inline double diff_y(const ScalarGrid& f, std::size_t r, std::size_t c, double dy) {
  if (r == 0) return (f.at(1, c) - f.at(0, c)) / dy;
  if (r + 1 == f.height) return (f.at(r, c) - f.at(r - 1, c)) / dy;
  return (f.at(r + 1, c) - f.at(r - 1, c)) / (2.0 * dy);
}

template <typename Fn>
void for_each_neighbor8(std::size_t width, std::size_t height, std::size_t idx, Fn&& fn) {
  const std::size_t r = idx / width;
  const std::size_t c = idx % width;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      if (dr == 0 && dc == 0) continue;
      const std::int64_t rr = static_cast<std::int64_t>(r) + dr;
      const std::int64_t cc = static_cast<std::int64_t>(c) + dc;
      if (rr < 0 || cc < 0 || rr >= static_cast<std::int64_t>(height) ||
          cc >= static_cast<std::int64_t>(width))
        continue;
      fn(static_cast<std::size_t>(rr) * width + static_cast<std::size_t>(cc));
    }
  }
}

inline int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

}  // namespace detail

inline VelocityGradient velocity_gradient(const FieldSnapshot& s) {
  require_valid(s);
  const std::size_t w = s.grid.width, h = s.grid.height;
  const double dx = s.grid.dx(), dy = s.grid.dy();
  VelocityGradient g{ScalarGrid(w, h), ScalarGrid(w, h), ScalarGrid(w, h), ScalarGrid(w, h)};
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      g.du_dx.at(r, c) = detail::diff_x(s.u, r, c, dx);
      g.du_dy.at(r, c) = detail::diff_y(s.u, r, c, dy);
      g.dv_dx.at(r, c) = detail::diff_x(s.v, r, c, dx);
      g.dv_dy.at(r, c) = detail::diff_y(s.v, r, c, dy);
    }
  }
  return g;
}

/// omega = dv/dx - du/dy.
inline ScalarGrid vorticity(const FieldSnapshot& s) {
  require_valid(s);
  const std::size_t w = s.grid.width, h = s.grid.height;
  const double dx = s.grid.dx(), dy = s.grid.dy();
  ScalarGrid omega(w, h);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c)
      omega.at(r, c) = detail::diff_x(s.v, r, c, dx) - detail::diff_y(s.u, r, c, dy);
  return omega;
}

inline double q_value(double du_dx, double du_dy, double dv_dx, double dv_dy) {
  const double s12 = 0.5 * (du_dy + dv_dx);
  const double w12 = 0.5 * (du_dy - dv_dx);
  const double strain2 = du_dx * du_dx + dv_dy * dv_dy + 2.0 * s12 * s12;
  const double rotation2 = 2.0 * w12 * w12;
  return 0.5 * (rotation2 - strain2);
}

/// Q = 1/2 (|Omega|^2 - |S|^2); positive where rotation dominates strain.
inline ScalarGrid q_criterion(const FieldSnapshot& s) {
  const auto g = velocity_gradient(s);
  ScalarGrid q(s.grid.width, s.grid.height);
  for (std::size_t i = 0; i < q.size(); ++i)
    q.values[i] = q_value(g.du_dx.values[i], g.du_dy.values[i], g.dv_dx.values[i], g.dv_dy.values[i]);
  return q;
}

// ---------------------------------------------------------------------------
// Vortex detection

enum class ThresholdMode {
  /// Each core is cut at alpha times its own peak |omega|.
  PeakRelative,
  /// One cut at alpha times the global max |omega|.
  Global,
};

struct DetectionParams {
  double alpha = 0.2;
  std::size_t min_area = 16;
  ThresholdMode mode = ThresholdMode::PeakRelative;
  /// Local |omega| maxima below this fraction of the global max never seed a core.
  double seed_floor = 0.01;
  /// Cores with sum(Q) / sum(omega^2/4) at or below this are shear layers, not vortices.
  double min_rotation_ratio = 0.05;
  /// Circulation basins stop at this fraction of the core's own peak |omega|.
  double basin_floor = 1e-3;

  void check() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be in (0,1)");
    if (min_area < 1) throw Error(ErrorKind::InvalidArgument, "min_area must be >= 1");
    if (!(seed_floor >= 0.0 && seed_floor < 1.0))
      throw Error(ErrorKind::InvalidArgument, "seed_floor must be in [0,1)");
    if (!(basin_floor >= 0.0 && basin_floor <= alpha))
      throw Error(ErrorKind::InvalidArgument, "basin_floor must be in [0,alpha]");
  }
};

/// Per-cell ownership produced by the detector, exposed for diagnostics and
/// the circulation-budget property. -1 = unowned.
struct VortexLabels {
  std::vector<int> core;
  std::vector<int> basin;
};

namespace detail {

struct Core {
  std::vector<std::size_t> cells;
  std::size_t seed = 0;
  double peak = 0.0;  // signed
};

inline std::vector<Core> find_cores(const ScalarGrid& omega, const DetectionParams& params,
                                    std::vector<int>& owner) {
  const std::size_t w = omega.width, h = omega.height, n = omega.size();
  double max_abs = 0.0;
  for (double x : omega.values) max_abs = std::max(max_abs, std::abs(x));
  std::vector<Core> cores;
  owner.assign(n, -1);
  if (!(max_abs > 0.0)) return cores;

  std::vector<std::size_t> seeds;
  if (params.mode == ThresholdMode::Global) {
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(omega.values[i]) >= params.alpha * max_abs) seeds.push_back(i);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = std::abs(omega.values[i]);
      if (a == 0.0 || a < params.seed_floor * max_abs) continue;
      bool is_max = true;
      for_each_neighbor8(w, h, i, [&](std::size_t j) {
        if (std::abs(omega.values[j]) > a) is_max = false;
      });
      if (is_max) seeds.push_back(i);
    }
    std::stable_sort(seeds.begin(), seeds.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(omega.values[a]) > std::abs(omega.values[b]);
    });
  }

  std::vector<std::size_t> stack;
  std::vector<char> visited(n, 0);
  for (std::size_t seed : seeds) {
    if (owner[seed] != -1) continue;
    const int sign = sign_of(omega.values[seed]);
    const double cut = params.mode == ThresholdMode::Global
                           ? params.alpha * max_abs
                           : params.alpha * std::abs(omega.values[seed]);
    Core core;
    core.seed = seed;
    bool touches_existing = false;
    stack.assign(1, seed);
    visited[seed] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      core.cells.push_back(i);
      for_each_neighbor8(w, h, i, [&](std::size_t j) {
        if (visited[j]) return;
        const double x = omega.values[j];
        if (sign_of(x) != sign || std::abs(x) < cut) return;
        if (owner[j] != -1) {
          touches_existing = true;
          return;
        }
        visited[j] = 1;
        stack.push_back(j);
      });
    }
    for (std::size_t i : core.cells) visited[i] = 0;
    // A lower cut that spills into an already claimed core means this seed is
    // a shoulder of that structure, not a vortex of its own.
    if (touches_existing) continue;
    std::sort(core.cells.begin(), core.cells.end());
    double peak_abs = -1.0;
    for (std::size_t i : core.cells) {
      if (std::abs(omega.values[i]) > peak_abs) {
        peak_abs = std::abs(omega.values[i]);
        core.peak = omega.values[i];
        core.seed = i;
      }
    }
    const int id = static_cast<int>(cores.size());
    for (std::size_t i : core.cells) owner[i] = id;
    cores.push_back(std::move(core));
  }
  return cores;
}

}  // namespace detail

/// Detection on a precomputed vorticity grid. `labels`, when given, receives
/// the core and basin ownership of every kept vortex (indices into the
/// returned list).
inline std::vector<VortexDescriptor> detect_vortices(const FieldSnapshot& s, const ScalarGrid& omega,
                                                     const DetectionParams& params = {},
                                                     VortexLabels* labels = nullptr) {
  params.check();
  const std::size_t w = s.grid.width, h = s.grid.height, n = omega.size();
  const double dx = s.grid.dx(), dy = s.grid.dy();

  std::vector<int> owner;
  auto cores = detail::find_cores(omega, params, owner);

  const ScalarGrid q = q_criterion(s);
  std::vector<int> kept_id(cores.size(), -1);
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < cores.size(); ++k) {
    const auto& core = cores[k];
    if (core.cells.size() < params.min_area) continue;
    double q_sum = 0.0, enstrophy = 0.0;
    for (std::size_t i : core.cells) {
      q_sum += q.values[i];
      enstrophy += 0.25 * omega.values[i] * omega.values[i];
    }
    if (!(q_sum > params.min_rotation_ratio * enstrophy)) continue;
    kept_id[k] = static_cast<int>(kept.size());
    kept.push_back(k);
  }

  // Watershed growth of each kept core through same-sign cells, highest
  // |omega| first, so circulation covers the whole vortex rather than the
  // thresholded core only.
  std::vector<int> core_label(n, -1), basin(n, -1);
  std::vector<char> blocked(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (owner[i] == -1) continue;
    const int id = kept_id[static_cast<std::size_t>(owner[i])];
    if (id == -1) {
      blocked[i] = 1;
    } else {
      core_label[i] = id;
      basin[i] = id;
    }
  }
  struct Frontier {
    double mag;
    std::size_t idx;
    int label;
    bool operator<(const Frontier& o) const {
      if (mag != o.mag) return mag < o.mag;
      return idx > o.idx;
    }
  };
  std::priority_queue<Frontier> frontier;
  std::vector<double> floor_of(kept.size());
  std::vector<int> sign_of_label(kept.size());
  for (std::size_t id = 0; id < kept.size(); ++id) {
    floor_of[id] = params.basin_floor * std::abs(cores[kept[id]].peak);
    sign_of_label[id] = detail::sign_of(cores[kept[id]].peak);
  }
  auto push_neighbors = [&](std::size_t i, int id) {
    detail::for_each_neighbor8(w, h, i, [&](std::size_t j) {
      if (basin[j] != -1 || blocked[j]) return;
      const double x = omega.values[j];
      if (detail::sign_of(x) != sign_of_label[static_cast<std::size_t>(id)]) return;
      if (std::abs(x) < floor_of[static_cast<std::size_t>(id)]) return;
      frontier.push({std::abs(x), j, id});
    });
  };
  for (std::size_t i = 0; i < n; ++i)
    if (core_label[i] != -1) push_neighbors(i, core_label[i]);
  while (!frontier.empty()) {
    const Frontier f = frontier.top();
    frontier.pop();
    if (basin[f.idx] != -1) continue;
    basin[f.idx] = f.label;
    push_neighbors(f.idx, f.label);
  }

  std::vector<VortexDescriptor> out(kept.size());
  std::vector<double> weight(kept.size(), 0.0), wx(kept.size(), 0.0), wy(kept.size(), 0.0);
  std::vector<double> gamma(kept.size(), 0.0);
  std::vector<std::size_t> rmin(kept.size(), h), rmax(kept.size(), 0), cmin(kept.size(), w),
      cmax(kept.size(), 0), area(kept.size(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (basin[i] != -1) gamma[static_cast<std::size_t>(basin[i])] += omega.values[i] * dx * dy;
    const int id = core_label[i];
    if (id == -1) continue;
    const auto k = static_cast<std::size_t>(id);
    const std::size_t r = i / w, c = i % w;
    const double a = std::abs(omega.values[i]);
    weight[k] += a;
    wx[k] += a * s.grid.x_at(c);
    wy[k] += a * s.grid.y_at(r);
    rmin[k] = std::min(rmin[k], r);
    rmax[k] = std::max(rmax[k], r);
    cmin[k] = std::min(cmin[k], c);
    cmax[k] = std::max(cmax[k], c);
    ++area[k];
  }
  for (std::size_t k = 0; k < kept.size(); ++k) {
    auto& v = out[k];
    v.center = {wx[k] / weight[k], wy[k] / weight[k]};
    v.length = static_cast<double>(cmax[k] - cmin[k] + 1) * dx;
    v.height = static_cast<double>(rmax[k] - rmin[k] + 1) * dy;
    v.equivalent_radius = std::sqrt(static_cast<double>(area[k]) * dx * dy / std::numbers::pi);
    v.circulation = gamma[k];
    v.direction = rotation_of(cores[kept[k]].peak);
    v.peak_vorticity = cores[kept[k]].peak;
  }

  std::vector<std::size_t> order(kept.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ga = std::abs(out[a].circulation), gb = std::abs(out[b].circulation);
    if (ga != gb) return ga > gb;
    if (out[a].center.y != out[b].center.y) return out[a].center.y < out[b].center.y;
    return out[a].center.x < out[b].center.x;
  });
  std::vector<VortexDescriptor> sorted;
  std::vector<int> remap(kept.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    sorted.push_back(out[order[pos]]);
    remap[order[pos]] = static_cast<int>(pos);
  }
  if (labels) {
    labels->core.assign(n, -1);
    labels->basin.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      if (core_label[i] != -1) labels->core[i] = remap[static_cast<std::size_t>(core_label[i])];
      if (basin[i] != -1) labels->basin[i] = remap[static_cast<std::size_t>(basin[i])];
    }
  }
  return sorted;
}

inline std::vector<VortexDescriptor> detect_vortices(const FieldSnapshot& s,
                                                     const DetectionParams& params = {}) {
  return detect_vortices(s, vorticity(s), params);
}

// ---------------------------------------------------------------------------
// Reynolds number and key values

inline double reynolds_number(const FluidProperties& props) {
  props.check();
  return props.rho * props.U * props.L / props.mu;
}

struct ValueAt {
  double value = 0.0;
  Point location;

  friend bool operator==(const ValueAt&, const ValueAt&) = default;
};

struct KeyPoints {
  ValueAt u_max;
  ValueAt p_min;
  ValueAt p_max;
  ValueAt max_abs_vorticity;
};

/// Ties resolve to the lowest row-major index.
inline KeyPoints key_points(const FieldSnapshot& s, const ScalarGrid& omega) {
  require_valid(s);
  const std::size_t n = s.grid.cell_count();
  std::size_t i_speed = 0, i_pmin = 0, i_pmax = 0, i_w = 0;
  double best_speed = -1.0, best_w = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double speed = std::hypot(s.u.values[i], s.v.values[i]);
    if (speed > best_speed) best_speed = speed, i_speed = i;
    if (s.p.values[i] < s.p.values[i_pmin]) i_pmin = i;
    if (s.p.values[i] > s.p.values[i_pmax]) i_pmax = i;
    const double a = std::abs(omega.values[i]);
    if (a > best_w) best_w = a, i_w = i;
  }
  auto at = [&](std::size_t i) { return s.grid.node(i / s.grid.width, i % s.grid.width); };
  return KeyPoints{{best_speed, at(i_speed)},
                   {s.p.values[i_pmin], at(i_pmin)},
                   {s.p.values[i_pmax], at(i_pmax)},
                   {best_w, at(i_w)}};
}

inline KeyPoints key_points(const FieldSnapshot& s) { return key_points(s, vorticity(s)); }

// ---------------------------------------------------------------------------
// Flow classification

struct Evidence {
  std::string rule;
  std::string feature;
  double value = 0.0;
  bool fired = false;

  friend bool operator==(const Evidence&, const Evidence&) = default;
};

struct FlowClassResult {
  FlowLabel label = FlowLabel::Unknown;
  std::vector<Evidence> evidence;
  /// Wall carrying the lid motion ("top", "bottom", "left", "right") when the
  /// cavity rule fired.
  std::optional<std::string> driving_wall;

  friend bool operator==(const FlowClassResult&, const FlowClassResult&) = default;
};

struct ClassifierThresholds {
  double uniform_tolerance = 1e-9;
  double channel_cross_ratio = 0.05;
  double band_fraction = 0.05;
  double lid_speed_ratio = 10.0;
  /// Vortex centres closer than this fraction of the domain share a row/column.
  double alignment_fraction = 0.05;
};

namespace detail {

// Groups coordinates into ordered lines; a gap above `tol` starts a new line.
inline std::vector<std::size_t> group_lines(const std::vector<double>& coords, double tol,
                                            std::size_t& line_count) {
  std::vector<std::size_t> order(coords.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return coords[a] < coords[b]; });
  std::vector<std::size_t> line(coords.size(), 0);
  std::size_t current = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k > 0 && coords[order[k]] - coords[order[k - 1]] > tol) ++current;
    line[order[k]] = current;
  }
  line_count = coords.empty() ? 0 : current + 1;
  return line;
}

}  // namespace detail

struct TopologyMeasures {
  std::size_t columns = 0;
  std::size_t rows = 0;
  bool single_per_column = false;
  bool alternating_in_x = false;
  bool checkerboard = false;
};

/// Spatial sign pattern of a vortex set: staggered street (one vortex per
/// x-column, signs alternating along x) and checkerboard arrays.
inline TopologyMeasures vortex_topology(const std::vector<VortexDescriptor>& vortices, const GridSpec& grid,
                                        const ClassifierThresholds& th = {}) {
  TopologyMeasures m;
  if (vortices.empty()) return m;
  std::vector<double> xs, ys;
  for (const auto& v : vortices) {
    xs.push_back(v.center.x);
    ys.push_back(v.center.y);
  }
  const auto col = detail::group_lines(xs, th.alignment_fraction * (grid.x_max - grid.x_min), m.columns);
  const auto row = detail::group_lines(ys, th.alignment_fraction * (grid.y_max - grid.y_min), m.rows);

  std::vector<int> per_column(m.columns, 0);
  std::vector<int> column_sign(m.columns, 0);
  for (std::size_t i = 0; i < vortices.size(); ++i) {
    ++per_column[col[i]];
    column_sign[col[i]] = vortices[i].direction == Rotation::CounterClockwise ? 1 : -1;
  }
  m.single_per_column = std::all_of(per_column.begin(), per_column.end(), [](int k) { return k == 1; });
  m.alternating_in_x = m.single_per_column;
  for (std::size_t k = 1; m.alternating_in_x && k < m.columns; ++k)
    if (column_sign[k] == column_sign[k - 1]) m.alternating_in_x = false;

  const int s0 = vortices[0].direction == Rotation::CounterClockwise ? 1 : -1;
  const std::size_t p0 = (col[0] + row[0]) % 2;
  m.checkerboard = m.columns >= 2 && m.rows >= 2;
  for (std::size_t i = 0; m.checkerboard && i < vortices.size(); ++i) {
    const int s = vortices[i].direction == Rotation::CounterClockwise ? 1 : -1;
    const bool same_parity = (col[i] + row[i]) % 2 == p0;
    if ((s == s0) != same_parity) m.checkerboard = false;
  }
  return m;
}

/// Rules 4 and 5 of the cascade applied to a vortex set alone.
inline FlowLabel topology_label(const std::vector<VortexDescriptor>& vortices, const GridSpec& grid,
                                const ClassifierThresholds& th = {}) {
  const auto m = vortex_topology(vortices, grid, th);
  if (vortices.size() >= 3 && m.alternating_in_x) return FlowLabel::BluffBodyWake;
  if (vortices.size() >= 4 && m.checkerboard) return FlowLabel::VortexArray;
  return FlowLabel::Unknown;
}

/// Fixed-order rule cascade: uniform, channel, lid-driven cavity,
/// bluff-body wake, vortex array, otherwise unknown.
inline FlowClassResult classify_flow(const FieldSnapshot& s, const ScalarGrid& omega,
                                     const std::vector<VortexDescriptor>& vortices,
                                     const ClassifierThresholds& th = {}) {
  require_valid(s);
  FlowClassResult result;
  auto& ev = result.evidence;
  const std::size_t n = s.grid.cell_count();
  const std::size_t w = s.grid.width, h = s.grid.height;

  double max_w = 0.0, speed_min = std::numeric_limits<double>::infinity(), speed_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    max_w = std::max(max_w, std::abs(omega.values[i]));
    const double sp = std::hypot(s.u.values[i], s.v.values[i]);
    speed_min = std::min(speed_min, sp);
    speed_max = std::max(speed_max, sp);
  }
  const double scale = std::max(1.0, speed_max);
  const double speed_range = speed_max - speed_min;

  // 1. uniform
  const bool uniform = max_w <= th.uniform_tolerance * scale && speed_range <= th.uniform_tolerance * scale;
  ev.push_back({"uniform", "max_abs_vorticity", max_w, uniform});
  ev.push_back({"uniform", "speed_range", speed_range, uniform});
  if (uniform) {
    result.label = FlowLabel::Uniform;
    return result;
  }

  // 2. channel
  std::size_t cross_violations = 0;
  double max_u = 0.0, max_v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double au = std::abs(s.u.values[i]), av = std::abs(s.v.values[i]);
    max_u = std::max(max_u, au);
    max_v = std::max(max_v, av);
    if (av > th.channel_cross_ratio * au + 1e-12 * scale) ++cross_violations;
  }
  const bool channel = cross_violations == 0 && vortices.empty();
  ev.push_back({"channel", "cross_flow_violations", static_cast<double>(cross_violations), channel});
  ev.push_back({"channel", "max_v_over_max_u", max_u > 0.0 ? max_v / max_u : max_v, channel});
  ev.push_back({"channel", "vortex_count", static_cast<double>(vortices.size()), channel});
  if (channel) {
    result.label = FlowLabel::Channel;
    return result;
  }

  // 3. lid-driven cavity
  const std::size_t band_rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(th.band_fraction * static_cast<double>(h))));
  const std::size_t band_cols = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(th.band_fraction * static_cast<double>(w))));
  double band_mean[4] = {0, 0, 0, 0};  // bottom, top, left, right
  for (std::size_t r = 0; r < band_rows; ++r)
    for (std::size_t c = 0; c < w; ++c) {
      band_mean[0] += std::abs(s.u.at(r, c));
      band_mean[1] += std::abs(s.u.at(h - 1 - r, c));
    }
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < band_cols; ++c) {
      band_mean[2] += std::abs(s.v.at(r, c));
      band_mean[3] += std::abs(s.v.at(r, w - 1 - c));
    }
  band_mean[0] /= static_cast<double>(band_rows * w);
  band_mean[1] /= static_cast<double>(band_rows * w);
  band_mean[2] /= static_cast<double>(band_cols * h);
  band_mean[3] /= static_cast<double>(band_cols * h);
  static const char* wall_names[4] = {"bottom", "top", "left", "right"};
  std::size_t lid = 0;
  double best_ratio = -1.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double others = (band_mean[0] + band_mean[1] + band_mean[2] + band_mean[3] - band_mean[k]) / 3.0;
    const double ratio = band_mean[k] / std::max(others, std::numeric_limits<double>::min());
    if (ratio > best_ratio) best_ratio = ratio, lid = k;
  }
  const double bx = static_cast<double>(band_cols) * s.grid.dx();
  const double by = static_cast<double>(band_rows) * s.grid.dy();
  std::size_t interior = 0;
  for (const auto& v : vortices)
    if (v.center.x > s.grid.x_min + bx && v.center.x < s.grid.x_max - bx && v.center.y > s.grid.y_min + by &&
        v.center.y < s.grid.y_max - by)
      ++interior;
  const bool cavity = band_mean[lid] > 0.0 && best_ratio >= th.lid_speed_ratio && interior >= 1;
  ev.push_back({"lid-driven-cavity", std::string("wall_speed_ratio_") + wall_names[lid], best_ratio, cavity});
  ev.push_back({"lid-driven-cavity", "interior_vortex_count", static_cast<double>(interior), cavity});
  if (cavity) {
    result.label = FlowLabel::LidDrivenCavity;
    result.driving_wall = wall_names[lid];
    return result;
  }

  const auto topo = vortex_topology(vortices, s.grid, th);

  // 4. bluff-body wake
  const bool wake = vortices.size() >= 3 && topo.alternating_in_x;
  ev.push_back({"bluff-body-wake", "vortex_count", static_cast<double>(vortices.size()), wake});
  ev.push_back({"bluff-body-wake", "x_columns", static_cast<double>(topo.columns), wake});
  ev.push_back({"bluff-body-wake", "alternating_in_x", topo.alternating_in_x ? 1.0 : 0.0, wake});
  if (wake) {
    result.label = FlowLabel::BluffBodyWake;
    return result;
  }

  // 5. vortex array
  const bool array = vortices.size() >= 4 && topo.checkerboard;
  ev.push_back({"vortex-array", "x_columns", static_cast<double>(topo.columns), array});
  ev.push_back({"vortex-array", "y_rows", static_cast<double>(topo.rows), array});
  ev.push_back({"vortex-array", "checkerboard", topo.checkerboard ? 1.0 : 0.0, array});
  if (array) {
    result.label = FlowLabel::VortexArray;
    return result;
  }

  result.label = FlowLabel::Unknown;
  return result;
}

inline FlowClassResult classify_flow(const FieldSnapshot& s, const std::vector<VortexDescriptor>& vortices,
                                     const ClassifierThresholds& th = {}) {
  return classify_flow(s, vorticity(s), vortices, th);
}

// ---------------------------------------------------------------------------
// Full analysis

struct AnalysisReport {
  FlowClassResult flow;
  double reynolds = 0.0;
  std::vector<VortexDescriptor> vortices;
  ValueAt u_max;
  ValueAt p_min;
  ValueAt p_max;
  ValueAt max_abs_vorticity;

  friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

inline AnalysisReport analyze(const FieldSnapshot& s, const FluidProperties& props,
                              const DetectionParams& params = {}) {
  require_valid(s);
  props.check();
  params.check();
  const ScalarGrid omega = vorticity(s);
  AnalysisReport report;
  report.vortices = detect_vortices(s, omega, params);
  const KeyPoints kp = key_points(s, omega);
  report.u_max = kp.u_max;
  report.p_min = kp.p_min;
  report.p_max = kp.p_max;
  report.max_abs_vorticity = kp.max_abs_vorticity;
  report.flow = classify_flow(s, omega, report.vortices);
  report.reynolds = reynolds_number(props);
  return report;
}

/// A report that restates ground truth, for oracle predictions.
inline AnalysisReport report_from_truth(const GroundTruth& truth) {
  AnalysisReport r;
  r.flow.label = truth.flow_class;
  r.flow.evidence.push_back({"ground-truth", "annotated", 1.0, true});
  r.reynolds = truth.reynolds;
  r.vortices = truth.vortices;
  r.u_max = {truth.u_max_value, truth.u_max_location};
  return r;
}

// ---------------------------------------------------------------------------
// JSON

inline void to_json(json& j, const ValueAt& v) { j = json{{"value", v.value}, {"location", v.location}}; }

inline void from_json(const json& j, ValueAt& v) {
  v.value = detail::required<double>(j, "value");
  v.location = detail::required<Point>(j, "location");
}

inline void to_json(json& j, const Evidence& e) {
  j = json{{"rule", e.rule}, {"feature", e.feature}, {"value", e.value}, {"fired", e.fired}};
}

inline void from_json(const json& j, Evidence& e) {
  e.rule = detail::required<std::string>(j, "rule");
  e.feature = detail::required<std::string>(j, "feature");
  e.value = detail::required<double>(j, "value");
  e.fired = j.value("fired", false);
}

inline void to_json(json& j, const FlowClassResult& f) {
  j = json{{"label", to_string(f.label)}, {"evidence", f.evidence}};
  if (f.driving_wall) j["driving_wall"] = *f.driving_wall;
}

inline void from_json(const json& j, FlowClassResult& f) {
  f.label = parse_flow_label(detail::required<std::string>(j, "label"));
  f.evidence = j.value("evidence", std::vector<Evidence>{});
  if (auto it = j.find("driving_wall"); it != j.end() && it->is_string()) f.driving_wall = it->get<std::string>();
}

inline void to_json(json& j, const AnalysisReport& r) {
  j = json{{"flow", r.flow},       {"reynolds", r.reynolds}, {"vortices", r.vortices},
           {"u_max", r.u_max},     {"p_min", r.p_min},       {"p_max", r.p_max},
           {"max_abs_vorticity", r.max_abs_vorticity}};
}

inline void from_json(const json& j, AnalysisReport& r) {
  r.flow = detail::required<FlowClassResult>(j, "flow");
  r.reynolds = detail::required<double>(j, "reynolds");
  r.vortices = j.value("vortices", std::vector<VortexDescriptor>{});
  r.u_max = detail::required<ValueAt>(j, "u_max");
  if (j.contains("p_min")) r.p_min = j.at("p_min").get<ValueAt>();
  if (j.contains("p_max")) r.p_max = j.at("p_max").get<ValueAt>();
  if (j.contains("max_abs_vorticity")) r.max_abs_vorticity = j.at("max_abs_vorticity").get<ValueAt>();
}

}  // namespace fieldlang
