#pragma once

// Core field data model: grid geometry, the (u, v, p) snapshot, fluid
// properties and the annotation types shared by every other module.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fieldlang/error.hpp"

namespace fieldlang {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Node-centred rectangular grid. Column j sits at x_min + j*dx and row i at
/// y_min + i*dy, so row 0 is the bottom edge and rows grow upward.
struct GridSpec {
  std::size_t width = 0;
  std::size_t height = 0;
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  double dx() const { return (x_max - x_min) / static_cast<double>(width - 1); }
  double dy() const { return (y_max - y_min) / static_cast<double>(height - 1); }
  double x_at(std::size_t col) const { return x_min + static_cast<double>(col) * dx(); }
  double y_at(std::size_t row) const { return y_min + static_cast<double>(row) * dy(); }
  Point node(std::size_t row, std::size_t col) const { return {x_at(col), y_at(row)}; }
  std::size_t cell_count() const { return width * height; }

  /// Scalar "flow domain size" used by the benchmark tolerances.
  double domain_size() const { return std::max(x_max - x_min, y_max - y_min); }

  bool contains(Point p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }

  std::optional<std::string> problem() const {
    if (width < 2 || height < 2) return "grid needs at least 2x2 nodes";
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !std::isfinite(y_min) ||
        !std::isfinite(y_max))
      return "grid bounds must be finite";
    if (!(x_max > x_min)) return "x_max must exceed x_min";
    if (!(y_max > y_min)) return "y_max must exceed y_min";
    return std::nullopt;
  }

  void check() const {
    if (auto p = problem()) throw Error(ErrorKind::InvalidArgument, *p);
  }

  static GridSpec unit(std::size_t n) { return GridSpec{n, n, 0.0, 1.0, 0.0, 1.0}; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Row-major H x W scalar grid.
struct ScalarGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;

  ScalarGrid() = default;
  ScalarGrid(std::size_t w, std::size_t h, double fill = 0.0)
      : width(w), height(h), values(w * h, fill) {}

  double& at(std::size_t row, std::size_t col) { return values[row * width + col]; }
  double at(std::size_t row, std::size_t col) const { return values[row * width + col]; }
  std::size_t size() const { return values.size(); }

  friend bool operator==(const ScalarGrid&, const ScalarGrid&) = default;
};

struct FieldSnapshot {
  GridSpec grid;
  ScalarGrid u;
  ScalarGrid v;
  ScalarGrid p;

  explicit FieldSnapshot(GridSpec g = GridSpec::unit(2))
      : grid(g), u(g.width, g.height), v(g.width, g.height), p(g.width, g.height) {}

  friend bool operator==(const FieldSnapshot&, const FieldSnapshot&) = default;
};

/// Material and scale metadata. Reynolds number is derived from these,
/// never regressed from the field itself.
struct FluidProperties {
  double rho = 1.0;
  double mu = 1.0;
  double U = 0.0;
  double L = 1.0;

  std::optional<std::string> problem() const {
    if (!(std::isfinite(rho) && rho > 0.0)) return "density must be > 0";
    if (!(std::isfinite(mu) && mu > 0.0)) return "viscosity must be > 0";
    if (!(std::isfinite(U) && U >= 0.0)) return "characteristic velocity must be >= 0";
    if (!(std::isfinite(L) && L > 0.0)) return "characteristic length must be > 0";
    return std::nullopt;
  }

  void check() const {
    if (auto p = problem()) throw Error(ErrorKind::InvalidArgument, *p);
  }

  friend bool operator==(const FluidProperties&, const FluidProperties&) = default;
};

enum class Rotation { CounterClockwise, Clockwise };

inline const char* to_string(Rotation r) {
  return r == Rotation::CounterClockwise ? "counterclockwise" : "clockwise";
}

inline Rotation parse_rotation(std::string_view s) {
  if (s == "counterclockwise") return Rotation::CounterClockwise;
  if (s == "clockwise") return Rotation::Clockwise;
  throw Error(ErrorKind::Parse, "unknown rotation direction '" + std::string(s) + "'");
}

/// Positive circulation is counterclockwise (x rightward, y upward).
inline Rotation rotation_of(double circulation) {
  return circulation > 0.0 ? Rotation::CounterClockwise : Rotation::Clockwise;
}

struct VortexDescriptor {
  Point center;
  double length = 0.0;
  double height = 0.0;
  double equivalent_radius = 0.0;
  double circulation = 0.0;
  Rotation direction = Rotation::CounterClockwise;
  double peak_vorticity = 0.0;

  friend bool operator==(const VortexDescriptor&, const VortexDescriptor&) = default;
};

enum class FlowLabel { LidDrivenCavity, BluffBodyWake, Channel, VortexArray, Uniform, Unknown };

inline constexpr FlowLabel kAllFlowLabels[] = {
    FlowLabel::LidDrivenCavity, FlowLabel::BluffBodyWake, FlowLabel::Channel,
    FlowLabel::VortexArray,     FlowLabel::Uniform,       FlowLabel::Unknown,
};

inline const char* to_string(FlowLabel label) {
  switch (label) {
    case FlowLabel::LidDrivenCavity: return "lid-driven-cavity";
    case FlowLabel::BluffBodyWake: return "bluff-body-wake";
    case FlowLabel::Channel: return "channel";
    case FlowLabel::VortexArray: return "vortex-array";
    case FlowLabel::Uniform: return "uniform";
    case FlowLabel::Unknown: return "unknown";
  }
  return "unknown";
}

inline FlowLabel parse_flow_label(std::string_view s) {
  for (FlowLabel l : kAllFlowLabels)
    if (s == to_string(l)) return l;
  throw Error(ErrorKind::Parse, "unknown flow label '" + std::string(s) + "'");
}

struct GroundTruth {
  FlowLabel flow_class = FlowLabel::Unknown;
  double reynolds = 0.0;
  std::vector<VortexDescriptor> vortices;
  double u_max_value = 0.0;
  Point u_max_location;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Violation {
  enum class Kind { Grid, Dimension, NonFinite };
  Kind kind = Kind::Grid;
  std::string channel;  // "u", "v", "p" or "grid"
  std::size_t row = 0;
  std::size_t col = 0;
  std::string message;
};

/// Lists every broken snapshot invariant; empty means the snapshot is valid.
inline std::vector<Violation> validate(const FieldSnapshot& s) {
  std::vector<Violation> out;
  if (auto p = s.grid.problem()) {
    out.push_back({Violation::Kind::Grid, "grid", 0, 0, *p});
    return out;
  }
  const std::pair<const char*, const ScalarGrid*> channels[] = {{"u", &s.u}, {"v", &s.v}, {"p", &s.p}};
  for (const auto& [name, g] : channels) {
    if (g->width != s.grid.width || g->height != s.grid.height ||
        g->values.size() != s.grid.cell_count()) {
      out.push_back({Violation::Kind::Dimension, name, 0, 0,
                     std::string("channel ") + name + " is " + std::to_string(g->width) + "x" +
                         std::to_string(g->height) + " (" + std::to_string(g->values.size()) +
                         " values), grid is " + std::to_string(s.grid.width) + "x" +
                         std::to_string(s.grid.height)});
      continue;
    }
    for (std::size_t i = 0; i < g->values.size(); ++i) {
      if (!std::isfinite(g->values[i])) {
        const std::size_t row = i / g->width;
        const std::size_t col = i % g->width;
        out.push_back({Violation::Kind::NonFinite, name, row, col,
                       std::string("non-finite value in ") + name + " at (" + std::to_string(row) +
                           "," + std::to_string(col) + ")"});
      }
    }
  }
  return out;
}

inline void require_valid(const FieldSnapshot& s) {
  auto violations = validate(s);
  if (violations.empty()) return;
  const auto& first = violations.front();
  const ErrorKind kind = first.kind == Violation::Kind::NonFinite ? ErrorKind::NonFinite
                         : first.kind == Violation::Kind::Dimension ? ErrorKind::DimensionMismatch
                                                                    : ErrorKind::InvalidArgument;
  throw Error(kind, first.message);
}

}  // namespace fieldlang
