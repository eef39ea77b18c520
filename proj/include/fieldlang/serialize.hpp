#pragma once

// JSON mappings for the shared core types (nlohmann ADL hooks).

#include <nlohmann/json.hpp>

#include "fieldlang/field.hpp"

namespace fieldlang {

using nlohmann::json;

namespace detail {

template <typename T>
T required(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorKind::Parse, std::string("missing key '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace detail

inline void to_json(json& j, const Point& p) { j = json::array({p.x, p.y}); }

inline void from_json(const json& j, Point& p) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::Parse, "point must be [x, y]");
  p.x = j[0].get<double>();
  p.y = j[1].get<double>();
}

inline void to_json(json& j, const VortexDescriptor& v) {
  j = json{{"center", v.center},
           {"length", v.length},
           {"height", v.height},
           {"equivalent_radius", v.equivalent_radius},
           {"circulation", v.circulation},
           {"direction", to_string(v.direction)},
           {"peak_vorticity", v.peak_vorticity}};
}

inline void from_json(const json& j, VortexDescriptor& v) {
  v.center = detail::required<Point>(j, "center");
  v.length = j.value("length", 0.0);
  v.height = j.value("height", 0.0);
  v.equivalent_radius = j.value("equivalent_radius", 0.0);
  v.circulation = detail::required<double>(j, "circulation");
  v.direction = parse_rotation(detail::required<std::string>(j, "direction"));
  v.peak_vorticity = j.value("peak_vorticity", 0.0);
}

inline void to_json(json& j, const GroundTruth& t) {
  j = json{{"flow_class", to_string(t.flow_class)},
           {"reynolds", t.reynolds},
           {"vortices", t.vortices},
           {"u_max_value", t.u_max_value},
           {"u_max_location", t.u_max_location}};
}

inline void from_json(const json& j, GroundTruth& t) {
  t.flow_class = parse_flow_label(detail::required<std::string>(j, "flow_class"));
  t.reynolds = detail::required<double>(j, "reynolds");
  t.vortices = j.value("vortices", std::vector<VortexDescriptor>{});
  t.u_max_value = detail::required<double>(j, "u_max_value");
  t.u_max_location = detail::required<Point>(j, "u_max_location");
}

inline void to_json(json& j, const FluidProperties& p) {
  j = json{{"rho", p.rho}, {"mu", p.mu}, {"U", p.U}, {"L", p.L}};
}

inline void from_json(const json& j, FluidProperties& p) {
  p.rho = detail::required<double>(j, "rho");
  p.mu = detail::required<double>(j, "mu");
  p.U = detail::required<double>(j, "U");
  p.L = detail::required<double>(j, "L");
}

}  // namespace fieldlang
