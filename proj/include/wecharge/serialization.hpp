#ifndef WECHARGE_SERIALIZATION_HPP
#define WECHARGE_SERIALIZATION_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "json.hpp"
#include "wecharge/core_model.hpp"
#include "wecharge/error.hpp"
#include "wecharge/matching.hpp"
#include "wecharge/reservation.hpp"

// JSON wire format. Writers are ADL to_json overloads; readers are explicit
// *_from_json functions that report the offending field path in a
// ParseError. Domain invariants are checked separately by validate().
namespace wecharge {

using json = nlohmann::json;

namespace io {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ParseError, (path.empty() ? std::string("<root>") : path) + ": " + what);
}

inline std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

inline std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

inline void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

inline const json& member(const json& j, std::string_view key, const std::string& path) {
  expect_object(j, path);
  auto it = j.find(key);
  if (it == j.end()) fail(join(path, key), "missing required field");
  return *it;
}

inline const json* optional_member(const json& j, std::string_view key) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

inline std::int64_t as_int(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::trunc(d) == d && std::abs(d) < 9.0e15) return static_cast<std::int64_t>(d);
  }
  fail(path, "expected an integer");
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

inline bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected a boolean");
  return v.get<bool>();
}

inline const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array");
  return v;
}

template <typename E, std::size_t N>
E as_enum(const std::array<std::pair<E, std::string_view>, N>& table, const json& v,
          const std::string& path) {
  const std::string name = as_string(v, path);
  if (auto e = detail::enum_parse(table, name)) return *e;
  std::string allowed;
  for (const auto& [_, n] : table) allowed += (allowed.empty() ? "" : ", ") + std::string(n);
  fail(path, "unknown value '" + name + "' (expected one of " + allowed + ")");
}

inline double number_field(const json& j, std::string_view key, const std::string& path) {
  return as_number(member(j, key, path), join(path, key));
}

inline std::string string_field(const json& j, std::string_view key, const std::string& path) {
  return as_string(member(j, key, path), join(path, key));
}

}  // namespace io

// ---- writers ----

inline void to_json(json& j, const GeoPoint& p) {
  j = json{{"lat", p.latitude()}, {"lon", p.longitude()}};
}

inline void to_json(json& j, const AvailabilityWindow& w) {
  j = json{{"start", to_epoch_seconds(w.start)}, {"end", to_epoch_seconds(w.end)}};
}

inline void to_json(json& j, const PowerSpec& p) {
  j = json{{"rated_power_kw", p.rated_power_kw},
           {"current", to_string(p.current)},
           {"phases", p.phases},
           {"amperage_a", p.amperage_a},
           {"voltage_v", p.voltage_v}};
}

inline void to_json(json& j, const Connector& c) {
  json modes = json::array();
  for (auto m : c.modes) modes.push_back(to_string(m));
  j = json{{"plug", to_string(c.plug)},
           {"power", c.power},
           {"tariff_per_kwh", c.tariff_per_kwh},
           {"modes", modes}};
}

inline void to_json(json& j, const Station& s) {
  j = json{{"id", s.id},
           {"name", s.name},
           {"location", s.location},
           {"connectors", s.connectors},
           {"charger_count", s.charger_count},
           {"ownership", to_string(s.ownership)},
           {"opted_out", s.opted_out},
           {"availability", s.availability},
           {"metadata", s.metadata}};
}

inline void to_json(json& j, const EVProfile& ev) {
  json plugs = json::array();
  for (auto p : ev.plug_types) plugs.push_back(to_string(p));
  j = json{{"model_name", ev.model_name},
           {"battery_capacity_kwh", ev.battery_capacity_kwh},
           {"total_range_km", ev.total_range_km},
           {"plug_types", plugs},
           {"ac_max_power_kw", ev.ac_max_power_kw},
           {"dc_max_power_kw", ev.dc_max_power_kw},
           {"current_soc", ev.current_soc},
           {"ac_phases", ev.ac_phases}};
}

inline void to_json(json& j, const Weights& w) {
  j = json{{"distance", w.distance},
           {"charge_time", w.charge_time},
           {"wait_time", w.wait_time},
           {"cost", w.cost}};
}

inline void to_json(json& j, const MatchRequest& r) {
  j = json{{"ev", r.ev},
           {"origin", r.origin},
           {"weights", r.weights},
           {"window", r.window},
           {"safety_margin", r.safety_margin}};
}

inline void to_json(json& j, const FeatureTuple& f) {
  j = json{{"distance_km", f.distance_km},
           {"charge_hours", f.charge_hours},
           {"wait_hours", f.wait_hours},
           {"cost", f.cost}};
}

inline void to_json(json& j, const CandidateOption& c) {
  j = json{{"station_id", c.station_id},
           {"connector_index", c.connector_index},
           {"mode", to_string(c.mode)},
           {"raw", c.raw},
           {"normalized", c.normalized},
           {"score", c.score}};
}

inline void to_json(json& j, const Exclusion& e) {
  j = json{{"station_id", e.station_id},
           {"connector_index", e.connector_index},
           {"reason", to_string(e.reason)}};
}

inline void to_json(json& j, const MatchResult& r) {
  j = json{{"best", r.best}, {"ranking", r.ranking}, {"excluded", r.excluded}};
}

inline void to_json(json& j, const Reservation& r) {
  j = json{{"reservation_id", r.reservation_id},
           {"station_id", r.station_id},
           {"connector_index", r.connector_index},
           {"window", r.window},
           {"vehicle_id", r.vehicle_id},
           {"status", to_string(r.status)}};
}

inline void to_json(json& j, const OverstayNotice& n) {
  j = json{{"sequence", n.sequence},
           {"reservation_id", n.reservation_id},
           {"station_id", n.station_id},
           {"vehicle_id", n.vehicle_id},
           {"window_end", to_epoch_seconds(n.window_end)},
           {"flagged_at", to_epoch_seconds(n.flagged_at)}};
}

// ---- readers ----

inline GeoPoint geo_point_from_json(const json& j, const std::string& path = {}) {
  const double lat = io::number_field(j, "lat", path);
  const double lon = io::number_field(j, "lon", path);
  return GeoPoint(lat, lon);
}

inline AvailabilityWindow window_from_json(const json& j, const std::string& path = {}) {
  return AvailabilityWindow{
      from_epoch_seconds(io::as_int(io::member(j, "start", path), io::join(path, "start"))),
      from_epoch_seconds(io::as_int(io::member(j, "end", path), io::join(path, "end")))};
}

inline std::vector<AvailabilityWindow> windows_from_json(const json& j,
                                                         const std::string& path = {}) {
  std::vector<AvailabilityWindow> out;
  const json& arr = io::as_array(j, path);
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(window_from_json(arr[i], io::index(path, i)));
  }
  return out;
}

inline PowerSpec power_spec_from_json(const json& j, const std::string& path = {}) {
  PowerSpec p;
  p.rated_power_kw = io::number_field(j, "rated_power_kw", path);
  p.current = io::as_enum(kCurrentKindNames, io::member(j, "current", path),
                          io::join(path, "current"));
  if (const json* v = io::optional_member(j, "phases")) {
    p.phases = static_cast<int>(io::as_int(*v, io::join(path, "phases")));
  }
  p.amperage_a = io::number_field(j, "amperage_a", path);
  p.voltage_v = io::number_field(j, "voltage_v", path);
  return p;
}

inline Connector connector_from_json(const json& j, const std::string& path = {}) {
  Connector c;
  c.plug = io::as_enum(kPlugTypeNames, io::member(j, "plug", path), io::join(path, "plug"));
  c.power = power_spec_from_json(io::member(j, "power", path), io::join(path, "power"));
  c.tariff_per_kwh = io::number_field(j, "tariff_per_kwh", path);
  if (const json* modes = io::optional_member(j, "modes")) {
    const std::string mpath = io::join(path, "modes");
    c.modes.clear();
    const json& arr = io::as_array(*modes, mpath);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      c.modes.insert(io::as_enum(kChargeModeNames, arr[i], io::index(mpath, i)));
    }
  }
  return c;
}

inline Station station_from_json(const json& j, const std::string& path = {}) {
  io::expect_object(j, path);
  Station s;
  s.id = io::string_field(j, "id", path);
  if (const json* v = io::optional_member(j, "name")) s.name = io::as_string(*v, io::join(path, "name"));
  {
    const std::string lpath = io::join(path, "location");
    try {
      s.location = geo_point_from_json(io::member(j, "location", path), lpath);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InvalidArgument) throw;
      throw Error(ErrorCode::InvalidStation, lpath + ": " + e.what());
    }
  }
  {
    const std::string cpath = io::join(path, "connectors");
    const json& arr = io::as_array(io::member(j, "connectors", path), cpath);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      s.connectors.push_back(connector_from_json(arr[i], io::index(cpath, i)));
    }
  }
  s.charger_count = static_cast<int>(
      io::as_int(io::member(j, "charger_count", path), io::join(path, "charger_count")));
  s.ownership = io::as_enum(kOwnershipNames, io::member(j, "ownership", path),
                            io::join(path, "ownership"));
  if (const json* v = io::optional_member(j, "opted_out")) {
    s.opted_out = io::as_bool(*v, io::join(path, "opted_out"));
  }
  if (const json* v = io::optional_member(j, "availability")) {
    s.availability = windows_from_json(*v, io::join(path, "availability"));
  }
  if (const json* v = io::optional_member(j, "metadata")) {
    const std::string mpath = io::join(path, "metadata");
    io::expect_object(*v, mpath);
    for (const auto& [k, val] : v->items()) {
      s.metadata[k] = io::as_string(val, io::join(mpath, k));
    }
  }
  return s;
}

inline EVProfile ev_profile_from_json(const json& j, const std::string& path = {}) {
  EVProfile ev;
  ev.model_name = io::string_field(j, "model_name", path);
  ev.battery_capacity_kwh = io::number_field(j, "battery_capacity_kwh", path);
  ev.total_range_km = io::number_field(j, "total_range_km", path);
  {
    const std::string ppath = io::join(path, "plug_types");
    const json& arr = io::as_array(io::member(j, "plug_types", path), ppath);
    for (std::size_t i = 0; i < arr.size(); ++i) {
      ev.plug_types.insert(io::as_enum(kPlugTypeNames, arr[i], io::index(ppath, i)));
    }
  }
  ev.ac_max_power_kw = io::number_field(j, "ac_max_power_kw", path);
  if (const json* v = io::optional_member(j, "dc_max_power_kw")) {
    ev.dc_max_power_kw = io::as_number(*v, io::join(path, "dc_max_power_kw"));
  }
  ev.current_soc = io::number_field(j, "current_soc", path);
  if (const json* v = io::optional_member(j, "ac_phases")) {
    ev.ac_phases = static_cast<int>(io::as_int(*v, io::join(path, "ac_phases")));
  }
  return ev;
}

inline Weights weights_from_json(const json& j, const std::string& path = {}) {
  return Weights{io::number_field(j, "distance", path), io::number_field(j, "charge_time", path),
                 io::number_field(j, "wait_time", path), io::number_field(j, "cost", path)};
}

inline MatchRequest match_request_from_json(const json& j, const std::string& path = {}) {
  MatchRequest r;
  r.ev = ev_profile_from_json(io::member(j, "ev", path), io::join(path, "ev"));
  r.origin = geo_point_from_json(io::member(j, "origin", path), io::join(path, "origin"));
  r.weights = weights_from_json(io::member(j, "weights", path), io::join(path, "weights"));
  r.window = window_from_json(io::member(j, "window", path), io::join(path, "window"));
  if (const json* v = io::optional_member(j, "safety_margin")) {
    r.safety_margin = io::as_number(*v, io::join(path, "safety_margin"));
  }
  return r;
}

inline FeatureTuple feature_tuple_from_json(const json& j, const std::string& path = {}) {
  return FeatureTuple{io::number_field(j, "distance_km", path),
                      io::number_field(j, "charge_hours", path),
                      io::number_field(j, "wait_hours", path), io::number_field(j, "cost", path)};
}

inline CandidateOption candidate_from_json(const json& j, const std::string& path = {}) {
  CandidateOption c;
  c.station_id = io::string_field(j, "station_id", path);
  c.connector_index = static_cast<std::size_t>(
      io::as_int(io::member(j, "connector_index", path), io::join(path, "connector_index")));
  c.mode = io::as_enum(kChargeModeNames, io::member(j, "mode", path), io::join(path, "mode"));
  c.raw = feature_tuple_from_json(io::member(j, "raw", path), io::join(path, "raw"));
  c.normalized =
      feature_tuple_from_json(io::member(j, "normalized", path), io::join(path, "normalized"));
  c.score = io::number_field(j, "score", path);
  return c;
}

inline Exclusion exclusion_from_json(const json& j, const std::string& path = {}) {
  return Exclusion{io::string_field(j, "station_id", path),
                   static_cast<std::size_t>(io::as_int(io::member(j, "connector_index", path),
                                                       io::join(path, "connector_index"))),
                   io::as_enum(kExclusionReasonNames, io::member(j, "reason", path),
                               io::join(path, "reason"))};
}

inline MatchResult match_result_from_json(const json& j, const std::string& path = {}) {
  MatchResult r;
  r.best = candidate_from_json(io::member(j, "best", path), io::join(path, "best"));
  const std::string rpath = io::join(path, "ranking");
  const json& ranking = io::as_array(io::member(j, "ranking", path), rpath);
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    r.ranking.push_back(candidate_from_json(ranking[i], io::index(rpath, i)));
  }
  const std::string epath = io::join(path, "excluded");
  const json& excluded = io::as_array(io::member(j, "excluded", path), epath);
  for (std::size_t i = 0; i < excluded.size(); ++i) {
    r.excluded.push_back(exclusion_from_json(excluded[i], io::index(epath, i)));
  }
  return r;
}

inline Reservation reservation_from_json(const json& j, const std::string& path = {}) {
  Reservation r;
  r.reservation_id = io::string_field(j, "reservation_id", path);
  r.station_id = io::string_field(j, "station_id", path);
  r.connector_index = static_cast<std::size_t>(
      io::as_int(io::member(j, "connector_index", path), io::join(path, "connector_index")));
  r.window = window_from_json(io::member(j, "window", path), io::join(path, "window"));
  r.vehicle_id = io::string_field(j, "vehicle_id", path);
  r.status = io::as_enum(kReservationStatusNames, io::member(j, "status", path),
                         io::join(path, "status"));
  return r;
}

}  // namespace wecharge

#endif
