#ifndef WECHARGE_CORE_MODEL_HPP
#define WECHARGE_CORE_MODEL_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wecharge/error.hpp"

namespace wecharge {

using Timestamp = std::chrono::sys_seconds;

inline Timestamp from_epoch_seconds(std::int64_t s) {
  return Timestamp{std::chrono::seconds{s}};
}

inline std::int64_t to_epoch_seconds(Timestamp t) {
  return t.time_since_epoch().count();
}

inline constexpr double kEarthRadiusKm = 6371.0;

namespace detail {

template <typename E, std::size_t N>
std::string_view enum_name(const std::array<std::pair<E, std::string_view>, N>& table,
                           E value) {
  for (const auto& [e, name] : table) {
    if (e == value) return name;
  }
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> enum_parse(const std::array<std::pair<E, std::string_view>, N>& table,
                            std::string_view name) {
  for (const auto& [e, n] : table) {
    if (n == name) return e;
  }
  return std::nullopt;
}

}  // namespace detail

enum class PlugType { Type1, Type2, CCS, CHAdeMO, DomesticSchuko };
enum class CurrentKind { AC, DC };
enum class ChargeMode { ChargeOnly, V2G_DSO, V2G_TSO, Arbitrage };
enum class Ownership { Private, SME, Public };

inline constexpr std::array<std::pair<PlugType, std::string_view>, 5> kPlugTypeNames{{
    {PlugType::Type1, "Type1"},
    {PlugType::Type2, "Type2"},
    {PlugType::CCS, "CCS"},
    {PlugType::CHAdeMO, "CHAdeMO"},
    {PlugType::DomesticSchuko, "DomesticSchuko"},
}};
inline constexpr std::array<std::pair<CurrentKind, std::string_view>, 2> kCurrentKindNames{{
    {CurrentKind::AC, "AC"},
    {CurrentKind::DC, "DC"},
}};
inline constexpr std::array<std::pair<ChargeMode, std::string_view>, 4> kChargeModeNames{{
    {ChargeMode::ChargeOnly, "ChargeOnly"},
    {ChargeMode::V2G_DSO, "V2G_DSO"},
    {ChargeMode::V2G_TSO, "V2G_TSO"},
    {ChargeMode::Arbitrage, "Arbitrage"},
}};
inline constexpr std::array<std::pair<Ownership, std::string_view>, 3> kOwnershipNames{{
    {Ownership::Private, "Private"},
    {Ownership::SME, "SME"},
    {Ownership::Public, "Public"},
}};

inline std::string_view to_string(PlugType v) { return detail::enum_name(kPlugTypeNames, v); }
inline std::string_view to_string(CurrentKind v) { return detail::enum_name(kCurrentKindNames, v); }
inline std::string_view to_string(ChargeMode v) { return detail::enum_name(kChargeModeNames, v); }
inline std::string_view to_string(Ownership v) { return detail::enum_name(kOwnershipNames, v); }

/// Geographic coordinate in degrees. Out-of-range values are rejected on
/// construction, so every live GeoPoint is valid.
class GeoPoint {
 public:
  GeoPoint(double latitude, double longitude) : latitude_(latitude), longitude_(longitude) {
    if (!(latitude >= -90.0 && latitude <= 90.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "latitude " + std::to_string(latitude) + " outside [-90, 90]");
    }
    if (!(longitude >= -180.0 && longitude <= 180.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "longitude " + std::to_string(longitude) + " outside [-180, 180]");
    }
  }

  double latitude() const noexcept { return latitude_; }
  double longitude() const noexcept { return longitude_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double latitude_;
  double longitude_;
};

struct PowerSpec {
  double rated_power_kw = 0.0;
  CurrentKind current = CurrentKind::AC;
  int phases = 1;
  double amperage_a = 0.0;
  double voltage_v = 0.0;

  friend bool operator==(const PowerSpec&, const PowerSpec&) = default;
};

// Nameplate ratings are rounded, so rated power only has to agree with
// voltage x amperage x phases to within this fraction of the rating.
inline constexpr double kPowerSanityTolerance = 0.25;

inline void validate(const PowerSpec& spec) {
  if (!(spec.rated_power_kw > 0.0) || !std::isfinite(spec.rated_power_kw)) {
    throw Error(ErrorCode::InvalidArgument, "rated power must be positive");
  }
  if (!(spec.amperage_a > 0.0) || !(spec.voltage_v > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "amperage and voltage must be positive");
  }
  if (spec.current == CurrentKind::DC && spec.phases != 1) {
    throw Error(ErrorCode::InvalidArgument, "DC power specs carry phases = 1");
  }
  if (spec.phases != 1 && spec.phases != 3) {
    throw Error(ErrorCode::InvalidArgument, "phases must be 1 or 3");
  }
  const double nominal_kw = spec.voltage_v * spec.amperage_a * spec.phases / 1000.0;
  if (std::abs(nominal_kw - spec.rated_power_kw) > kPowerSanityTolerance * spec.rated_power_kw) {
    throw Error(ErrorCode::InvalidArgument,
                "rated power " + std::to_string(spec.rated_power_kw) +
                    " kW inconsistent with voltage x amperage x phases = " +
                    std::to_string(nominal_kw) + " kW");
  }
}

struct EVProfile {
  std::string model_name;
  double battery_capacity_kwh = 0.0;
  double total_range_km = 0.0;
  std::set<PlugType> plug_types;
  double ac_max_power_kw = 0.0;
  double dc_max_power_kw = 0.0;  // 0 = no DC capability
  double current_soc = 0.0;
  int ac_phases = 3;  // phases the onboard charger can draw from

  bool accepts(PlugType plug) const { return plug_types.contains(plug); }
  bool has_dc() const noexcept { return dc_max_power_kw > 0.0; }

  friend bool operator==(const EVProfile&, const EVProfile&) = default;
};

inline void validate(const EVProfile& ev) {
  if (!(ev.battery_capacity_kwh > 0.0) || !std::isfinite(ev.battery_capacity_kwh)) {
    throw Error(ErrorCode::InvalidArgument, "battery capacity must be positive");
  }
  if (!(ev.total_range_km > 0.0) || !std::isfinite(ev.total_range_km)) {
    throw Error(ErrorCode::InvalidArgument, "total range must be positive");
  }
  if (ev.plug_types.empty()) {
    throw Error(ErrorCode::InvalidArgument, "EV must accept at least one plug type");
  }
  if (!(ev.ac_max_power_kw > 0.0) || !std::isfinite(ev.ac_max_power_kw)) {
    throw Error(ErrorCode::InvalidArgument, "AC acceptance limit must be positive");
  }
  if (!(ev.dc_max_power_kw >= 0.0) || !std::isfinite(ev.dc_max_power_kw)) {
    throw Error(ErrorCode::InvalidArgument, "DC acceptance limit must be nonnegative");
  }
  if (!(ev.current_soc >= 0.0 && ev.current_soc <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "state of charge must lie in [0, 1]");
  }
  if (ev.ac_phases != 1 && ev.ac_phases != 3) {
    throw Error(ErrorCode::InvalidArgument, "onboard charger phases must be 1 or 3");
  }
}

struct Connector {
  PlugType plug = PlugType::Type2;
  PowerSpec power;
  double tariff_per_kwh = 0.0;
  std::set<ChargeMode> modes{ChargeMode::ChargeOnly};

  friend bool operator==(const Connector&, const Connector&) = default;
};

inline void validate(const Connector& c) {
  validate(c.power);
  if (!(c.tariff_per_kwh >= 0.0) || !std::isfinite(c.tariff_per_kwh)) {
    throw Error(ErrorCode::InvalidArgument, "tariff must be nonnegative");
  }
  if (c.modes.empty()) {
    throw Error(ErrorCode::InvalidArgument, "connector needs at least one mode tag");
  }
}

/// Half-open interval [start, end).
struct AvailabilityWindow {
  Timestamp start;
  Timestamp end;

  bool contains(const AvailabilityWindow& other) const {
    return start <= other.start && other.end <= end;
  }
  bool overlaps(const AvailabilityWindow& other) const {
    return start < other.end && other.start < end;
  }

  friend bool operator==(const AvailabilityWindow&, const AvailabilityWindow&) = default;
};

inline void validate(const AvailabilityWindow& w) {
  if (!(w.start < w.end)) {
    throw Error(ErrorCode::InvalidArgument, "window start must precede end");
  }
}

// Windows must each be valid and appear sorted by start without overlap.
inline void validate_window_list(const std::vector<AvailabilityWindow>& windows) {
  for (std::size_t i = 0; i < windows.size(); ++i) {
    validate(windows[i]);
    if (i > 0 && windows[i].start < windows[i - 1].end) {
      throw Error(ErrorCode::InvalidArgument,
                  "availability windows must be sorted and non-overlapping");
    }
  }
}

struct Station {
  std::string id;
  std::string name;
  GeoPoint location{0.0, 0.0};
  std::vector<Connector> connectors;
  int charger_count = 1;
  Ownership ownership = Ownership::Public;
  bool opted_out = false;
  std::vector<AvailabilityWindow> availability;
  // Opaque listing attributes (manufacturer, payment mode, ...); stored and
  // echoed, never interpreted.
  std::map<std::string, std::string> metadata;

  friend bool operator==(const Station&, const Station&) = default;
};

inline void validate(const Station& s) {
  try {
    if (s.id.empty()) throw Error(ErrorCode::InvalidArgument, "station id must be nonempty");
    if (s.charger_count < 1) throw Error(ErrorCode::InvalidArgument, "charger_count must be >= 1");
    if (s.connectors.empty()) throw Error(ErrorCode::InvalidArgument, "station has no connectors");
    for (const auto& c : s.connectors) validate(c);
    validate_window_list(s.availability);
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidStation, "station '" + s.id + "': " + e.what());
  }
}

inline double great_circle_distance(const GeoPoint& a, const GeoPoint& b) {
  constexpr double deg = std::numbers::pi / 180.0;
  const double phi1 = a.latitude() * deg;
  const double phi2 = b.latitude() * deg;
  const double dphi = phi2 - phi1;
  const double dlambda = (b.longitude() - a.longitude()) * deg;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = std::clamp(s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

/// Power actually drawn: the station rating capped by the vehicle's
/// acceptance limit for that current kind.
inline double effective_charge_power(const EVProfile& ev, const PowerSpec& spec) {
  if (spec.current == CurrentKind::DC) {
    if (!ev.has_dc()) {
      throw Error(ErrorCode::NoDcCapability, ev.model_name + " cannot charge on DC");
    }
    return std::min(spec.rated_power_kw, ev.dc_max_power_kw);
  }
  // A single-phase onboard charger on a 3-phase supply only draws one phase.
  const double supplied = ev.ac_phases < spec.phases
                              ? spec.rated_power_kw * ev.ac_phases / spec.phases
                              : spec.rated_power_kw;
  return std::min(supplied, ev.ac_max_power_kw);
}

/// Hours for a full-capacity charge at constant effective power. Uses the
/// whole battery regardless of current_soc.
inline double charge_duration(const EVProfile& ev, const PowerSpec& spec) {
  return ev.battery_capacity_kwh / effective_charge_power(ev, spec);
}

inline double remaining_range(const EVProfile& ev) {
  return ev.current_soc * ev.total_range_km;
}

}  // namespace wecharge

#endif
