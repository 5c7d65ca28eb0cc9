#ifndef WECHARGE_MATCHING_HPP
#define WECHARGE_MATCHING_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "wecharge/availability.hpp"
#include "wecharge/core_model.hpp"
#include "wecharge/error.hpp"

namespace wecharge {

/// Waiting time is inversely proportional to the charger count; this is the
/// proportionality constant in hours. It cancels under max-normalization.
inline constexpr double kBaseWaitHours = 1.0;
inline constexpr double kDefaultSafetyMargin = 0.10;

struct Weights {
  double distance = 0.25;
  double charge_time = 0.25;
  double wait_time = 0.25;
  double cost = 0.25;

  double sum() const noexcept { return distance + charge_time + wait_time + cost; }

  friend bool operator==(const Weights&, const Weights&) = default;
};

inline void validate(const Weights& w) {
  for (double v : {w.distance, w.charge_time, w.wait_time, w.cost}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::InvalidArgument, "weights must be finite and nonnegative");
    }
  }
  if (!(w.sum() > 0.0)) {
    throw Error(ErrorCode::ZeroWeightSum, "at least one weight must be positive");
  }
}

struct MatchRequest {
  EVProfile ev;
  GeoPoint origin{0.0, 0.0};
  Weights weights;
  AvailabilityWindow window;
  double safety_margin = kDefaultSafetyMargin;
};

inline void validate(const MatchRequest& req) {
  validate(req.ev);
  validate(req.weights);
  validate(req.window);
  if (!(req.safety_margin >= 0.0 && req.safety_margin < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "safety margin must lie in [0, 1)");
  }
}

struct FeatureTuple {
  double distance_km = 0.0;
  double charge_hours = 0.0;
  double wait_hours = 0.0;
  double cost = 0.0;

  friend bool operator==(const FeatureTuple&, const FeatureTuple&) = default;
};

enum class ExclusionReason { IncompatiblePlug, Unreachable, Unavailable, OptedOut };

inline constexpr std::array<std::pair<ExclusionReason, std::string_view>, 4>
    kExclusionReasonNames{{
        {ExclusionReason::IncompatiblePlug, "IncompatiblePlug"},
        {ExclusionReason::Unreachable, "Unreachable"},
        {ExclusionReason::Unavailable, "Unavailable"},
        {ExclusionReason::OptedOut, "OptedOut"},
    }};

inline std::string_view to_string(ExclusionReason r) {
  return detail::enum_name(kExclusionReasonNames, r);
}

// Exclusion is recorded per connector: a station can contribute candidates
// from one connector and exclusions from another.
struct Exclusion {
  std::string station_id;
  std::size_t connector_index = 0;
  ExclusionReason reason = ExclusionReason::Unavailable;

  friend bool operator==(const Exclusion&, const Exclusion&) = default;
};

struct FeasiblePair {
  std::size_t station_index = 0;  // into the station list passed to the filter
  std::size_t connector_index = 0;
};

struct FilterResult {
  std::vector<FeasiblePair> candidates;
  std::vector<Exclusion> excluded;
};

struct CandidateOption {
  std::string station_id;
  std::size_t connector_index = 0;
  ChargeMode mode = ChargeMode::ChargeOnly;
  FeatureTuple raw;
  FeatureTuple normalized;
  double score = 0.0;

  friend bool operator==(const CandidateOption&, const CandidateOption&) = default;
};

struct MatchResult {
  CandidateOption best;
  std::vector<CandidateOption> ranking;
  std::vector<Exclusion> excluded;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

class NoFeasibleStationError : public Error {
 public:
  explicit NoFeasibleStationError(std::vector<Exclusion> excluded)
      : Error(ErrorCode::NoFeasibleStation,
              "no station satisfies the hard constraints (" + std::to_string(excluded.size()) +
                  " exclusions)"),
        excluded_(std::move(excluded)) {}

  const std::vector<Exclusion>& excluded() const noexcept { return excluded_; }

 private:
  std::vector<Exclusion> excluded_;
};

/// A (station, connector) pair survives iff the station is listed, the plug
/// and current kind suit the vehicle, the station lies within the usable
/// range, and an availability window covers the requested window.
/// Stations are expected to carry effective availability, i.e. with
/// reservations already folded in (see RegistrySnapshot::matchable_stations).
inline FilterResult filter_hard_constraints(const MatchRequest& req,
                                            std::span<const Station> stations) {
  FilterResult out;
  const double reach = remaining_range(req.ev) * (1.0 - req.safety_margin);
  for (std::size_t si = 0; si < stations.size(); ++si) {
    const Station& st = stations[si];
    const double distance = great_circle_distance(req.origin, st.location);
    const bool available = availability::any_contains(st.availability, req.window);
    for (std::size_t ci = 0; ci < st.connectors.size(); ++ci) {
      const Connector& c = st.connectors[ci];
      auto exclude = [&](ExclusionReason r) { out.excluded.push_back({st.id, ci, r}); };
      if (st.opted_out) {
        exclude(ExclusionReason::OptedOut);
      } else if (!req.ev.accepts(c.plug) ||
                 (c.power.current == CurrentKind::DC && !req.ev.has_dc())) {
        exclude(ExclusionReason::IncompatiblePlug);
      } else if (distance > reach) {
        exclude(ExclusionReason::Unreachable);
      } else if (!available) {
        exclude(ExclusionReason::Unavailable);
      } else {
        out.candidates.push_back({si, ci});
      }
    }
  }
  return out;
}

inline FeatureTuple compute_features(const MatchRequest& req, const Station& station,
                                     const Connector& connector) {
  return FeatureTuple{
      .distance_km = great_circle_distance(req.origin, station.location),
      .charge_hours = charge_duration(req.ev, connector.power),
      .wait_hours = kBaseWaitHours / station.charger_count,
      .cost = req.ev.battery_capacity_kwh * connector.tariff_per_kwh,
  };
}

/// Divides each feature column by its maximum over the set. A column whose
/// maximum is zero is set to zero throughout.
inline void normalize(std::span<CandidateOption> candidates) {
  if (candidates.empty()) {
    throw Error(ErrorCode::EmptyCandidateSet, "cannot normalize an empty candidate set");
  }
  FeatureTuple max;
  for (const auto& c : candidates) {
    max.distance_km = std::max(max.distance_km, c.raw.distance_km);
    max.charge_hours = std::max(max.charge_hours, c.raw.charge_hours);
    max.wait_hours = std::max(max.wait_hours, c.raw.wait_hours);
    max.cost = std::max(max.cost, c.raw.cost);
  }
  auto ratio = [](double v, double m) { return m > 0.0 ? v / m : 0.0; };
  for (auto& c : candidates) {
    c.normalized = FeatureTuple{
        .distance_km = ratio(c.raw.distance_km, max.distance_km),
        .charge_hours = ratio(c.raw.charge_hours, max.charge_hours),
        .wait_hours = ratio(c.raw.wait_hours, max.wait_hours),
        .cost = ratio(c.raw.cost, max.cost),
    };
  }
}

/// Weighted performance metric over normalized features; lower is better.
/// Dividing by the weight sum keeps the result in [0, 1] and is a constant
/// rescaling of the mean-weight form, so the argmin is unchanged.
inline double score(const Weights& w, const FeatureTuple& normalized) {
  const double sum = w.sum();
  if (!(sum > 0.0)) {
    throw Error(ErrorCode::ZeroWeightSum, "weight sum must be positive");
  }
  return (w.distance * normalized.distance_km + w.charge_time * normalized.charge_hours +
          w.wait_time * normalized.wait_hours + w.cost * normalized.cost) /
         sum;
}

inline double score(const Weights& w, const CandidateOption& c) { return score(w, c.normalized); }

/// Deterministic ranking order: score, then raw distance, then station id.
inline bool ranks_before(const CandidateOption& a, const CandidateOption& b) {
  return std::forward_as_tuple(a.score, a.raw.distance_km, a.station_id, a.connector_index,
                               a.mode) < std::forward_as_tuple(b.score, b.raw.distance_km,
                                                               b.station_id, b.connector_index,
                                                               b.mode);
}

inline MatchResult match(const MatchRequest& req, std::span<const Station> stations) {
  validate(req);
  FilterResult filtered = filter_hard_constraints(req, stations);
  if (filtered.candidates.empty()) {
    throw NoFeasibleStationError(std::move(filtered.excluded));
  }

  std::vector<CandidateOption> options;
  for (const auto& pair : filtered.candidates) {
    const Station& st = stations[pair.station_index];
    const Connector& c = st.connectors[pair.connector_index];
    const FeatureTuple raw = compute_features(req, st, c);
    // Every mode is its own option; only ChargeOnly semantics exist, so the
    // features are shared.
    for (ChargeMode mode : c.modes) {
      options.push_back({st.id, pair.connector_index, mode, raw, {}, 0.0});
    }
  }
  normalize(options);
  for (auto& o : options) o.score = score(req.weights, o);
  std::sort(options.begin(), options.end(), ranks_before);

  MatchResult result;
  result.best = options.front();
  result.ranking = std::move(options);
  result.excluded = std::move(filtered.excluded);
  return result;
}

/// Scores rows that are already normalized, without re-normalizing.
inline std::vector<double> score_fixture(const Weights& weights,
                                         std::span<const FeatureTuple> table) {
  validate(weights);
  std::vector<double> out;
  out.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    const FeatureTuple& row = table[i];
    for (double v : {row.distance_km, row.charge_hours, row.wait_hours, row.cost}) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw Error(ErrorCode::ComponentOutOfRange,
                    "fixture row " + std::to_string(i) + " has a component outside [0, 1]");
      }
    }
    out.push_back(score(weights, row));
  }
  return out;
}

}  // namespace wecharge

#endif
