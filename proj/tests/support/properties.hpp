#ifndef WECHARGE_TESTS_PROPERTIES_HPP
#define WECHARGE_TESTS_PROPERTIES_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "generators.hpp"
#include "oracle.hpp"
#include "wecharge/matching.hpp"

// Randomized matcher properties, shared by the unit suite and the
// acceptance runner. Each check returns a failure description or nullopt.
namespace wecharge::testkit::properties {

struct Outcome {
  int trials = 0;       // instances that produced a ranking
  int failures = 0;
  std::string first_failure;
};

using Check = std::function<std::optional<std::string>(Rng&)>;

/// Runs `check` until `trials` instances were evaluated. Instances with no
/// feasible station are skipped (they exercise nothing) and do not count.
inline Outcome run(const Check& check, int trials, std::uint64_t seed) {
  Outcome out;
  Rng rng(seed);
  int attempts = 0;
  while (out.trials < trials && attempts < trials * 50) {
    ++attempts;
    std::optional<std::string> failure;
    try {
      failure = check(rng);
    } catch (const NoFeasibleStationError&) {
      continue;
    } catch (const std::exception& e) {
      failure = std::string("unexpected exception: ") + e.what();
    }
    ++out.trials;
    if (failure) {
      if (out.failures == 0) out.first_failure = *failure;
      ++out.failures;
    }
  }
  return out;
}

inline bool close(double a, double b, double tol = 1e-12) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

inline std::string describe(const CandidateOption& c) {
  std::ostringstream os;
  os << c.station_id << "#" << c.connector_index << "/" << to_string(c.mode) << " P=" << c.score;
  return os.str();
}

/// Scaling every weight by k > 0 leaves the ranking order and scores alone.
inline std::optional<std::string> weight_scaling(Rng& rng) {
  Instance inst = random_instance(rng);
  const MatchResult base = match(inst.request, inst.stations);
  const double k = std::pow(10.0, uniform(rng, -3.0, 3.0));
  MatchRequest scaled = inst.request;
  scaled.weights = {k * scaled.weights.distance, k * scaled.weights.charge_time,
                    k * scaled.weights.wait_time, k * scaled.weights.cost};
  const MatchResult other = match(scaled, inst.stations);
  if (base.ranking.size() != other.ranking.size()) return "ranking sizes differ";
  for (std::size_t i = 0; i < base.ranking.size(); ++i) {
    const auto& a = base.ranking[i];
    const auto& b = other.ranking[i];
    if (a.station_id != b.station_id || a.connector_index != b.connector_index || a.mode != b.mode) {
      return "rank " + std::to_string(i) + " changed under k=" + std::to_string(k) + ": " +
             describe(a) + " vs " + describe(b);
    }
    if (!close(a.score, b.score)) return "score changed: " + describe(a) + " vs " + describe(b);
  }
  return std::nullopt;
}

/// Multiplying one raw feature column by c > 0 leaves every normalized
/// feature and score unchanged.
inline std::optional<std::string> feature_unit_scaling(Rng& rng) {
  const int n = uniform_int(rng, 1, 12);
  std::vector<CandidateOption> base;
  for (int i = 0; i < n; ++i) {
    CandidateOption c;
    c.station_id = std::to_string(i);
    c.raw = {uniform(rng, 0.0, 50.0), uniform(rng, 0.2, 20.0), 1.0 / uniform_int(rng, 1, 12),
             chance(rng, 0.2) ? 0.0 : uniform(rng, 0.0, 40.0)};
    base.push_back(c);
  }
  const int column = uniform_int(rng, 0, 3);
  const double k = std::pow(10.0, uniform(rng, -4.0, 4.0));
  std::vector<CandidateOption> scaled = base;
  for (auto& c : scaled) {
    double* f[] = {&c.raw.distance_km, &c.raw.charge_hours, &c.raw.wait_hours, &c.raw.cost};
    *f[column] *= k;
  }
  normalize(base);
  normalize(scaled);
  const Weights w = random_weights(rng);
  for (int i = 0; i < n; ++i) {
    const auto& a = base[static_cast<std::size_t>(i)].normalized;
    const auto& b = scaled[static_cast<std::size_t>(i)].normalized;
    if (!close(a.distance_km, b.distance_km) || !close(a.charge_hours, b.charge_hours) ||
        !close(a.wait_hours, b.wait_hours) || !close(a.cost, b.cost)) {
      return "normalized features changed when scaling column " + std::to_string(column);
    }
    if (!close(score(w, a), score(w, b))) return "score changed when scaling a column";
  }
  return std::nullopt;
}

/// 0 <= P_i <= 1, and with equal weights P_i is the mean of the features.
inline std::optional<std::string> score_bounds(Rng& rng) {
  Instance inst = random_instance(rng);
  const MatchResult r = match(inst.request, inst.stations);
  for (const auto& c : r.ranking) {
    if (!(c.score >= 0.0 && c.score <= 1.0)) return "score out of [0, 1]: " + describe(c);
    const auto& f = c.normalized;
    for (double v : {f.distance_km, f.charge_hours, f.wait_hours, f.cost}) {
      if (!(v >= 0.0 && v <= 1.0)) return "normalized feature out of [0, 1]: " + describe(c);
    }
    const double mean = (f.distance_km + f.charge_hours + f.wait_hours + f.cost) / 4.0;
    if (std::abs(score(Weights{0.25, 0.25, 0.25, 0.25}, f) - mean) > 1e-12) {
      return "equal-weight score differs from feature mean: " + describe(c);
    }
  }
  for (std::size_t i = 1; i < r.ranking.size(); ++i) {
    if (r.ranking[i].score < r.ranking[i - 1].score) return "ranking not ascending";
  }
  if (!(r.best == r.ranking.front())) return "best is not ranking[0]";
  return std::nullopt;
}

/// A candidate that is no worse on every normalized feature and strictly
/// better on one never ranks below the one it dominates. Weights are kept
/// strictly positive: a zero weight makes the dominating feature irrelevant.
inline std::optional<std::string> dominance(Rng& rng) {
  Instance inst = random_instance(rng);
  inst.request.weights = random_weights(rng, true);
  const MatchResult r = match(inst.request, inst.stations);
  for (std::size_t i = 0; i < r.ranking.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const auto& lo = r.ranking[i].normalized;  // ranked later
      const auto& hi = r.ranking[j].normalized;
      const bool le = lo.distance_km <= hi.distance_km && lo.charge_hours <= hi.charge_hours &&
                      lo.wait_hours <= hi.wait_hours && lo.cost <= hi.cost;
      const bool lt = lo.distance_km < hi.distance_km || lo.charge_hours < hi.charge_hours ||
                      lo.wait_hours < hi.wait_hours || lo.cost < hi.cost;
      if (le && lt) {
        return describe(r.ranking[i]) + " dominates but ranks below " + describe(r.ranking[j]);
      }
    }
  }
  return std::nullopt;
}

/// match() agrees with the brute-force oracle on instances of <= 10 stations.
inline std::optional<std::string> oracle_equivalence(Rng& rng) {
  Instance inst = random_instance(rng, 10);
  const auto expected = oracle::best(inst.request, inst.stations);
  std::optional<MatchResult> got;
  try {
    got = match(inst.request, inst.stations);
  } catch (const NoFeasibleStationError&) {
    if (expected) return "match found nothing but oracle picked " + expected->station_id;
    throw;
  }
  if (!expected) return "oracle found nothing but match picked " + describe(got->best);
  const auto& b = got->best;
  if (b.station_id != expected->station_id || b.connector_index != expected->connector_index ||
      b.mode != expected->mode) {
    return "best mismatch: match " + describe(b) + ", oracle " + expected->station_id + "#" +
           std::to_string(expected->connector_index) + " P=" + std::to_string(expected->score);
  }
  if (!close(b.score, expected->score, 1e-9)) return "best score mismatch vs oracle";
  if (got->ranking.size() != oracle::score_all(inst.request, inst.stations).size()) {
    return "candidate count differs from oracle";
  }
  return std::nullopt;
}

}  // namespace wecharge::testkit::properties

#endif
