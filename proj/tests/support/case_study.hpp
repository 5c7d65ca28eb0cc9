#ifndef WECHARGE_TESTS_CASE_STUDY_HPP
#define WECHARGE_TESTS_CASE_STUDY_HPP

#include <filesystem>
#include <vector>

#include "wecharge/catalog.hpp"
#include "wecharge/fixture.hpp"
#include "wecharge/matching.hpp"
#include "wecharge/serialization.hpp"

#ifndef WECHARGE_DATA_DIR
#define WECHARGE_DATA_DIR "data"
#endif

namespace wecharge::testkit::case_study {

inline std::filesystem::path data_path(const char* name) {
  return std::filesystem::path(WECHARGE_DATA_DIR) / name;
}

inline const Weights kS1{0.25, 0.25, 0.25, 0.25};
inline const Weights kS2{0.4, 0.1, 0.4, 0.1};  // distance, charge time, wait, cost

// Incoming vehicle position: Hasselt city centre.
inline const GeoPoint kOrigin{50.9307, 5.3325};

inline EVProfile leaf() {
  return ev_profile_from_json(json::parse(catalog::read_file(data_path("nissan_leaf_2018.json"))));
}

inline std::vector<Station> catalog_stations() {
  return catalog::load_stations(data_path("case_study_catalog.json"));
}

inline std::vector<FixtureRow> table() { return load_fixture(data_path("table2.csv")); }

inline MatchRequest request(const Weights& w) {
  MatchRequest req;
  req.ev = leaf();
  req.origin = kOrigin;
  req.weights = w;
  req.window = {from_epoch_seconds(1'791'968'400), from_epoch_seconds(1'791'975'600)};
  return req;
}

}  // namespace wecharge::testkit::case_study

#endif
