#include <gtest/gtest.h>

#include <set>

#include "support/case_study.hpp"
#include "wecharge/service.hpp"

namespace {

using namespace wecharge;
using service::Api;
using service::Response;
namespace cs = wecharge::testkit::case_study;

json station_json(const std::string& id) {
  return json::parse(R"({
    "id": ")" + id + R"(", "name": "driveway",
    "location": {"lat": 50.93, "lon": 5.33},
    "connectors": [{"plug": "Type2",
      "power": {"rated_power_kw": 7.4, "current": "AC", "phases": 1, "amperage_a": 32, "voltage_v": 230},
      "tariff_per_kwh": 0.25}],
    "charger_count": 1, "ownership": "Private",
    "availability": [{"start": 1800000000, "end": 1800100000}]})");
}

json reservation_json(const std::string& station, std::int64_t start, std::int64_t end) {
  return json{{"station_id", station},
              {"connector_index", 0},
              {"window", {{"start", start}, {"end", end}}},
              {"vehicle_id", "car-1"}};
}

std::set<std::string> error_names() {
  std::set<std::string> out;
  for (const auto& [_, name] : kErrorCodeNames) out.emplace(name);
  return out;
}

void expect_error(const Response& r, int status, const std::string& code) {
  EXPECT_EQ(r.status, status) << r.body.dump();
  EXPECT_EQ(r.body.value("code", ""), code) << r.body.dump();
  EXPECT_TRUE(error_names().contains(r.body.value("code", "")));
  EXPECT_TRUE(r.body.contains("message"));
}

class ApiTest : public ::testing::Test {
 protected:
  StationRegistry registry;
  Api api{registry};

  void load_case_study() {
    for (const auto& s : cs::catalog_stations()) registry.register_station(s);
  }
};

TEST_F(ApiTest, PostStation) {
  const Response ok = api.post_station(station_json("h1").dump());
  EXPECT_EQ(ok.status, 201);
  EXPECT_EQ(ok.body["station_id"], "h1");
  expect_error(api.post_station(station_json("h1").dump()), 409, "DuplicateId");
  json bad = station_json("h2");
  bad["location"]["lat"] = 95;
  expect_error(api.post_station(bad.dump()), 400, "InvalidStation");
  expect_error(api.post_station("{not json"), 400, "ParseError");
}

TEST_F(ApiTest, GetStationRoundTrip) {
  api.post_station(station_json("h1").dump());
  const Response r = api.get_station("h1");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(station_from_json(r.body), station_from_json(station_json("h1")));
  EXPECT_TRUE(r.body.contains("effective_availability"));
  expect_error(api.get_station("h9"), 404, "UnknownStation");
  const Response all = api.get_stations();
  EXPECT_EQ(all.body["stations"].size(), 1u);
  EXPECT_GE(all.body["version"].get<int>(), 1);
}

TEST_F(ApiTest, OptOutVisibleAndReversible) {
  api.post_station(station_json("h1").dump());
  EXPECT_EQ(api.post_opt_out("h1", "").status, 200);
  EXPECT_TRUE(api.get_station("h1").body["opted_out"].get<bool>());
  api.post_opt_out("h1", R"({"opted_out": false})");
  EXPECT_FALSE(api.get_station("h1").body["opted_out"].get<bool>());
  expect_error(api.post_opt_out("zz", ""), 404, "UnknownStation");
}

TEST_F(ApiTest, PutAvailability) {
  api.post_station(station_json("h1").dump());
  const Response r = api.put_availability("h1", R"({"availability": [{"start": 10, "end": 20}]})");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(api.get_station("h1").body["availability"][0]["end"], 20);
  expect_error(api.put_availability("h1", R"({"availability": [{"start": 30, "end": 20}]})"), 400,
               "InvalidStation");
}

TEST_F(ApiTest, MatchCaseStudyScenarios) {
  load_case_study();
  const Response s1 = api.post_match(json(cs::request(cs::kS1)).dump());
  ASSERT_EQ(s1.status, 200) << s1.body.dump();
  EXPECT_EQ(s1.body["best"]["station_id"], "1");
  const Response s2 = api.post_match(json(cs::request(cs::kS2)).dump());
  EXPECT_EQ(s2.body["best"]["station_id"], "12");
  EXPECT_EQ(match_result_from_json(s1.body), match(cs::request(cs::kS1), cs::catalog_stations()));
}

TEST_F(ApiTest, MatchErrors) {
  load_case_study();
  MatchRequest req = cs::request(cs::kS1);
  req.weights = {0, 0, 0, 0};
  expect_error(api.post_match(json(req).dump()), 422, "ZeroWeightSum");
  req = cs::request(cs::kS1);
  req.ev.current_soc = 0.0;
  const Response none = api.post_match(json(req).dump());
  expect_error(none, 404, "NoFeasibleStation");
  EXPECT_EQ(none.body["details"]["excluded"].size(), 25u);
  json missing = json(cs::request(cs::kS1));
  missing.erase("origin");
  expect_error(api.post_match(missing.dump()), 400, "ParseError");
}

TEST_F(ApiTest, MatchDoesNotReserve) {
  load_case_study();
  const auto v = registry.snapshot()->version();
  api.post_match(json(cs::request(cs::kS1)).dump());
  EXPECT_EQ(registry.snapshot()->version(), v);
}

TEST_F(ApiTest, ReservationLifecycle) {
  api.post_station(station_json("h1").dump());
  const Response made = api.post_reservation(reservation_json("h1", 1800000000, 1800003600).dump());
  ASSERT_EQ(made.status, 201) << made.body.dump();
  const std::string id = made.body["reservation_id"];
  EXPECT_EQ(made.body["status"], "Confirmed");
  expect_error(api.post_reservation(reservation_json("h1", 1800001800, 1800005400).dump()), 409,
               "SlotTaken");
  EXPECT_EQ(api.get_reservation(id).body, made.body);

  EXPECT_EQ(api.delete_reservation(id).body["status"], "Cancelled");
  const Response again = api.delete_reservation(id);
  expect_error(again, 409, "InvalidTransition");
  EXPECT_EQ(api.delete_reservation(id).body, again.body);
  expect_error(api.get_reservation("res-404"), 404, "UnknownReservation");
  expect_error(api.delete_reservation("res-404"), 404, "UnknownReservation");
}

TEST_F(ApiTest, OverstayAndNotifications) {
  api.post_station(station_json("h1").dump());
  const std::string id =
      api.post_reservation(reservation_json("h1", 1800000000, 1800003600).dump()).body["reservation_id"];
  expect_error(api.post_overstay(id, R"({"now": 1800003600})"), 409, "NotYetEnded");
  EXPECT_EQ(api.post_overstay(id, R"({"now": 1800003660})").body["status"], "Overstayed");
  const Response notes = api.get_notifications(0);
  ASSERT_EQ(notes.body["notifications"].size(), 1u);
  EXPECT_EQ(notes.body["notifications"][0]["reservation_id"], id);
  const auto seq = notes.body["notifications"][0]["sequence"].get<std::uint64_t>();
  EXPECT_TRUE(api.get_notifications(seq).body["notifications"].empty());

  const std::string other =
      api.post_reservation(reservation_json("h1", 1800010000, 1800013600).dump()).body["reservation_id"];
  EXPECT_EQ(api.post_complete(other).body["status"], "Completed");
  expect_error(api.post_complete(other), 409, "InvalidTransition");
}

TEST(ErrorMapping, EveryCodeHasAStatus) {
  for (const auto& [code, name] : kErrorCodeNames) {
    const int s = service::http_status(code);
    EXPECT_TRUE(s == 400 || s == 404 || s == 409 || s == 422 || s == 500) << name;
  }
}

TEST(Config, FileAndEnvironment) {
  const auto c = service::config_from_json(
      json::parse(R"({"bind_address": "0.0.0.0", "port": 9001, "event_log": "/tmp/x.jsonl"})"));
  EXPECT_EQ(c.bind_address, "0.0.0.0");
  EXPECT_EQ(c.port, 9001);
  EXPECT_EQ(c.event_log->string(), "/tmp/x.jsonl");
  EXPECT_FALSE(c.catalog.has_value());

  std::map<std::string, std::string> env{{"WECHARGE_PORT", "7000"}, {"WECHARGE_EVENT_LOG", "/tmp/y"}};
  auto lookup = [&](const char* k) -> const char* {
    auto it = env.find(k);
    return it == env.end() ? nullptr : it->second.c_str();
  };
  const auto o = service::apply_env_overrides(c, lookup);
  EXPECT_EQ(o.port, 7000);
  EXPECT_EQ(o.bind_address, "0.0.0.0");
  EXPECT_EQ(o.event_log->string(), "/tmp/y");
  env["WECHARGE_PORT"] = "http";
  EXPECT_THROW(service::apply_env_overrides(c, lookup), Error);
  EXPECT_THROW(service::config_from_json(json::parse(R"({"port": "eighty"})")), Error);
}

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (const auto& s : cs::catalog_stations()) registry.register_station(s);
    port = server.start("127.0.0.1", 0);
  }

  StationRegistry registry;
  Api api{registry};
  service::HttpServer server{api};
  int port = 0;
};

TEST_F(HttpTest, EndToEndOverLoopback) {
  httplib::Client client("127.0.0.1", port);
  auto res = client.Post("/match", json(cs::request(cs::kS2)).dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["best"]["station_id"], "12");

  res = client.Get("/stations/12");
  ASSERT_TRUE(res);
  EXPECT_EQ(station_from_json(json::parse(res->body)), registry.snapshot()->find("12")->station);

  res = client.Post("/reservations", reservation_json("12", 1791968400, 1791975600).dump(),
                    "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  const std::string id = json::parse(res->body)["reservation_id"];

  res = client.Delete("/reservations/" + id);
  ASSERT_TRUE(res);
  EXPECT_EQ(json::parse(res->body)["status"], "Cancelled");

  res = client.Post("/stations/3/opt-out", "", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_TRUE(json::parse(client.Get("/stations/3")->body)["opted_out"].get<bool>());

  res = client.Get("/notifications?after=0");
  ASSERT_TRUE(res);
  EXPECT_TRUE(json::parse(res->body)["notifications"].empty());

  res = client.Get("/nowhere");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
  EXPECT_TRUE(error_names().contains(json::parse(res->body)["code"].get<std::string>()));
}

}  // namespace
