// wecharge: operator CLI for station catalogs, match requests, the
// case-study reproduction, and running the HTTP service.
//
// Exit codes: 0 success, 1 domain failure, 2 usage or parse error.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "wecharge/wecharge.hpp"

#ifndef WECHARGE_DATA_DIR
#define WECHARGE_DATA_DIR "data"
#endif

namespace {

using namespace wecharge;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

constexpr double kFixtureTolerance = 0.002;

std::string fmt(const char* format, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("WECHARGE_DATA_DIR"); env && *env) return env;
  return WECHARGE_DATA_DIR;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidStation:
    case ErrorCode::ZeroWeightSum:
    case ErrorCode::FixtureMissing:
      return kExitUsage;
    default:
      return kExitDomain;
  }
}

AvailabilityWindow parse_window(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "--window expects start,end in epoch seconds");
  }
  try {
    std::size_t used = 0;
    const auto start = std::stoll(text.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument("start");
    const std::string rest = text.substr(comma + 1);
    const auto end = std::stoll(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("end");
    AvailabilityWindow w{from_epoch_seconds(start), from_epoch_seconds(end)};
    validate(w);
    return w;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidArgument, "--window expects start,end in epoch seconds");
  }
}

std::unique_ptr<httplib::Client> make_client(const std::string& url) {
  auto client = std::make_unique<httplib::Client>(url);
  client->set_connection_timeout(5);
  client->set_read_timeout(30);
  return client;
}

json response_json(const httplib::Result& res) {
  if (!res) {
    throw Error(ErrorCode::InternalError, "request failed: " + httplib::to_string(res.error()));
  }
  try {
    return json::parse(res->body);
  } catch (const json::parse_error&) {
    throw Error(ErrorCode::InternalError, "service returned non-JSON body");
  }
}

ErrorCode api_error_code(const json& body) {
  if (body.is_object() && body.contains("code") && body["code"].is_string()) {
    if (auto c = error_code_from_string(body["code"].get<std::string>())) return *c;
  }
  return ErrorCode::InternalError;
}

// ---- catalog load ----

struct CatalogOptions {
  std::string file;
  std::string server;
  std::string event_log;
};

int run_catalog_load(const CatalogOptions& opt) {
  std::vector<catalog::Record> records;
  try {
    records = catalog::parse(catalog::read_file(opt.file));
  } catch (const Error& e) {
    std::cerr << opt.file << ": " << e.what() << "\n";
    return kExitUsage;
  }

  catalog::LoadReport report;
  if (!opt.server.empty()) {
    auto client = make_client(opt.server);
    for (const auto& rec : records) {
      if (!rec.station) {
        report.rejects.push_back({rec.index, rec.line, {}, rec.error_code, rec.error});
        continue;
      }
      const json body = response_json(
          client->Post("/stations", json(*rec.station).dump(), "application/json"));
      if (body.contains("station_id")) {
        ++report.registered;
      } else {
        report.rejects.push_back({rec.index, rec.line, rec.station->id, api_error_code(body),
                                  body.value("message", std::string("rejected"))});
      }
    }
  } else {
    std::unique_ptr<StationRegistry> registry =
        opt.event_log.empty() ? std::make_unique<StationRegistry>()
                              : std::make_unique<StationRegistry>(std::filesystem::path(opt.event_log));
    report = catalog::load_into(*registry, records);
  }

  std::cout << "registered " << report.registered << " station(s), rejected "
            << report.rejects.size() << "\n";
  int code = kExitOk;
  for (const auto& r : report.rejects) {
    std::cout << "  reject record " << r.index << " (line " << r.line << ")"
              << (r.station_id.empty() ? "" : " id " + r.station_id) << ": [" << to_string(r.code)
              << "] " << r.message << "\n";
    code = std::max(code, exit_code_for(r.code));
  }
  return code;
}

// ---- match ----

struct MatchOptions {
  double lat = 0.0;
  double lon = 0.0;
  Weights weights{0.25, 0.25, 0.25, 0.25};
  std::string ev_file;
  std::string window;
  std::string catalog_file;
  std::string server;
  std::string event_log;
  std::string format = "table";
  double safety_margin = kDefaultSafetyMargin;
};

void print_exclusions(std::ostream& os, const std::vector<Exclusion>& excluded) {
  for (const auto& e : excluded) {
    os << "  excluded station " << e.station_id << " connector " << e.connector_index << ": "
       << to_string(e.reason) << "\n";
  }
}

void print_ranking(std::ostream& os, const MatchResult& r) {
  os << fmt("%4s %-8s %4s %-10s %8s %7s %7s %8s %6s %6s %6s %6s %6s\n", "rank", "id", "conn",
            "mode", "dist_km", "time_h", "wait_h", "cost", "d^", "t^", "s^", "c^", "P");
  for (std::size_t i = 0; i < r.ranking.size(); ++i) {
    const auto& c = r.ranking[i];
    os << fmt("%4zu %-8s %4zu %-10s %8.3f %7.3f %7.3f %8.3f %6.3f %6.3f %6.3f %6.3f %6.3f\n",
              i + 1, c.station_id.c_str(), c.connector_index,
              std::string(to_string(c.mode)).c_str(), c.raw.distance_km, c.raw.charge_hours,
              c.raw.wait_hours, c.raw.cost, c.normalized.distance_km, c.normalized.charge_hours,
              c.normalized.wait_hours, c.normalized.cost, c.score);
  }
  os << fmt("best: station %s connector %zu (P = %.3f)\n", r.best.station_id.c_str(),
            r.best.connector_index, r.best.score);
  if (!r.excluded.empty()) print_exclusions(os, r.excluded);
}

int run_match(const MatchOptions& opt) {
  MatchRequest req;
  try {
    req.ev = ev_profile_from_json(json::parse(catalog::read_file(opt.ev_file)));
    req.origin = GeoPoint(opt.lat, opt.lon);
    req.weights = opt.weights;
    req.safety_margin = opt.safety_margin;
    if (opt.window.empty()) {
      const auto now = StationRegistry::system_now();
      req.window = {now, now + std::chrono::hours{1}};
    } else {
      req.window = parse_window(opt.window);
    }
    validate(req);
  } catch (const json::parse_error& e) {
    std::cerr << opt.ev_file << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  MatchResult result;
  if (!opt.server.empty()) {
    auto client = make_client(opt.server);
    json body;
    int status = 0;
    try {
      auto res = client->Post("/match", json(req).dump(), "application/json");
      body = response_json(res);
      status = res->status;
    } catch (const Error& e) {
      std::cerr << e.what() << "\n";
      return kExitDomain;
    }
    if (status != 200) {
      std::cerr << "match failed: [" << body.value("code", "?") << "] "
                << body.value("message", "") << "\n";
      if (body.contains("details") && body["details"].contains("excluded")) {
        std::vector<Exclusion> excluded;
        for (const auto& e : body["details"]["excluded"]) excluded.push_back(exclusion_from_json(e));
        print_exclusions(std::cerr, excluded);
      }
      return exit_code_for(api_error_code(body));
    }
    result = match_result_from_json(body);
  } else {
    std::unique_ptr<StationRegistry> registry;
    try {
      registry = opt.event_log.empty()
                     ? std::make_unique<StationRegistry>()
                     : std::make_unique<StationRegistry>(std::filesystem::path(opt.event_log));
      if (!opt.catalog_file.empty()) {
        for (auto& s : catalog::load_stations(opt.catalog_file)) {
          registry->register_station(std::move(s));
        }
      }
    } catch (const Error& e) {
      std::cerr << e.what() << "\n";
      return kExitUsage;
    }
    try {
      result = match(req, registry->snapshot()->matchable_stations());
    } catch (const NoFeasibleStationError& e) {
      std::cerr << "no feasible station\n";
      print_exclusions(std::cerr, e.excluded());
      return kExitDomain;
    }
  }

  if (opt.format == "json") {
    std::cout << json(result).dump(2) << "\n";
  } else {
    print_ranking(std::cout, result);
  }
  return kExitOk;
}

// ---- case-study ----

struct Scenario {
  const char* name;
  Weights weights;
  double FixtureRow::*published;
};

int run_case_study(const std::string& scenario, const std::string& fixture_path) {
  std::vector<FixtureRow> rows;
  try {
    rows = load_fixture(fixture_path.empty() ? data_dir() / "table2.csv"
                                             : std::filesystem::path(fixture_path));
  } catch (const Error& e) {
    std::cerr << "[" << to_string(e.code()) << "] " << e.what() << "\n";
    return kExitUsage;
  }

  std::vector<Scenario> scenarios;
  if (scenario == "s1" || scenario == "both") {
    scenarios.push_back({"S1", {0.25, 0.25, 0.25, 0.25}, &FixtureRow::published_s1});
  }
  if (scenario == "s2" || scenario == "both") {
    scenarios.push_back({"S2", {0.4, 0.1, 0.4, 0.1}, &FixtureRow::published_s2});
  }

  const auto features = fixture_features(rows);
  bool ok = true;
  for (const auto& sc : scenarios) {
    std::vector<double> computed;
    try {
      computed = score_fixture(sc.weights, features);
    } catch (const Error& e) {
      std::cerr << "[" << to_string(e.code()) << "] " << e.what() << "\n";
      return kExitUsage;
    }
    std::cout << fmt("Scenario %s: weights distance=%.2f charge_time=%.2f wait=%.2f cost=%.2f\n",
                     sc.name, sc.weights.distance, sc.weights.charge_time, sc.weights.wait_time,
                     sc.weights.cost);
    std::cout << fmt("%4s %6s %6s %6s %6s %9s %9s %7s\n", "id", "wait", "dist", "cost", "time",
                     "computed", "published", "|dev|");
    double max_dev = 0.0;
    std::size_t best = 0;
    std::size_t published_best = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      const double published = r.*sc.published;
      const double dev = std::abs(computed[i] - published);
      max_dev = std::max(max_dev, dev);
      if (computed[i] < computed[best]) best = i;
      if (published < rows[published_best].*sc.published) published_best = i;
      std::cout << fmt("%4s %6.3f %6.3f %6.3f %6.3f %9.3f %9.3f %7.4f\n", r.id.c_str(),
                       r.normalized.wait_hours, r.normalized.distance_km, r.normalized.cost,
                       r.normalized.charge_hours, computed[i], published, dev);
    }
    const bool pass = max_dev <= kFixtureTolerance && best == published_best;
    ok = ok && pass;
    std::cout << fmt("%s: rows %zu, max |dev| %.4f (limit %.3f), best id %s at %.3f "
                     "(published best id %s at %.3f) %s\n\n",
                     sc.name, rows.size(), max_dev, kFixtureTolerance, rows[best].id.c_str(),
                     computed[best], rows[published_best].id.c_str(),
                     rows[published_best].*sc.published, pass ? "PASS" : "FAIL");
  }
  return ok ? kExitOk : kExitDomain;
}

// ---- serve ----

std::atomic<bool> g_stop{false};

int run_serve(const std::string& config_path, const std::string& catalog_override) {
  service::ServiceConfig config;
  try {
    if (!config_path.empty()) config = service::load_config(config_path);
    config = service::apply_env_overrides(config);
    if (!catalog_override.empty()) config.catalog = catalog_override;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  std::unique_ptr<StationRegistry> registry;
  try {
    registry = config.event_log ? std::make_unique<StationRegistry>(*config.event_log)
                                : std::make_unique<StationRegistry>();
    if (config.catalog && registry->snapshot()->empty()) {
      const auto report =
          catalog::load_into(*registry, catalog::parse(catalog::read_file(*config.catalog)));
      std::cerr << "loaded " << report.registered << " station(s) from " << config.catalog->string()
                << ", rejected " << report.rejects.size() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  service::Api api(*registry);
  service::HttpServer server(api);
  const int port = server.start(config.bind_address, config.port);
  std::cerr << "listening on " << config.bind_address << ":" << port << "\n";
  std::signal(SIGINT, [](int) { g_stop = true; });
  std::signal(SIGTERM, [](int) { g_stop = true; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  return kExitOk;
}

// ---- stress ----

int run_stress(const std::string& url, const std::string& station, std::size_t connector,
               const std::string& window_text, int attempts) {
  AvailabilityWindow window;
  try {
    window = parse_window(window_text);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }
  std::atomic<int> confirmed{0};
  std::atomic<int> taken{0};
  std::atomic<int> other{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < attempts; ++i) {
    threads.emplace_back([&, i] {
      auto client = make_client(url);
      const json body{{"station_id", station},
                      {"connector_index", connector},
                      {"window", window},
                      {"vehicle_id", "stress-" + std::to_string(i)}};
      auto res = client->Post("/reservations", body.dump(), "application/json");
      if (res && res->status == 201) {
        ++confirmed;
      } else if (res && res->status == 409 && res->body.find("SlotTaken") != std::string::npos) {
        ++taken;
      } else {
        ++other;
      }
    });
  }
  for (auto& t : threads) t.join();
  std::cout << "attempts " << attempts << ", confirmed " << confirmed << ", slot_taken " << taken
            << ", other " << other << "\n";
  return other == 0 ? kExitOk : kExitDomain;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wecharge: match electric vehicles to charging stations"};
  app.require_subcommand(1);

  auto* catalog_cmd = app.add_subcommand("catalog", "Station catalog operations");
  catalog_cmd->require_subcommand(1);
  CatalogOptions catalog_opt;
  auto* load_cmd = catalog_cmd->add_subcommand("load", "Register every station in a catalog file");
  load_cmd->add_option("file", catalog_opt.file, "Catalog JSON file")->required();
  load_cmd->add_option("--server", catalog_opt.server, "Service base URL (default: embedded registry)");
  load_cmd->add_option("--event-log", catalog_opt.event_log, "Persist the embedded registry here");

  MatchOptions match_opt;
  auto* match_cmd = app.add_subcommand("match", "Rank stations for an incoming EV");
  match_cmd->add_option("--lat", match_opt.lat, "Origin latitude")->required();
  match_cmd->add_option("--lon", match_opt.lon, "Origin longitude")->required();
  match_cmd->add_option("--w-distance", match_opt.weights.distance, "Distance weight")->required();
  match_cmd->add_option("--w-time", match_opt.weights.charge_time, "Charge-time weight")->required();
  match_cmd->add_option("--w-wait", match_opt.weights.wait_time, "Waiting-time weight")->required();
  match_cmd->add_option("--w-cost", match_opt.weights.cost, "Cost weight")->required();
  match_cmd->add_option("--ev", match_opt.ev_file, "EV profile JSON file")->required();
  match_cmd->add_option("--window", match_opt.window, "Requested window start,end (epoch s)");
  match_cmd->add_option("--safety-margin", match_opt.safety_margin, "Reserved fraction of range");
  auto* source = match_cmd->add_option_group("source");
  source->add_option("--catalog", match_opt.catalog_file, "Catalog JSON for an embedded registry");
  source->add_option("--server", match_opt.server, "Service base URL");
  source->require_option(0, 1);
  match_cmd->add_option("--event-log", match_opt.event_log, "Replay an embedded registry log");
  match_cmd->add_option("--format", match_opt.format, "Output format")
      ->check(CLI::IsMember({"table", "json"}));

  std::string scenario = "both";
  std::string fixture;
  auto* case_cmd = app.add_subcommand("case-study", "Reproduce the published performance table");
  case_cmd->add_option("--scenario", scenario, "s1, s2 or both")
      ->check(CLI::IsMember({"s1", "s2", "both"}));
  case_cmd->add_option("--fixture", fixture, "Fixture CSV (default: bundled table)");

  std::string config_path;
  std::string serve_catalog;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP matching service");
  serve_cmd->add_option("--config", config_path, "JSON config file");
  serve_cmd->add_option("--catalog", serve_catalog, "Catalog to load into an empty registry");

  std::string stress_url;
  std::string stress_station;
  std::size_t stress_connector = 0;
  std::string stress_window;
  int stress_attempts = 64;
  auto* stress_cmd =
      app.add_subcommand("stress", "Fire concurrent reservations at one slot via the service");
  stress_cmd->add_option("--server", stress_url, "Service base URL")->required();
  stress_cmd->add_option("--station", stress_station, "Station id")->required();
  stress_cmd->add_option("--connector", stress_connector, "Connector index");
  stress_cmd->add_option("--window", stress_window, "Window start,end (epoch s)")->required();
  stress_cmd->add_option("--attempts", stress_attempts, "Concurrent attempts")
      ->check(CLI::Range(1, 4096));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (load_cmd->parsed()) return run_catalog_load(catalog_opt);
    if (match_cmd->parsed()) return run_match(match_opt);
    if (case_cmd->parsed()) return run_case_study(scenario, fixture);
    if (serve_cmd->parsed()) return run_serve(config_path, serve_catalog);
    if (stress_cmd->parsed()) {
      return run_stress(stress_url, stress_station, stress_connector, stress_window,
                        stress_attempts);
    }
  } catch (const Error& e) {
    std::cerr << "[" << to_string(e.code()) << "] " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitDomain;
  }
  return kExitUsage;
}
