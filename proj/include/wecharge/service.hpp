#ifndef WECHARGE_SERVICE_HPP
#define WECHARGE_SERVICE_HPP

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "wecharge/error.hpp"
#include "wecharge/matching.hpp"
#include "wecharge/registry.hpp"
#include "wecharge/serialization.hpp"

namespace wecharge::service {

struct Response {
  int status = 200;
  json body;
};

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidStation:
    case ErrorCode::ParseError:
      return 400;
    case ErrorCode::UnknownStation:
    case ErrorCode::UnknownReservation:
    case ErrorCode::NoFeasibleStation:
      return 404;
    case ErrorCode::DuplicateId:
    case ErrorCode::SlotTaken:
    case ErrorCode::Unavailable:
    case ErrorCode::InvalidTransition:
    case ErrorCode::NotYetEnded:
      return 409;
    case ErrorCode::ZeroWeightSum:
    case ErrorCode::NoDcCapability:
    case ErrorCode::EmptyCandidateSet:
    case ErrorCode::ComponentOutOfRange:
      return 422;
    case ErrorCode::FixtureMissing:
    case ErrorCode::InternalError:
      return 500;
  }
  return 500;
}

inline Response error_response(ErrorCode code, const std::string& message,
                               json details = nullptr) {
  json body{{"code", to_string(code)}, {"message", message}};
  if (!details.is_null()) body["details"] = std::move(details);
  return {http_status(code), std::move(body)};
}

/// Transport-independent request handlers. Each returns the status and JSON
/// body the HTTP layer sends; module errors become ApiError bodies.
class Api {
 public:
  explicit Api(StationRegistry& registry) : registry_(registry) {}

  Response post_station(const std::string& body) {
    return guarded([&] {
      const json j = parse_body(body);
      const std::string id = registry_.register_station(station_from_json(j));
      return Response{201, json{{"station_id", id}}};
    });
  }

  Response get_stations() const {
    return guarded([&] { return Response{200, json(*registry_.snapshot())}; });
  }

  Response get_station(const std::string& id) const {
    return guarded([&] {
      const auto snap = registry_.snapshot();
      const StationView* view = snap->find(id);
      if (!view) throw Error(ErrorCode::UnknownStation, "unknown station '" + id + "'");
      return Response{200, json(*view)};
    });
  }

  Response put_availability(const std::string& id, const std::string& body) {
    return guarded([&] {
      const json j = parse_body(body);
      auto windows = windows_from_json(io::member(j, "availability", ""), "availability");
      const auto version = registry_.set_availability(id, std::move(windows));
      return Response{200, json{{"station_id", id}, {"version", version}}};
    });
  }

  /// Body is optional; `{"opted_out": false}` re-activates the station.
  Response post_opt_out(const std::string& id, const std::string& body) {
    return guarded([&] {
      bool opted_out = true;
      if (body.find_first_not_of(" \t\r\n") != std::string::npos) {
        const json j = parse_body(body);
        if (const json* v = io::optional_member(j, "opted_out")) {
          opted_out = io::as_bool(*v, "opted_out");
        }
      }
      const auto version = registry_.set_opt_out(id, opted_out);
      return Response{200,
                      json{{"station_id", id}, {"opted_out", opted_out}, {"version", version}}};
    });
  }

  /// Read-only: never reserves anything.
  Response post_match(const std::string& body) const {
    return guarded([&] {
      const MatchRequest req = match_request_from_json(parse_body(body));
      const auto stations = registry_.snapshot()->matchable_stations();
      try {
        return Response{200, json(match(req, stations))};
      } catch (const NoFeasibleStationError& e) {
        return error_response(e.code(), e.what(), json{{"excluded", e.excluded()}});
      }
    });
  }

  Response post_reservation(const std::string& body) {
    return guarded([&] {
      const json j = parse_body(body);
      std::size_t connector = 0;
      if (const json* v = io::optional_member(j, "connector_index")) {
        const auto c = io::as_int(*v, "connector_index");
        if (c < 0) io::fail("connector_index", "must be nonnegative");
        connector = static_cast<std::size_t>(c);
      }
      const Reservation r = registry_.reserve(
          io::string_field(j, "station_id", ""), connector,
          window_from_json(io::member(j, "window", ""), "window"),
          io::string_field(j, "vehicle_id", ""));
      return Response{201, json(r)};
    });
  }

  Response get_reservation(const std::string& id) const {
    return guarded([&] {
      auto r = registry_.find_reservation(id);
      if (!r) throw Error(ErrorCode::UnknownReservation, "unknown reservation '" + id + "'");
      return Response{200, json(*r)};
    });
  }

  Response delete_reservation(const std::string& id) {
    return guarded([&] { return Response{200, json(registry_.cancel(id))}; });
  }

  Response post_complete(const std::string& id) {
    return guarded([&] { return Response{200, json(registry_.complete(id))}; });
  }

  Response post_overstay(const std::string& id, const std::string& body) {
    return guarded([&] {
      const json j = parse_body(body);
      const Timestamp now = from_epoch_seconds(io::as_int(io::member(j, "now", ""), "now"));
      return Response{200, json(registry_.flag_overstay(id, now))};
    });
  }

  Response get_notifications(std::uint64_t after) const {
    return guarded([&] {
      return Response{200, json{{"notifications", registry_.notifications(after)}}};
    });
  }

 private:
  static json parse_body(const std::string& body) {
    try {
      return json::parse(body);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::ParseError, std::string("malformed JSON body: ") + e.what());
    }
  }

  template <typename F>
  static Response guarded(F&& f) {
    try {
      return f();
    } catch (const Error& e) {
      return error_response(e.code(), e.what());
    } catch (const std::exception& e) {
      return error_response(ErrorCode::InternalError, e.what());
    }
  }

  StationRegistry& registry_;
};

struct ServiceConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> event_log;
  std::optional<std::filesystem::path> catalog;  // loaded at startup when the registry is empty
};

inline ServiceConfig config_from_json(const json& j) {
  ServiceConfig c;
  io::expect_object(j, "");
  if (const json* v = io::optional_member(j, "bind_address")) c.bind_address = io::as_string(*v, "bind_address");
  if (const json* v = io::optional_member(j, "port")) c.port = static_cast<int>(io::as_int(*v, "port"));
  if (const json* v = io::optional_member(j, "event_log")) c.event_log = io::as_string(*v, "event_log");
  if (const json* v = io::optional_member(j, "catalog")) c.catalog = io::as_string(*v, "catalog");
  return c;
}

inline ServiceConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open config " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

using EnvLookup = std::function<const char*(const char*)>;

/// WECHARGE_BIND_ADDRESS, WECHARGE_PORT and WECHARGE_EVENT_LOG override the
/// corresponding config file entries.
inline ServiceConfig apply_env_overrides(ServiceConfig c, const EnvLookup& env = std::getenv) {
  if (const char* v = env("WECHARGE_BIND_ADDRESS"); v && *v) c.bind_address = v;
  if (const char* v = env("WECHARGE_PORT"); v && *v) {
    char* end = nullptr;
    const long port = std::strtol(v, &end, 10);
    if (*end != '\0' || port < 0 || port > 65535) {
      throw Error(ErrorCode::InvalidArgument, std::string("invalid WECHARGE_PORT '") + v + "'");
    }
    c.port = static_cast<int>(port);
  }
  if (const char* v = env("WECHARGE_EVENT_LOG"); v && *v) c.event_log = v;
  return c;
}

/// HTTP/1.1 front end over an Api.
class HttpServer {
 public:
  explicit HttpServer(Api& api) : api_(api) { install_routes(); }

  ~HttpServer() { stop(); }

  /// Binds and serves on a background thread. Port 0 picks a free port.
  int start(const std::string& host, int port) {
    bound_port_ = port == 0 ? server_.bind_to_any_port(host) : (server_.bind_to_port(host, port) ? port : -1);
    if (bound_port_ < 0) {
      throw Error(ErrorCode::InternalError, "cannot bind " + host + ":" + std::to_string(port));
    }
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    return bound_port_;
  }

  /// Binds and blocks until stop() is called from elsewhere.
  void run(const std::string& host, int port) {
    if (!server_.listen(host, port)) {
      throw Error(ErrorCode::InternalError, "cannot listen on " + host + ":" + std::to_string(port));
    }
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const noexcept { return bound_port_; }

 private:
  static void send(httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json; charset=utf-8");
  }

  void install_routes() {
    server_.Post("/stations", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, api_.post_station(req.body));
    });
    server_.Get("/stations", [this](const httplib::Request&, httplib::Response& res) {
      send(res, api_.get_stations());
    });
    server_.Get(R"(/stations/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, api_.get_station(req.matches[1]));
    });
    server_.Put(R"(/stations/([^/]+)/availability)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  send(res, api_.put_availability(req.matches[1], req.body));
                });
    server_.Post(R"(/stations/([^/]+)/opt-out)",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   send(res, api_.post_opt_out(req.matches[1], req.body));
                 });
    server_.Post("/match", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, api_.post_match(req.body));
    });
    server_.Post("/reservations", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, api_.post_reservation(req.body));
    });
    server_.Get(R"(/reservations/([^/]+))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  send(res, api_.get_reservation(req.matches[1]));
                });
    server_.Delete(R"(/reservations/([^/]+))",
                   [this](const httplib::Request& req, httplib::Response& res) {
                     send(res, api_.delete_reservation(req.matches[1]));
                   });
    server_.Post(R"(/reservations/([^/]+)/complete)",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   send(res, api_.post_complete(req.matches[1]));
                 });
    server_.Post(R"(/reservations/([^/]+)/overstay)",
                 [this](const httplib::Request& req, httplib::Response& res) {
                   send(res, api_.post_overstay(req.matches[1], req.body));
                 });
    server_.Get("/notifications", [this](const httplib::Request& req, httplib::Response& res) {
      std::uint64_t after = 0;
      if (req.has_param("after")) {
        try {
          after = std::stoull(req.get_param_value("after"));
        } catch (const std::exception&) {
          send(res, error_response(ErrorCode::InvalidArgument, "'after' must be an integer"));
          return;
        }
      }
      send(res, api_.get_notifications(after));
    });
    server_.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (!res.body.empty()) return;
      const auto code = res.status == 404 ? ErrorCode::InvalidArgument : ErrorCode::InternalError;
      json body{{"code", to_string(code)},
                {"message", res.status == 404 ? "no such endpoint" : "internal error"}};
      res.set_content(body.dump(), "application/json; charset=utf-8");
    });
    server_.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr) {
          res.status = 500;
          res.set_content(json{{"code", "InternalError"}, {"message", "unhandled exception"}}.dump(),
                          "application/json; charset=utf-8");
        });
  }

  Api& api_;
  httplib::Server server_;
  std::thread thread_;
  int bound_port_ = -1;
};

}  // namespace wecharge::service

#endif
