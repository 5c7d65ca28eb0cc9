#ifndef WECHARGE_REGISTRY_HPP
#define WECHARGE_REGISTRY_HPP

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wecharge/availability.hpp"
#include "wecharge/core_model.hpp"
#include "wecharge/error.hpp"
#include "wecharge/reservation.hpp"
#include "wecharge/serialization.hpp"

namespace wecharge {

struct StationView {
  Station station;  // as declared by the owner
  std::vector<AvailabilityWindow> effective_availability;  // declared minus fully booked spans
};

/// Immutable point-in-time view of the registry.
class RegistrySnapshot {
 public:
  RegistrySnapshot() = default;
  RegistrySnapshot(std::uint64_t version, std::vector<std::shared_ptr<const StationView>> views)
      : version_(version), views_(std::move(views)) {}

  std::uint64_t version() const noexcept { return version_; }
  std::size_t size() const noexcept { return views_.size(); }
  bool empty() const noexcept { return views_.empty(); }
  const StationView& operator[](std::size_t i) const { return *views_[i]; }

  const StationView* find(std::string_view id) const {
    for (const auto& v : views_) {
      if (v->station.id == id) return v.get();
    }
    return nullptr;
  }

  /// Stations with availability replaced by effective availability, ready
  /// for the matching engine.
  std::vector<Station> matchable_stations() const {
    std::vector<Station> out;
    out.reserve(views_.size());
    for (const auto& v : views_) {
      Station s = v->station;
      s.availability = v->effective_availability;
      out.push_back(std::move(s));
    }
    return out;
  }

 private:
  std::uint64_t version_ = 0;
  std::vector<std::shared_ptr<const StationView>> views_;
};

inline void to_json(json& j, const StationView& v) {
  j = v.station;
  j["effective_availability"] = v.effective_availability;
}

inline void to_json(json& j, const RegistrySnapshot& s) {
  json stations = json::array();
  for (std::size_t i = 0; i < s.size(); ++i) stations.push_back(s[i]);
  j = json{{"version", s.version()}, {"stations", stations}};
}

/// Line-delimited JSON event log. The first line is a format header; each
/// following line is {"type", "ts", "payload"}.
class EventLog {
 public:
  static constexpr std::string_view kFormat = "wecharge-events";
  static constexpr int kVersion = 1;

  explicit EventLog(std::filesystem::path path) : path_(std::move(path)) {}

  const std::filesystem::path& path() const noexcept { return path_; }

  std::vector<json> read() const {
    std::vector<json> events;
    std::ifstream in(path_);
    if (!in) return events;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, path_.string() + ":" + std::to_string(line_no) +
                                               ": " + e.what());
      }
      if (!header_seen) {
        if (!j.is_object() || j.value("format", "") != kFormat) {
          throw Error(ErrorCode::ParseError, path_.string() + ": missing event-log header");
        }
        if (j.value("version", 0) != kVersion) {
          throw Error(ErrorCode::ParseError,
                      path_.string() + ": unsupported event-log version " +
                          std::to_string(j.value("version", 0)));
        }
        header_seen = true;
        continue;
      }
      events.push_back(std::move(j));
    }
    return events;
  }

  void append(const json& event) {
    if (!out_.is_open()) open_for_append();
    out_ << event.dump() << '\n';
    out_.flush();
    if (!out_) throw Error(ErrorCode::InternalError, "failed to write " + path_.string());
  }

 private:
  void open_for_append() {
    const bool fresh = !std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0;
    out_.open(path_, std::ios::app);
    if (!out_) throw Error(ErrorCode::InternalError, "cannot open " + path_.string());
    if (fresh) {
      out_ << json{{"format", kFormat}, {"version", kVersion}}.dump() << '\n';
    }
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

/// Mutable source of truth for stations and reservations. Mutations are
/// serialized behind one mutex; readers take immutable snapshots.
class StationRegistry {
 public:
  using Clock = std::function<Timestamp()>;

  static Timestamp system_now() {
    return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  }

  explicit StationRegistry(Clock clock = system_now) : clock_(std::move(clock)) { publish(); }

  /// Replays `event_log` if it exists, then appends every new mutation.
  explicit StationRegistry(std::filesystem::path event_log, Clock clock = system_now)
      : clock_(std::move(clock)), log_(std::in_place, std::move(event_log)) {
    for (const json& event : log_->read()) replay(event);
    publish();
  }

  StationRegistry(const StationRegistry&) = delete;
  StationRegistry& operator=(const StationRegistry&) = delete;

  std::string register_station(Station s) {
    std::lock_guard lock(write_mutex_);
    check_register(s);
    record("register_station", json(s));
    return commit_register(std::move(s));
  }

  std::uint64_t set_opt_out(const std::string& station_id, bool opted_out) {
    std::lock_guard lock(write_mutex_);
    station_index(station_id);
    record("set_opt_out", {{"station_id", station_id}, {"opted_out", opted_out}});
    commit_opt_out(station_id, opted_out);
    return version_;
  }

  std::uint64_t set_availability(const std::string& station_id,
                                 std::vector<AvailabilityWindow> windows) {
    std::lock_guard lock(write_mutex_);
    station_index(station_id);
    try {
      validate_window_list(windows);
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidStation, "station '" + station_id + "': " + e.what());
    }
    record("set_availability", {{"station_id", station_id}, {"availability", windows}});
    commit_availability(station_id, std::move(windows));
    return version_;
  }

  /// Atomic check-and-commit: succeeds iff fewer than charger_count
  /// Confirmed reservations overlap at every instant of `window`.
  Reservation reserve(const std::string& station_id, std::size_t connector_index,
                      const AvailabilityWindow& window, const std::string& vehicle_id) {
    std::lock_guard lock(write_mutex_);
    Reservation r{"res-" + std::to_string(next_reservation_), station_id, connector_index,
                  window, vehicle_id, ReservationStatus::Confirmed};
    check_reserve(r);
    record("reserve", json(r));
    commit_reserve(r);
    return r;
  }

  Reservation cancel(const std::string& reservation_id) {
    return transition("cancel", reservation_id, ReservationStatus::Cancelled);
  }

  Reservation complete(const std::string& reservation_id) {
    return transition("complete", reservation_id, ReservationStatus::Completed);
  }

  /// Marks a reservation whose window ended before `now` as overstayed and
  /// queues a notice. `now` is supplied by the caller; no clock is read.
  Reservation flag_overstay(const std::string& reservation_id, Timestamp now) {
    std::lock_guard lock(write_mutex_);
    check_overstay(reservation_id, now);
    record("flag_overstay",
           {{"reservation_id", reservation_id}, {"now", to_epoch_seconds(now)}});
    return commit_overstay(reservation_id, now);
  }

  std::shared_ptr<const RegistrySnapshot> snapshot() const {
    std::lock_guard lock(snapshot_mutex_);
    return snapshot_;
  }

  std::optional<Reservation> find_reservation(const std::string& reservation_id) const {
    std::lock_guard lock(write_mutex_);
    auto it = reservations_.find(reservation_id);
    if (it == reservations_.end()) return std::nullopt;
    return it->second;
  }

  std::vector<Reservation> reservations_for(const std::string& station_id) const {
    std::lock_guard lock(write_mutex_);
    std::vector<Reservation> out;
    if (auto it = by_station_.find(station_id); it != by_station_.end()) {
      for (const auto& id : it->second) out.push_back(reservations_.at(id));
    }
    return out;
  }

  /// Overstay notices with sequence number greater than `after`.
  std::vector<OverstayNotice> notifications(std::uint64_t after = 0) const {
    std::lock_guard lock(write_mutex_);
    std::vector<OverstayNotice> out;
    for (const auto& n : notices_) {
      if (n.sequence > after) out.push_back(n);
    }
    return out;
  }

 private:
  std::size_t station_index(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error(ErrorCode::UnknownStation, "unknown station '" + id + "'");
    return it->second;
  }

  Reservation& reservation_ref(const std::string& id) {
    auto it = reservations_.find(id);
    if (it == reservations_.end()) {
      throw Error(ErrorCode::UnknownReservation, "unknown reservation '" + id + "'");
    }
    return it->second;
  }

  std::vector<AvailabilityWindow> confirmed_windows(const std::string& station_id) const {
    std::vector<AvailabilityWindow> out;
    if (auto it = by_station_.find(station_id); it != by_station_.end()) {
      for (const auto& id : it->second) {
        const Reservation& r = reservations_.at(id);
        if (r.status == ReservationStatus::Confirmed) out.push_back(r.window);
      }
    }
    return out;
  }

  void record(std::string_view type, json payload) {
    if (!log_) return;
    log_->append(json{{"type", type}, {"ts", to_epoch_seconds(clock_())}, {"payload", std::move(payload)}});
  }

  // ---- checks (throw, never mutate) ----

  void check_register(const Station& s) const {
    validate(s);
    if (index_.contains(s.id)) {
      throw Error(ErrorCode::DuplicateId, "station '" + s.id + "' already registered");
    }
  }

  void check_reserve(const Reservation& r) const {
    const Station& st = stations_[station_index(r.station_id)];
    if (r.connector_index >= st.connectors.size()) {
      throw Error(ErrorCode::InvalidArgument, "station '" + st.id + "' has no connector " +
                                                  std::to_string(r.connector_index));
    }
    validate(r.window);
    if (st.opted_out) {
      throw Error(ErrorCode::Unavailable, "station '" + st.id + "' is opted out");
    }
    if (!availability::any_contains(st.availability, r.window)) {
      throw Error(ErrorCode::Unavailable,
                  "station '" + st.id + "' is not available for the whole window");
    }
    const auto windows = confirmed_windows(st.id);
    if (availability::max_overlap(windows, r.window) >= st.charger_count) {
      throw Error(ErrorCode::SlotTaken, "station '" + st.id + "' is fully booked in the window");
    }
  }

  void check_transition(const std::string& id) {
    if (reservation_ref(id).status != ReservationStatus::Confirmed) {
      throw Error(ErrorCode::InvalidTransition,
                  "reservation '" + id + "' is " +
                      std::string(to_string(reservation_ref(id).status)));
    }
  }

  void check_overstay(const std::string& id, Timestamp now) {
    check_transition(id);
    if (!(now > reservation_ref(id).window.end)) {
      throw Error(ErrorCode::NotYetEnded, "reservation '" + id + "' has not ended yet");
    }
  }

  // ---- commits (assume checks passed) ----

  std::string commit_register(Station s) {
    std::string id = s.id;
    index_.emplace(id, stations_.size());
    stations_.push_back(std::move(s));
    views_.push_back(nullptr);
    refresh_view(id);
    return id;
  }

  void commit_opt_out(const std::string& station_id, bool opted_out) {
    stations_[station_index(station_id)].opted_out = opted_out;
    refresh_view(station_id);
  }

  void commit_availability(const std::string& station_id, std::vector<AvailabilityWindow> w) {
    stations_[station_index(station_id)].availability = std::move(w);
    refresh_view(station_id);
  }

  void commit_reserve(const Reservation& r) {
    reservations_.emplace(r.reservation_id, r);
    by_station_[r.station_id].push_back(r.reservation_id);
    bump_reservation_counter(r.reservation_id);
    refresh_view(r.station_id);
  }

  Reservation commit_transition(const std::string& id, ReservationStatus to) {
    Reservation& r = reservation_ref(id);
    r.status = to;
    refresh_view(r.station_id);
    return r;
  }

  Reservation commit_overstay(const std::string& id, Timestamp now) {
    Reservation r = commit_transition(id, ReservationStatus::Overstayed);
    notices_.push_back({notices_.size() + 1, r.reservation_id, r.station_id, r.vehicle_id,
                        r.window.end, now});
    return r;
  }

  Reservation transition(std::string_view type, const std::string& id, ReservationStatus to) {
    std::lock_guard lock(write_mutex_);
    check_transition(id);
    record(type, {{"reservation_id", id}});
    return commit_transition(id, to);
  }

  void bump_reservation_counter(const std::string& id) {
    if (id.rfind("res-", 0) != 0) return;
    try {
      next_reservation_ = std::max<std::uint64_t>(next_reservation_, std::stoull(id.substr(4)) + 1);
    } catch (const std::exception&) {
    }
  }

  void refresh_view(const std::string& station_id) {
    const std::size_t i = station_index(station_id);
    const Station& st = stations_[i];
    const auto booked = confirmed_windows(st.id);
    const auto full = availability::saturated_intervals(booked, st.charger_count);
    views_[i] = std::make_shared<const StationView>(
        StationView{st, availability::subtract(st.availability, full)});
    ++version_;
    if (!replaying_) publish();
  }

  void publish() {
    auto snap = std::make_shared<const RegistrySnapshot>(version_, views_);
    std::lock_guard lock(snapshot_mutex_);
    snapshot_ = std::move(snap);
  }

  void replay(const json& event) {
    replaying_ = true;
    const std::string type = io::string_field(event, "type", "event");
    const json& p = io::member(event, "payload", "event");
    if (type == "register_station") {
      Station s = station_from_json(p, "payload");
      check_register(s);
      commit_register(std::move(s));
    } else if (type == "set_opt_out") {
      const std::string id = io::string_field(p, "station_id", "payload");
      station_index(id);
      commit_opt_out(id, io::as_bool(io::member(p, "opted_out", "payload"), "payload.opted_out"));
    } else if (type == "set_availability") {
      const std::string id = io::string_field(p, "station_id", "payload");
      station_index(id);
      auto windows = windows_from_json(io::member(p, "availability", "payload"), "payload.availability");
      validate_window_list(windows);
      commit_availability(id, std::move(windows));
    } else if (type == "reserve") {
      Reservation r = reservation_from_json(p, "payload");
      check_reserve(r);
      commit_reserve(r);
    } else if (type == "cancel" || type == "complete") {
      const std::string id = io::string_field(p, "reservation_id", "payload");
      check_transition(id);
      commit_transition(id, type == "cancel" ? ReservationStatus::Cancelled
                                             : ReservationStatus::Completed);
    } else if (type == "flag_overstay") {
      const std::string id = io::string_field(p, "reservation_id", "payload");
      const Timestamp now =
          from_epoch_seconds(io::as_int(io::member(p, "now", "payload"), "payload.now"));
      check_overstay(id, now);
      commit_overstay(id, now);
    } else {
      throw Error(ErrorCode::ParseError, "unknown event type '" + type + "'");
    }
    replaying_ = false;
  }

  Clock clock_;
  std::optional<EventLog> log_;

  mutable std::mutex write_mutex_;
  std::vector<Station> stations_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::shared_ptr<const StationView>> views_;
  std::unordered_map<std::string, Reservation> reservations_;
  std::unordered_map<std::string, std::vector<std::string>> by_station_;
  std::vector<OverstayNotice> notices_;
  std::uint64_t next_reservation_ = 1;
  std::uint64_t version_ = 0;
  bool replaying_ = false;

  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const RegistrySnapshot> snapshot_;
};

}  // namespace wecharge

#endif
