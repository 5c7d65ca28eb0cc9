#ifndef WECHARGE_RESERVATION_HPP
#define WECHARGE_RESERVATION_HPP

#include <cstddef>
#include <cstdint>
#include <string>

#include "wecharge/core_model.hpp"

namespace wecharge {

enum class ReservationStatus { Confirmed, Cancelled, Completed, Overstayed };

inline constexpr std::array<std::pair<ReservationStatus, std::string_view>, 4>
    kReservationStatusNames{{
        {ReservationStatus::Confirmed, "Confirmed"},
        {ReservationStatus::Cancelled, "Cancelled"},
        {ReservationStatus::Completed, "Completed"},
        {ReservationStatus::Overstayed, "Overstayed"},
    }};

inline std::string_view to_string(ReservationStatus s) {
  return detail::enum_name(kReservationStatusNames, s);
}

struct Reservation {
  std::string reservation_id;
  std::string station_id;
  std::size_t connector_index = 0;
  AvailabilityWindow window;
  std::string vehicle_id;
  ReservationStatus status = ReservationStatus::Confirmed;

  friend bool operator==(const Reservation&, const Reservation&) = default;
};

// Emitted when a reservation is flagged as overstayed; delivery is up to
// the consumer (the service exposes these for polling).
struct OverstayNotice {
  std::uint64_t sequence = 0;
  std::string reservation_id;
  std::string station_id;
  std::string vehicle_id;
  Timestamp window_end;
  Timestamp flagged_at;

  friend bool operator==(const OverstayNotice&, const OverstayNotice&) = default;
};

}  // namespace wecharge

#endif
