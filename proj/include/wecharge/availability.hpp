#ifndef WECHARGE_AVAILABILITY_HPP
#define WECHARGE_AVAILABILITY_HPP

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "wecharge/core_model.hpp"

// Interval arithmetic over half-open windows, used to fold reservations
// into a station's effective availability.
namespace wecharge::availability {

namespace detail {

// (+1 at start, -1 at end); ends sort before starts at the same instant so
// back-to-back windows never count as overlapping.
inline std::vector<std::pair<Timestamp, int>> sweep_events(
    std::span<const AvailabilityWindow> windows) {
  std::vector<std::pair<Timestamp, int>> events;
  events.reserve(windows.size() * 2);
  for (const auto& w : windows) {
    events.emplace_back(w.start, +1);
    events.emplace_back(w.end, -1);
  }
  std::sort(events.begin(), events.end());
  return events;
}

}  // namespace detail

/// Largest number of `windows` simultaneously active at any instant inside
/// `range`.
inline int max_overlap(std::span<const AvailabilityWindow> windows,
                       const AvailabilityWindow& range) {
  std::vector<AvailabilityWindow> clipped;
  for (const auto& w : windows) {
    if (w.overlaps(range)) {
      clipped.push_back({std::max(w.start, range.start), std::min(w.end, range.end)});
    }
  }
  int active = 0;
  int peak = 0;
  for (const auto& [t, delta] : detail::sweep_events(clipped)) {
    active += delta;
    peak = std::max(peak, active);
  }
  return peak;
}

/// Maximal intervals during which at least `capacity` windows are active.
inline std::vector<AvailabilityWindow> saturated_intervals(
    std::span<const AvailabilityWindow> windows, int capacity) {
  std::vector<AvailabilityWindow> out;
  int active = 0;
  Timestamp open{};
  bool saturated = false;
  const auto events = detail::sweep_events(windows);
  for (std::size_t i = 0; i < events.size(); ++i) {
    active += events[i].second;
    // Only act once all events at this instant are applied.
    if (i + 1 < events.size() && events[i + 1].first == events[i].first) continue;
    const Timestamp t = events[i].first;
    if (!saturated && active >= capacity) {
      saturated = true;
      open = t;
    } else if (saturated && active < capacity) {
      saturated = false;
      if (open < t) out.push_back({open, t});
    }
  }
  return out;
}

/// `windows` minus `blocked`. Both inputs sorted and non-overlapping; the
/// result is too.
inline std::vector<AvailabilityWindow> subtract(std::span<const AvailabilityWindow> windows,
                                                std::span<const AvailabilityWindow> blocked) {
  std::vector<AvailabilityWindow> out;
  for (const auto& w : windows) {
    Timestamp cursor = w.start;
    for (const auto& b : blocked) {
      if (b.end <= cursor) continue;
      if (b.start >= w.end) break;
      if (b.start > cursor) out.push_back({cursor, b.start});
      cursor = std::max(cursor, b.end);
      if (cursor >= w.end) break;
    }
    if (cursor < w.end) out.push_back({cursor, w.end});
  }
  return out;
}

inline bool any_contains(std::span<const AvailabilityWindow> windows,
                         const AvailabilityWindow& w) {
  return std::any_of(windows.begin(), windows.end(),
                     [&](const AvailabilityWindow& a) { return a.contains(w); });
}

}  // namespace wecharge::availability

#endif
