#pragma once

#include <algorithm>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "presage/events.hpp"
#include "presage/time.hpp"

namespace presage {

enum class PresenceState : int { absent = 0, present };

// A maximal interval of presence or absence on a user timeline. Consecutive
// segments alternate state and tile the log horizon with no gaps.
struct PresenceSegment {
    Timestamp start;
    Timestamp end;  // exclusive
    PresenceState state = PresenceState::absent;
    std::set<std::string> devices;  // empty iff absent

    Duration length() const { return end - start; }
};

using Timeline = std::vector<PresenceSegment>;

struct Horizon {
    Timestamp start;
    Timestamp end;  // exclusive
};

inline bool counts_toward_presence(EventKind k) {
    // Heartbeats are device liveness pings, not user activity.
    return k != EventKind::heartbeat;
}

// Merges one user's device-tagged events into a single alternating timeline.
// Presence extends from each qualifying event to `idle_threshold` past the
// last one; anything else inside the horizon is absence.
inline Timeline coalesce_timeline(std::span<const RawEvent> events, Duration idle_threshold,
                                  Horizon horizon) {
    require(idle_threshold.seconds > 0, Errc::invalid_argument, "idle threshold must be positive");
    require(horizon.start < horizon.end, Errc::invalid_argument, "empty log horizon");

    struct Run {
        Timestamp start;
        Timestamp end;
        std::set<std::string> devices;
    };
    std::vector<Run> runs;

    Timestamp prev_ts = horizon.start;
    bool first = true;
    for (const auto& ev : events) {
        require(first || ev.ts >= prev_ts, Errc::unsorted_input, "events not sorted by timestamp");
        require(ev.ts >= horizon.start && ev.ts < horizon.end, Errc::invalid_argument,
                "event outside log horizon");
        prev_ts = ev.ts;
        first = false;
        if (!counts_toward_presence(ev.kind)) continue;

        Timestamp reach = ev.ts + idle_threshold;
        if (!runs.empty() && ev.ts <= runs.back().end) {
            runs.back().end = std::max(runs.back().end, reach);
            runs.back().devices.insert(ev.device);
        } else {
            runs.push_back({ev.ts, reach, {ev.device}});
        }
    }

    Timeline out;
    Timestamp cursor = horizon.start;
    for (auto& run : runs) {
        run.end = std::min(run.end, horizon.end);
        if (run.start > cursor) {
            out.push_back({cursor, run.start, PresenceState::absent, {}});
        }
        out.push_back({run.start, run.end, PresenceState::present, std::move(run.devices)});
        cursor = run.end;
    }
    if (cursor < horizon.end) {
        out.push_back({cursor, horizon.end, PresenceState::absent, {}});
    }
    return out;
}

// Events from devices matching `pred`, presence kinds only.
inline std::vector<RawEvent> filter_events_by_device(std::span<const RawEvent> events,
                                                     const std::vector<DeviceProfile>& devices,
                                                     const DevicePredicate& pred) {
    auto idx = index_devices(devices);
    std::vector<RawEvent> out;
    for (const auto& ev : events) {
        auto it = idx.find(ev.device);
        if (it != idx.end() && pred.matches(it->second)) out.push_back(ev);
    }
    return out;
}

// Engagement timeline for one application: present between a focus-begin and
// its matching focus-end. An unmatched begin stays open through the horizon.
inline Timeline app_focus_timeline(std::span<const RawEvent> events, const std::string& app,
                                   Horizon horizon) {
    require(horizon.start < horizon.end, Errc::invalid_argument, "empty log horizon");
    Timeline out;
    Timestamp cursor = horizon.start;
    bool open = false;
    Timestamp open_start = horizon.start;
    std::set<std::string> open_devices;

    auto close_run = [&](Timestamp end) {
        if (end <= open_start) return;
        if (open_start > cursor) out.push_back({cursor, open_start, PresenceState::absent, {}});
        out.push_back({open_start, end, PresenceState::present, open_devices});
        cursor = end;
    };

    for (const auto& ev : events) {
        if (!is_app_focus(ev.kind) || !ev.app || *ev.app != app) continue;
        if (ev.kind == EventKind::app_focus_begin) {
            if (!open) {
                open = true;
                open_start = ev.ts;
                open_devices = {ev.device};
            } else {
                open_devices.insert(ev.device);
            }
        } else if (open) {
            open_devices.insert(ev.device);
            close_run(ev.ts);
            open = false;
            open_devices.clear();
        }
    }
    if (open) close_run(horizon.end);
    if (cursor < horizon.end) out.push_back({cursor, horizon.end, PresenceState::absent, {}});
    return out;
}

inline Duration total_present(const Timeline& tl) {
    std::int64_t s = 0;
    for (const auto& seg : tl)
        if (seg.state == PresenceState::present) s += seg.length().seconds;
    return Duration{s};
}

// The segment covering `at`, or nullptr when `at` is outside the timeline.
inline const PresenceSegment* segment_at(const Timeline& tl, Timestamp at) {
    auto it = std::upper_bound(tl.begin(), tl.end(), at,
                               [](Timestamp t, const PresenceSegment& s) { return t < s.start; });
    if (it == tl.begin()) return nullptr;
    --it;
    return at < it->end ? &*it : nullptr;
}

}  // namespace presage
