#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "presage/error.hpp"
#include "presage/time.hpp"

namespace presage {

enum class EventKind : int { activity = 0, conversation, app_focus_begin, app_focus_end, heartbeat };

inline const char* to_string(EventKind k) {
    static constexpr const char* names[] = {"activity", "conversation", "app_focus_begin",
                                            "app_focus_end", "heartbeat"};
    return names[static_cast<int>(k)];
}

inline EventKind event_kind_from_string(const std::string& s) {
    if (s == "activity") return EventKind::activity;
    if (s == "conversation") return EventKind::conversation;
    if (s == "app_focus_begin") return EventKind::app_focus_begin;
    if (s == "app_focus_end") return EventKind::app_focus_end;
    if (s == "heartbeat") return EventKind::heartbeat;
    fail(Errc::parse_error, "unknown event kind: " + s);
}

inline bool is_app_focus(EventKind k) {
    return k == EventKind::app_focus_begin || k == EventKind::app_focus_end;
}

// One sensed event on one device. `app` is present exactly when the kind is
// an app-focus kind.
struct RawEvent {
    Timestamp ts;
    std::string user;
    std::string device;
    EventKind kind = EventKind::activity;
    std::optional<std::string> app;

    void validate() const {
        require(!user.empty() && !device.empty(), Errc::invalid_argument,
                "event needs user and device");
        require(app.has_value() == is_app_focus(kind), Errc::invalid_argument,
                "app id present iff kind is an app-focus kind");
    }
};

struct DeviceProfile {
    std::string device;
    std::string location;
    std::set<std::string> capabilities;
};

// Device predicate used by device-access queries: every stated field must match.
struct DevicePredicate {
    std::optional<std::string> capability;
    std::optional<std::string> location;

    bool matches(const DeviceProfile& p) const {
        if (capability && p.capabilities.count(*capability) == 0) return false;
        if (location && p.location != *location) return false;
        return true;
    }
};

inline std::map<std::string, DeviceProfile> index_devices(const std::vector<DeviceProfile>& devs) {
    std::map<std::string, DeviceProfile> out;
    for (const auto& d : devs) {
        require(out.emplace(d.device, d).second, Errc::invalid_config,
                "duplicate device id: " + d.device);
    }
    return out;
}

}  // namespace presage
