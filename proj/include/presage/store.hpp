#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "presage/events.hpp"
#include "presage/records.hpp"
#include "presage/time.hpp"
#include "presage/timeline.hpp"

namespace presage {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Line-record codecs. One UTF-8 JSON value per line; field names are part of
// the on-disk contract and documented in the README.

inline json event_to_json(const RawEvent& ev) {
    json j{{"ts", format_rfc3339(ev.ts)},
           {"user", ev.user},
           {"device", ev.device},
           {"kind", to_string(ev.kind)}};
    if (ev.app) j["app"] = *ev.app;
    return j;
}

inline RawEvent event_from_json(const json& j) {
    RawEvent ev;
    ev.ts = parse_rfc3339(j.at("ts").get<std::string>());
    ev.user = j.at("user").get<std::string>();
    ev.device = j.at("device").get<std::string>();
    ev.kind = event_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("app") && !j["app"].is_null()) ev.app = j["app"].get<std::string>();
    ev.validate();
    return ev;
}

inline json appointment_to_json(const std::string& user, const AppointmentRecord& a) {
    return json{{"user", user},
                {"id", a.id},
                {"start", format_rfc3339(a.start)},
                {"end", format_rfc3339(a.end)},
                {"subject", a.subject},
                {"location_field", a.location_field},
                {"organizer", a.organizer},
                {"attendees", a.attendees},
                {"user_role", to_string(a.user_role)},
                {"response_status", to_string(a.response_status)},
                {"recurrent", a.recurrent},
                {"busy_flag", a.busy_flag ? "busy" : "free"},
                {"organized_by_alias", a.organized_by_alias}};
}

inline AppointmentRecord appointment_from_json(const json& j, std::string* user = nullptr) {
    AppointmentRecord a;
    if (user) *user = j.at("user").get<std::string>();
    a.id = j.at("id").get<std::string>();
    a.start = parse_rfc3339(j.at("start").get<std::string>());
    a.end = parse_rfc3339(j.at("end").get<std::string>());
    a.subject = j.value("subject", "");
    a.location_field = j.value("location_field", "");
    a.organizer = j.at("organizer").get<std::string>();
    a.attendees = j.value("attendees", std::vector<std::string>{});
    a.user_role = enum_from_string<UserRole>(j.value("user_role", "required"));
    a.response_status =
        enum_from_string<ResponseStatus>(j.value("response_status", "no_response"));
    a.recurrent = j.value("recurrent", false);
    a.busy_flag = j.value("busy_flag", "busy") == std::string("busy");
    a.organized_by_alias = j.value("organized_by_alias", false);
    a.validate();
    return a;
}

inline json annotation_to_json(const std::string& user, const AnnotationRecord& r) {
    json j{{"user", user},
           {"appointment_id", r.appointment_id},
           {"source", to_string(r.source)},
           {"attended", nullptr},
           {"interruptability", nullptr},
           {"location", nullptr}};
    if (r.attended) j["attended"] = *r.attended;
    if (r.interruptability) j["interruptability"] = to_string(*r.interruptability);
    if (r.location) j["location"] = *r.location;
    return j;
}

inline AnnotationRecord annotation_from_json(const json& j, std::string* user = nullptr) {
    AnnotationRecord r;
    if (user) *user = j.at("user").get<std::string>();
    r.appointment_id = j.at("appointment_id").get<std::string>();
    if (j.contains("attended") && !j["attended"].is_null()) r.attended = j["attended"].get<bool>();
    if (j.contains("interruptability") && !j["interruptability"].is_null())
        r.interruptability =
            enum_from_string<Interruptability>(j["interruptability"].get<std::string>());
    if (j.contains("location") && !j["location"].is_null())
        r.location = j["location"].get<std::string>();
    r.source = enum_from_string<AnnotationSource>(j.value("source", "manual"));
    return r;
}

inline json device_to_json(const DeviceProfile& d) {
    return json{{"device", d.device},
                {"location", d.location},
                {"capabilities", std::vector<std::string>(d.capabilities.begin(),
                                                          d.capabilities.end())}};
}

inline DeviceProfile device_from_json(const json& j) {
    DeviceProfile d;
    d.device = j.at("device").get<std::string>();
    d.location = j.value("location", "");
    for (const auto& c : j.value("capabilities", std::vector<std::string>{}))
        d.capabilities.insert(c);
    return d;
}

// ---------------------------------------------------------------------------
// Low-level line file access. Appends are line-atomic; a truncated final line
// (no trailing newline, or unparsable at EOF) is dropped on load and counted.

struct LineLoad {
    std::vector<json> records;
    std::size_t dropped_partial = 0;
};

inline LineLoad load_jsonl(const std::filesystem::path& path) {
    LineLoad out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t nl = content.find('\n', pos);
        bool terminated = nl != std::string::npos;
        std::string line = content.substr(pos, terminated ? nl - pos : std::string::npos);
        pos = terminated ? nl + 1 : content.size();
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        bool last = pos >= content.size();
        if (j.is_discarded() || !terminated) {
            if (last) {
                ++out.dropped_partial;
                continue;
            }
            fail(Errc::parse_error, "corrupt record in " + path.string());
        }
        out.records.push_back(std::move(j));
    }
    return out;
}

inline void append_jsonl(const std::filesystem::path& path, std::span<const json> records) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::app);
    require(static_cast<bool>(out), Errc::io_error, "cannot open " + path.string());
    for (const auto& j : records) out << j.dump() << '\n';
    out.flush();
    require(static_cast<bool>(out), Errc::io_error, "write failed on " + path.string());
}

// ---------------------------------------------------------------------------
// Append-only event log with a per-user index of stored time ranges.

class EventLog {
  public:
    EventLog() = default;
    explicit EventLog(std::filesystem::path path) : path_(std::move(path)) { reload_index(); }

    const std::filesystem::path& path() const { return path_; }
    std::size_t dropped_partial() const { return dropped_partial_; }

    struct UserRange {
        Timestamp first;
        Timestamp last;
        std::size_t count = 0;
    };

    std::optional<UserRange> user_range(const std::string& user) const {
        auto it = index_.find(user);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    // Appends a batch atomically: the whole batch is validated against the
    // per-user append order before anything is written.
    std::size_t append_events(std::span<const RawEvent> batch) {
        std::map<std::string, Timestamp> last;
        Timestamp prev{std::numeric_limits<std::int64_t>::min()};
        for (const auto& ev : batch) {
            ev.validate();
            require(ev.ts >= prev, Errc::unsorted_input, "append batch not sorted by timestamp");
            prev = ev.ts;
            auto it = index_.find(ev.user);
            Timestamp floor = it != index_.end() ? it->second.last
                                                 : Timestamp{std::numeric_limits<std::int64_t>::min()};
            auto lit = last.find(ev.user);
            if (lit != last.end()) floor = std::max(floor, lit->second);
            require(ev.ts >= floor, Errc::out_of_order_append,
                    "event for " + ev.user + " precedes stored log");
            last[ev.user] = ev.ts;
        }

        std::vector<json> lines;
        lines.reserve(batch.size());
        for (const auto& ev : batch) lines.push_back(event_to_json(ev));
        append_jsonl(path_, lines);

        for (const auto& ev : batch) note_event(ev);
        return batch.size();
    }

    // All stored events for `user` with ts in [span.start, span.end), sorted.
    std::vector<RawEvent> load_range(const std::string& user, Horizon span) const {
        require(span.start < span.end, Errc::invalid_argument, "empty span");
        std::vector<RawEvent> out;
        if (!index_.count(user)) return out;
        for (const auto& j : load_jsonl(path_).records) {
            if (j.at("user").get<std::string>() != user) continue;
            RawEvent ev = event_from_json(j);
            if (ev.ts >= span.start && ev.ts < span.end) out.push_back(std::move(ev));
        }
        return out;
    }

    std::vector<RawEvent> load_all(const std::string& user) const {
        auto range = user_range(user);
        if (!range) return {};
        return load_range(user, {range->first, range->last + seconds(1)});
    }

    std::vector<std::string> users() const {
        std::vector<std::string> out;
        for (const auto& [u, _] : index_) out.push_back(u);
        return out;
    }

  private:
    void reload_index() {
        index_.clear();
        auto loaded = load_jsonl(path_);
        dropped_partial_ = loaded.dropped_partial;
        for (const auto& j : loaded.records) note_event(event_from_json(j));
    }

    void note_event(const RawEvent& ev) {
        auto [it, inserted] = index_.try_emplace(ev.user, UserRange{ev.ts, ev.ts, 0});
        if (!inserted) {
            it->second.first = std::min(it->second.first, ev.ts);
            it->second.last = std::max(it->second.last, ev.ts);
        }
        ++it->second.count;
    }

    std::filesystem::path path_;
    std::map<std::string, UserRange> index_;
    std::size_t dropped_partial_ = 0;
};

// ---------------------------------------------------------------------------
// Directory-rooted store for everything the engine persists.

class Store {
  public:
    explicit Store(std::filesystem::path root) : root_(std::move(root)) {
        std::filesystem::create_directories(root_);
        events_ = EventLog(root_ / "events.jsonl");
    }

    const std::filesystem::path& root() const { return root_; }
    EventLog& events() { return events_; }
    const EventLog& events() const { return events_; }

    void append_calendar(const std::string& user, std::span<const AppointmentRecord> records) {
        std::vector<json> lines;
        for (const auto& a : records) {
            a.validate();
            lines.push_back(appointment_to_json(user, a));
        }
        append_jsonl(root_ / "calendar.jsonl", lines);
    }

    // Appointments for `user` overlapping the half-open span.
    std::vector<AppointmentRecord> load_calendar(const std::string& user, Horizon span) const {
        require(span.start < span.end, Errc::invalid_argument, "empty span");
        std::vector<AppointmentRecord> out;
        for (const auto& j : load_jsonl(root_ / "calendar.jsonl").records) {
            std::string owner;
            AppointmentRecord a = appointment_from_json(j, &owner);
            if (owner == user && a.start < span.end && a.end > span.start)
                out.push_back(std::move(a));
        }
        std::sort(out.begin(), out.end(), [](const AppointmentRecord& x, const AppointmentRecord& y) {
            return std::tie(x.start, x.id) < std::tie(y.start, y.id);
        });
        return out;
    }

    std::vector<AppointmentRecord> load_calendar_all(const std::string& user) const {
        return load_calendar(user, {Timestamp{std::numeric_limits<std::int64_t>::min() / 2},
                                    Timestamp{std::numeric_limits<std::int64_t>::max() / 2}});
    }

    std::size_t append_annotations(const std::string& user,
                                   std::span<const AnnotationRecord> records) {
        std::vector<json> lines;
        for (const auto& r : records) {
            require(r.has_content(), Errc::invalid_argument,
                    "annotation must set at least one field");
            lines.push_back(annotation_to_json(user, r));
        }
        append_jsonl(root_ / "annotations.jsonl", lines);
        return lines.size();
    }

    // Latest annotation per appointment id, manual taking precedence over
    // heuristic drafts.
    AnnotationMap load_annotations(const std::string& user) const {
        AnnotationMap out;
        for (const auto& j : load_jsonl(root_ / "annotations.jsonl").records) {
            std::string owner;
            AnnotationRecord r = annotation_from_json(j, &owner);
            if (owner != user) continue;
            auto it = out.find(r.appointment_id);
            if (it == out.end() || static_cast<int>(r.source) >= static_cast<int>(it->second.source))
                out[r.appointment_id] = std::move(r);
        }
        return out;
    }

    void save_devices(const std::vector<DeviceProfile>& devices) {
        index_devices(devices);  // uniqueness check
        std::vector<json> lines;
        for (const auto& d : devices) lines.push_back(device_to_json(d));
        append_jsonl(root_ / "devices.jsonl", lines);
    }

    std::vector<DeviceProfile> load_devices() const {
        std::vector<DeviceProfile> out;
        for (const auto& j : load_jsonl(root_ / "devices.jsonl").records)
            out.push_back(device_from_json(j));
        index_devices(out);
        return out;
    }

    void save_directory(const DirectoryStub& dir) {
        dir.validate();
        std::vector<json> lines;
        for (const auto& [person, manager] : dir.manager)
            lines.push_back(json{{"person", person}, {"manager", manager}});
        for (const auto& alias : dir.aliases) lines.push_back(json{{"alias", alias}});
        append_jsonl(root_ / "directory.jsonl", lines);
    }

    DirectoryStub load_directory() const {
        DirectoryStub dir;
        for (const auto& j : load_jsonl(root_ / "directory.jsonl").records) {
            if (j.contains("alias")) {
                dir.aliases.insert(j["alias"].get<std::string>());
            } else {
                dir.manager[j.at("person").get<std::string>()] =
                    j.at("manager").get<std::string>();
            }
        }
        dir.validate();
        return dir;
    }

  private:
    std::filesystem::path root_;
    EventLog events_;
};

}  // namespace presage
