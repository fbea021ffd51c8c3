#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "presage/sim.hpp"
#include "presage/store.hpp"

namespace presage {

// ---------------------------------------------------------------------------
// Profile file I/O

inline nlohmann::json profile_to_json(const UserProfile& p) {
    auto tn = [](const TruncNormalSpec& t) {
        return nlohmann::json{
            {"mean_s", t.mean_s}, {"sd_s", t.sd_s}, {"lo_s", t.lo_s}, {"hi_s", t.hi_s}};
    };
    nlohmann::json breaks = nlohmann::json::array();
    for (int i = 0; i < 5; ++i)
        breaks.push_back({{"period", to_string(static_cast<Period>(i))},
                          {"log_mean", p.break_duration[i].log_mean},
                          {"log_sd", p.break_duration[i].log_sd}});
    nlohmann::json meetings = nlohmann::json::array();
    for (const auto& t : p.meeting_templates)
        meetings.push_back({{"subject", t.subject},
                            {"location_field", t.location_field},
                            {"organizer", t.organizer},
                            {"attendees", t.attendees},
                            {"role", to_string(t.role)},
                            {"response", to_string(t.response)},
                            {"recurrent", t.recurrent},
                            {"busy", t.busy},
                            {"start_sod", t.start_sod},
                            {"duration_s", t.duration_s},
                            {"daily_prob", t.daily_prob},
                            {"off_desk", t.off_desk},
                            {"interrupt_probs", t.interrupt_probs}});
    nlohmann::json devices = nlohmann::json::array();
    for (const auto& d : p.devices) devices.push_back(device_to_json(d));
    nlohmann::json managers = nlohmann::json::object();
    for (const auto& [person, mgr] : p.directory.manager) managers[person] = mgr;
    return nlohmann::json{
        {"user", p.user},
        {"seed", p.seed},
        {"start_day", format_rfc3339(p.start_day)},
        {"weekend_active", p.weekend_active},
        {"arrival", {tn(p.arrival[0]), tn(p.arrival[1])}},
        {"departure", {tn(p.departure[0]), tn(p.departure[1])}},
        {"break_rate_per_hour", p.break_rate_per_hour},
        {"break_duration", breaks},
        {"meeting_templates", meetings},
        {"attendance", {{"intercept", p.attendance.intercept}, {"weights", p.attendance.weights}}},
        {"devices", devices},
        {"directory", {{"managers", managers},
                       {"aliases", std::vector<std::string>(p.directory.aliases.begin(),
                                                            p.directory.aliases.end())}}},
        {"event_spacing_lo_s", p.event_spacing_lo_s},
        {"event_spacing_hi_s", p.event_spacing_hi_s},
        {"secondary_device_prob", p.secondary_device_prob},
        {"heartbeat_interval_s", p.heartbeat_interval_s},
        {"quantize_s", p.quantize_s},
        {"app_usage", {{"app", p.app_usage.app},
                       {"at_return_prob", p.app_usage.at_return_prob},
                       {"session_s", p.app_usage.session_s}}},
    };
}

inline UserProfile profile_from_json(const nlohmann::json& j) {
    auto tn = [](const nlohmann::json& t) {
        TruncNormalSpec s;
        s.mean_s = t.at("mean_s").get<double>();
        s.sd_s = t.at("sd_s").get<double>();
        s.lo_s = t.at("lo_s").get<double>();
        s.hi_s = t.at("hi_s").get<double>();
        return s;
    };
    UserProfile p;
    p.user = j.at("user").get<std::string>();
    p.seed = j.at("seed").get<std::uint64_t>();
    p.start_day = parse_rfc3339(j.at("start_day").get<std::string>());
    p.weekend_active = j.value("weekend_active", false);
    p.arrival = {tn(j.at("arrival")[0]), tn(j.at("arrival")[1])};
    p.departure = {tn(j.at("departure")[0]), tn(j.at("departure")[1])};
    p.break_rate_per_hour = j.at("break_rate_per_hour").get<double>();
    for (const auto& b : j.at("break_duration")) {
        Period per = detail::period_from_string(b.at("period").get<std::string>());
        p.break_duration[static_cast<int>(per)] = {b.at("log_mean").get<double>(),
                                                   b.at("log_sd").get<double>()};
    }
    for (const auto& m : j.value("meeting_templates", nlohmann::json::array())) {
        MeetingTemplate t;
        t.subject = m.at("subject").get<std::string>();
        t.location_field = m.value("location_field", "");
        t.organizer = m.at("organizer").get<std::string>();
        t.attendees = m.value("attendees", std::vector<std::string>{});
        t.role = enum_from_string<UserRole>(m.value("role", "required"));
        t.response = enum_from_string<ResponseStatus>(m.value("response", "responded_yes"));
        t.recurrent = m.value("recurrent", false);
        t.busy = m.value("busy", true);
        t.start_sod = m.at("start_sod").get<double>();
        t.duration_s = m.at("duration_s").get<double>();
        t.daily_prob = m.at("daily_prob").get<double>();
        t.off_desk = m.value("off_desk", true);
        if (m.contains("interrupt_probs")) {
            auto v = m["interrupt_probs"].get<std::vector<double>>();
            require(v.size() == 3, Errc::parse_error, "interrupt_probs needs 3 entries");
            t.interrupt_probs = {v[0], v[1], v[2]};
        }
        p.meeting_templates.push_back(std::move(t));
    }
    if (j.contains("attendance")) {
        p.attendance.intercept = j["attendance"].value("intercept", 0.0);
        if (j["attendance"].contains("weights"))
            p.attendance.weights = j["attendance"]["weights"].get<std::map<std::string, double>>();
    }
    p.devices.clear();
    for (const auto& d : j.at("devices")) p.devices.push_back(device_from_json(d));
    if (j.contains("directory")) {
        if (j["directory"].contains("managers"))
            p.directory.manager =
                j["directory"]["managers"].get<std::map<std::string, std::string>>();
        for (const auto& a : j["directory"].value("aliases", std::vector<std::string>{}))
            p.directory.aliases.insert(a);
    }
    p.event_spacing_lo_s = j.value("event_spacing_lo_s", p.event_spacing_lo_s);
    p.event_spacing_hi_s = j.value("event_spacing_hi_s", p.event_spacing_hi_s);
    p.secondary_device_prob = j.value("secondary_device_prob", p.secondary_device_prob);
    p.heartbeat_interval_s = j.value("heartbeat_interval_s", p.heartbeat_interval_s);
    p.quantize_s = j.value("quantize_s", p.quantize_s);
    if (j.contains("app_usage")) {
        p.app_usage.app = j["app_usage"].value("app", "");
        p.app_usage.at_return_prob = j["app_usage"].value("at_return_prob", 0.0);
        p.app_usage.session_s = j["app_usage"].value("session_s", 300.0);
    }
    p.validate();
    return p;
}

// ---------------------------------------------------------------------------
// Built-in profiles

namespace profiles {

inline std::vector<DeviceProfile> standard_devices() {
    return {{"desktop-1", "office", {"desktop", "videoconference"}},
            {"laptop-1", "mobile", {"laptop"}}};
}

inline DirectoryStub standard_directory() {
    DirectoryStub d;
    d.manager = {{"ada", "grace"}, {"grace", "linus"}, {"bob", "ada"},
                 {"carol", "grace"}, {"dan", "ada"}};
    d.aliases = {"dev-all", "eng-announce"};
    return d;
}

inline UserProfile base(const std::string& user, std::uint64_t seed) {
    UserProfile p;
    p.user = user;
    p.seed = seed;
    p.devices = standard_devices();
    p.directory = standard_directory();
    p.arrival[0] = {8.5 * 3600, 1200, 7 * 3600, 10.5 * 3600};
    p.arrival[1] = {10 * 3600, 1800, 8 * 3600, 13 * 3600};
    p.departure[0] = {17.5 * 3600, 1800, 15.5 * 3600, 21 * 3600};
    p.departure[1] = {16 * 3600, 1800, 14 * 3600, 20 * 3600};
    p.break_rate_per_hour = 1.5;
    p.break_duration[static_cast<int>(Period::morning)] = {std::log(480.0), 0.6};
    p.break_duration[static_cast<int>(Period::lunchtime)] = {std::log(2100.0), 0.6};
    p.break_duration[static_cast<int>(Period::afternoon)] = {std::log(600.0), 0.6};
    p.break_duration[static_cast<int>(Period::evening)] = {std::log(720.0), 0.6};
    p.break_duration[static_cast<int>(Period::night)] = {std::log(900.0), 0.6};
    p.app_usage = {"email", 0.6, 300};
    return p;
}

// Office worker with a realistic meeting mix and a planted logistic
// attendance rule; the fixture behind the calendar-model experiments.
inline UserProfile office(std::uint64_t seed = 7) {
    UserProfile p = base("ada", seed);
    p.attendance.intercept = 0.3;
    p.attendance.weights = {
        {"organized_by_alias=true", -2.2}, {"role=required", 1.2},
        {"response_status=responded_yes", 1.4}, {"recurrent=true", 0.4},
        {"busy_flag=false", -1.0}, {"attendee_count_bin=gt10", -0.8},
        {"subject_token_class=one_on_one", 0.8},
    };
    MeetingTemplate standup;
    standup.subject = "daily standup";
    standup.location_field = "room 3a";
    standup.organizer = "grace";
    standup.attendees = {"ada", "bob", "carol"};
    standup.role = UserRole::required;
    standup.response = ResponseStatus::responded_yes;
    standup.recurrent = true;
    standup.start_sod = 9.25 * 3600;
    standup.duration_s = 900;
    standup.daily_prob = 0.9;
    standup.interrupt_probs = {0.8, 0.15, 0.05};

    MeetingTemplate review;
    review.subject = "design review";
    review.organizer = "dev-all";
    review.attendees = {"ada", "bob", "carol", "dan", "e1", "e2", "e3", "e4",
                        "e5", "e6", "e7", "e8"};
    review.role = UserRole::optional;
    review.response = ResponseStatus::no_response;
    review.start_sod = 14 * 3600;
    review.duration_s = 3600;
    review.daily_prob = 0.7;
    review.interrupt_probs = {0.1, 0.2, 0.7};

    MeetingTemplate one_on_one;
    one_on_one.subject = "1:1 with grace";
    one_on_one.location_field = "grace's office";
    one_on_one.organizer = "grace";
    one_on_one.attendees = {"ada"};
    one_on_one.role = UserRole::required;
    one_on_one.response = ResponseStatus::responded_yes;
    one_on_one.recurrent = true;
    one_on_one.start_sod = 16 * 3600;
    one_on_one.duration_s = 1800;
    one_on_one.daily_prob = 0.5;
    one_on_one.interrupt_probs = {0.9, 0.08, 0.02};

    MeetingTemplate all_hands;
    all_hands.subject = "all hands";
    all_hands.organizer = "eng-announce";
    all_hands.attendees = {"ada", "bob", "carol", "dan", "e1", "e2", "e3", "e4", "e5",
                           "e6", "e7", "e8", "e9"};
    all_hands.role = UserRole::optional;
    all_hands.response = ResponseStatus::no_response_requested;
    all_hands.busy = false;
    all_hands.start_sod = 10 * 3600;
    all_hands.duration_s = 3600;
    all_hands.daily_prob = 0.3;
    all_hands.interrupt_probs = {0.05, 0.15, 0.8};

    p.meeting_templates = {standup, review, one_on_one, all_hands};
    return p;
}

// Short morning breaks, long lunchtime absences: the profile behind the
// time-of-day effect on return forecasts.
inline UserProfile lunch_absentee(std::uint64_t seed = 11) {
    UserProfile p = base("lena", seed);
    p.break_rate_per_hour = 2.0;
    p.break_duration[static_cast<int>(Period::morning)] = {std::log(420.0), 0.5};
    p.break_duration[static_cast<int>(Period::lunchtime)] = {std::log(2700.0), 0.5};
    p.break_duration[static_cast<int>(Period::afternoon)] = {std::log(480.0), 0.5};
    return p;
}

// Calibration profiles: meeting-free (except the last) with varied schedules
// and break processes, used for engine-vs-oracle agreement runs.
inline UserProfile calibration(int index, std::uint64_t seed = 0) {
    require(index >= 1 && index <= 5, Errc::invalid_argument, "calibration index in 1..5");
    UserProfile p = base("cal" + std::to_string(index),
                         seed != 0 ? seed : 100 + static_cast<std::uint64_t>(index));
    p.app_usage = {};
    switch (index) {
        case 1:
            p.break_rate_per_hour = 2.5;
            p.break_duration[static_cast<int>(Period::morning)] = {std::log(600.0), 0.7};
            break;
        case 2:
            p.break_rate_per_hour = 3.0;
            p.arrival[0] = {8 * 3600, 900, 7 * 3600, 10 * 3600};
            p.break_duration[static_cast<int>(Period::morning)] = {std::log(420.0), 0.9};
            break;
        case 3:
            p.break_rate_per_hour = 2.2;
            p.break_duration[static_cast<int>(Period::morning)] = {std::log(900.0), 0.8};
            p.break_duration[static_cast<int>(Period::lunchtime)] = {std::log(1500.0), 0.7};
            break;
        case 4:
            p.break_rate_per_hour = 2.8;
            p.arrival[0] = {9 * 3600, 600, 8 * 3600, 10.5 * 3600};
            p.break_duration[static_cast<int>(Period::morning)] = {std::log(500.0), 0.65};
            p.break_duration[static_cast<int>(Period::afternoon)] = {std::log(800.0), 0.75};
            break;
        case 5: {
            p.break_rate_per_hour = 2.5;
            p.break_duration[static_cast<int>(Period::morning)] = {std::log(700.0), 0.7};
            MeetingTemplate sync;
            sync.subject = "team sync";
            sync.organizer = "grace";
            sync.attendees = {p.user, "bob", "carol"};
            sync.role = UserRole::required;
            sync.response = ResponseStatus::responded_yes;
            sync.start_sod = 12 * 3600;
            sync.duration_s = 3600;
            sync.daily_prob = 0.5;
            p.meeting_templates = {sync};
            p.attendance.intercept = 0.5;
            break;
        }
    }
    return p;
}

}  // namespace profiles

inline UserProfile preset_profile(const std::string& name) {
    if (name == "office" || name == "default") return profiles::office();
    if (name == "lunch") return profiles::lunch_absentee();
    if (name.rfind("calib", 0) == 0 && name.size() == 6)
        return profiles::calibration(name[5] - '0');
    fail(Errc::not_found, "unknown preset profile: " + name);
}

// ---------------------------------------------------------------------------
// Persisting a simulation into a store, in the engine's own file formats.

struct SimWriteOptions {
    bool truth_as_annotations = true;  // write ground truth as manual annotations
};

inline void write_sim_output(Store& store, const UserProfile& profile, const SimOutput& out,
                             const SimWriteOptions& opts = {}) {
    store.events().append_events(out.events);
    store.append_calendar(profile.user, out.appointments);
    store.save_devices(profile.devices);
    store.save_directory(profile.directory);

    std::vector<json> truth_lines;
    std::vector<AnnotationRecord> annotations;
    for (const auto& a : out.appointments) {
        bool att = out.truth.attended.at(a.id);
        Interruptability label = out.truth.interrupt.at(a.id);
        truth_lines.push_back(json{{"appointment_id", a.id},
                                   {"attended", att},
                                   {"interruptability", to_string(label)}});
        if (opts.truth_as_annotations) {
            AnnotationRecord r;
            r.appointment_id = a.id;
            r.attended = att;
            r.interruptability = label;
            r.source = AnnotationSource::manual;
            annotations.push_back(std::move(r));
        }
    }
    append_jsonl(store.root() / "ground_truth.jsonl", truth_lines);
    if (!annotations.empty()) store.append_annotations(profile.user, annotations);
}

}  // namespace presage
