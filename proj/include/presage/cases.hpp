#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "presage/error.hpp"
#include "presage/records.hpp"
#include "presage/time.hpp"
#include "presage/timeline.hpp"

namespace presage {

enum class CalendarStatus : int { no_meeting = 0, meeting_scheduled };

inline const char* to_string(CalendarStatus s) {
    return s == CalendarStatus::no_meeting ? "no_meeting" : "meeting_scheduled";
}

// The evidence attached to a case: when it happened and what the calendar
// said, plus any extra named categoricals (e.g. appointment features).
struct ContextAttributes {
    TimePeriod period;
    CalendarStatus calendar_status = CalendarStatus::no_meeting;
    std::map<std::string, std::string> extra;

    // Named attribute lookup used by backoff ladders and dataset assembly.
    std::string attribute(const std::string& name) const {
        if (name == "period") return to_string(period.period);
        if (name == "day_of_week") return to_string(period.day_of_week);
        if (name == "day_class") return to_string(period.day_class);
        if (name == "calendar_status") return to_string(calendar_status);
        auto it = extra.find(name);
        require(it != extra.end(), Errc::invalid_argument, "unknown context attribute: " + name);
        return it->second;
    }
};

// One completed (or censored) wait-to-event observation.
struct Case {
    ContextAttributes context;
    Duration wait;
    bool censored = false;
    // Annotation-derived attendance of the meeting overlapping the landmark,
    // when calendar_status is meeting_scheduled. Unset means unannotated.
    std::optional<bool> meeting_attended;
    std::string meeting_id;  // overlapping appointment, when any
};

enum class QueryKind : int {
    time_until_return = 0,
    time_until_leave,
    time_until_device_access,
    time_until_app_engagement
};

inline const char* to_string(QueryKind k) {
    static constexpr const char* names[] = {"time_until_return", "time_until_leave",
                                            "time_until_device_access",
                                            "time_until_app_engagement"};
    return names[static_cast<int>(k)];
}

inline QueryKind query_kind_from_string(const std::string& s) {
    if (s == "time_until_return") return QueryKind::time_until_return;
    if (s == "time_until_leave") return QueryKind::time_until_leave;
    if (s == "time_until_device_access") return QueryKind::time_until_device_access;
    if (s == "time_until_app_engagement") return QueryKind::time_until_app_engagement;
    fail(Errc::parse_error, "unknown query kind: " + s);
}

struct QuerySpec {
    QueryKind kind = QueryKind::time_until_return;
    std::string user;
    Timestamp at;
    std::optional<Duration> min_stay;       // return-and-remain
    std::optional<Duration> min_absence;    // leave-for-at-least
    std::optional<DevicePredicate> device;  // device-access queries
    std::optional<std::string> app;         // app-engagement queries
    // Hypothesized elapsed time since the landmark; when unset the engine
    // derives it from the logged timeline.
    std::optional<Duration> assumed_away;

    void validate() const {
        require(!user.empty(), Errc::invalid_argument, "query needs a user");
        switch (kind) {
            case QueryKind::time_until_return:
                require(!min_absence && !device && !app, Errc::invalid_argument,
                        "return queries accept only min_stay");
                break;
            case QueryKind::time_until_leave:
                require(!min_stay && !device && !app, Errc::invalid_argument,
                        "leave queries accept only min_absence");
                break;
            case QueryKind::time_until_device_access:
                require(!min_stay && !min_absence && !app && device, Errc::invalid_argument,
                        "device queries need a device predicate and nothing else");
                break;
            case QueryKind::time_until_app_engagement:
                require(!min_stay && !min_absence && !device && app, Errc::invalid_argument,
                        "app queries need an app id and nothing else");
                break;
        }
    }
};

enum class Landmark : int {
    present_to_absent = 0,
    absent_to_present,
    app_focus_end,
    device_last_seen
};

// Whether the landmark is a transition INTO absence on its timeline.
inline bool landmark_enters_absence(Landmark l) { return l != Landmark::absent_to_present; }

inline Landmark landmark_for(QueryKind kind) {
    switch (kind) {
        case QueryKind::time_until_return: return Landmark::present_to_absent;
        case QueryKind::time_until_leave: return Landmark::absent_to_present;
        case QueryKind::time_until_device_access: return Landmark::device_last_seen;
        case QueryKind::time_until_app_engagement: return Landmark::app_focus_end;
    }
    fail(Errc::invalid_argument, "bad query kind");
}

// Elapsed time from the most recent landmark transition at or before `at`.
// Interior segment boundaries are the transitions; the timeline's leading
// edge is not one.
inline Duration proximal_context(const Timeline& timeline, Timestamp at, Landmark landmark) {
    require(!timeline.empty(), Errc::insufficient_history, "empty timeline");
    require(at >= timeline.front().start && at < timeline.back().end, Errc::invalid_argument,
            "query time outside timeline");
    bool into_absent = landmark_enters_absence(landmark);
    std::optional<Timestamp> latest;
    for (std::size_t i = 1; i < timeline.size(); ++i) {
        if (timeline[i].start > at) break;
        bool enters_absent = timeline[i].state == PresenceState::absent;
        if (enters_absent == into_absent) latest = timeline[i].start;
    }
    require(latest.has_value(), Errc::insufficient_history,
            "no prior landmark transition of the requested kind");
    return at - *latest;
}

// ---------------------------------------------------------------------------
// Case extraction

struct ExtractionSpec {
    QueryKind kind = QueryKind::time_until_return;
    Duration min_stay{0};     // return-like kinds: qualifying presence length
    Duration min_absence{0};  // leave kind: qualifying absence length
};

namespace detail {

struct CalendarLookup {
    std::span<const AppointmentRecord> calendar;
    const AnnotationMap* annotations = nullptr;

    // Calendar state at an instant, folding annotations: attended is false
    // only when every overlapping appointment is annotated not-attended,
    // true when any is annotated attended, unset otherwise.
    void at(Timestamp t, CalendarStatus& status, std::optional<bool>& attended,
            std::string& meeting_id) const {
        status = CalendarStatus::no_meeting;
        attended.reset();
        meeting_id.clear();
        bool any = false, all_false = true, any_true = false;
        for (const auto& a : calendar) {
            if (!a.overlaps(t)) continue;
            if (!any) meeting_id = a.id;
            any = true;
            std::optional<bool> att;
            if (annotations) {
                auto it = annotations->find(a.id);
                if (it != annotations->end()) att = it->second.attended;
            }
            if (att.has_value() && *att) any_true = true;
            if (!att.has_value() || *att) all_false = false;
        }
        if (!any) return;
        status = CalendarStatus::meeting_scheduled;
        if (any_true)
            attended = true;
        else if (all_false)
            attended = false;
    }
};

}  // namespace detail

// Turns a timeline (plus calendar context) into query-consistent cases, one
// per landmark transition. Context is sampled at the landmark, so cases are
// reusable across query times. Waits that never resolve before the log ends
// are emitted censored, carrying the observed lower bound.
inline std::vector<Case> extract_cases(const Timeline& timeline,
                                       std::span<const AppointmentRecord> calendar,
                                       const AnnotationMap& annotations,
                                       const ExtractionSpec& spec, const Taxonomy& taxonomy,
                                       std::int64_t utc_offset_s = 0) {
    std::vector<Case> out;
    if (timeline.empty()) return out;
    detail::CalendarLookup lookup{calendar, &annotations};

    bool onset_absent = spec.kind != QueryKind::time_until_leave;
    PresenceState onset_state = onset_absent ? PresenceState::absent : PresenceState::present;
    PresenceState target_state = onset_absent ? PresenceState::present : PresenceState::absent;
    Duration min_len = onset_absent ? spec.min_stay : spec.min_absence;
    Timestamp log_end = timeline.back().end;

    for (std::size_t i = 1; i < timeline.size(); ++i) {
        if (timeline[i].state != onset_state) continue;
        Timestamp onset = timeline[i].start;

        Case c;
        c.context.period = classify_time_period(onset, taxonomy, utc_offset_s);
        lookup.at(onset, c.context.calendar_status, c.meeting_attended, c.meeting_id);

        bool resolved = false;
        std::optional<Duration> bound;
        for (std::size_t j = i + 1; j < timeline.size(); ++j) {
            if (timeline[j].state != target_state) continue;
            if (timeline[j].length() >= min_len) {
                c.wait = timeline[j].start - onset;
                resolved = true;
                break;
            }
            if (j + 1 == timeline.size()) {
                // The trailing segment may still grow to qualify; the wait is
                // only bounded below by its start.
                bound = timeline[j].start - onset;
            }
        }
        if (!resolved) {
            c.censored = true;
            c.wait = bound.value_or(log_end - onset);
        }
        out.push_back(std::move(c));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reference-class selection with progressive backoff

struct BackoffPolicy {
    // Attribute-name subsets, most specific first; the last entry should be
    // empty (match everything).
    std::vector<std::vector<std::string>> ladder;
    std::size_t n_min = 25;

    static BackoffPolicy defaults() {
        BackoffPolicy p;
        p.ladder = {{"period", "day_of_week", "calendar_status"},
                    {"period", "day_class", "calendar_status"},
                    {"period", "day_class"},
                    {"day_class"},
                    {}};
        return p;
    }

    void validate() const {
        require(!ladder.empty(), Errc::invalid_config, "backoff ladder is empty");
        require(ladder.back().empty(), Errc::invalid_config,
                "backoff ladder must end with the unconditional level");
    }
};

inline bool context_matches(const ContextAttributes& c, const ContextAttributes& query,
                            std::span<const std::string> attrs) {
    for (const auto& name : attrs)
        if (c.attribute(name) != query.attribute(name)) return false;
    return true;
}

struct ReferenceClass {
    std::vector<Case> cases;
    std::size_t backoff_level = 0;
    std::size_t uncensored = 0;
};

// Cases matching the first (most specific) ladder level whose uncensored
// match count reaches n_min; otherwise the broadest nonempty level.
inline ReferenceClass build_reference_class(std::span<const Case> all_cases,
                                            const ContextAttributes& context,
                                            const BackoffPolicy& policy) {
    policy.validate();
    std::optional<ReferenceClass> fallback;
    for (std::size_t level = 0; level < policy.ladder.size(); ++level) {
        ReferenceClass rc;
        rc.backoff_level = level;
        for (const auto& c : all_cases) {
            if (!context_matches(c.context, context, policy.ladder[level])) continue;
            rc.cases.push_back(c);
            if (!c.censored) ++rc.uncensored;
        }
        if (rc.uncensored >= policy.n_min) return rc;
        if (!rc.cases.empty()) fallback = std::move(rc);  // broader levels overwrite
    }
    require(fallback.has_value(), Errc::no_data, "no cases at any backoff level");
    return *fallback;
}

}  // namespace presage
