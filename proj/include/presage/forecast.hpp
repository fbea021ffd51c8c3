#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "presage/calendar.hpp"
#include "presage/cases.hpp"
#include "presage/cdf.hpp"
#include "presage/config.hpp"
#include "presage/store.hpp"
#include "presage/timeline.hpp"
#include "presage/tree.hpp"

namespace presage {

// ---------------------------------------------------------------------------
// Expected cost of interruption:
//   ECI = p_attend * sum_i p_i c_i + (1 - p_attend) * c_default(period, day class)

inline double expected_cost_of_interruption(double p_attend,
                                            const std::array<double, 3>& interrupt_dist,
                                            const InterruptCosts& costs, Period period,
                                            DayClass day_class) {
    require(p_attend >= 0.0 && p_attend <= 1.0, Errc::invalid_argument,
            "attendance probability must be in [0,1]");
    double sum = 0.0;
    for (double p : interrupt_dist) {
        require(p >= -1e-12, Errc::invalid_argument, "negative interruptability probability");
        sum += p;
    }
    require(std::abs(sum - 1.0) <= 1e-9, Errc::invalid_argument,
            "interruptability distribution must sum to 1");
    costs.validate();
    double meeting_cost = interrupt_dist[0] * costs.c_low +
                          (interrupt_dist[1] * costs.c_med + interrupt_dist[2] * costs.c_high);
    return p_attend * meeting_cost + (1.0 - p_attend) * costs.default_for(period, day_class);
}

// ---------------------------------------------------------------------------
// Meeting integration: inside each meeting's scope the forecast mixes the
// meeting-conditioned CDF with the background one, weighted by the inferred
// attendance likelihood; a running max then repairs any non-monotonicity the
// piecewise mixing introduces.

struct MeetingScope {
    std::int64_t start_s = 0;  // relative to the query instant
    std::int64_t end_s = 0;    // exclusive
    DurationCdf cdf;
    double p_attend = 0.0;
    std::string id;
};

inline DurationCdf integrate_meetings(const DurationCdf& background,
                                      std::vector<MeetingScope> scopes, Duration horizon,
                                      Duration grid_step) {
    require(horizon.seconds > 0 && grid_step.seconds > 0, Errc::invalid_argument,
            "horizon and grid step must be positive");
    std::sort(scopes.begin(), scopes.end(),
              [](const MeetingScope& a, const MeetingScope& b) { return a.start_s < b.start_s; });
    for (auto& s : scopes) {
        require(s.p_attend >= 0.0 && s.p_attend <= 1.0, Errc::invalid_argument,
                "attendance probability must be in [0,1]");
        s.start_s = std::max<std::int64_t>(s.start_s, 0);
        s.end_s = std::min(s.end_s, horizon.seconds);
    }
    for (std::size_t i = 1; i < scopes.size(); ++i)
        require(scopes[i].start_s >= scopes[i - 1].end_s, Errc::overlapping_scopes,
                "meeting scopes overlap after truncation");

    DurationCdf out;
    out.mode = Interp::step;
    double running = 0.0;
    std::size_t at = 0;
    for (std::int64_t t = 0;; t += grid_step.seconds) {
        if (t > horizon.seconds) t = horizon.seconds;  // include the horizon endpoint
        while (at < scopes.size() && scopes[at].end_s <= t) ++at;
        double g;
        if (at < scopes.size() && scopes[at].start_s <= t && t < scopes[at].end_s) {
            const auto& m = scopes[at];
            g = m.p_attend * m.cdf.value(t) + (1.0 - m.p_attend) * background.value(t);
        } else {
            g = background.value(t);
        }
        running = std::max(running, std::clamp(g, 0.0, 1.0));
        out.points.push_back({t, running});
        if (t == horizon.seconds) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Engine snapshot: everything a query needs, loaded once and immutable.

struct UserData {
    std::vector<RawEvent> events;
    Horizon horizon{};
    Timeline timeline;
    std::vector<AppointmentRecord> calendar;
    AnnotationMap annotations;
};

struct ModelSet {
    std::optional<DecisionTree> attendance;
    std::optional<DecisionTree> interruptability;
};

inline void save_model(const DecisionTree& tree, const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    require(static_cast<bool>(out), Errc::io_error, "cannot write model " + path.string());
    serialize_tree(tree, out);
}

inline DecisionTree load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), Errc::io_error, "cannot open model " + path.string());
    return deserialize_tree(in);
}

struct Snapshot {
    EngineConfig cfg;
    std::vector<DeviceProfile> devices;
    DirectoryStub directory;
    std::map<std::string, UserData> users;
    std::map<std::string, ModelSet> models;

    const UserData& user_data(const std::string& user) const {
        auto it = users.find(user);
        require(it != users.end(), Errc::not_found, "unknown user: " + user);
        return it->second;
    }

    const ModelSet* model_set(const std::string& user) const {
        auto it = models.find(user);
        return it != models.end() ? &it->second : nullptr;
    }

    // Loads stores from a data directory. Models are read from
    // <dir>/models/<user>.{attendance,interruptability}.jsonl when present;
    // otherwise, if annotations allow, they are trained on the spot.
    static Snapshot load(const std::filesystem::path& data_dir, EngineConfig config,
                         bool train_missing_models = true) {
        config.validate();
        Snapshot snap;
        snap.cfg = std::move(config);
        Store store(data_dir);
        snap.devices = store.load_devices();
        snap.directory = store.load_directory();
        Duration theta = snap.cfg.idle_threshold;

        for (const auto& user : store.events().users()) {
            UserData ud;
            ud.events = store.events().load_all(user);
            auto range = store.events().user_range(user);
            ud.horizon = {range->first, range->last + theta};
            ud.timeline = coalesce_timeline(ud.events, theta, ud.horizon);
            ud.calendar = store.load_calendar_all(user);
            ud.annotations = store.load_annotations(user);

            ModelSet ms;
            auto att_path = data_dir / "models" / (user + ".attendance.jsonl");
            auto int_path = data_dir / "models" / (user + ".interruptability.jsonl");
            if (std::filesystem::exists(att_path)) ms.attendance = load_model(att_path);
            if (std::filesystem::exists(int_path)) ms.interruptability = load_model(int_path);
            if (train_missing_models && !ud.calendar.empty()) {
                try {
                    if (!ms.attendance)
                        ms.attendance = train_attendance_model(ud.calendar, ud.annotations,
                                                               snap.directory, user, snap.cfg, 0)
                                            .tree;
                } catch (const Error&) {
                }
                try {
                    if (!ms.interruptability)
                        ms.interruptability =
                            train_interruptability_model(ud.calendar, ud.annotations,
                                                         snap.directory, user, snap.cfg, 0)
                                .tree;
                } catch (const Error&) {
                }
            }
            snap.models.emplace(user, std::move(ms));
            snap.users.emplace(user, std::move(ud));
        }
        return snap;
    }
};

// ---------------------------------------------------------------------------
// Wait-distribution estimation for a reference class: a Bayesian-score tree
// over duration bins when the class is large enough to be worth modeling,
// a raw empirical CDF otherwise.

struct WaitEstimate {
    DurationCdf cdf;
    std::size_t n_used = 0;
};

namespace detail {

inline AttributeSchema context_schema() {
    return AttributeSchema{{
        {"period", {"morning", "lunchtime", "afternoon", "evening", "night"}},
        {"day_of_week",
         {"monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"}},
        {"day_class", {"weekday", "weekend"}},
        {"calendar_status", {"no_meeting", "meeting_scheduled"}},
    }};
}

inline std::vector<int> context_values(const ContextAttributes& ctx,
                                       const AttributeSchema& schema) {
    std::vector<int> v(schema.size());
    for (std::size_t a = 0; a < schema.size(); ++a)
        v[a] = schema.value_index(a, ctx.attribute(schema.attrs[a].name));
    return v;
}

}  // namespace detail

inline WaitEstimate estimate_wait_cdf(std::span<const Case> cases, const ContextAttributes& at,
                                      const EngineConfig& cfg) {
    std::vector<Duration> waits;
    std::size_t censored = 0;
    for (const auto& c : cases) {
        if (c.censored)
            ++censored;
        else
            waits.push_back(c.wait);
    }
    require(!waits.empty(), Errc::no_data, "reference class has no completed waits");

    WaitEstimate est;
    est.n_used = waits.size();
    if (waits.size() >= cfg.n_tree) {
        AttributeSchema schema = detail::context_schema();
        Dataset ds{schema, cfg.binning.num_bins(), {}};
        for (const auto& c : cases) {
            if (c.censored) continue;
            ds.rows.push_back({detail::context_values(c.context, schema),
                               static_cast<int>(bin_duration(c.wait, cfg.binning))});
        }
        auto tree = learn_tree(ds, cfg.effective_alpha(ds.target_arity), cfg.min_leaf);
        auto dist = predict_distribution(tree, detail::context_values(at, schema));
        est.cdf = cdf_from_leaf(dist, cfg.binning.edges_min);
    } else if (cfg.include_censored && censored > 0) {
        est.cdf = empirical_cdf_with_censored(waits, censored);
    } else {
        est.cdf = empirical_cdf(waits);
    }
    return est;
}

// ---------------------------------------------------------------------------
// The end-to-end forecast pipeline.

struct MeetingTermResult {
    std::string id;
    double p_attend = 0.0;
};

struct ForecastResult {
    DurationCdf cdf;
    std::size_t backoff_level = 0;
    std::size_t n_cases = 0;
    Duration away{0};
    std::string summary;
    std::vector<MeetingTermResult> meeting_terms;
};

namespace detail {

inline std::string format_probability(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", p);
    return buf;
}

inline std::string make_summary(const DurationCdf& cdf, double threshold) {
    try {
        Duration q = quantile(cdf, threshold);
        std::int64_t mins = (q.seconds + 59) / 60;
        return "with probability ≥ " + format_probability(threshold) + ", event within " +
               std::to_string(mins) + " minutes";
    } catch (const Error& e) {
        if (e.code() != Errc::quantile_unattainable) throw;
        return "probability " + format_probability(threshold) +
               " not reached within the forecast horizon";
    }
}

}  // namespace detail

inline ForecastResult forecast(const Snapshot& snap, const QuerySpec& query,
                               std::optional<double> threshold_override = std::nullopt) {
    query.validate();
    const EngineConfig& cfg = snap.cfg;
    const UserData& ud = snap.user_data(query.user);
    require(query.at >= ud.horizon.start && query.at < ud.horizon.end, Errc::invalid_argument,
            "query time outside the logged horizon");

    Taxonomy tax = cfg.taxonomy();
    std::int64_t off = cfg.utc_offset_s(query.user);

    // 1. the timeline whose transitions anchor this query kind
    Timeline restricted;
    const Timeline* tl = &ud.timeline;
    if (query.kind == QueryKind::time_until_device_access) {
        restricted = coalesce_timeline(
            filter_events_by_device(ud.events, snap.devices, *query.device), cfg.idle_threshold,
            ud.horizon);
        tl = &restricted;
    } else if (query.kind == QueryKind::time_until_app_engagement) {
        restricted = app_focus_timeline(ud.events, *query.app, ud.horizon);
        tl = &restricted;
    }

    // 2. proximal activity context
    Duration away = query.assumed_away
                        ? *query.assumed_away
                        : proximal_context(*tl, query.at, landmark_for(query.kind));
    Timestamp landmark_ts = query.at.s >= away.seconds ? query.at - away : Timestamp{0};

    // 3. cases consistent with the query kind
    ExtractionSpec es;
    es.kind = query.kind;
    es.min_stay = query.min_stay.value_or(Duration{0});
    es.min_absence = query.min_absence.value_or(Duration{0});
    auto cases = extract_cases(*tl, ud.calendar, ud.annotations, es, tax, off);

    // Background cases are those with no meeting scheduled at the landmark or
    // with the meeting annotated as skipped; they model the no-meeting
    // situation regardless of what they overlapped.
    std::vector<Case> background;
    std::vector<Case> meeting_cases;
    for (const auto& c : cases) {
        if (c.context.calendar_status == CalendarStatus::no_meeting ||
            (c.meeting_attended && !*c.meeting_attended)) {
            background.push_back(c);
            background.back().context.calendar_status = CalendarStatus::no_meeting;
        } else if (c.meeting_attended && *c.meeting_attended) {
            meeting_cases.push_back(c);
        }
    }

    ContextAttributes qctx;
    qctx.period = classify_time_period(landmark_ts, tax, off);
    qctx.calendar_status = CalendarStatus::no_meeting;

    auto rc = build_reference_class(background, qctx, cfg.backoff);
    auto est = estimate_wait_cdf(rc.cases, qctx, cfg);
    DurationCdf f0 = away.seconds > 0 ? condition_on_elapsed(est.cdf, away) : est.cdf;

    // 4. active meetings within the forecast horizon
    ForecastResult result;
    const ModelSet* models = snap.model_set(query.user);
    std::vector<MeetingScope> scopes;
    if (models && models->attendance) {
        Timestamp horizon_end = query.at + cfg.active_horizon;
        for (const auto& appt : ud.calendar) {
            Timestamp s = appt.start - cfg.scope_pad;
            Timestamp e = appt.end + cfg.scope_pad;
            if (e <= query.at || s >= horizon_end) continue;
            MeetingScope scope;
            scope.start_s = s.s > query.at.s ? s.s - query.at.s : 0;
            scope.end_s = std::min(e.s, horizon_end.s) - query.at.s;
            if (scope.end_s <= scope.start_s) continue;
            scope.p_attend =
                predict_attendance(*models->attendance, appt, snap.directory, query.user, cfg);
            scope.id = appt.id;
            scopes.push_back(std::move(scope));
        }
        std::sort(scopes.begin(), scopes.end(),
                  [](const MeetingScope& a, const MeetingScope& b) { return a.start_s < b.start_s; });
        // Overlaps are resolved by truncating the earlier scope at the later
        // scope's start.
        for (std::size_t i = 0; i + 1 < scopes.size(); ++i)
            scopes[i].end_s = std::min(scopes[i].end_s, scopes[i + 1].start_s);
        std::erase_if(scopes, [](const MeetingScope& s) { return s.end_s <= s.start_s; });

        if (!scopes.empty()) {
            // Meeting-conditioned distribution from attended-meeting cases.
            try {
                ContextAttributes mctx = qctx;
                mctx.calendar_status = CalendarStatus::meeting_scheduled;
                auto mrc = build_reference_class(meeting_cases, mctx, cfg.backoff);
                auto mest = estimate_wait_cdf(mrc.cases, mctx, cfg);
                DurationCdf fm =
                    away.seconds > 0 ? condition_on_elapsed(mest.cdf, away) : mest.cdf;
                for (auto& s : scopes) s.cdf = fm;
            } catch (const Error& e) {
                if (e.code() != Errc::no_data && e.code() != Errc::no_surviving_mass) throw;
                scopes.clear();
            }
        }
    }

    result.cdf = scopes.empty()
                     ? f0
                     : integrate_meetings(f0, scopes, cfg.active_horizon, cfg.grid_step);
    result.cdf.check();
    result.backoff_level = rc.backoff_level;
    result.n_cases = est.n_used;
    result.away = away;
    for (const auto& s : scopes) result.meeting_terms.push_back({s.id, s.p_attend});
    result.summary =
        detail::make_summary(result.cdf, threshold_override.value_or(cfg.confidence_threshold));
    return result;
}

// ---------------------------------------------------------------------------
// Point-in-time expected cost of interruption.

struct EciResult {
    double value = 0.0;
    double p_attend = 0.0;
    std::array<double, 3> interrupt_dist{1.0, 0.0, 0.0};
    std::optional<std::string> meeting_id;
    Period period = Period::morning;
    DayClass day_class = DayClass::weekday;
};

inline EciResult eci_at(const Snapshot& snap, const std::string& user, Timestamp at) {
    const UserData& ud = snap.user_data(user);
    Taxonomy tax = snap.cfg.taxonomy();
    TimePeriod tp = classify_time_period(at, tax, snap.cfg.utc_offset_s(user));

    EciResult out;
    out.period = tp.period;
    out.day_class = tp.day_class;

    const AppointmentRecord* active = nullptr;
    for (const auto& appt : ud.calendar)
        if (appt.overlaps(at) && (!active || appt.start < active->start)) active = &appt;

    const ModelSet* models = snap.model_set(user);
    if (active && models && models->attendance && models->interruptability) {
        out.meeting_id = active->id;
        out.p_attend =
            predict_attendance(*models->attendance, *active, snap.directory, user, snap.cfg);
        out.interrupt_dist = predict_interruptability(*models->interruptability, *active,
                                                      snap.directory, user, snap.cfg);
    }
    out.value = expected_cost_of_interruption(out.p_attend, out.interrupt_dist, snap.cfg.costs,
                                              tp.period, tp.day_class);
    return out;
}

}  // namespace presage
