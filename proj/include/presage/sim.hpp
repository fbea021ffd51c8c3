#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "presage/calendar.hpp"
#include "presage/cases.hpp"
#include "presage/cdf.hpp"
#include "presage/config.hpp"
#include "presage/events.hpp"
#include "presage/records.hpp"
#include "presage/timeline.hpp"

namespace presage {

// ---------------------------------------------------------------------------
// Portable counter-style PRNG (splitmix64). State transition:
//   state += 0x9E3779B97F4A7C15
//   z = state; z = (z ^ z>>30) * 0xBF58476D1CE4E5B9
//   z = (z ^ z>>27) * 0x94D049BB133111EB; output z ^ z>>31
// Identical draw sequences for identical seeds on every platform, which the
// byte-identical fixture contract depends on.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal(double mean, double sd) {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return mean + sd * std::sqrt(-2.0 * std::log(u1)) *
                          std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double exponential(double rate) { return -std::log(1.0 - uniform()) / rate; }

    double lognormal(double log_mean, double log_sd) {
        if (log_sd <= 0.0) return std::exp(log_mean);
        return std::exp(normal(log_mean, log_sd));
    }

    std::size_t categorical(std::span<const double> probs) {
        double u = uniform();
        double cum = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            cum += probs[i];
            if (u < cum) return i;
        }
        return probs.size() - 1;
    }

  private:
    std::uint64_t state_;
};

// Independent substream for (seed, day, stream).
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t day, std::uint64_t stream) {
    SplitMix64 r(seed ^ (0x9E3779B97F4A7C15ULL * (day + 1) + 0xD1B54A32D192ED03ULL * (stream + 1)));
    r.next_u64();
    return r;
}

// ---------------------------------------------------------------------------
// Generative profile

struct TruncNormalSpec {
    double mean_s = 0, sd_s = 0, lo_s = 0, hi_s = 0;

    double sample(SplitMix64& rng) const {
        if (sd_s <= 0.0) return std::clamp(mean_s, lo_s, hi_s);
        for (int i = 0; i < 1000; ++i) {
            double x = rng.normal(mean_s, sd_s);
            if (x >= lo_s && x <= hi_s) return x;
        }
        return std::clamp(mean_s, lo_s, hi_s);
    }
};

struct LogNormalSpec {
    double log_mean = 0, log_sd = 0;  // of duration in seconds
};

struct MeetingTemplate {
    std::string subject;
    std::string location_field;
    std::string organizer;
    std::vector<std::string> attendees;
    UserRole role = UserRole::required;
    ResponseStatus response = ResponseStatus::responded_yes;
    bool recurrent = false;
    bool busy = true;
    double start_sod = 9 * 3600;
    double duration_s = 1800;
    double daily_prob = 0.5;
    bool off_desk = true;  // attending means leaving the monitored devices
    std::array<double, 3> interrupt_probs{0.6, 0.3, 0.1};
};

// Planted logistic attendance rule over extracted appointment features.
// Weight keys are "attribute=value", e.g. "organized_by_alias=true".
struct AttendanceRule {
    double intercept = 0.0;
    std::map<std::string, double> weights;
};

struct AppUsageSpec {
    std::string app;             // empty disables app-focus events
    double at_return_prob = 0.0;
    double session_s = 300;
};

struct UserProfile {
    std::string user = "u1";
    std::uint64_t seed = 1;
    Timestamp start_day = make_timestamp(2023, 1, 2);  // a Monday, local midnight
    bool weekend_active = false;

    std::array<TruncNormalSpec, 2> arrival{};    // indexed by DayClass
    std::array<TruncNormalSpec, 2> departure{};
    double break_rate_per_hour = 1.5;
    std::array<LogNormalSpec, 5> break_duration{};  // indexed by Period

    std::vector<MeetingTemplate> meeting_templates;
    AttendanceRule attendance;

    std::vector<DeviceProfile> devices;
    DirectoryStub directory;

    double event_spacing_lo_s = 20;
    double event_spacing_hi_s = 55;
    double secondary_device_prob = 0.1;
    double heartbeat_interval_s = 3600;  // 0 disables
    double quantize_s = 0;               // snap day structure to a grid; 0 disables
    AppUsageSpec app_usage;

    void validate() const {
        require(!user.empty() && !devices.empty(), Errc::invalid_config,
                "profile needs a user and at least one device");
        require(break_rate_per_hour >= 0, Errc::invalid_config, "negative break rate");
        require(event_spacing_lo_s > 0 && event_spacing_hi_s >= event_spacing_lo_s &&
                    event_spacing_hi_s <= 60,
                Errc::invalid_config, "event spacing must lie in (0, 60]");
        directory.validate();
    }
};

inline double attend_probability(const AttendanceRule& rule, const AppointmentFeatures& feats,
                                 const AttributeSchema& schema) {
    double z = rule.intercept;
    auto vals = feature_values(feats, schema);
    for (std::size_t a = 0; a < schema.size(); ++a) {
        auto it = rule.weights.find(schema.attrs[a].name + "=" +
                                    schema.attrs[a].domain[static_cast<std::size_t>(vals[a])]);
        if (it != rule.weights.end()) z += it->second;
    }
    return 1.0 / (1.0 + std::exp(-z));
}

// ---------------------------------------------------------------------------
// Day simulation

namespace simdetail {

struct Interval {
    double lo = 0, hi = 0;
};

struct PlannedMeeting {
    AppointmentRecord rec;
    bool attended = false;
    Interruptability label = Interruptability::low;
    bool off_desk = true;
};

struct DayPlan {
    bool active = false;
    std::vector<Interval> presence;        // seconds of local day
    std::vector<PlannedMeeting> meetings;
};

inline std::vector<Interval> merge_intervals(std::vector<Interval> xs) {
    std::sort(xs.begin(), xs.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    std::vector<Interval> out;
    for (const auto& x : xs) {
        if (x.hi <= x.lo) continue;
        if (!out.empty() && x.lo <= out.back().hi)
            out.back().hi = std::max(out.back().hi, x.hi);
        else
            out.push_back(x);
    }
    return out;
}

inline std::vector<Interval> subtract_intervals(Interval window, const std::vector<Interval>& holes) {
    std::vector<Interval> out;
    double cursor = window.lo;
    for (const auto& h : holes) {
        if (h.hi <= cursor) continue;
        if (h.lo >= window.hi) break;
        if (h.lo > cursor) out.push_back({cursor, std::min(h.lo, window.hi)});
        cursor = std::max(cursor, h.hi);
        if (cursor >= window.hi) break;
    }
    if (cursor < window.hi) out.push_back({cursor, window.hi});
    return out;
}

inline double quantize(double x, double q) { return q > 0 ? std::round(x / q) * q : x; }

inline DayPlan plan_day(const UserProfile& p, const EngineConfig& cfg, const Taxonomy& tax,
                        const AttributeSchema& schema, std::int64_t day_index) {
    DayPlan plan;
    Timestamp day_ts = p.start_day + seconds(day_index * 86400);
    std::int64_t off = cfg.utc_offset_s(p.user);
    DayClass dc = day_class_of(weekday_of(day_ts + hours(12), off));
    plan.active = dc == DayClass::weekday || p.weekend_active;
    if (!plan.active) return plan;

    SplitMix64 rng = substream(p.seed, static_cast<std::uint64_t>(day_index), 0);

    double arrive = quantize(p.arrival[static_cast<int>(dc)].sample(rng), p.quantize_s);
    double depart = quantize(p.departure[static_cast<int>(dc)].sample(rng), p.quantize_s);
    if (depart < arrive + 600) depart = arrive + 600;

    std::vector<Interval> away;

    // Meetings fire independently per template and day.
    for (std::size_t m = 0; m < p.meeting_templates.size(); ++m) {
        const auto& t = p.meeting_templates[m];
        double u_fire = rng.uniform();
        double u_attend = rng.uniform();
        double u_label = rng.uniform();
        if (u_fire >= t.daily_prob) continue;

        PlannedMeeting pm;
        pm.rec.id = p.user + "-d" + std::to_string(day_index) + "-m" + std::to_string(m);
        pm.rec.start = day_ts + seconds(static_cast<std::int64_t>(t.start_sod));
        pm.rec.end = pm.rec.start + seconds(static_cast<std::int64_t>(t.duration_s));
        pm.rec.subject = t.subject;
        pm.rec.location_field = t.location_field;
        pm.rec.organizer = t.organizer;
        pm.rec.attendees = t.attendees;
        pm.rec.user_role = t.role;
        pm.rec.response_status = t.response;
        pm.rec.recurrent = t.recurrent;
        pm.rec.busy_flag = t.busy;
        pm.rec.organized_by_alias = p.directory.is_alias(t.organizer);
        pm.off_desk = t.off_desk;

        auto feats = extract_features(pm.rec, p.directory, p.user, tax, cfg.subject_classes, off);
        double pa = attend_probability(p.attendance, feats, schema);
        pm.attended = u_attend < pa;

        double cum = 0.0;
        pm.label = Interruptability::high;
        for (int k = 0; k < 3; ++k) {
            cum += t.interrupt_probs[static_cast<std::size_t>(k)];
            if (u_label < cum) {
                pm.label = static_cast<Interruptability>(k);
                break;
            }
        }

        if (pm.attended && pm.off_desk) away.push_back({t.start_sod, t.start_sod + t.duration_s});
        plan.meetings.push_back(std::move(pm));
    }

    // Break process: exponential inter-onset gaps, lognormal durations keyed
    // by the period of the onset.
    if (p.break_rate_per_hour > 0) {
        double t = arrive;
        while (true) {
            t += rng.exponential(p.break_rate_per_hour / 3600.0);
            if (t >= depart) break;
            double onset = quantize(t, p.quantize_s);
            Period per = tax.period_at(static_cast<std::int64_t>(onset) % 86400);
            const auto& ln = p.break_duration[static_cast<int>(per)];
            double dur = quantize(rng.lognormal(ln.log_mean, ln.log_sd), p.quantize_s);
            if (dur < 1) dur = p.quantize_s > 0 ? p.quantize_s : 1;
            away.push_back({onset, onset + dur});
            t = onset + dur;
        }
    }

    plan.presence = subtract_intervals({arrive, std::min(depart, 86300.0)}, merge_intervals(away));
    return plan;
}

inline void emit_day_events(const UserProfile& p, const DayPlan& plan, std::int64_t day_index,
                            std::vector<RawEvent>& out) {
    Timestamp day_ts = p.start_day + seconds(day_index * 86400);
    const std::string& primary = p.devices.front().device;

    if (p.heartbeat_interval_s > 0) {
        for (double t = 0; t < 86400; t += p.heartbeat_interval_s)
            out.push_back({day_ts + seconds(static_cast<std::int64_t>(t)), p.user, primary,
                           EventKind::heartbeat, std::nullopt});
    }
    if (!plan.active) return;

    SplitMix64 rng = substream(p.seed, static_cast<std::uint64_t>(day_index), 1);
    for (const auto& iv : plan.presence) {
        if (iv.hi - iv.lo < 1) continue;

        bool app_session = !p.app_usage.app.empty() && rng.uniform() < p.app_usage.at_return_prob;
        double t = iv.lo;
        while (t < iv.hi) {
            std::string dev = primary;
            if (p.devices.size() > 1 && rng.uniform() < p.secondary_device_prob)
                dev = p.devices[1].device;
            out.push_back({day_ts + seconds(static_cast<std::int64_t>(t)), p.user, dev,
                           EventKind::activity, std::nullopt});
            t += rng.uniform(p.event_spacing_lo_s, p.event_spacing_hi_s);
        }

        if (app_session && iv.hi - iv.lo > 60) {
            double b = iv.lo + 30;
            double e = std::min(b + p.app_usage.session_s, iv.hi - 1);
            if (e > b) {
                out.push_back({day_ts + seconds(static_cast<std::int64_t>(b)), p.user, primary,
                               EventKind::app_focus_begin, p.app_usage.app});
                out.push_back({day_ts + seconds(static_cast<std::int64_t>(e)), p.user, primary,
                               EventKind::app_focus_end, p.app_usage.app});
            }
        }
    }
}

inline void sort_events(std::vector<RawEvent>& events) {
    std::sort(events.begin(), events.end(), [](const RawEvent& a, const RawEvent& b) {
        auto ka = std::tie(a.ts.s, a.device, a.app);
        auto kb = std::tie(b.ts.s, b.device, b.app);
        if (ka != kb) return ka < kb;
        return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    });
}

}  // namespace simdetail

// ---------------------------------------------------------------------------
// Whole-log generation

struct GroundTruth {
    std::map<std::string, bool> attended;                 // appointment id -> attended
    std::map<std::string, Interruptability> interrupt;    // appointment id -> label
};

struct SimOutput {
    std::vector<RawEvent> events;
    std::vector<AppointmentRecord> appointments;
    GroundTruth truth;
};

// Deterministic given the profile seed: same profile + seed -> byte-identical
// logs. Activity events are spaced at most 60 s apart during presence.
inline SimOutput generate_user(const UserProfile& profile, const EngineConfig& cfg,
                               std::int64_t days) {
    profile.validate();
    require(days >= 1, Errc::invalid_argument, "days must be >= 1");
    Taxonomy tax = cfg.taxonomy();
    AttributeSchema schema = appointment_schema(cfg.subject_classes);

    SimOutput out;
    out.events.reserve(static_cast<std::size_t>(days) * 256);
    for (std::int64_t d = 0; d < days; ++d) {
        auto plan = simdetail::plan_day(profile, cfg, tax, schema, d);
        for (auto& pm : plan.meetings) {
            out.truth.attended[pm.rec.id] = pm.attended;
            out.truth.interrupt[pm.rec.id] = pm.label;
            out.appointments.push_back(std::move(pm.rec));
        }
        simdetail::emit_day_events(profile, plan, d, out.events);
    }
    simdetail::sort_events(out.events);
    return out;
}

// ---------------------------------------------------------------------------
// Monte-Carlo oracle: simulates fresh continuations of a query scenario from
// the generative model directly, bypassing the forecasting engine, and
// returns the empirical CDF of the target event time. Onsets and waits are
// measured in the same coalesced sense the engine uses; continuations whose
// wait is still unresolved when the simulation window ends are skipped,
// mirroring the engine's exclusion of censored cases.

struct OracleScenario {
    QueryKind kind = QueryKind::time_until_return;
    Duration min_stay{0};
    Duration min_absence{0};
    Duration elapsed{0};
    Period period = Period::morning;
    DayClass day_class = DayClass::weekday;
};

namespace simdetail {

struct Run {
    std::int64_t first = 0, last = 0;  // epoch seconds of first/last qualifying event
};

inline std::vector<Run> runs_from_events(const std::vector<RawEvent>& events, std::int64_t theta) {
    std::vector<Run> runs;
    for (const auto& ev : events) {
        if (!counts_toward_presence(ev.kind)) continue;
        if (!runs.empty() && ev.ts.s <= runs.back().last + theta)
            runs.back().last = std::max(runs.back().last, ev.ts.s);
        else
            runs.push_back({ev.ts.s, ev.ts.s});
    }
    return runs;
}

}  // namespace simdetail

inline DurationCdf monte_carlo_oracle(const UserProfile& profile, const EngineConfig& cfg,
                                      const OracleScenario& scenario, std::size_t n_samples,
                                      std::uint64_t oracle_seed) {
    require(n_samples >= 1, Errc::invalid_argument, "n_samples must be positive");
    profile.validate();
    UserProfile fresh = profile;
    fresh.seed = oracle_seed;
    fresh.heartbeat_interval_s = 0;  // liveness pings never qualify; skip emitting them

    Taxonomy tax = cfg.taxonomy();
    AttributeSchema schema = appointment_schema(cfg.subject_classes);
    std::int64_t off = cfg.utc_offset_s(profile.user);
    std::int64_t theta = cfg.idle_threshold.seconds;
    bool leave = scenario.kind == QueryKind::time_until_leave;
    std::int64_t min_len =
        (leave ? scenario.min_absence : scenario.min_stay).seconds;

    constexpr std::int64_t kBlockDays = 24;
    std::vector<Duration> samples;
    samples.reserve(n_samples);

    const std::int64_t max_blocks = 4000 + static_cast<std::int64_t>(n_samples);
    for (std::int64_t block = 0; block < max_blocks && samples.size() < n_samples; ++block) {
        if (block == 50 && samples.empty()) break;  // dead scenario, stop early
        std::int64_t day0 = block * kBlockDays;
        std::vector<RawEvent> events;
        std::vector<std::pair<std::int64_t, std::int64_t>> meetings;  // [start, end) epoch s
        for (std::int64_t d = day0; d < day0 + kBlockDays; ++d) {
            auto plan = simdetail::plan_day(fresh, cfg, tax, schema, d);
            for (const auto& pm : plan.meetings)
                meetings.emplace_back(pm.rec.start.s, pm.rec.end.s);
            simdetail::emit_day_events(fresh, plan, d, events);
        }
        simdetail::sort_events(events);
        auto runs = simdetail::runs_from_events(events, theta);
        if (runs.size() < 2) continue;

        // Harvest only onsets with a full trailing day of resolution slack.
        std::int64_t harvest_end =
            (profile.start_day + seconds((day0 + kBlockDays - 1) * 86400)).s;

        auto context_matches = [&](std::int64_t onset) {
            Timestamp t{onset};
            TimePeriod tp = classify_time_period(t, tax, off);
            if (tp.period != scenario.period || tp.day_class != scenario.day_class) return false;
            for (const auto& [ms, me] : meetings)
                if (ms <= onset && onset < me) return false;  // background is no-meeting
            return true;
        };

        if (!leave) {
            for (std::size_t i = 0; i + 1 < runs.size() && samples.size() < n_samples; ++i) {
                std::int64_t onset = runs[i].last + theta;
                if (onset >= harvest_end || !context_matches(onset)) continue;
                for (std::size_t j = i + 1; j < runs.size(); ++j) {
                    std::int64_t run_len = runs[j].last + theta - runs[j].first;
                    if (run_len < min_len) continue;
                    std::int64_t wait = runs[j].first - onset;
                    if (wait > scenario.elapsed.seconds)
                        samples.push_back(Duration{wait - scenario.elapsed.seconds});
                    break;
                }
            }
        } else {
            for (std::size_t i = 0; i < runs.size() && samples.size() < n_samples; ++i) {
                std::int64_t onset = runs[i].first;
                if (onset >= harvest_end || !context_matches(onset)) continue;
                for (std::size_t k = i; k + 1 < runs.size(); ++k) {
                    std::int64_t gap_start = runs[k].last + theta;
                    std::int64_t gap_len = runs[k + 1].first - gap_start;
                    if (gap_len < min_len) continue;
                    std::int64_t wait = gap_start - onset;
                    if (wait > scenario.elapsed.seconds)
                        samples.push_back(Duration{wait - scenario.elapsed.seconds});
                    break;
                }
            }
        }
    }

    require(!samples.empty(), Errc::no_data, "scenario yielded no surviving continuations");
    return empirical_cdf(samples);
}

// ---------------------------------------------------------------------------
// Analytic Bayes-optimal accuracies under the planted rules. Templates with
// identical feature vectors are pooled, since a predictor only sees features.

namespace simdetail {

struct TemplateGroup {
    double q = 0;                          // expected instances per day
    double q_attend = 0;                   // q * p(attend)
    std::array<double, 3> q_label{0, 0, 0};
};

inline std::map<std::vector<int>, TemplateGroup> group_templates(const UserProfile& p,
                                                                 const EngineConfig& cfg) {
    Taxonomy tax = cfg.taxonomy();
    AttributeSchema schema = appointment_schema(cfg.subject_classes);
    std::int64_t off = cfg.utc_offset_s(p.user);
    std::map<std::vector<int>, TemplateGroup> groups;
    for (const auto& t : p.meeting_templates) {
        AppointmentRecord rec;
        rec.id = "rep";
        rec.start = p.start_day + seconds(static_cast<std::int64_t>(t.start_sod));
        rec.end = rec.start + seconds(static_cast<std::int64_t>(t.duration_s));
        rec.subject = t.subject;
        rec.location_field = t.location_field;
        rec.organizer = t.organizer;
        rec.attendees = t.attendees;
        rec.user_role = t.role;
        rec.response_status = t.response;
        rec.recurrent = t.recurrent;
        rec.busy_flag = t.busy;
        auto feats = extract_features(rec, p.directory, p.user, tax, cfg.subject_classes, off);
        double pa = attend_probability(p.attendance, feats, schema);
        auto& g = groups[feature_values(feats, schema)];
        g.q += t.daily_prob;
        g.q_attend += t.daily_prob * pa;
        for (int k = 0; k < 3; ++k)
            g.q_label[static_cast<std::size_t>(k)] +=
                t.daily_prob * t.interrupt_probs[static_cast<std::size_t>(k)];
    }
    return groups;
}

}  // namespace simdetail

inline double attendance_bayes_accuracy(const UserProfile& p, const EngineConfig& cfg) {
    double total = 0, correct = 0;
    for (const auto& [_, g] : simdetail::group_templates(p, cfg)) {
        total += g.q;
        correct += std::max(g.q_attend, g.q - g.q_attend);
    }
    require(total > 0, Errc::invalid_argument, "profile has no meeting templates");
    return correct / total;
}

inline double interruptability_bayes_accuracy(const UserProfile& p, const EngineConfig& cfg) {
    double total = 0, correct = 0;
    for (const auto& [_, g] : simdetail::group_templates(p, cfg)) {
        total += g.q;
        correct += std::max({g.q_label[0], g.q_label[1], g.q_label[2]});
    }
    require(total > 0, Errc::invalid_argument, "profile has no meeting templates");
    return correct / total;
}

}  // namespace presage
