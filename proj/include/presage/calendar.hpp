#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "presage/config.hpp"
#include "presage/records.hpp"
#include "presage/time.hpp"
#include "presage/timeline.hpp"
#include "presage/tree.hpp"

namespace presage {

enum class OrganizerRelation : int {
    self = 0,
    manager,
    manager_of_manager,
    direct_report,
    peer,
    other
};

inline const char* to_string(OrganizerRelation r) {
    static constexpr const char* names[] = {"self",          "manager", "manager_of_manager",
                                            "direct_report", "peer",    "other"};
    return names[static_cast<int>(r)];
}

// The predictor vector extracted from one appointment.
struct AppointmentFeatures {
    bool organized_by_alias = false;
    int duration_bin = 0;        // <=30, 31-60, 61-120, >120 minutes
    UserRole role = UserRole::required;
    ResponseStatus response_status = ResponseStatus::no_response;
    bool recurrent = false;
    bool busy_flag = true;
    int attendee_count_bin = 0;  // 1-2, 3-5, 6-10, >10
    bool direct_reports_invited = false;
    OrganizerRelation organizer_relation = OrganizerRelation::other;
    bool location_known = false;
    std::string subject_token_class = "none";
    TimePeriod period;
};

namespace detail {

inline int duration_bin_of(Duration d) {
    std::int64_t m = d.seconds / 60;
    if (m <= 30) return 0;
    if (m <= 60) return 1;
    if (m <= 120) return 2;
    return 3;
}

inline int attendee_count_bin_of(std::size_t n) {
    if (n <= 2) return 0;
    if (n <= 5) return 1;
    if (n <= 10) return 2;
    return 3;
}

inline std::string lowered(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string subject_class_of(const std::string& subject,
                                    std::span<const SubjectClass> table) {
    std::string low = lowered(subject);
    for (const auto& sc : table)
        for (const auto& kw : sc.keywords)
            if (low.find(lowered(kw)) != std::string::npos) return sc.cls;
    return "none";
}

inline OrganizerRelation relation_of(const std::string& organizer, const std::string& user,
                                     const DirectoryStub& dir) {
    if (organizer == user) return OrganizerRelation::self;
    auto mgr = dir.manager_of(user);
    if (mgr) {
        if (*mgr == organizer) return OrganizerRelation::manager;
        auto mgr2 = dir.manager_of(*mgr);
        if (mgr2 && *mgr2 == organizer) return OrganizerRelation::manager_of_manager;
    }
    auto org_mgr = dir.manager_of(organizer);
    if (org_mgr && *org_mgr == user) return OrganizerRelation::direct_report;
    if (org_mgr && mgr && *org_mgr == *mgr) return OrganizerRelation::peer;
    return OrganizerRelation::other;
}

}  // namespace detail

inline AppointmentFeatures extract_features(const AppointmentRecord& appt,
                                            const DirectoryStub& directory,
                                            const std::string& user, const Taxonomy& taxonomy,
                                            std::span<const SubjectClass> subject_classes,
                                            std::int64_t utc_offset_s = 0) {
    AppointmentFeatures f;
    f.organized_by_alias = directory.is_alias(appt.organizer);
    f.duration_bin = detail::duration_bin_of(appt.end - appt.start);
    f.role = appt.user_role;
    f.response_status = appt.response_status;
    f.recurrent = appt.recurrent;
    f.busy_flag = appt.busy_flag;
    f.attendee_count_bin = detail::attendee_count_bin_of(appt.attendees.size());
    f.direct_reports_invited = std::any_of(
        appt.attendees.begin(), appt.attendees.end(), [&](const std::string& a) {
            auto mgr = directory.manager_of(a);
            return mgr && *mgr == user;
        });
    f.organizer_relation = detail::relation_of(appt.organizer, user, directory);
    f.location_known = !appt.location_field.empty();
    f.subject_token_class = detail::subject_class_of(appt.subject, subject_classes);
    f.period = classify_time_period(appt.start, taxonomy, utc_offset_s);
    return f;
}

// ---------------------------------------------------------------------------
// Feature vector <-> dataset row

inline AttributeSchema appointment_schema(std::span<const SubjectClass> subject_classes) {
    std::vector<std::string> subject_domain = {"none"};
    for (const auto& sc : subject_classes) subject_domain.push_back(sc.cls);
    return AttributeSchema{{
        {"organized_by_alias", {"false", "true"}},
        {"duration_bin", {"le30", "31to60", "61to120", "gt120"}},
        {"role", {"organizer", "required", "optional"}},
        {"response_status",
         {"responded_yes", "responded_tentative", "no_response", "no_response_requested"}},
        {"recurrent", {"false", "true"}},
        {"busy_flag", {"false", "true"}},
        {"attendee_count_bin", {"1to2", "3to5", "6to10", "gt10"}},
        {"direct_reports_invited", {"false", "true"}},
        {"organizer_relation",
         {"self", "manager", "manager_of_manager", "direct_report", "peer", "other"}},
        {"location_known", {"false", "true"}},
        {"subject_token_class", subject_domain},
        {"period", {"morning", "lunchtime", "afternoon", "evening", "night"}},
        {"day_class", {"weekday", "weekend"}},
    }};
}

inline std::vector<int> feature_values(const AppointmentFeatures& f, const AttributeSchema& schema) {
    std::vector<int> v(13);
    v[0] = f.organized_by_alias ? 1 : 0;
    v[1] = f.duration_bin;
    v[2] = static_cast<int>(f.role);
    v[3] = static_cast<int>(f.response_status);
    v[4] = f.recurrent ? 1 : 0;
    v[5] = f.busy_flag ? 1 : 0;
    v[6] = f.attendee_count_bin;
    v[7] = f.direct_reports_invited ? 1 : 0;
    v[8] = static_cast<int>(f.organizer_relation);
    v[9] = f.location_known ? 1 : 0;
    v[10] = schema.value_index(10, f.subject_token_class);
    v[11] = static_cast<int>(f.period.period);
    v[12] = static_cast<int>(f.period.day_class);
    return v;
}

// ---------------------------------------------------------------------------
// Heuristic draft labeling: desktop activity through a large part of a
// meeting is evidence it was skipped; near-total inactivity is evidence it
// was attended. The middle ground is left for manual labeling.

inline std::vector<AnnotationRecord> draft_attendance_labels(
    std::span<const AppointmentRecord> calendar, const Timeline& office_timeline, double f_hi,
    double f_lo) {
    require(f_lo >= 0.0 && f_lo < f_hi && f_hi <= 1.0, Errc::invalid_argument,
            "draft thresholds must satisfy 0 <= f_lo < f_hi <= 1");
    std::vector<AnnotationRecord> out;
    for (const auto& appt : calendar) {
        std::int64_t covered = 0;
        for (const auto& seg : office_timeline) {
            if (seg.state != PresenceState::present) continue;
            Timestamp lo = std::max(seg.start, appt.start);
            Timestamp hi = std::min(seg.end, appt.end);
            if (lo < hi) covered += (hi - lo).seconds;
        }
        double f = static_cast<double>(covered) / static_cast<double>((appt.end - appt.start).seconds);
        AnnotationRecord r;
        r.appointment_id = appt.id;
        r.source = AnnotationSource::heuristic_draft;
        if (f >= f_hi)
            r.attended = false;
        else if (f <= f_lo)
            r.attended = true;
        else
            continue;  // between thresholds: no draft
        out.push_back(std::move(r));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Attendance / interruptability models

// Class order for attendance targets; predict_attendance returns p(attend).
inline constexpr int kNotAttendedClass = 0;
inline constexpr int kAttendedClass = 1;

struct TrainedModel {
    DecisionTree tree;
    HoldoutMetrics metrics;
    std::size_t train_rows = 0;
};

namespace detail {

struct LabeledRow {
    const AppointmentRecord* appt;
    int target;
};

inline TrainedModel train_appointment_model(const std::vector<detail::LabeledRow>& labeled,
                                            std::size_t target_arity,
                                            const DirectoryStub& directory,
                                            const std::string& user, const EngineConfig& cfg,
                                            std::size_t holdout_count) {
    require(labeled.size() >= 2, Errc::model_degenerate, "not enough labeled appointments");
    require(holdout_count < labeled.size(), Errc::invalid_argument,
            "holdout larger than labeled data");

    Taxonomy tax = cfg.taxonomy();
    std::int64_t off = cfg.utc_offset_s(user);
    AttributeSchema schema = appointment_schema(cfg.subject_classes);

    Dataset train{schema, target_arity, {}}, holdout{schema, target_arity, {}};
    std::size_t n_train = labeled.size() - holdout_count;
    std::vector<bool> seen(target_arity, false);
    for (std::size_t i = 0; i < labeled.size(); ++i) {
        auto feats = extract_features(*labeled[i].appt, directory, user, tax,
                                      cfg.subject_classes, off);
        DataRow row{feature_values(feats, schema), labeled[i].target};
        if (i < n_train) {
            seen[static_cast<std::size_t>(row.target)] = true;
            train.rows.push_back(std::move(row));
        } else {
            holdout.rows.push_back(std::move(row));
        }
    }
    require(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }),
            Errc::model_degenerate, "training split is missing a class");

    TrainedModel out;
    out.tree = learn_tree(train, cfg.effective_alpha(target_arity), cfg.min_leaf);
    out.train_rows = train.rows.size();
    if (!holdout.rows.empty()) out.metrics = evaluate_holdout(out.tree, holdout);
    return out;
}

}  // namespace detail

// Trains on the chronologically first rows and holds out the last
// `holdout_count` labeled appointments.
inline TrainedModel train_attendance_model(std::span<const AppointmentRecord> calendar,
                                           const AnnotationMap& annotations,
                                           const DirectoryStub& directory,
                                           const std::string& user, const EngineConfig& cfg,
                                           std::size_t holdout_count) {
    std::vector<detail::LabeledRow> labeled;
    for (const auto& a : calendar) {
        auto it = annotations.find(a.id);
        if (it == annotations.end() || !it->second.attended) continue;
        labeled.push_back({&a, *it->second.attended ? kAttendedClass : kNotAttendedClass});
    }
    return detail::train_appointment_model(labeled, 2, directory, user, cfg, holdout_count);
}

inline TrainedModel train_interruptability_model(std::span<const AppointmentRecord> calendar,
                                                 const AnnotationMap& annotations,
                                                 const DirectoryStub& directory,
                                                 const std::string& user, const EngineConfig& cfg,
                                                 std::size_t holdout_count) {
    std::vector<detail::LabeledRow> labeled;
    for (const auto& a : calendar) {
        auto it = annotations.find(a.id);
        if (it == annotations.end() || !it->second.interruptability) continue;
        labeled.push_back({&a, static_cast<int>(*it->second.interruptability)});
    }
    return detail::train_appointment_model(labeled, 3, directory, user, cfg, holdout_count);
}

inline std::vector<double> predict_appointment(const DecisionTree& tree,
                                               const AppointmentRecord& appt,
                                               const DirectoryStub& directory,
                                               const std::string& user, const EngineConfig& cfg) {
    auto feats = extract_features(appt, directory, user, cfg.taxonomy(), cfg.subject_classes,
                                  cfg.utc_offset_s(user));
    return predict_distribution(tree, feature_values(feats, tree.schema));
}

inline double predict_attendance(const DecisionTree& tree, const AppointmentRecord& appt,
                                 const DirectoryStub& directory, const std::string& user,
                                 const EngineConfig& cfg) {
    require(tree.target_arity == 2, Errc::invalid_argument, "not an attendance model");
    return predict_appointment(tree, appt, directory, user, cfg)[kAttendedClass];
}

inline std::array<double, 3> predict_interruptability(const DecisionTree& tree,
                                                      const AppointmentRecord& appt,
                                                      const DirectoryStub& directory,
                                                      const std::string& user,
                                                      const EngineConfig& cfg) {
    require(tree.target_arity == 3, Errc::invalid_argument, "not an interruptability model");
    auto p = predict_appointment(tree, appt, directory, user, cfg);
    return {p[0], p[1], p[2]};
}

}  // namespace presage
