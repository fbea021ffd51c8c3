#pragma once

#include <cstdio>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "presage/cases.hpp"
#include "presage/cdf.hpp"
#include "presage/forecast.hpp"

namespace presage {

// Shared query/result serialization: the CLI and the service must emit
// byte-identical bodies for the same query, so both go through here.
// Durations travel as integer seconds; probabilities as plain decimals with
// full round-trip precision.

struct WireQuery {
    QuerySpec spec;
    std::optional<double> confidence_threshold;
};

inline WireQuery parse_wire_query(const json& j) {
    WireQuery q;
    q.spec.user = j.at("user").get<std::string>();
    q.spec.kind = query_kind_from_string(j.at("kind").get<std::string>());
    q.spec.at = parse_rfc3339(j.at("at").get<std::string>());
    if (j.contains("confidence_threshold"))
        q.confidence_threshold = j["confidence_threshold"].get<double>();
    json params = j.value("params", json::object());
    if (params.contains("min_stay_s"))
        q.spec.min_stay = seconds(params["min_stay_s"].get<std::int64_t>());
    if (params.contains("min_absence_s"))
        q.spec.min_absence = seconds(params["min_absence_s"].get<std::int64_t>());
    if (params.contains("away_s")) q.spec.assumed_away = seconds(params["away_s"].get<std::int64_t>());
    if (params.contains("app")) q.spec.app = params["app"].get<std::string>();
    if (params.contains("capability") || params.contains("location")) {
        DevicePredicate pred;
        if (params.contains("capability")) pred.capability = params["capability"].get<std::string>();
        if (params.contains("location")) pred.location = params["location"].get<std::string>();
        q.spec.device = pred;
    }
    q.spec.validate();
    return q;
}

inline json wire_query_json(const WireQuery& q) {
    json params = json::object();
    if (q.spec.min_stay) params["min_stay_s"] = q.spec.min_stay->seconds;
    if (q.spec.min_absence) params["min_absence_s"] = q.spec.min_absence->seconds;
    if (q.spec.assumed_away) params["away_s"] = q.spec.assumed_away->seconds;
    if (q.spec.app) params["app"] = *q.spec.app;
    if (q.spec.device) {
        if (q.spec.device->capability) params["capability"] = *q.spec.device->capability;
        if (q.spec.device->location) params["location"] = *q.spec.device->location;
    }
    json j{{"user", q.spec.user},
           {"kind", to_string(q.spec.kind)},
           {"at", format_rfc3339(q.spec.at)},
           {"params", params}};
    if (q.confidence_threshold) j["confidence_threshold"] = *q.confidence_threshold;
    return j;
}

inline json wire_result_json(const ForecastResult& r, QueryKind kind, double threshold) {
    json cdf = json::array();
    for (const auto& p : r.cdf.points) cdf.push_back(json::array({p.t, p.f}));

    json quantiles = json::object();
    std::set<double> probs{0.5, 0.9, threshold};
    for (double p : probs) {
        try {
            char key[16];
            std::snprintf(key, sizeof(key), "%.2f", p);
            quantiles[key] = quantile(r.cdf, p).seconds;
        } catch (const Error& e) {
            if (e.code() != Errc::quantile_unattainable) throw;
        }
    }

    json terms = json::array();
    for (const auto& t : r.meeting_terms)
        terms.push_back(json{{"id", t.id}, {"p_attend", t.p_attend}});

    return json{{"kind", to_string(kind)},
                {"cdf", cdf},
                {"quantiles", quantiles},
                {"backoff_level", r.backoff_level},
                {"n_cases", r.n_cases},
                {"away_s", r.away.seconds},
                {"summary", r.summary},
                {"meeting_terms", terms}};
}

inline json error_json(const Error& e) {
    return json{{"error", {{"code", e.name()}, {"message", e.what()}}}};
}

inline json eci_json(const EciResult& r) {
    json j{{"eci", r.value},
           {"p_attend", r.p_attend},
           {"interrupt_dist", {r.interrupt_dist[0], r.interrupt_dist[1], r.interrupt_dist[2]}},
           {"period", to_string(r.period)},
           {"day_class", to_string(r.day_class)}};
    j["meeting_id"] = r.meeting_id ? json(*r.meeting_id) : json(nullptr);
    return j;
}

}  // namespace presage
