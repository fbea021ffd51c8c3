#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "presage/cases.hpp"
#include "presage/error.hpp"
#include "presage/time.hpp"
#include "presage/tree.hpp"

namespace presage {

// Dollar-value interruption costs: one per interruptability level during
// meetings, plus default costs per (period, day class) for free time.
struct InterruptCosts {
    double c_low = 10.0;
    double c_med = 4.0;
    double c_high = 1.0;
    double default_cost = 2.0;
    // Optional overrides keyed by "period/day_class", e.g. "morning/weekday".
    std::map<std::string, double> default_overrides;

    double default_for(Period p, DayClass dc) const {
        auto it = default_overrides.find(std::string(to_string(p)) + "/" + to_string(dc));
        return it != default_overrides.end() ? it->second : default_cost;
    }

    void validate() const {
        require(c_low >= 0 && c_med >= 0 && c_high >= 0 && default_cost >= 0,
                Errc::invalid_config, "interruption costs must be nonnegative");
        for (const auto& [_, v] : default_overrides)
            require(v >= 0, Errc::invalid_config, "interruption costs must be nonnegative");
    }
};

struct SubjectClass {
    std::string cls;
    std::vector<std::string> keywords;
};

struct EngineConfig {
    // core-model
    std::vector<PeriodWindow> taxonomy_windows = Taxonomy::default_windows();
    std::int64_t utc_offset_minutes = 0;
    std::map<std::string, std::int64_t> per_user_utc_offset_minutes;
    Duration idle_threshold = seconds(300);

    // cases
    BackoffPolicy backoff = BackoffPolicy::defaults();
    bool include_censored = false;

    // learn
    double alpha_total = 0.0;  // 0 means "use target arity"
    std::size_t min_leaf = 5;
    DurationBinning binning{{2, 5, 10, 15, 30, 60, 120, 240, 480}};

    // forecast
    std::size_t n_tree = 100;
    Duration scope_pad = minutes(15);
    Duration active_horizon = hours(8);
    Duration grid_step = seconds(60);
    double confidence_threshold = 0.8;

    // calendar
    double draft_f_hi = 0.5;
    double draft_f_lo = 0.1;
    std::vector<SubjectClass> subject_classes = {
        {"one_on_one", {"1:1", "one on one"}},
        {"review", {"review"}},
        {"all_hands", {"all hands", "allhands"}},
    };

    InterruptCosts costs;

    Taxonomy taxonomy() const { return Taxonomy(taxonomy_windows); }

    std::int64_t utc_offset_s(const std::string& user) const {
        auto it = per_user_utc_offset_minutes.find(user);
        return (it != per_user_utc_offset_minutes.end() ? it->second : utc_offset_minutes) * 60;
    }

    double effective_alpha(std::size_t target_arity) const {
        return alpha_total > 0.0 ? alpha_total : static_cast<double>(target_arity);
    }

    void validate() const {
        Taxonomy check(taxonomy_windows);
        require(idle_threshold.seconds > 0, Errc::invalid_config,
                "idle_threshold must be positive");
        backoff.validate();
        binning.validate();
        require(min_leaf >= 1, Errc::invalid_config, "min_leaf must be at least 1");
        require(n_tree >= 1, Errc::invalid_config, "n_tree must be at least 1");
        require(grid_step.seconds > 0 && active_horizon.seconds > 0 && scope_pad.seconds >= 0,
                Errc::invalid_config, "bad forecast intervals");
        require(confidence_threshold > 0.0 && confidence_threshold <= 1.0, Errc::invalid_config,
                "confidence threshold must be in (0,1]");
        require(draft_f_lo >= 0.0 && draft_f_lo < draft_f_hi && draft_f_hi <= 1.0,
                Errc::invalid_config, "draft thresholds must satisfy 0 <= f_lo < f_hi <= 1");
        costs.validate();
    }
};

// ---------------------------------------------------------------------------
// JSON config file. Missing keys keep their defaults.

namespace detail {

inline std::int64_t parse_hhmm(const std::string& s) {
    unsigned h = 0, m = 0;
    require(std::sscanf(s.c_str(), "%u:%u", &h, &m) == 2 && h <= 24 && m < 60, Errc::parse_error,
            "bad HH:MM time: " + s);
    return static_cast<std::int64_t>(h) * 3600 + static_cast<std::int64_t>(m) * 60;
}

inline std::string format_hhmm(std::int64_t sod) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02lld:%02lld", static_cast<long long>(sod / 3600),
                  static_cast<long long>((sod / 60) % 60));
    return buf;
}

inline Period period_from_string(const std::string& s) {
    for (int i = 0; i < 5; ++i)
        if (s == to_string(static_cast<Period>(i))) return static_cast<Period>(i);
    fail(Errc::parse_error, "unknown period name: " + s);
}

}  // namespace detail

inline nlohmann::json config_to_json(const EngineConfig& cfg) {
    nlohmann::json periods = nlohmann::json::array();
    for (const auto& w : cfg.taxonomy_windows)
        periods.push_back({{"name", to_string(w.period)},
                           {"start", detail::format_hhmm(w.start_sod)},
                           {"end", detail::format_hhmm(w.end_sod % 86400)}});
    nlohmann::json subjects = nlohmann::json::array();
    for (const auto& sc : cfg.subject_classes)
        subjects.push_back({{"class", sc.cls}, {"keywords", sc.keywords}});
    return nlohmann::json{
        {"taxonomy", {{"periods", periods}}},
        {"utc_offset_minutes", cfg.utc_offset_minutes},
        {"per_user_utc_offset_minutes", cfg.per_user_utc_offset_minutes},
        {"idle_threshold_s", cfg.idle_threshold.seconds},
        {"backoff", {{"ladder", cfg.backoff.ladder}, {"n_min", cfg.backoff.n_min}}},
        {"include_censored", cfg.include_censored},
        {"learner",
         {{"alpha_total", cfg.alpha_total},
          {"min_leaf", cfg.min_leaf},
          {"duration_bin_edges_min", cfg.binning.edges_min}}},
        {"forecast",
         {{"n_tree", cfg.n_tree},
          {"scope_pad_s", cfg.scope_pad.seconds},
          {"active_horizon_s", cfg.active_horizon.seconds},
          {"grid_step_s", cfg.grid_step.seconds},
          {"confidence_threshold", cfg.confidence_threshold}}},
        {"drafts", {{"f_hi", cfg.draft_f_hi}, {"f_lo", cfg.draft_f_lo}}},
        {"subject_classes", subjects},
        {"eci",
         {{"c_low", cfg.costs.c_low},
          {"c_med", cfg.costs.c_med},
          {"c_high", cfg.costs.c_high},
          {"default_cost", cfg.costs.default_cost},
          {"default_overrides", cfg.costs.default_overrides}}},
    };
}

inline EngineConfig config_from_json(const nlohmann::json& j) {
    EngineConfig cfg;
    if (j.contains("taxonomy")) {
        cfg.taxonomy_windows.clear();
        for (const auto& p : j["taxonomy"].at("periods")) {
            PeriodWindow w;
            w.period = detail::period_from_string(p.at("name").get<std::string>());
            w.start_sod = detail::parse_hhmm(p.at("start").get<std::string>());
            w.end_sod = detail::parse_hhmm(p.at("end").get<std::string>());
            cfg.taxonomy_windows.push_back(w);
        }
    }
    cfg.utc_offset_minutes = j.value("utc_offset_minutes", cfg.utc_offset_minutes);
    if (j.contains("per_user_utc_offset_minutes"))
        cfg.per_user_utc_offset_minutes =
            j["per_user_utc_offset_minutes"].get<std::map<std::string, std::int64_t>>();
    cfg.idle_threshold = seconds(j.value("idle_threshold_s", cfg.idle_threshold.seconds));
    if (j.contains("backoff")) {
        const auto& b = j["backoff"];
        if (b.contains("ladder"))
            cfg.backoff.ladder = b["ladder"].get<std::vector<std::vector<std::string>>>();
        cfg.backoff.n_min = b.value("n_min", cfg.backoff.n_min);
    }
    cfg.include_censored = j.value("include_censored", cfg.include_censored);
    if (j.contains("learner")) {
        const auto& l = j["learner"];
        cfg.alpha_total = l.value("alpha_total", cfg.alpha_total);
        cfg.min_leaf = l.value("min_leaf", cfg.min_leaf);
        if (l.contains("duration_bin_edges_min"))
            cfg.binning.edges_min = l["duration_bin_edges_min"].get<std::vector<std::int64_t>>();
    }
    if (j.contains("forecast")) {
        const auto& f = j["forecast"];
        cfg.n_tree = f.value("n_tree", cfg.n_tree);
        cfg.scope_pad = seconds(f.value("scope_pad_s", cfg.scope_pad.seconds));
        cfg.active_horizon = seconds(f.value("active_horizon_s", cfg.active_horizon.seconds));
        cfg.grid_step = seconds(f.value("grid_step_s", cfg.grid_step.seconds));
        cfg.confidence_threshold = f.value("confidence_threshold", cfg.confidence_threshold);
    }
    if (j.contains("drafts")) {
        cfg.draft_f_hi = j["drafts"].value("f_hi", cfg.draft_f_hi);
        cfg.draft_f_lo = j["drafts"].value("f_lo", cfg.draft_f_lo);
    }
    if (j.contains("subject_classes")) {
        cfg.subject_classes.clear();
        for (const auto& sc : j["subject_classes"])
            cfg.subject_classes.push_back({sc.at("class").get<std::string>(),
                                           sc.at("keywords").get<std::vector<std::string>>()});
    }
    if (j.contains("eci")) {
        const auto& e = j["eci"];
        cfg.costs.c_low = e.value("c_low", cfg.costs.c_low);
        cfg.costs.c_med = e.value("c_med", cfg.costs.c_med);
        cfg.costs.c_high = e.value("c_high", cfg.costs.c_high);
        cfg.costs.default_cost = e.value("default_cost", cfg.costs.default_cost);
        if (e.contains("default_overrides"))
            cfg.costs.default_overrides =
                e["default_overrides"].get<std::map<std::string, double>>();
    }
    cfg.validate();
    return cfg;
}

inline EngineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), Errc::io_error, "cannot open config " + path.string());
    return config_from_json(nlohmann::json::parse(in));
}

inline void save_config(const EngineConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path);
    require(static_cast<bool>(out), Errc::io_error, "cannot write config " + path.string());
    out << config_to_json(cfg).dump(2) << '\n';
}

}  // namespace presage
