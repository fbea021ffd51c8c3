// presage: presence and availability forecasting engine CLI.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "presage/calendar.hpp"
#include "presage/cases.hpp"
#include "presage/config.hpp"
#include "presage/forecast.hpp"
#include "presage/profiles.hpp"
#include "presage/service.hpp"
#include "presage/sim.hpp"
#include "presage/store.hpp"
#include "presage/wire.hpp"

namespace fs = std::filesystem;
using presage::json;

namespace {

presage::Duration parse_duration(const std::string& text) {
    presage::require(!text.empty(), presage::Errc::parse_error, "empty duration");
    char unit = text.back();
    std::string num = text;
    std::int64_t scale = 1;
    if (unit == 's' || unit == 'm' || unit == 'h' || unit == 'd') {
        num = text.substr(0, text.size() - 1);
        scale = unit == 's' ? 1 : unit == 'm' ? 60 : unit == 'h' ? 3600 : 86400;
    }
    try {
        std::size_t pos = 0;
        std::int64_t v = std::stoll(num, &pos);
        presage::require(pos == num.size() && v >= 0, presage::Errc::parse_error,
                         "bad duration: " + text);
        return presage::seconds(v * scale);
    } catch (const std::exception&) {
        presage::fail(presage::Errc::parse_error, "bad duration: " + text);
    }
}

presage::EngineConfig load_cli_config(const std::string& path) {
    if (path.empty()) return presage::EngineConfig{};
    return presage::load_config(path);
}

presage::UserProfile load_cli_profile(const std::string& preset, const std::string& file) {
    if (!file.empty()) {
        std::ifstream in(file);
        presage::require(static_cast<bool>(in), presage::Errc::io_error,
                         "cannot open profile " + file);
        return presage::profile_from_json(json::parse(in));
    }
    return presage::preset_profile(preset.empty() ? "office" : preset);
}

struct CliOptions {
    std::string data_dir = "data";
    std::string config_file;
};

// Returns the user to act on: the one given, or the store's single user.
std::string resolve_user(const presage::Snapshot& snap, std::string user) {
    if (!user.empty()) return user;
    presage::require(!snap.users.empty(), presage::Errc::not_found, "store has no users");
    presage::require(snap.users.size() == 1, presage::Errc::invalid_argument,
                     "store has several users; pass --user");
    return snap.users.begin()->first;
}

int cmd_ingest(const CliOptions& opts, const std::string& events, const std::string& calendar,
               const std::string& annotations, const std::string& devices,
               const std::string& directory) {
    presage::Store store(opts.data_dir);
    if (!events.empty()) {
        auto loaded = presage::load_jsonl(events);
        std::vector<presage::RawEvent> batch;
        for (const auto& j : loaded.records) batch.push_back(presage::event_from_json(j));
        std::size_t n = store.events().append_events(batch);
        std::printf("ingested %zu events", n);
        if (loaded.dropped_partial) std::printf(" (%zu partial lines dropped)", loaded.dropped_partial);
        std::printf("\n");
    }
    if (!calendar.empty()) {
        std::map<std::string, std::vector<presage::AppointmentRecord>> per_user;
        for (const auto& j : presage::load_jsonl(calendar).records) {
            std::string user;
            auto rec = presage::appointment_from_json(j, &user);
            per_user[user].push_back(std::move(rec));
        }
        std::size_t n = 0;
        for (const auto& [user, recs] : per_user) {
            store.append_calendar(user, recs);
            n += recs.size();
        }
        std::printf("ingested %zu appointments\n", n);
    }
    if (!annotations.empty()) {
        std::map<std::string, std::vector<presage::AnnotationRecord>> per_user;
        std::size_t skipped = 0;
        for (const auto& j : presage::load_jsonl(annotations).records) {
            std::string user;
            auto rec = presage::annotation_from_json(j, &user);
            if (!rec.has_content()) {
                ++skipped;  // unfilled form line
                continue;
            }
            per_user[user].push_back(std::move(rec));
        }
        std::size_t n = 0;
        for (const auto& [user, recs] : per_user) n += store.append_annotations(user, recs);
        std::printf("ingested %zu annotations (%zu unfilled lines skipped)\n", n, skipped);
    }
    if (!devices.empty()) {
        std::vector<presage::DeviceProfile> devs;
        for (const auto& j : presage::load_jsonl(devices).records)
            devs.push_back(presage::device_from_json(j));
        store.save_devices(devs);
        std::printf("ingested %zu device profiles\n", devs.size());
    }
    if (!directory.empty()) {
        presage::DirectoryStub dir;
        for (const auto& j : presage::load_jsonl(directory).records) {
            if (j.contains("alias"))
                dir.aliases.insert(j["alias"].get<std::string>());
            else
                dir.manager[j.at("person").get<std::string>()] =
                    j.at("manager").get<std::string>();
        }
        store.save_directory(dir);
        std::printf("ingested directory (%zu people, %zu aliases)\n", dir.manager.size(),
                    dir.aliases.size());
    }
    return 0;
}

int cmd_coalesce(const CliOptions& opts, const std::string& user, const std::string& from,
                 const std::string& to) {
    auto cfg = load_cli_config(opts.config_file);
    auto snap = presage::Snapshot::load(opts.data_dir, cfg, false);
    std::string u = resolve_user(snap, user);
    const auto& ud = snap.user_data(u);
    presage::Timestamp lo = from.empty() ? ud.horizon.start : presage::parse_rfc3339(from);
    presage::Timestamp hi = to.empty() ? ud.horizon.end : presage::parse_rfc3339(to);
    for (const auto& seg : ud.timeline) {
        if (seg.end <= lo || seg.start >= hi) continue;
        json j{{"start", presage::format_rfc3339(seg.start)},
               {"end", presage::format_rfc3339(seg.end)},
               {"state", seg.state == presage::PresenceState::present ? "present" : "absent"},
               {"devices", seg.devices}};
        std::printf("%s\n", j.dump().c_str());
    }
    return 0;
}

int cmd_annotate_form(const CliOptions& opts, const std::string& user, const std::string& out_path,
                      bool with_drafts) {
    auto cfg = load_cli_config(opts.config_file);
    auto snap = presage::Snapshot::load(opts.data_dir, cfg, false);
    std::string u = resolve_user(snap, user);
    const auto& ud = snap.user_data(u);

    presage::AnnotationMap drafts;
    if (with_drafts) {
        presage::DevicePredicate office{std::nullopt, "office"};
        auto office_events = presage::filter_events_by_device(ud.events, snap.devices, office);
        auto office_tl =
            presage::coalesce_timeline(office_events, cfg.idle_threshold, ud.horizon);
        for (auto& d : presage::draft_attendance_labels(ud.calendar, office_tl, cfg.draft_f_hi,
                                                        cfg.draft_f_lo))
            drafts.emplace(d.appointment_id, std::move(d));
    }

    std::ofstream out(out_path);
    presage::require(static_cast<bool>(out), presage::Errc::io_error,
                     "cannot write form " + out_path);
    // Meetings in order of occurrence, fields left for the user to fill.
    for (const auto& appt : ud.calendar) {
        presage::AnnotationRecord rec;
        rec.appointment_id = appt.id;
        rec.source = presage::AnnotationSource::manual;
        auto it = drafts.find(appt.id);
        if (it != drafts.end()) rec.attended = it->second.attended;
        json line = presage::annotation_to_json(u, rec);
        line["start"] = presage::format_rfc3339(appt.start);
        line["subject"] = appt.subject;
        out << line.dump() << '\n';
    }
    std::printf("wrote annotation form for %zu meetings to %s\n", ud.calendar.size(),
                out_path.c_str());
    return 0;
}

int cmd_train(const CliOptions& opts, const std::string& user, std::size_t holdout,
              bool use_drafts) {
    auto cfg = load_cli_config(opts.config_file);
    presage::Store store(opts.data_dir);
    auto snap = presage::Snapshot::load(opts.data_dir, cfg, false);
    std::string u = resolve_user(snap, user);
    const auto& ud = snap.user_data(u);

    presage::AnnotationMap annotations = ud.annotations;
    if (use_drafts) {
        presage::DevicePredicate office{std::nullopt, "office"};
        auto office_events = presage::filter_events_by_device(ud.events, snap.devices, office);
        auto office_tl =
            presage::coalesce_timeline(office_events, cfg.idle_threshold, ud.horizon);
        auto drafts = presage::draft_attendance_labels(ud.calendar, office_tl, cfg.draft_f_hi,
                                                       cfg.draft_f_lo);
        std::vector<presage::AnnotationRecord> fresh;
        for (auto& d : drafts)
            if (!annotations.count(d.appointment_id)) {
                annotations.emplace(d.appointment_id, d);
                fresh.push_back(std::move(d));
            }
        if (!fresh.empty()) store.append_annotations(u, fresh);
    }

    auto att = presage::train_attendance_model(ud.calendar, annotations, snap.directory, u, cfg,
                                               holdout);
    presage::save_model(att.tree, fs::path(opts.data_dir) / "models" / (u + ".attendance.jsonl"));
    std::printf("attendance: trained on %zu rows", att.train_rows);
    if (att.metrics.n)
        std::printf(", holdout accuracy %.4f, log-loss %.4f", att.metrics.accuracy,
                    att.metrics.mean_log_loss);
    std::printf("\n");

    try {
        auto intr = presage::train_interruptability_model(ud.calendar, annotations, snap.directory,
                                                          u, cfg, holdout);
        presage::save_model(intr.tree,
                            fs::path(opts.data_dir) / "models" / (u + ".interruptability.jsonl"));
        std::printf("interruptability: trained on %zu rows", intr.train_rows);
        if (intr.metrics.n)
            std::printf(", holdout accuracy %.4f, log-loss %.4f", intr.metrics.accuracy,
                        intr.metrics.mean_log_loss);
        std::printf("\n");
    } catch (const presage::Error& e) {
        if (e.code() != presage::Errc::model_degenerate) throw;
        std::printf("interruptability: skipped (%s)\n", e.what());
    }
    return 0;
}

int cmd_forecast(const CliOptions& opts, presage::WireQuery q, bool as_json) {
    auto cfg = load_cli_config(opts.config_file);
    auto snap = presage::Snapshot::load(opts.data_dir, cfg);
    if (q.spec.user.empty()) q.spec.user = resolve_user(snap, "");
    q.spec.validate();
    auto result = presage::forecast(snap, q.spec, q.confidence_threshold);
    double thr = q.confidence_threshold.value_or(cfg.confidence_threshold);
    if (as_json) {
        std::printf("%s\n", presage::wire_result_json(result, q.spec.kind, thr).dump().c_str());
        return 0;
    }
    std::printf("kind=%s away_s=%lld backoff_level=%zu n_cases=%zu\n",
                presage::to_string(q.spec.kind), static_cast<long long>(result.away.seconds),
                result.backoff_level, result.n_cases);
    std::printf("%10s %10s %10s\n", "t(s)", "t(min)", "F(t)");
    for (const auto& p : result.cdf.points)
        std::printf("%10lld %10.1f %10.6f\n", static_cast<long long>(p.t), p.t / 60.0, p.f);
    for (const auto& t : result.meeting_terms)
        std::printf("meeting %s p_attend=%.6f\n", t.id.c_str(), t.p_attend);
    std::printf("%s\n", result.summary.c_str());
    return 0;
}

int cmd_eci(const CliOptions& opts, const std::string& user, const std::string& at, bool as_json) {
    auto cfg = load_cli_config(opts.config_file);
    auto snap = presage::Snapshot::load(opts.data_dir, cfg);
    std::string u = resolve_user(snap, user);
    auto r = presage::eci_at(snap, u, presage::parse_rfc3339(at));
    if (as_json) {
        std::printf("%s\n", presage::eci_json(r).dump().c_str());
    } else {
        std::printf("%g\n", r.value);
    }
    return 0;
}

int cmd_evaluate(const CliOptions& opts, const std::string& user, std::size_t holdout,
                 const std::string& preset, const std::string& profile_file,
                 const std::string& at, const std::string& away, std::size_t oracle_samples,
                 std::uint64_t oracle_seed, const std::string& min_stay) {
    auto cfg = load_cli_config(opts.config_file);
    auto snap = presage::Snapshot::load(opts.data_dir, cfg);
    std::string u = resolve_user(snap, user);
    const auto& ud = snap.user_data(u);

    try {
        auto att = presage::train_attendance_model(ud.calendar, ud.annotations, snap.directory, u,
                                                   cfg, holdout);
        std::printf("attendance: accuracy %.4f log-loss %.4f (holdout %zu)\n",
                    att.metrics.accuracy, att.metrics.mean_log_loss, att.metrics.n);
        auto intr = presage::train_interruptability_model(ud.calendar, ud.annotations,
                                                          snap.directory, u, cfg, holdout);
        std::printf("interruptability: accuracy %.4f log-loss %.4f (holdout %zu)\n",
                    intr.metrics.accuracy, intr.metrics.mean_log_loss, intr.metrics.n);
    } catch (const presage::Error& e) {
        std::printf("calendar models: skipped (%s)\n", e.what());
    }

    if ((!preset.empty() || !profile_file.empty()) && !at.empty()) {
        auto profile = load_cli_profile(preset, profile_file);
        presage::QuerySpec q;
        q.kind = presage::QueryKind::time_until_return;
        q.user = u;
        q.at = presage::parse_rfc3339(at);
        if (!away.empty()) q.assumed_away = parse_duration(away);
        if (!min_stay.empty()) q.min_stay = parse_duration(min_stay);
        auto result = presage::forecast(snap, q);

        presage::OracleScenario scenario;
        scenario.kind = q.kind;
        scenario.min_stay = q.min_stay.value_or(presage::Duration{0});
        scenario.elapsed = result.away;
        auto tax = cfg.taxonomy();
        auto tp = presage::classify_time_period(q.at - result.away, tax, cfg.utc_offset_s(u));
        scenario.period = tp.period;
        scenario.day_class = tp.day_class;
        auto oracle =
            presage::monte_carlo_oracle(profile, cfg, scenario, oracle_samples, oracle_seed);
        double sup = presage::sup_norm_distance(result.cdf, oracle, 4 * 3600, 30);
        std::printf("calibration: n_cases=%zu sup-norm=%.4f\n", result.n_cases, sup);
    }
    return 0;
}

int cmd_simulate(const CliOptions& opts, const std::string& preset, const std::string& profile_file,
                 std::int64_t days, std::uint64_t seed, const std::string& out_dir,
                 bool no_annotations, bool force) {
    auto cfg = load_cli_config(opts.config_file);
    auto profile = load_cli_profile(preset, profile_file);
    if (seed != 0) profile.seed = seed;

    fs::path out = out_dir.empty() ? fs::path(opts.data_dir) : fs::path(out_dir);
    if (fs::exists(out / "events.jsonl")) {
        presage::require(force, presage::Errc::io_error,
                         "output store already contains events.jsonl (use --force to replace)");
        for (const char* f : {"events.jsonl", "calendar.jsonl", "annotations.jsonl",
                              "devices.jsonl", "directory.jsonl", "ground_truth.jsonl"})
            fs::remove(out / f);
    }

    auto sim = presage::generate_user(profile, cfg, days);
    presage::Store store(out);
    presage::write_sim_output(store, profile, sim, {!no_annotations});
    std::printf("simulated %lld days for %s: %zu events, %zu appointments\n",
                static_cast<long long>(days), profile.user.c_str(), sim.events.size(),
                sim.appointments.size());
    return 0;
}

int cmd_serve(const CliOptions& opts, const std::string& host, int port) {
    auto cfg = load_cli_config(opts.config_file);
    presage::Service service(opts.data_dir, cfg);
    int bound = service.start(host, port);
    std::printf("serving on %s:%d (endpoints: /v1/forecast /v1/attendance /v1/interruptability "
                "/v1/eci /v1/reload)\n",
                host.c_str(), bound);
    std::fflush(stdout);
    // Foreground service: run until killed.
    while (true) std::this_thread::sleep_for(std::chrono::seconds(3600));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"presence and availability forecasting engine"};
    app.require_subcommand(1);

    CliOptions opts;
    app.add_option("--data", opts.data_dir, "store directory")->capture_default_str();
    app.add_option("--config", opts.config_file, "engine config file (JSON)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "append records into the store");
    std::string in_events, in_calendar, in_annotations, in_devices, in_directory;
    ingest->add_option("--events", in_events, "events file (jsonl)");
    ingest->add_option("--calendar", in_calendar, "calendar file (jsonl)");
    ingest->add_option("--annotations", in_annotations, "annotations file (jsonl)");
    ingest->add_option("--devices", in_devices, "device profiles file (jsonl)");
    ingest->add_option("--directory", in_directory, "directory stub file (jsonl)");

    // coalesce
    auto* coalesce = app.add_subcommand("coalesce", "print the coalesced presence timeline");
    std::string co_user, co_from, co_to;
    coalesce->add_option("--user", co_user, "user id");
    coalesce->add_option("--from", co_from, "range start (RFC3339)");
    coalesce->add_option("--to", co_to, "range end (RFC3339)");

    // annotate-form
    auto* form = app.add_subcommand("annotate-form",
                                    "emit an editable annotation form for stored meetings");
    std::string af_user, af_out = "annotation_form.jsonl";
    bool af_drafts = false;
    form->add_option("--user", af_user, "user id");
    form->add_option("--out", af_out, "output file")->capture_default_str();
    form->add_flag("--with-drafts", af_drafts, "prefill attendance from the activity heuristic");

    // train
    auto* train = app.add_subcommand("train", "train attendance and interruptability models");
    std::string tr_user;
    std::size_t tr_holdout = 0;
    bool tr_drafts = false;
    train->add_option("--user", tr_user, "user id");
    train->add_option("--holdout", tr_holdout, "chronologically last N labeled meetings held out")
        ->capture_default_str();
    train->add_flag("--use-drafts", tr_drafts,
                    "draft labels for unannotated meetings from activity overlap");

    // forecast
    auto* fc = app.add_subcommand("forecast", "answer a forecasting query");
    presage::WireQuery q;
    std::string fc_user, fc_kind = "time_until_return", fc_at, fc_min_stay, fc_min_absence,
                fc_away, fc_app, fc_capability, fc_location;
    double fc_threshold = -1;
    bool fc_json = false;
    fc->add_option("--user", fc_user, "user id");
    fc->add_option("--kind", fc_kind, "query kind")->capture_default_str();
    fc->add_option("--at", fc_at, "query time (RFC3339)")->required();
    fc->add_option("--min-stay", fc_min_stay, "return-and-remain duration (e.g. 15m)");
    fc->add_option("--min-absence", fc_min_absence, "leave-for-at-least duration");
    fc->add_option("--away", fc_away, "assumed elapsed time since the landmark");
    fc->add_option("--app", fc_app, "application id (app-engagement queries)");
    fc->add_option("--capability", fc_capability, "device capability (device queries)");
    fc->add_option("--location", fc_location, "device location (device queries)");
    fc->add_option("--threshold", fc_threshold, "confidence threshold for the summary");
    fc->add_flag("--json", fc_json, "print the wire-format result");

    // eci
    auto* eci = app.add_subcommand("eci", "expected cost of interruption at a time");
    std::string eci_user, eci_at;
    bool eci_json = false;
    eci->add_option("--user", eci_user, "user id");
    eci->add_option("--at", eci_at, "time (RFC3339)")->required();
    eci->add_flag("--json", eci_json, "print the wire-format result");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "holdout metrics and oracle calibration");
    std::string ev_user, ev_preset, ev_profile, ev_at, ev_away, ev_min_stay;
    std::size_t ev_holdout = 100, ev_samples = 20000;
    std::uint64_t ev_seed = 99;
    ev->add_option("--user", ev_user, "user id");
    ev->add_option("--holdout", ev_holdout, "holdout size")->capture_default_str();
    ev->add_option("--preset", ev_preset, "simulator preset for calibration");
    ev->add_option("--profile", ev_profile, "simulator profile file for calibration");
    ev->add_option("--at", ev_at, "calibration query time (RFC3339)");
    ev->add_option("--away", ev_away, "calibration elapsed absence");
    ev->add_option("--min-stay", ev_min_stay, "calibration return-and-remain duration");
    ev->add_option("--oracle-samples", ev_samples, "oracle sample count")->capture_default_str();
    ev->add_option("--oracle-seed", ev_seed, "oracle seed")->capture_default_str();

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a synthetic user into a store");
    std::string sim_preset, sim_profile, sim_out;
    std::int64_t sim_days = 180;
    std::uint64_t sim_seed = 0;
    bool sim_no_annotations = false, sim_force = false;
    sim->add_option("--preset", sim_preset, "built-in profile (office, lunch, calib1..calib5)");
    sim->add_option("--profile", sim_profile, "profile file (JSON)");
    sim->add_option("--days", sim_days, "days to simulate")->capture_default_str();
    sim->add_option("--seed", sim_seed, "override the profile seed");
    sim->add_option("--out", sim_out, "output store directory (default: --data)");
    sim->add_flag("--no-annotations", sim_no_annotations,
                  "do not write ground truth as manual annotations");
    sim->add_flag("--force", sim_force, "replace an existing simulated store");

    // serve
    auto* serve = app.add_subcommand("serve", "run the HTTP query service");
    std::string sv_host = "127.0.0.1";
    int sv_port = 8077;
    serve->add_option("--host", sv_host, "bind host")->capture_default_str();
    serve->add_option("--port", sv_port, "bind port")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*ingest)
            return cmd_ingest(opts, in_events, in_calendar, in_annotations, in_devices,
                              in_directory);
        if (*coalesce) return cmd_coalesce(opts, co_user, co_from, co_to);
        if (*form) return cmd_annotate_form(opts, af_user, af_out, af_drafts);
        if (*train) return cmd_train(opts, tr_user, tr_holdout, tr_drafts);
        if (*fc) {
            q.spec.user = fc_user;
            q.spec.kind = presage::query_kind_from_string(fc_kind);
            q.spec.at = presage::parse_rfc3339(fc_at);
            if (!fc_min_stay.empty()) q.spec.min_stay = parse_duration(fc_min_stay);
            if (!fc_min_absence.empty()) q.spec.min_absence = parse_duration(fc_min_absence);
            if (!fc_away.empty()) q.spec.assumed_away = parse_duration(fc_away);
            if (!fc_app.empty()) q.spec.app = fc_app;
            if (!fc_capability.empty() || !fc_location.empty()) {
                presage::DevicePredicate pred;
                if (!fc_capability.empty()) pred.capability = fc_capability;
                if (!fc_location.empty()) pred.location = fc_location;
                q.spec.device = pred;
            }
            if (fc_threshold > 0) q.confidence_threshold = fc_threshold;
            return cmd_forecast(opts, std::move(q), fc_json);
        }
        if (*eci) return cmd_eci(opts, eci_user, eci_at, eci_json);
        if (*ev)
            return cmd_evaluate(opts, ev_user, ev_holdout, ev_preset, ev_profile, ev_at, ev_away,
                                ev_samples, ev_seed, ev_min_stay);
        if (*sim)
            return cmd_simulate(opts, sim_preset, sim_profile, sim_days, sim_seed, sim_out,
                                sim_no_annotations, sim_force);
        if (*serve) return cmd_serve(opts, sv_host, sv_port);
    } catch (const presage::Error& e) {
        std::fprintf(stderr, "%s: %s\n", e.name(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "InternalError: %s\n", e.what());
        return 1;
    }
    return 0;
}
