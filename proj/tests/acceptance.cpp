// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code 0 iff all pass.

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <httplib.h>

#include "presage/calendar.hpp"
#include "presage/cases.hpp"
#include "presage/cdf.hpp"
#include "presage/forecast.hpp"
#include "presage/profiles.hpp"
#include "presage/service.hpp"
#include "presage/sim.hpp"
#include "presage/store.hpp"
#include "presage/tree.hpp"
#include "presage/wire.hpp"

using namespace presage;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("presage-accept-" + tag + "-" +
                                            std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string run_cli_stdout(const std::string& args, int* exit_code = nullptr) {
    std::string cmd = std::string(PRESAGE_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return "";
    std::string out;
    char buf[8192];
    while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) out.append(buf, n);
    int status = pclose(pipe);
    if (exit_code) *exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

Snapshot snapshot_from_sim(const UserProfile& profile, const EngineConfig& cfg,
                           std::int64_t days) {
    Snapshot snap;
    snap.cfg = cfg;
    snap.devices = profile.devices;
    snap.directory = profile.directory;
    auto sim = generate_user(profile, cfg, days);
    UserData ud;
    ud.horizon = {sim.events.front().ts, sim.events.back().ts + cfg.idle_threshold};
    ud.events = std::move(sim.events);
    ud.timeline = coalesce_timeline(ud.events, cfg.idle_threshold, ud.horizon);
    ud.calendar = std::move(sim.appointments);
    snap.models.emplace(profile.user, ModelSet{});
    snap.users.emplace(profile.user, std::move(ud));
    return snap;
}

// ---------------------------------------------------------------------------
// 1. Protocol mirror: 659 simulated appointments, chronological 559/100 split,
//    planted logistic rule; learned accuracy within 0.05 of the analytic
//    Bayes-optimal accuracy for both models.

Outcome criterion_protocol_mirror() {
    EngineConfig cfg;
    auto profile = profiles::office(7);
    auto sim = generate_user(profile, cfg, 420);
    if (sim.appointments.size() < 659)
        return {false, "only " + std::to_string(sim.appointments.size()) + " appointments"};
    sim.appointments.resize(659);

    AnnotationMap annotations;
    for (const auto& a : sim.appointments) {
        AnnotationRecord r;
        r.appointment_id = a.id;
        r.attended = sim.truth.attended.at(a.id);
        r.interruptability = sim.truth.interrupt.at(a.id);
        annotations[a.id] = r;
    }

    auto att = train_attendance_model(sim.appointments, annotations, profile.directory,
                                      profile.user, cfg, 100);
    auto intr = train_interruptability_model(sim.appointments, annotations, profile.directory,
                                             profile.user, cfg, 100);
    double att_bayes = attendance_bayes_accuracy(profile, cfg);
    double intr_bayes = interruptability_bayes_accuracy(profile, cfg);

    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "attendance %.4f vs bayes %.4f, interruptability %.4f vs bayes %.4f "
                  "(train %zu, holdout %zu)",
                  att.metrics.accuracy, att_bayes, intr.metrics.accuracy, intr_bayes,
                  att.train_rows, att.metrics.n);
    bool pass = att.train_rows == 559 && att.metrics.n == 100 &&
                std::abs(att.metrics.accuracy - att_bayes) <= 0.05 &&
                std::abs(intr.metrics.accuracy - intr_bayes) <= 0.05;
    return {pass, buf};
}

// ---------------------------------------------------------------------------
// 2. ECI exactness on 1000 random inputs (1e-9) and the measured-statistics
//    fixture, which must reproduce 5.008 exactly.

Outcome criterion_eci_exactness() {
    SplitMix64 rng(2024);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        double p = rng.uniform();
        double a = rng.uniform() + 1e-9, b = rng.uniform(), c = rng.uniform();
        double sum = a + b + c;
        std::array<double, 3> dist{a / sum, b / sum, c / sum};
        InterruptCosts costs;
        costs.c_low = rng.uniform(0, 100);
        costs.c_med = rng.uniform(0, 100);
        costs.c_high = rng.uniform(0, 100);
        costs.default_cost = rng.uniform(0, 50);
        double got =
            expected_cost_of_interruption(p, dist, costs, Period::morning, DayClass::weekday);
        double closed = p * (dist[0] * costs.c_low + dist[1] * costs.c_med +
                             dist[2] * costs.c_high) +
                        (1.0 - p) * costs.default_cost;
        worst = std::max(worst, std::abs(got - closed));
    }

    InterruptCosts costs;
    costs.c_low = 10;
    costs.c_med = 4;
    costs.c_high = 1;
    costs.default_cost = 2;
    double fixture =
        expected_cost_of_interruption(0.64, {0.5, 0.4, 0.1}, costs, Period::morning,
                                      DayClass::weekday);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "worst random deviation %.3e, fixture %.17g", worst, fixture);
    return {worst <= 1e-9 && fixture == 5.008, buf};
}

// ---------------------------------------------------------------------------
// 3. empirical_cdf and condition_on_elapsed match brute-force counting over
//    the raw case multiset exactly at all breakpoints (1000 randomized
//    trials, case sets of size <= 20).

Outcome criterion_cdf_oracle_equivalence() {
    SplitMix64 rng(31337);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 20);
        std::vector<Duration> waits;
        for (std::size_t i = 0; i < n; ++i)
            waits.push_back(seconds(1 + static_cast<std::int64_t>(rng.uniform() * 2500)));

        auto brute = [](const std::vector<Duration>& ws, std::int64_t t) {
            std::int64_t k = 0;
            for (auto w : ws)
                if (w.seconds <= t) ++k;
            return static_cast<double>(k) / static_cast<double>(ws.size());
        };

        auto F = empirical_cdf(waits);
        for (const auto& p : F.points)
            if (p.f != brute(waits, p.t)) return {false, "empirical mismatch"};

        std::int64_t d = static_cast<std::int64_t>(rng.uniform() * 2500);
        std::vector<Duration> survivors;
        for (auto w : waits)
            if (w.seconds > d) survivors.push_back(seconds(w.seconds - d));
        if (survivors.empty()) {
            try {
                condition_on_elapsed(F, seconds(d));
                return {false, "expected NoSurvivingMass"};
            } catch (const Error& e) {
                if (e.code() != Errc::no_surviving_mass) return {false, "wrong error"};
            }
            continue;
        }
        auto Fc = condition_on_elapsed(F, seconds(d));
        if (Fc.points.size() != empirical_cdf(survivors).points.size())
            return {false, "conditioned breakpoint count mismatch"};
        for (const auto& p : Fc.points)
            if (p.f != brute(survivors, p.t)) return {false, "conditioned mismatch"};
    }
    return {true, "1000 randomized trials, exact equality at every breakpoint"};
}

// ---------------------------------------------------------------------------
// 4. Calibration: for 5 simulated profiles, engine forecast vs Monte-Carlo
//    oracle (n = 100000) within sup-norm 0.1 whenever the reference class
//    holds >= 500 cases.

Outcome criterion_calibration() {
    std::ostringstream detail;
    bool all = true;
    for (int idx = 1; idx <= 5; ++idx) {
        EngineConfig cfg;
        auto profile = profiles::calibration(idx);
        std::int64_t days = idx == 5 ? 2400 : 1400;

        auto snap = snapshot_from_sim(profile, cfg, days);

        QuerySpec q;
        q.kind = QueryKind::time_until_return;
        q.user = profile.user;
        q.min_stay = minutes(15);
        q.assumed_away = minutes(10);
        // Tuesday within the logged span; lunchtime for the meeting profile
        q.at = idx == 5 ? make_timestamp(2023, 1, 10, 12, 40)
                        : make_timestamp(2023, 1, 10, 10, 15);

        auto result = forecast(snap, q);
        if (result.n_cases < 500) {
            detail << "cal" << idx << ": n=" << result.n_cases << " (<500) ";
            all = false;
            continue;
        }

        OracleScenario scenario;
        scenario.kind = q.kind;
        scenario.min_stay = *q.min_stay;
        scenario.elapsed = *q.assumed_away;
        auto tp = classify_time_period(q.at - *q.assumed_away, cfg.taxonomy(), 0);
        scenario.period = tp.period;
        scenario.day_class = tp.day_class;

        auto oracle = monte_carlo_oracle(profile, cfg, scenario, 100000,
                                         9000 + static_cast<std::uint64_t>(idx));
        double sup = sup_norm_distance(result.cdf, oracle, 4 * 3600, 30);
        char buf[96];
        std::snprintf(buf, sizeof(buf), "cal%d: n=%zu sup=%.4f ", idx, result.n_cases, sup);
        detail << buf;
        if (sup > 0.1) all = false;
    }
    return {all, detail.str()};
}

// ---------------------------------------------------------------------------
// 5. Meeting integration limits and the three-meeting scenario.

Outcome criterion_meeting_integration() {
    // background: a smooth-ish empirical CDF
    std::vector<Duration> bg;
    for (int i = 1; i <= 40; ++i) bg.push_back(minutes(3 * i));
    auto f0 = empirical_cdf(bg);

    // meeting CDF pointwise below the background everywhere
    std::vector<Duration> slow;
    for (int i = 1; i <= 40; ++i) slow.push_back(minutes(3 * i + 90));
    auto fm = empirical_cdf(slow);

    Duration horizon = hours(8);
    Duration step = seconds(60);

    // p_attend = 0 must reproduce the background exactly on the grid
    {
        std::vector<MeetingScope> scopes{{1200, 4800, fm, 0.0, "a"}, {7200, 10800, fm, 0.0, "b"}};
        auto g = integrate_meetings(f0, scopes, horizon, step);
        for (const auto& p : g.points)
            if (p.f != f0.value(p.t)) return {false, "p=0 deviates from the background"};
    }
    // p_attend = 1 over the full horizon must reproduce the clamped meeting CDF
    {
        std::vector<MeetingScope> scopes{{0, horizon.seconds, fm, 1.0, "m"}};
        auto g = integrate_meetings(f0, scopes, horizon, step);
        double running = 0;
        for (const auto& p : g.points) {
            running = std::max(running, fm.value(p.t));
            if (p.f != running) return {false, "p=1 deviates from the clamped meeting CDF"};
        }
    }
    // the 13:20 query against 13:00-14:00 / 14:30-15:30 / 16:00-17:00 with
    // 15-minute scope padding
    {
        auto rel = [](std::int64_t h, std::int64_t m) {
            return (h * 60 + m - (13 * 60 + 20)) * 60;  // seconds from 13:20
        };
        std::vector<MeetingScope> scopes{
            {std::max<std::int64_t>(rel(12, 45), 0), rel(14, 15), fm, 0.64, "m1"},
            {rel(14, 15), rel(15, 45), fm, 0.5, "m2"},
            {rel(15, 45), rel(17, 15), fm, 0.8, "m3"},
        };
        auto g = integrate_meetings(f0, scopes, horizon, step);
        double prev = 0;
        for (const auto& p : g.points) {
            if (p.f < prev - 1e-12) return {false, "combined CDF not monotone"};
            prev = p.f;
            if (p.f > f0.value(p.t) + 1e-12)
                return {false, "combined CDF rises above the background"};
        }
    }
    return {true, "p=0 identity, p=1 clamped meeting CDF, three-meeting scenario bounded"};
}

// ---------------------------------------------------------------------------
// 6. Learner correctness: closed-form leaf scores and greedy-vs-exhaustive
//    split agreement on datasets with <= 4 binary attributes and 16 rows.

namespace learner_check {

double exhaustive_best_sum(const Dataset& d, const std::vector<std::size_t>& rows,
                           const std::vector<bool>& used, double alpha, std::size_t min_leaf,
                           int* best_attr) {
    *best_attr = -1;
    double best = -1e300;
    for (std::size_t a = 0; a < d.schema.size(); ++a) {
        if (used[a]) continue;
        std::size_t arity = d.schema.attrs[a].domain.size();
        std::vector<std::vector<std::int64_t>> counts(
            arity, std::vector<std::int64_t>(d.target_arity, 0));
        std::vector<std::size_t> sizes(arity, 0);
        for (auto r : rows) {
            auto v = static_cast<std::size_t>(d.rows[r].values[a]);
            ++counts[v][static_cast<std::size_t>(d.rows[r].target)];
            ++sizes[v];
        }
        bool ok = true;
        for (auto s : sizes)
            if (s < min_leaf) ok = false;
        if (!ok) continue;
        double sum = 0;
        for (const auto& c : counts) sum += leaf_score(c, alpha);
        if (*best_attr < 0 || sum > best) {
            best = sum;
            *best_attr = static_cast<int>(a);
        }
    }
    return best;
}

// Walks the learned tree and confirms every internal node's split attains the
// exhaustive best child-score sum and strictly beats its leaf score, and that
// every leaf has no admissible strictly-better split.
bool verify_node(const DecisionTree& t, const Dataset& d, std::size_t node,
                 const std::vector<std::size_t>& rows, std::vector<bool> used, double alpha,
                 std::size_t min_leaf) {
    std::vector<std::int64_t> counts(d.target_arity, 0);
    for (auto r : rows) ++counts[static_cast<std::size_t>(d.rows[r].target)];
    double own = leaf_score(counts, alpha);
    int best_attr = -1;
    double best = exhaustive_best_sum(d, rows, used, alpha, min_leaf, &best_attr);

    const TreeNode& n = t.nodes[node];
    if (n.is_leaf()) return best_attr < 0 || best <= own;
    if (best_attr < 0 || best <= own) return false;

    // the chosen split must attain the maximum
    std::size_t attr = static_cast<std::size_t>(n.split_attr);
    std::size_t arity = d.schema.attrs[attr].domain.size();
    std::vector<std::vector<std::size_t>> parts(arity);
    for (auto r : rows)
        parts[static_cast<std::size_t>(d.rows[r].values[attr])].push_back(r);
    double chosen = 0;
    for (std::size_t v = 0; v < arity; ++v) {
        std::vector<std::int64_t> cc(d.target_arity, 0);
        for (auto r : parts[v]) ++cc[static_cast<std::size_t>(d.rows[r].target)];
        chosen += leaf_score(cc, alpha);
    }
    if (chosen < best - 1e-12) return false;

    used[attr] = true;
    for (std::size_t v = 0; v < arity; ++v)
        if (!verify_node(t, d, static_cast<std::size_t>(n.children[v]), parts[v], used, alpha,
                         min_leaf))
            return false;
    return true;
}

}  // namespace learner_check

Outcome criterion_learner() {
    std::vector<std::int64_t> c31{3, 1}, c22{2, 2};
    if (std::abs(leaf_score(c31, 2.0) - std::log(0.05)) > 1e-9)
        return {false, "[3,1] fixture off"};
    if (std::abs(leaf_score(c22, 2.0) - std::log(1.0 / 30.0)) > 1e-9)
        return {false, "[2,2] fixture off"};

    SplitMix64 rng(555);
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t n_attrs = 1 + static_cast<std::size_t>(rng.uniform() * 4);
        AttributeSchema schema;
        for (std::size_t i = 0; i < n_attrs; ++i)
            schema.attrs.push_back({"a" + std::to_string(i), {"0", "1"}});
        Dataset d{schema, 2, {}};
        std::size_t n_rows = 16;
        for (std::size_t r = 0; r < n_rows; ++r) {
            DataRow row;
            for (std::size_t a = 0; a < n_attrs; ++a)
                row.values.push_back(rng.uniform() < 0.5 ? 1 : 0);
            row.target = rng.uniform() < 0.5 ? 1 : 0;
            d.rows.push_back(std::move(row));
        }
        std::size_t min_leaf = 1 + static_cast<std::size_t>(rng.uniform() * 3);
        auto tree = learn_tree(d, 2.0, min_leaf);
        std::vector<std::size_t> all(n_rows);
        for (std::size_t i = 0; i < n_rows; ++i) all[i] = i;
        if (!learner_check::verify_node(tree, d, 0, all, std::vector<bool>(n_attrs, false), 2.0,
                                        min_leaf))
            return {false, "greedy split disagrees with exhaustive enumeration"};
    }
    return {true, "closed-form fixtures at 1e-9; 500 exhaustive-split datasets agree"};
}

// ---------------------------------------------------------------------------
// 7. Backoff behavior: the 10-vs-30 fixture selects level 1; nested ladders
//    select nested case sets across 200 random fixtures.

Outcome criterion_backoff() {
    auto ctx = [](Period p, Weekday d, CalendarStatus s) {
        ContextAttributes c;
        c.period = {p, d, day_class_of(d)};
        c.calendar_status = s;
        return c;
    };
    BackoffPolicy policy = BackoffPolicy::defaults();
    policy.n_min = 25;

    std::vector<Case> cases;
    for (int i = 0; i < 10; ++i)
        cases.push_back({ctx(Period::morning, Weekday::tuesday, CalendarStatus::no_meeting),
                         minutes(i + 1), false, std::nullopt, ""});
    for (int i = 0; i < 20; ++i)
        cases.push_back({ctx(Period::morning, i % 2 ? Weekday::monday : Weekday::friday,
                             CalendarStatus::no_meeting),
                         minutes(i + 1), false, std::nullopt, ""});
    auto rc = build_reference_class(
        cases, ctx(Period::morning, Weekday::tuesday, CalendarStatus::no_meeting), policy);
    if (rc.backoff_level != 1 || rc.cases.size() != 30)
        return {false, "10/30 fixture selected level " + std::to_string(rc.backoff_level)};

    SplitMix64 rng(808);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Case> pool;
        std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 80);
        for (std::size_t i = 0; i < n; ++i) {
            auto p = static_cast<Period>(static_cast<int>(rng.uniform() * 5));
            auto d = static_cast<Weekday>(static_cast<int>(rng.uniform() * 7));
            auto s = rng.uniform() < 0.5 ? CalendarStatus::no_meeting
                                         : CalendarStatus::meeting_scheduled;
            pool.push_back({ctx(p, d, s),
                            minutes(1 + static_cast<std::int64_t>(rng.uniform() * 60)),
                            rng.uniform() < 0.15, std::nullopt, ""});
        }
        auto query = ctx(static_cast<Period>(static_cast<int>(rng.uniform() * 5)),
                         static_cast<Weekday>(static_cast<int>(rng.uniform() * 7)),
                         rng.uniform() < 0.5 ? CalendarStatus::no_meeting
                                             : CalendarStatus::meeting_scheduled);
        std::size_t prev = 0;
        for (std::size_t level = 0; level < policy.ladder.size(); ++level) {
            std::size_t count = 0;
            for (const auto& c : pool)
                if (context_matches(c.context, query, policy.ladder[level])) ++count;
            if (count < prev) return {false, "match sets not nested"};
            prev = count;
        }
    }
    return {true, "fixture selects level 1; 200 nested-ladder fixtures monotone"};
}

// ---------------------------------------------------------------------------
// 8. Time-of-day effect: on the lunch-absentee profile the probability of
//    returning within 15 minutes after 10 minutes away is lower at lunchtime
//    than in the morning.

Outcome criterion_time_of_day_effect() {
    EngineConfig cfg;
    auto snap = snapshot_from_sim(profiles::lunch_absentee(11), cfg, 260);

    QuerySpec q;
    q.kind = QueryKind::time_until_return;
    q.user = "lena";
    q.min_stay = minutes(15);
    q.assumed_away = minutes(10);

    q.at = make_timestamp(2023, 1, 10, 10, 15);
    auto morning = forecast(snap, q);
    q.at = make_timestamp(2023, 1, 10, 12, 30);
    auto lunch = forecast(snap, q);

    double pm = morning.cdf.value(minutes(15));
    double pl = lunch.cdf.value(minutes(15));
    char buf[128];
    std::snprintf(buf, sizeof(buf), "P(return<=15m | away 10m): morning %.4f, lunchtime %.4f",
                  pm, pl);
    return {pl < pm, buf};
}

// ---------------------------------------------------------------------------
// 9. Quantile contract: Galois properties on 1000 random CDFs, and
//    QuantileUnattainable beyond the terminal mass of sub-normalized CDFs.

Outcome criterion_quantile_contract() {
    SplitMix64 rng(909);
    for (int trial = 0; trial < 1000; ++trial) {
        DurationCdf F;
        if (trial % 2 == 0) {
            std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 15);
            std::vector<Duration> w;
            for (std::size_t i = 0; i < n; ++i)
                w.push_back(seconds(1 + static_cast<std::int64_t>(rng.uniform() * 4000)));
            F = empirical_cdf(w);
        } else {
            std::vector<std::int64_t> edges{2, 5, 10, 15, 30, 60};
            std::vector<double> mass(edges.size() + 1);
            double sum = 0;
            for (auto& m : mass) {
                m = rng.uniform() + 1e-6;
                sum += m;
            }
            for (auto& m : mass) m /= sum;
            F = cdf_from_leaf(mass, edges);
        }

        double p = 1e-6 + rng.uniform() * (F.f_max() - 1e-6);
        if (p <= 0 || p > F.f_max()) continue;
        Duration q = quantile(F, p);
        if (F.value(q) < p - 1e-12) return {false, "F(quantile(p)) < p"};
        for (const auto& pt : F.points) {
            if (pt.f <= 0) continue;
            if (quantile(F, pt.f).seconds > pt.t) return {false, "quantile(F(t)) > t"};
        }

        if (F.f_max() < 1.0 - 1e-9) {
            try {
                quantile(F, F.f_max() + 0.5 * (1.0 - F.f_max()));
                return {false, "missing QuantileUnattainable"};
            } catch (const Error& e) {
                if (e.code() != Errc::quantile_unattainable)
                    return {false, "wrong error beyond F_max"};
            }
        }
    }
    return {true, "1000 random CDFs satisfy both Galois inequalities"};
}

// ---------------------------------------------------------------------------
// 10. CLI/service parity: 20 scripted queries, byte-compared.

Outcome criterion_cli_service_parity() {
    TempDir dir("parity");
    EngineConfig cfg;
    auto profile = profiles::office(7);
    auto sim = generate_user(profile, cfg, 50);
    {
        Store store(dir.path);
        write_sim_output(store, profile, sim);
    }
    int code = 0;
    run_cli_stdout("--data " + dir.path.string() + " train --user ada", &code);
    if (code != 0) return {false, "train failed"};

    Service service(dir.path, cfg);
    int port = service.start();
    httplib::Client client("127.0.0.1", port);

    struct Q {
        std::string kind;
        std::string at;
        std::int64_t away_s;
        std::int64_t min_stay_s = 0;
        std::int64_t min_absence_s = 0;
        std::string app;
        std::string capability;
        double threshold = 0;
    };
    std::vector<Q> battery = {
        {"time_until_return", "2023-01-10T10:15:00Z", 1500, 900},
        {"time_until_return", "2023-01-10T12:30:00Z", 600, 900},
        {"time_until_return", "2023-01-11T15:00:00Z", 300, 0},
        {"time_until_return", "2023-01-12T09:40:00Z", 900, 1800},
        {"time_until_return", "2023-01-13T14:10:00Z", 1200, 900, 0, "", "", 0.9},
        {"time_until_return", "2023-01-17T10:15:00Z", 1500, 900, 0, "", "", 0.5},
        {"time_until_return", "2023-01-18T13:00:00Z", 600, 600},
        {"time_until_return", "2023-01-19T11:45:00Z", 300, 900},
        {"time_until_leave", "2023-01-10T10:15:00Z", 3600, 0, 1800},
        {"time_until_leave", "2023-01-11T09:30:00Z", 1800, 0, 900},
        {"time_until_leave", "2023-01-12T14:00:00Z", 7200, 0, 3600},
        {"time_until_leave", "2023-01-17T11:00:00Z", 3600, 0, 600, "", "", 0.9},
        {"time_until_device_access", "2023-01-10T11:00:00Z", 1800, 0, 0, "", "laptop"},
        {"time_until_device_access", "2023-01-12T16:00:00Z", 3600, 0, 0, "", "laptop"},
        {"time_until_device_access", "2023-01-18T10:00:00Z", 600, 0, 0, "", "desktop"},
        {"time_until_device_access", "2023-01-19T15:30:00Z", 1200, 0, 0, "", "videoconference"},
        {"time_until_app_engagement", "2023-01-10T11:00:00Z", 1800, 0, 0, "email"},
        {"time_until_app_engagement", "2023-01-12T09:00:00Z", 600, 0, 0, "email"},
        {"time_until_app_engagement", "2023-01-17T14:00:00Z", 3600, 0, 0, "email"},
        {"time_until_app_engagement", "2023-01-19T10:30:00Z", 900, 0, 0, "email", "", 0.5},
    };

    int compared = 0;
    for (const auto& b : battery) {
        std::string args = "--data " + dir.path.string() + " forecast --user ada --kind " +
                           b.kind + " --at " + b.at + " --away " + std::to_string(b.away_s) +
                           "s --json";
        json params{{"away_s", b.away_s}};
        if (b.min_stay_s) {
            args += " --min-stay " + std::to_string(b.min_stay_s) + "s";
            params["min_stay_s"] = b.min_stay_s;
        }
        if (b.min_absence_s) {
            args += " --min-absence " + std::to_string(b.min_absence_s) + "s";
            params["min_absence_s"] = b.min_absence_s;
        }
        if (!b.app.empty()) {
            args += " --app " + b.app;
            params["app"] = b.app;
        }
        if (!b.capability.empty()) {
            args += " --capability " + b.capability;
            params["capability"] = b.capability;
        }
        json body{{"user", "ada"}, {"kind", b.kind}, {"at", b.at}, {"params", params}};
        if (b.threshold > 0) {
            char t[32];
            std::snprintf(t, sizeof(t), "%g", b.threshold);
            args += " --threshold ";
            args += t;
            body["confidence_threshold"] = b.threshold;
        }

        int cli_code = 0;
        std::string cli_out = run_cli_stdout(args, &cli_code);
        while (!cli_out.empty() && (cli_out.back() == '\n' || cli_out.back() == '\r'))
            cli_out.pop_back();
        auto res = client.Post("/v1/forecast", body.dump(), "application/json");
        if (cli_code != 0 || !res || res->status != 200)
            return {false, "query failed: " + args};
        if (cli_out != res->body) return {false, "byte mismatch on: " + args};
        ++compared;
    }
    return {compared == 20, std::to_string(compared) + " queries byte-identical"};
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        std::function<Outcome()> fn;
    };
    std::vector<Entry> criteria = {
        {"protocol mirror (659 appointments, 559/100 split, Bayes gap <= 0.05)",
         criterion_protocol_mirror},
        {"ECI exactness (1e-9 on 1000 random inputs; fixture = 5.008)", criterion_eci_exactness},
        {"CDF brute-force equivalence (exact, 1000 trials, n <= 20)",
         criterion_cdf_oracle_equivalence},
        {"calibration vs Monte-Carlo oracle (5 profiles, sup-norm <= 0.1)", criterion_calibration},
        {"meeting integration limits (p=0, p=1, three-meeting scenario)",
         criterion_meeting_integration},
        {"learner correctness (closed forms; greedy = exhaustive)", criterion_learner},
        {"backoff behavior (10/30 fixture; 200 nested fixtures)", criterion_backoff},
        {"time-of-day effect on return forecasts", criterion_time_of_day_effect},
        {"quantile contract (Galois; QuantileUnattainable)", criterion_quantile_contract},
        {"CLI/service parity (20 queries byte-compared)", criterion_cli_service_parity},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome out;
        try {
            out = criteria[i].fn();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %zu: %s%s%s\n", out.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].name, out.detail.empty() ? "" : " -- ", out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass) ++failures;
    }
    if (failures) std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
