#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "presage/cdf.hpp"
#include "presage/sim.hpp"

using namespace presage;

namespace {

std::vector<Duration> mins(std::initializer_list<std::int64_t> xs) {
    std::vector<Duration> out;
    for (auto x : xs) out.push_back(minutes(x));
    return out;
}

// Brute-force oracle over the raw multiset.
double brute_cdf(const std::vector<Duration>& waits, std::int64_t t) {
    std::int64_t n = 0;
    for (auto w : waits)
        if (w.seconds <= t) ++n;
    return static_cast<double>(n) / static_cast<double>(waits.size());
}

}  // namespace

TEST_CASE("empirical cdf counts waits") {
    auto w = mins({5, 10, 20, 40});
    auto F = empirical_cdf(w);
    CHECK(F.value(minutes(10)) == 0.5);
    CHECK(F.value(minutes(4)) == 0.0);
    CHECK(F.value(minutes(40)) == 1.0);
    CHECK(F.f_max() == 1.0);

    auto single = mins({7});
    auto F1 = empirical_cdf(single);
    CHECK(F1.value(minutes(6)) == 0.0);
    CHECK(F1.value(minutes(7)) == 1.0);

    auto ties = mins({5, 5, 5});
    auto F2 = empirical_cdf(ties);
    REQUIRE(F2.points.size() == 1);
    CHECK(F2.points[0].t == 5 * 60);
    CHECK(F2.points[0].f == 1.0);

    CHECK_THROWS_AS(empirical_cdf(std::vector<Duration>{}), Error);
}

TEST_CASE("cdf_from_leaf interpolates within bins and withholds open mass") {
    std::vector<std::int64_t> edges{5, 10};
    std::vector<double> point_mass{0.0, 1.0, 0.0};
    auto F = cdf_from_leaf(point_mass, edges);
    CHECK(F.value(minutes(5)) == 0.0);
    CHECK(F.value(seconds(450)) == Catch::Approx(0.5));
    CHECK(F.value(minutes(10)) == 1.0);

    std::vector<double> with_open{0.5, 0.3, 0.2};
    auto G = cdf_from_leaf(with_open, edges);
    CHECK(G.f_max() == Catch::Approx(0.8));

    std::vector<std::int64_t> edges2{2, 5};
    std::vector<double> halves{0.5, 0.5, 0.0};
    auto H = cdf_from_leaf(halves, edges2);
    CHECK(H.value(minutes(2)) == Catch::Approx(0.5));
    CHECK(H.value(minutes(5)) == Catch::Approx(1.0));
    CHECK(H.value(seconds(210)) == Catch::Approx(0.75));

    std::vector<double> bad{0.5, 0.4, 0.2};
    CHECK_THROWS_AS(cdf_from_leaf(bad, edges), Error);
}

TEST_CASE("conditioning on elapsed time renormalizes the survivors") {
    auto w = mins({5, 10, 20, 40});
    auto F = empirical_cdf(w);

    auto Fc = condition_on_elapsed(F, minutes(10));
    REQUIRE(Fc.points.size() == 2);
    CHECK(Fc.value(minutes(10)) == 0.5);  // P(T <= 20 | T > 10)
    CHECK(Fc.value(minutes(30)) == 1.0);

    // d = 0 is the identity
    auto F0 = condition_on_elapsed(F, Duration{0});
    CHECK(F0.points.size() == F.points.size());
    CHECK(F0.value(minutes(10)) == F.value(minutes(10)));

    // nothing survives beyond the largest wait
    CHECK_THROWS_AS(condition_on_elapsed(F, minutes(40)), Error);
    CHECK_THROWS_MATCHES(condition_on_elapsed(F, minutes(40)), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::no_surviving_mass;
                         }));
}

TEST_CASE("conditioning matches brute-force counting exactly") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 1000; ++trial) {
        std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 20);
        std::vector<Duration> w;
        for (std::size_t i = 0; i < n; ++i)
            w.push_back(seconds(1 + static_cast<std::int64_t>(rng.uniform() * 3000)));
        auto F = empirical_cdf(w);
        for (const auto& p : F.points) CHECK(p.f == brute_cdf(w, p.t));

        std::int64_t d = static_cast<std::int64_t>(rng.uniform() * 3000);
        std::vector<Duration> survivors;
        for (auto x : w)
            if (x.seconds > d) survivors.push_back(seconds(x.seconds - d));
        if (survivors.empty()) {
            CHECK_THROWS_AS(condition_on_elapsed(F, seconds(d)), Error);
            continue;
        }
        auto Fc = condition_on_elapsed(F, seconds(d));
        REQUIRE(Fc.points.size() == empirical_cdf(survivors).points.size());
        for (const auto& p : Fc.points) CHECK(p.f == brute_cdf(survivors, p.t));
    }
}

TEST_CASE("conditioning is a semigroup action") {
    SplitMix64 rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 3 + static_cast<std::size_t>(rng.uniform() * 15);
        std::vector<Duration> w;
        for (std::size_t i = 0; i < n; ++i)
            w.push_back(seconds(1 + static_cast<std::int64_t>(rng.uniform() * 5000)));
        auto F = empirical_cdf(w);
        std::int64_t d1 = static_cast<std::int64_t>(rng.uniform() * 1000);
        std::int64_t d2 = static_cast<std::int64_t>(rng.uniform() * 1000);
        bool any_beyond = false;
        for (auto x : w) any_beyond = any_beyond || x.seconds > d1 + d2;
        if (!any_beyond) continue;
        auto two_step = condition_on_elapsed(condition_on_elapsed(F, seconds(d1)), seconds(d2));
        auto one_step = condition_on_elapsed(F, seconds(d1 + d2));
        REQUIRE(two_step.points.size() == one_step.points.size());
        for (std::size_t i = 0; i < one_step.points.size(); ++i) {
            CHECK(two_step.points[i].t == one_step.points[i].t);
            CHECK(std::abs(two_step.points[i].f - one_step.points[i].f) < 1e-9);
        }
    }
}

TEST_CASE("conditioning a linear cdf keeps the piecewise shape") {
    std::vector<std::int64_t> edges{5, 10};
    std::vector<double> dist{0.0, 1.0, 0.0};
    auto F = cdf_from_leaf(dist, edges);  // rises linearly on [5,10) minutes
    auto Fc = condition_on_elapsed(F, minutes(7));
    // F(7m) = 0.4; survivors rescale: F'(t) = (F(7m+t) - 0.4) / 0.6
    CHECK(Fc.value(seconds(90)) == Catch::Approx((F.value(seconds(510)) - 0.4) / 0.6));
    CHECK(Fc.value(minutes(3)) == Catch::Approx(1.0));
}

TEST_CASE("quantile returns the smallest t reaching p") {
    auto F = empirical_cdf(mins({5, 10, 20, 40}));
    CHECK(quantile(F, 0.9).seconds == 40 * 60);
    CHECK(quantile(F, 0.5).seconds == 10 * 60);
    CHECK(quantile(F, 1e-9).seconds == 5 * 60);  // infimum of support
    CHECK(quantile(F, 1.0).seconds == 40 * 60);
    CHECK_THROWS_AS(quantile(F, 0.0), Error);
    CHECK_THROWS_AS(quantile(F, 1.5), Error);

    std::vector<std::int64_t> edges{5, 10};
    std::vector<double> sub{0.5, 0.3, 0.2};
    auto G = cdf_from_leaf(sub, edges);  // F_max = 0.8
    CHECK_THROWS_MATCHES(quantile(G, 0.9), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::quantile_unattainable;
                         }));
    // linear interpolation inside a bin, rounded up to whole seconds
    CHECK(quantile(G, 0.5).seconds == 5 * 60);
    CHECK(quantile(G, 0.65).seconds == 450);
}

TEST_CASE("quantile and cdf satisfy the Galois connection") {
    SplitMix64 rng(123);
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 12);
        std::vector<Duration> w;
        for (std::size_t i = 0; i < n; ++i)
            w.push_back(seconds(1 + static_cast<std::int64_t>(rng.uniform() * 4000)));
        auto F = empirical_cdf(w);
        double p = std::nextafter(rng.uniform(), 1.0);
        if (p <= 0.0 || p > 1.0) continue;
        Duration q = quantile(F, p);
        CHECK(F.value(q) >= p);
        for (const auto& pt : F.points) {
            CHECK(quantile(F, pt.f).seconds <= pt.t);
        }
    }
}

TEST_CASE("censored waits enter the denominator as lower bounds") {
    auto F = empirical_cdf_with_censored(mins({5, 10}), 2);
    CHECK(F.value(minutes(5)) == 0.25);
    CHECK(F.value(minutes(10)) == 0.5);
    CHECK(F.f_max() == 0.5);
    auto Fc = condition_on_elapsed(F, minutes(5));
    CHECK(Fc.value(minutes(5)) == Catch::Approx(1.0 / 3.0));
}
