#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "presage/error.hpp"
#include "presage/time.hpp"

namespace presage {

enum class Interp : int { step = 0, linear };

// A monotone cumulative distribution over time-until-event. Possibly
// sub-normalized: the terminal value stays below 1 when probability mass
// lies beyond the modeled horizon (open duration bin).
//
// Empirical CDFs additionally carry the cumulative case counts behind each
// breakpoint, so conditioning can divide survivor counts directly instead
// of re-deriving them from rounded probabilities.
struct CdfPoint {
    std::int64_t t = 0;  // seconds
    double f = 0.0;
};

struct DurationCdf {
    std::vector<CdfPoint> points;  // t strictly increasing, f nondecreasing
    Interp mode = Interp::step;
    std::vector<std::int64_t> cum_counts;  // empirical provenance; empty otherwise
    std::int64_t total_count = 0;          // denominator for cum_counts

    double f_max() const { return points.empty() ? 0.0 : points.back().f; }

    bool has_counts() const { return !cum_counts.empty(); }

    double value(std::int64_t t) const {
        if (points.empty() || t < points.front().t) return 0.0;
        auto it = std::upper_bound(points.begin(), points.end(), t,
                                   [](std::int64_t x, const CdfPoint& p) { return x < p.t; });
        --it;  // last point with point.t <= t
        if (mode == Interp::step) return it->f;
        auto next = it + 1;
        if (next == points.end() || it->t == t) return it->f;
        double w = static_cast<double>(t - it->t) / static_cast<double>(next->t - it->t);
        return it->f + w * (next->f - it->f);
    }

    double value(Duration d) const { return value(d.seconds); }

    void check() const {
        double prev_f = 0.0;
        std::int64_t prev_t = std::numeric_limits<std::int64_t>::min();
        for (const auto& p : points) {
            require(p.t > prev_t, Errc::invalid_argument, "cdf breakpoints must increase");
            require(p.f >= prev_f - 1e-12 && p.f <= 1.0 + 1e-12, Errc::invalid_argument,
                    "cdf values must be nondecreasing in [0,1]");
            prev_t = p.t;
            prev_f = p.f;
        }
    }
};

// F(t) = (# waits <= t) / n over the raw case multiset.
inline DurationCdf empirical_cdf(std::span<const Duration> waits) {
    require(!waits.empty(), Errc::no_data, "empirical cdf of an empty case set");
    std::vector<std::int64_t> w;
    w.reserve(waits.size());
    for (auto d : waits) w.push_back(d.seconds);
    std::sort(w.begin(), w.end());

    DurationCdf out;
    out.mode = Interp::step;
    out.total_count = static_cast<std::int64_t>(w.size());
    std::int64_t n = out.total_count;
    for (std::size_t i = 0; i < w.size();) {
        std::size_t j = i;
        while (j < w.size() && w[j] == w[i]) ++j;
        out.points.push_back({w[i], static_cast<double>(j) / static_cast<double>(n)});
        out.cum_counts.push_back(static_cast<std::int64_t>(j));
        i = j;
    }
    return out;
}

// Variant that treats censored waits as lower bounds: they enter the
// denominator but never the numerator, leaving the CDF sub-normalized.
inline DurationCdf empirical_cdf_with_censored(std::span<const Duration> uncensored,
                                               std::size_t censored_count) {
    DurationCdf out = empirical_cdf(uncensored);
    if (censored_count == 0) return out;
    std::int64_t n = out.total_count + static_cast<std::int64_t>(censored_count);
    for (std::size_t i = 0; i < out.points.size(); ++i)
        out.points[i].f = static_cast<double>(out.cum_counts[i]) / static_cast<double>(n);
    out.total_count = n;
    return out;
}

// Assembles a piecewise-linear CDF from a probability vector over duration
// bins. Mass in the final open bin is withheld: F_max = 1 - p_open.
inline DurationCdf cdf_from_leaf(std::span<const double> dist,
                                 std::span<const std::int64_t> edges_min) {
    require(dist.size() == edges_min.size() + 1, Errc::invalid_argument,
            "bin distribution does not match binning");
    double sum = 0.0;
    for (double p : dist) {
        require(p >= -1e-12, Errc::invalid_argument, "negative bin probability");
        sum += p;
    }
    require(std::abs(sum - 1.0) <= 1e-9, Errc::invalid_argument, "bin distribution must sum to 1");

    DurationCdf out;
    out.mode = Interp::linear;
    out.points.push_back({0, 0.0});
    double cum = 0.0;
    for (std::size_t i = 0; i < edges_min.size(); ++i) {
        cum += dist[i];
        out.points.push_back({edges_min[i] * 60, std::min(cum, 1.0)});
    }
    return out;
}

// F'(t) = (F(d+t) - F(d)) / (1 - F(d)): the remaining-time distribution once
// `d` has already elapsed. Sub-normalization carries through.
inline DurationCdf condition_on_elapsed(const DurationCdf& cdf, Duration elapsed) {
    std::int64_t d = elapsed.seconds;
    require(d >= 0, Errc::invalid_argument, "elapsed time must be nonnegative");
    if (d == 0) return cdf;

    double fd = cdf.value(d);
    require(fd < cdf.f_max() - 1e-12, Errc::no_surviving_mass,
            "no surviving mass beyond elapsed time");

    DurationCdf out;
    out.mode = cdf.mode;

    if (cdf.has_counts()) {
        // Exact survivor-count arithmetic for empirical CDFs.
        std::int64_t below = 0;
        for (std::size_t i = 0; i < cdf.points.size(); ++i)
            if (cdf.points[i].t <= d) below = cdf.cum_counts[i];
        std::int64_t survivors = cdf.total_count - below;
        require(survivors > 0, Errc::no_surviving_mass, "no surviving cases");
        for (std::size_t i = 0; i < cdf.points.size(); ++i) {
            if (cdf.points[i].t <= d) continue;
            out.points.push_back({cdf.points[i].t - d,
                                  static_cast<double>(cdf.cum_counts[i] - below) /
                                      static_cast<double>(survivors)});
            out.cum_counts.push_back(cdf.cum_counts[i] - below);
        }
        out.total_count = survivors;
        return out;
    }

    double denom = 1.0 - fd;
    if (cdf.mode == Interp::linear) out.points.push_back({0, 0.0});
    for (const auto& p : cdf.points) {
        if (p.t <= d) continue;
        out.points.push_back({p.t - d, std::max(0.0, (p.f - fd) / denom)});
    }
    require(!out.points.empty() && out.f_max() > 0.0, Errc::no_surviving_mass,
            "no surviving mass beyond elapsed time");
    return out;
}

// Smallest t with F(t) >= p. Exact breakpoint for step CDFs; interpolated
// (and rounded up to whole seconds) for linear ones.
inline Duration quantile(const DurationCdf& cdf, double p) {
    require(p > 0.0 && p <= 1.0, Errc::invalid_argument, "quantile probability must be in (0,1]");
    require(p <= cdf.f_max(), Errc::quantile_unattainable,
            "requested probability exceeds terminal mass");
    const auto& pts = cdf.points;
    std::size_t i = 0;
    while (i < pts.size() && pts[i].f < p) ++i;
    if (cdf.mode == Interp::step || i == 0) return Duration{pts[i].t};
    const auto& lo = pts[i - 1];
    const auto& hi = pts[i];
    if (hi.f == lo.f) return Duration{hi.t};
    double t = lo.t + (p - lo.f) * static_cast<double>(hi.t - lo.t) / (hi.f - lo.f);
    return Duration{static_cast<std::int64_t>(std::ceil(t - 1e-9))};
}

inline double sup_norm_distance(const DurationCdf& a, const DurationCdf& b,
                                std::int64_t t_max, std::int64_t step = 1) {
    double worst = 0.0;
    for (std::int64_t t = 0; t <= t_max; t += step)
        worst = std::max(worst, std::abs(a.value(t) - b.value(t)));
    return worst;
}

}  // namespace presage
