#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "presage/error.hpp"

namespace presage {

// All timestamps are UTC with 1-second resolution. Arithmetic is in whole
// seconds; wall-clock classification applies a fixed per-user UTC offset.

struct Duration {
    std::int64_t seconds = 0;

    constexpr auto operator<=>(const Duration&) const = default;
};

constexpr Duration seconds(std::int64_t s) { return Duration{s}; }
constexpr Duration minutes(std::int64_t m) { return Duration{m * 60}; }
constexpr Duration hours(std::int64_t h) { return Duration{h * 3600}; }

struct Timestamp {
    std::int64_t s = 0;  // seconds since Unix epoch

    constexpr auto operator<=>(const Timestamp&) const = default;

    constexpr Timestamp operator+(Duration d) const { return Timestamp{s + d.seconds}; }
    constexpr Timestamp operator-(Duration d) const { return Timestamp{s - d.seconds}; }
};

// Difference of two timestamps; requires a >= b.
inline Duration operator-(Timestamp a, Timestamp b) {
    require(a >= b, Errc::invalid_argument, "timestamp subtraction would be negative");
    return Duration{a.s - b.s};
}

enum class Period : int { morning = 0, lunchtime, afternoon, evening, night };
enum class Weekday : int { monday = 0, tuesday, wednesday, thursday, friday, saturday, sunday };
enum class DayClass : int { weekday = 0, weekend };

inline const char* to_string(Period p) {
    static constexpr const char* names[] = {"morning", "lunchtime", "afternoon", "evening", "night"};
    return names[static_cast<int>(p)];
}
inline const char* to_string(Weekday d) {
    static constexpr const char* names[] = {"monday", "tuesday", "wednesday", "thursday",
                                            "friday", "saturday", "sunday"};
    return names[static_cast<int>(d)];
}
inline const char* to_string(DayClass c) {
    return c == DayClass::weekday ? "weekday" : "weekend";
}

inline DayClass day_class_of(Weekday d) {
    return (d == Weekday::saturday || d == Weekday::sunday) ? DayClass::weekend : DayClass::weekday;
}

struct TimePeriod {
    Period period = Period::morning;
    Weekday day_of_week = Weekday::monday;
    DayClass day_class = DayClass::weekday;

    bool operator==(const TimePeriod&) const = default;
};

// ---------------------------------------------------------------------------
// Period taxonomy: a partition of the 24-hour local day into half-open
// intervals, lower edge inclusive. One window may wrap midnight.

struct PeriodWindow {
    Period period = Period::morning;
    std::int64_t start_sod = 0;  // seconds of day, [0, 86400)
    std::int64_t end_sod = 0;    // exclusive; end <= start means the window wraps
};

class Taxonomy {
  public:
    Taxonomy() : Taxonomy(default_windows()) {}

    explicit Taxonomy(std::vector<PeriodWindow> windows) : windows_(std::move(windows)) {
        validate();
    }

    static std::vector<PeriodWindow> default_windows() {
        return {
            {Period::morning, 6 * 3600, 11 * 3600 + 1800},
            {Period::lunchtime, 11 * 3600 + 1800, 13 * 3600 + 1800},
            {Period::afternoon, 13 * 3600 + 1800, 17 * 3600 + 1800},
            {Period::evening, 17 * 3600 + 1800, 22 * 3600},
            {Period::night, 22 * 3600, 6 * 3600},
        };
    }

    Period period_at(std::int64_t second_of_day) const {
        return table_[static_cast<std::size_t>(second_of_day / 60)];
    }

    const std::vector<PeriodWindow>& windows() const { return windows_; }

  private:
    void validate() {
        require(!windows_.empty(), Errc::invalid_config, "taxonomy has no periods");
        // Unroll wrapping windows and mark minute-granularity coverage;
        // gaps and overlaps are config errors.
        std::array<int, 1440> cover{};
        cover.fill(-1);
        for (const auto& w : windows_) {
            require(w.start_sod >= 0 && w.start_sod < 86400 && w.end_sod >= 0 && w.end_sod <= 86400,
                    Errc::invalid_config, "taxonomy window out of range");
            require(w.start_sod % 60 == 0 && w.end_sod % 60 == 0, Errc::invalid_config,
                    "taxonomy boundaries must fall on whole minutes");
            auto mark = [&](std::int64_t lo, std::int64_t hi) {
                for (std::int64_t m = lo / 60; m < hi / 60; ++m) {
                    require(cover[static_cast<std::size_t>(m)] == -1, Errc::invalid_config,
                            "taxonomy windows overlap");
                    cover[static_cast<std::size_t>(m)] = static_cast<int>(w.period);
                }
            };
            if (w.end_sod > w.start_sod) {
                mark(w.start_sod, w.end_sod);
            } else {
                mark(w.start_sod, 86400);
                mark(0, w.end_sod);
            }
        }
        for (std::size_t m = 0; m < cover.size(); ++m) {
            require(cover[m] != -1, Errc::invalid_config, "taxonomy leaves a gap in the day");
            table_[m] = static_cast<Period>(cover[m]);
        }
    }

    std::vector<PeriodWindow> windows_;
    std::array<Period, 1440> table_{};
};

// ---------------------------------------------------------------------------

namespace detail {

// floor division / modulus for possibly negative instants
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}
inline std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

// Howard Hinnant's civil-date algorithms (public domain).
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yr + (m <= 2));
}

}  // namespace detail

// Local wall-clock decomposition under a fixed UTC offset.
inline std::int64_t second_of_day(Timestamp ts, std::int64_t utc_offset_s) {
    return detail::floor_mod(ts.s + utc_offset_s, 86400);
}

inline Weekday weekday_of(Timestamp ts, std::int64_t utc_offset_s) {
    // 1970-01-01 was a Thursday.
    std::int64_t days = detail::floor_div(ts.s + utc_offset_s, 86400);
    return static_cast<Weekday>(detail::floor_mod(days + 3, 7));
}

inline TimePeriod classify_time_period(Timestamp ts, const Taxonomy& tax,
                                       std::int64_t utc_offset_s = 0) {
    TimePeriod tp;
    tp.period = tax.period_at(second_of_day(ts, utc_offset_s));
    tp.day_of_week = weekday_of(ts, utc_offset_s);
    tp.day_class = day_class_of(tp.day_of_week);
    return tp;
}

// ---------------------------------------------------------------------------
// RFC 3339 UTC, "YYYY-MM-DDTHH:MM:SSZ"

inline std::string format_rfc3339(Timestamp ts) {
    std::int64_t days = detail::floor_div(ts.s, 86400);
    std::int64_t sod = detail::floor_mod(ts.s, 86400);
    int y;
    unsigned m, d;
    detail::civil_from_days(days, y, m, d);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lldZ", y, m, d,
                  static_cast<long long>(sod / 3600), static_cast<long long>(sod / 60 % 60),
                  static_cast<long long>(sod % 60));
    return buf;
}

inline Timestamp parse_rfc3339(const std::string& text) {
    int y = 0;
    unsigned mo = 0, d = 0, h = 0, mi = 0, se = 0;
    char z = 0;
    int n = std::sscanf(text.c_str(), "%d-%u-%uT%u:%u:%u%c", &y, &mo, &d, &h, &mi, &se, &z);
    require(n == 7 && (z == 'Z' || z == 'z') && mo >= 1 && mo <= 12 && d >= 1 && d <= 31 &&
                h < 24 && mi < 60 && se < 60,
            Errc::parse_error, "bad RFC3339 timestamp: " + text);
    return Timestamp{detail::days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se};
}

// Convenience for tests and fixtures.
inline Timestamp make_timestamp(int y, unsigned mo, unsigned d, unsigned h = 0, unsigned mi = 0,
                                unsigned se = 0) {
    return Timestamp{detail::days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se};
}

}  // namespace presage
