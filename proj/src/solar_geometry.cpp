#include "shadeloss/solar_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shadeloss/errors.hpp"
#include "shadeloss/numeric.hpp"

namespace shadeloss {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kBinWidth = 2.0 * kMaxDeclination / kNumBins;

}  // namespace

double declination_at(double n) {
    return kMaxDeclination * std::sin(2.0 * std::numbers::pi * (284.0 + n) / 365.0);
}

double declination(int n) {
    if (n < 1 || n > 366) throw ArgumentError("day of year must be in 1..366, got " + std::to_string(n));
    return declination_at(static_cast<double>(std::min(n, 365)));
}

int bin_declination(double delta) {
    delta = std::clamp(delta, -kMaxDeclination, kMaxDeclination);
    const int b = static_cast<int>(std::floor((delta + kMaxDeclination) / kBinWidth));
    return std::clamp(b, 0, kNumBins - 1);
}

double bin_center(int bin) { return -kMaxDeclination + (bin + 0.5) * kBinWidth; }

double day_for_declination(double delta) {
    const double s = std::clamp(delta / kMaxDeclination, -1.0, 1.0);
    // 284 + n = 365 (1 + asin(s) / 2pi) puts n between the winter and summer solstice.
    return 81.0 + 365.0 * std::asin(s) / (2.0 * std::numbers::pi);
}

int day_of_year(std::chrono::sys_days date) {
    using namespace std::chrono;
    const year_month_day ymd{date};
    const sys_days jan1{ymd.year() / January / 1};
    return static_cast<int>((date - jan1).count()) + 1;
}

double equation_of_time(int n) {
    const double b = (n - 1) * 2.0 * std::numbers::pi / 365.0;
    return 229.2 * (0.000075 + 0.001868 * std::cos(b) - 0.032077 * std::sin(b) - 0.014615 * std::cos(2 * b) -
                    0.04089 * std::sin(2 * b));
}

double solar_noon_hours(double longitude, int n) {
    const double standard_meridian = 15.0 * std::round(longitude / 15.0);
    return 12.0 - (4.0 * (longitude - standard_meridian) + equation_of_time(n)) / 60.0;
}

SunPosition sun_position_from_hour_angle(double latitude, double decl, double hour_angle) {
    const double phi = latitude * kDeg;
    const double d = decl * kDeg;
    const double w = hour_angle * kDeg;
    const double east = -std::cos(d) * std::sin(w);
    const double north = std::sin(d) * std::cos(phi) - std::cos(d) * std::sin(phi) * std::cos(w);
    const double up = std::sin(d) * std::sin(phi) + std::cos(d) * std::cos(phi) * std::cos(w);
    SunPosition p;
    p.zenith = std::acos(std::clamp(up, -1.0, 1.0)) / kDeg;
    double az = std::atan2(east, north) / kDeg;
    if (az < 0.0) az += 360.0;
    if (az >= 360.0) az -= 360.0;
    p.azimuth = az;
    return p;
}

SunPosition sun_position(double latitude, double longitude, LocalSeconds instant) {
    if (!(std::abs(latitude) < 66.0))
        throw ArgumentError("unsupported latitude " + std::to_string(latitude) + " (|latitude| must be < 66)");
    const auto day_index = static_cast<std::int64_t>(std::floor(static_cast<double>(instant) / kSecondsPerDay));
    const std::chrono::sys_days date{std::chrono::days{day_index}};
    const int n = day_of_year(date);
    const double clock_hours = static_cast<double>(instant - day_index * kSecondsPerDay) / 3600.0;
    const double hour_angle = 15.0 * (clock_hours - solar_noon_hours(longitude, n));
    return sun_position_from_hour_angle(latitude, declination(n), hour_angle);
}

SunTimes raw_sunrise_sunset(const DayMatrix& m, double threshold_fraction) {
    const auto& v = m.values;
    const double p98 = percentile(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())), 98.0);
    const double threshold = threshold_fraction * (is_missing(p98) ? 0.0 : p98);
    SunTimes raw;
    raw.sunrise.assign(static_cast<std::size_t>(m.n_days()), kMissing);
    raw.sunset.assign(static_cast<std::size_t>(m.n_days()), kMissing);
    for (int d = 0; d < m.n_days(); ++d) {
        if (d < static_cast<int>(m.usable.size()) && !m.usable[d]) continue;
        int first = -1;
        int last = -1;
        for (int r = 0; r < m.n_per_day(); ++r) {
            const double x = v(r, d);
            if (!is_missing(x) && x > threshold) {
                if (first < 0) first = r;
                last = r;
            }
        }
        if (first >= 0 && last > first) {
            raw.sunrise[d] = first;
            raw.sunset[d] = last;
        }
    }
    return raw;
}

SunTimes detect_sunrise_sunset(const DayMatrix& m, const SunriseSunsetOptions& opts) {
    const SunTimes raw = raw_sunrise_sunset(m, opts.threshold_fraction);
    SunTimes out;
    out.sunrise = quantile_smooth(raw.sunrise, opts.sunrise_quantile, opts.smoothing);
    out.sunset = quantile_smooth(raw.sunset, opts.sunset_quantile, opts.smoothing);
    const double last_row = m.n_per_day() - 1;
    for (std::size_t d = 0; d < out.sunrise.size(); ++d) {
        out.sunrise[d] = std::clamp(out.sunrise[d], 0.0, last_row);
        out.sunset[d] = std::clamp(out.sunset[d], 0.0, last_row);
        if (out.sunset[d] <= out.sunrise[d]) {
            const double mid = 0.5 * (out.sunrise[d] + out.sunset[d]);
            out.sunrise[d] = std::max(0.0, mid - 0.5);
            out.sunset[d] = std::min(last_row, mid + 0.5);
        }
    }
    return out;
}

std::vector<DayGeometry> day_geometry(const DayMatrix& m, const SunTimes& sun) {
    std::vector<DayGeometry> geo(static_cast<std::size_t>(m.n_days()));
    for (int d = 0; d < m.n_days(); ++d) {
        auto& g = geo[d];
        g.day_of_year = day_of_year(m.start_date + std::chrono::days{d});
        g.declination = declination(g.day_of_year);
        g.bin_index = bin_declination(g.declination);
        g.sunrise_idx = sun.sunrise[d];
        g.sunset_idx = sun.sunset[d];
        g.day_length = (g.sunset_idx - g.sunrise_idx) * m.interval / 3600.0;
    }
    return geo;
}

}  // namespace shadeloss
