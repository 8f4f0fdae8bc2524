#pragma once

#include <chrono>
#include <span>
#include <vector>

#include "shadeloss/ingest.hpp"

namespace shadeloss {

inline constexpr int kNumBins = 47;
inline constexpr double kMaxDeclination = 23.45;  ///< degrees

/// Per-day geometry of a DayMatrix column.
struct DayGeometry {
    int day_of_year = 1;
    double declination = 0.0;  ///< degrees
    int bin_index = 0;
    double sunrise_idx = 0.0;  ///< fractional row index
    double sunset_idx = 0.0;
    double day_length = 0.0;  ///< hours
};

/// Zenith in [0, 180]; azimuth in [0, 360), 0 = north, clockwise (90 = east).
struct SunPosition {
    double zenith = 0.0;
    double azimuth = 0.0;

    double elevation() const noexcept { return 90.0 - zenith; }
};

/// Cooper's equation: 23.45 sin(360 (284 + n) / 365). Day 366 is evaluated as 365.
double declination(int day_of_year);
/// Same equation for a fractional day number (no range check).
double declination_at(double day_of_year);

/// Uniform bins over [-23.45, 23.45]; out-of-range input is clamped.
int bin_declination(double declination_deg);
double bin_center(int bin);
/// Fractional day number in the spring half of the year at which Cooper's equation gives `declination_deg`.
double day_for_declination(double declination_deg);

/// Day of year (1-366) of a calendar date.
int day_of_year(std::chrono::sys_days date);

/// Spencer's equation of time, minutes.
double equation_of_time(int day_of_year);

/// Local standard clock time (hours) of solar noon for a longitude (east positive).
/// The standard meridian is the nearest multiple of 15 degrees.
double solar_noon_hours(double longitude, int day_of_year);

/// Spherical-trigonometry sun position from latitude, declination, and hour angle (degrees, negative before noon).
SunPosition sun_position_from_hour_angle(double latitude, double declination_deg, double hour_angle);

/// Sun position for a local-standard-time instant. Rejects |latitude| >= 66.
SunPosition sun_position(double latitude, double longitude, LocalSeconds instant);

struct SunriseSunsetOptions {
    double threshold_fraction = 0.005;  ///< of the matrix 98th percentile
    double sunrise_quantile = 0.05;
    double sunset_quantile = 0.95;
    double smoothing = 100.0;  ///< days^2
};

/// First/last row per day above the power threshold; NaN for days without any crossing.
SunTimes raw_sunrise_sunset(const DayMatrix& m, double threshold_fraction = 0.005);

/// Robust per-day sunrise/sunset: raw threshold crossings smoothed by quantile-envelope fits.
SunTimes detect_sunrise_sunset(const DayMatrix& m, const SunriseSunsetOptions& opts = {});

std::vector<DayGeometry> day_geometry(const DayMatrix& m, const SunTimes& sun);

/// Minimizer of sum_d rho_q(r_d - f_d) + kappa * sum (second difference of f)^2 over observed days.
/// Unobserved entries of `raw` are NaN and carry no data weight.
std::vector<double> quantile_smooth(std::span<const double> raw, double quantile, double kappa);

}  // namespace shadeloss
