#pragma once

#include "shadeloss/solar_geometry.hpp"

namespace shadeloss {

/// Atmosphere for the simplified Solis clear-sky model.
struct ClearSkyParams {
    double aod700 = 0.10;
    double precipitable_water = 1.0;  ///< cm
    double pressure = 101325.0;       ///< Pa
    double albedo = 0.2;

    void validate() const;
};

struct Irradiance {
    double ghi = 0.0;  ///< W/m^2
    double dni = 0.0;
    double dhi = 0.0;
};

/// Extraterrestrial normal irradiance used by the Solis fits, W/m^2.
inline constexpr double kSolisDniExtra = 1364.0;

/// Simplified Solis closed forms (Ineichen 2008). Zero at or below the horizon.
Irradiance clearsky_irradiance(double zenith, const ClearSkyParams& p = {});

/// Plane-of-array irradiance split into beam and diffuse (sky + ground) parts.
struct PoaIrradiance {
    double beam = 0.0;
    double diffuse = 0.0;
    double total() const noexcept { return beam + diffuse; }
};

/// Cosine of the angle of incidence on a surface of given tilt/azimuth (degrees).
double cos_incidence(const SunPosition& sun, double tilt, double azimuth);

/// Isotropic-sky transposition.
PoaIrradiance poa_irradiance(const SunPosition& sun, const Irradiance& irr, double tilt, double azimuth,
                             double albedo);

inline double poa_power(const SunPosition& sun, const Irradiance& irr, double tilt, double azimuth, double albedo) {
    return poa_irradiance(sun, irr, tilt, azimuth, albedo).total();
}

}  // namespace shadeloss
