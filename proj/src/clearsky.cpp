#include "shadeloss/clearsky.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shadeloss/errors.hpp"

namespace shadeloss {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kP0 = 101325.0;

}  // namespace

void ClearSkyParams::validate() const {
    if (!(aod700 >= 0.0 && aod700 <= 1.0)) throw ArgumentError("aod700 must be in [0, 1]");
    if (!(precipitable_water >= 0.0)) throw ArgumentError("precipitable water must be nonnegative");
    if (!(pressure > 0.0)) throw ArgumentError("pressure must be positive");
    if (!(albedo >= 0.0)) throw ArgumentError("albedo must be nonnegative");
}

Irradiance clearsky_irradiance(double zenith, const ClearSkyParams& p) {
    if (!(zenith < 90.0)) return {};
    const double w = std::max(p.precipitable_water, 0.2);  // fits are invalid below 0.2 cm
    const double a = p.aod700;
    const double lnw = std::log(w);
    const double lnp = std::log(p.pressure / kP0);

    const double i0p = kSolisDniExtra * (0.12 * std::pow(w, 0.56) * a * a + 0.97 * std::pow(w, 0.032) * a +
                                         1.08 * std::pow(w, 0.0051) + 0.071 * lnp);

    const double taub = (1.82 + 0.056 * lnw + 0.0071 * lnw * lnw) * a + (0.33 + 0.045 * lnw + 0.0096 * lnw * lnw) +
                        (0.0089 * w + 0.13) * lnp;
    const double b = (0.00925 * a * a + 0.0148 * a - 0.0172) * lnw + (-0.7565 * a * a + 0.5057 * a + 0.4557);

    const double taug = (1.24 + 0.047 * lnw + 0.0061 * lnw * lnw) * a + (0.27 + 0.043 * lnw + 0.0090 * lnw * lnw) +
                        (0.0079 * w + 0.1) * lnp;
    const double g = -0.0147 * lnw - 0.3079 * a * a + 0.2846 * a + 0.3798;

    double td4, td3, td2, td1, td0, tdp;
    if (a < 0.05) {
        td4 = 86.0 * w - 13800.0;
        td3 = -3.11 * w + 79.4;
        td2 = -0.23 * w + 74.8;
        td1 = 0.092 * w - 8.86;
        td0 = 0.0042 * w + 3.12;
        tdp = -0.83 * std::pow(1.0 + a, -17.2);
    } else {
        td4 = -0.21 * w + 11.6;
        td3 = 0.27 * w - 20.7;
        td2 = -0.134 * w + 15.5;
        td1 = 0.0554 * w - 5.71;
        td0 = 0.0057 * w + 2.94;
        tdp = -0.71 * std::pow(1.0 + a, -15.0);
    }
    const double taud = td4 * a * a * a * a + td3 * a * a * a + td2 * a * a + td1 * a + td0 + tdp * lnp;
    const double d = -0.337 * a * a + 0.63 * a + 0.116 + lnp / (18.0 + 152.0 * a);

    const double sin_elev = std::max(1e-30, std::cos(zenith * kDeg));
    Irradiance irr;
    irr.dni = i0p * std::exp(-taub / std::pow(sin_elev, b));
    irr.ghi = i0p * std::exp(-taug / std::pow(sin_elev, g)) * sin_elev;
    irr.dhi = i0p * std::exp(-taud / std::pow(sin_elev, d));
    return irr;
}

double cos_incidence(const SunPosition& sun, double tilt, double azimuth) {
    const double z = sun.zenith * kDeg;
    const double t = tilt * kDeg;
    return std::cos(z) * std::cos(t) + std::sin(z) * std::sin(t) * std::cos((sun.azimuth - azimuth) * kDeg);
}

PoaIrradiance poa_irradiance(const SunPosition& sun, const Irradiance& irr, double tilt, double azimuth,
                             double albedo) {
    const double ct = std::cos(tilt * kDeg);
    PoaIrradiance out;
    out.beam = irr.dni * std::max(cos_incidence(sun, tilt, azimuth), 0.0);
    out.diffuse = irr.dhi * (1.0 + ct) / 2.0 + irr.ghi * albedo * (1.0 - ct) / 2.0;
    return out;
}

}  // namespace shadeloss
