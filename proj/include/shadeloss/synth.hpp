#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include "shadeloss/clearsky.hpp"
#include "shadeloss/ingest.hpp"
#include "shadeloss/sd_engine.hpp"
#include "shadeloss/shade_report.hpp"

namespace shadeloss {

/// Fixed-tilt PV system. Azimuth in degrees clockwise from north (180 = south).
struct SystemGeometry {
    double latitude = 34.0;
    double longitude = -118.0;
    double tilt = 20.0;
    double azimuth = 180.0;
    double capacity = 5.0;  ///< kW at 1000 W/m^2

    void validate() const;
};

/// Blocks a fraction of the beam while the sun is inside an azimuth window and below an elevation.
struct ObstructionSegment {
    double azimuth_lo = 0.0;
    double azimuth_hi = 0.0;
    double elevation_threshold = 0.0;
    double beam_block_fraction = 1.0;
};

struct Obstruction {
    std::vector<ObstructionSegment> segments;

    void validate() const;
    /// Largest block fraction of the segments covering the sun; 0 when none does.
    double block_fraction(const SunPosition& sun) const;
};

/// Clear-sky simulation with the per-instant beam/diffuse split kept for shading.
struct SimulatedSystem {
    RawSeries series;  ///< kW
    std::vector<double> beam;     ///< kW
    std::vector<double> diffuse;  ///< kW
    std::vector<SunPosition> sun;
    SystemGeometry geometry;
};

inline constexpr std::chrono::sys_days kDefaultSimulationStart{std::chrono::year{2021} / 1 / 1};

SimulatedSystem simulate_system(const SystemGeometry& g, int years, int interval, const ClearSkyParams& p = {},
                                std::chrono::sys_days start = kDefaultSimulationStart);

struct ShadedSeries {
    RawSeries series;
    std::vector<double> loss;  ///< kW removed at each instant, >= 0
};

ShadedSeries inject_shade(const SimulatedSystem& sim, const Obstruction& obs);

struct WeatheredSeries {
    RawSeries series;
    std::vector<bool> cloudy;  ///< per calendar day from the first timestamp's day
};

/// Each day is independently cloudy with probability cloud_prob and then scaled by a smooth clearness
/// profile in [0.15, 0.8].
WeatheredSeries inject_weather(const RawSeries& series, double cloud_prob, std::uint64_t seed);

struct GroundTruth {
    std::vector<double> per_bin_loss_ref;      ///< kWh per day
    std::vector<double> per_bin_energy_ref;    ///< unshaded kWh per day
    std::vector<double> per_bin_shaded_energy; ///< kWh per day
    double yearly_loss_ref = 0.0;
    double yearly_energy_ref = 0.0;
    double yearly_shaded_energy = 0.0;
    std::vector<bool> clear_day_labels;

    ReferenceLosses reference() const { return {per_bin_loss_ref, yearly_loss_ref, yearly_energy_ref}; }
};

/// Per-bin means over clear-labeled days (all days of a bin when it has no clear day).
GroundTruth ground_truth(const SimulatedSystem& sim, const ShadedSeries& shaded, const std::vector<bool>& cloudy);

struct TinyInstanceOptions {
    int T = 6;
    int p = 8;
    int k = 2;
    double shade_depth = 0.35;
    double noise = 0.05;
};

/// Small random decomposition problem with a synthetic orthonormal corpus and a shaded block.
SdProblem make_tiny_problem(std::uint64_t seed, const SdParams& params, const TinyInstanceOptions& opts = {});

}  // namespace shadeloss
