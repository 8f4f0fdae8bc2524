#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "shadeloss/ingest.hpp"
#include "shadeloss/solar_geometry.hpp"

namespace shadeloss {

inline constexpr int kProfileSamples = 256;

/// Tunables of the data preparation. Defaults are the documented values.
struct PrepConfig {
    SunriseSunsetOptions sun;
    // clear-day detection
    double smoothness_factor = 3.0;       ///< times the per-bin 10th percentile of curvature
    double smoothness_percentile = 10.0;
    double energy_factor = 0.8;           ///< times the 90th percentile of energy within +-bin window
    double energy_percentile = 90.0;
    int energy_bin_window = 2;
    // masking / resampling
    int samples_per_day = kProfileSamples;
    double min_day_length = 4.0;  ///< hours
    // normalization
    double scale_percentile = 98.0;
    double clip_max = 1.05;
    // bin averaging
    int min_known_rows = 24;

    std::string fingerprint() const;
};

struct DayProfile {
    Eigen::VectorXd values;
    int day_index = 0;
    int bin_index = 0;
    bool clear_flag = false;
};

/// The decomposition input: one row per declination bin, one column per day-fraction sample.
struct TransformedSignal {
    Eigen::MatrixXd y;             ///< 47 x 256, NaN on missing rows
    std::vector<bool> known_rows;  ///< row t is in the known set iff known_rows[t]
    double scale = 1.0;            ///< kW
    std::vector<std::vector<int>> bin_members;
    std::vector<double> bin_day_length;  ///< hours; NaN for empty bins
    std::string params_hash;

    int rows() const noexcept { return static_cast<int>(y.rows()); }
    int cols() const noexcept { return static_cast<int>(y.cols()); }
    bool known(int t, int /*i*/) const { return known_rows[static_cast<std::size_t>(t)]; }
    int known_count() const;
};

std::vector<bool> detect_clear_days(const DayMatrix& m, const std::vector<DayGeometry>& geo,
                                    const PrepConfig& cfg = {});

/// Resamples each usable day's sunrise-sunset window onto `samples_per_day` points, endpoints forced to 0.
/// Days shorter than `min_day_length` are dropped. `clear` may be empty.
std::vector<DayProfile> mask_resample(const DayMatrix& m, const std::vector<DayGeometry>& geo,
                                      const std::vector<bool>& clear, const PrepConfig& cfg = {});

/// Divides every profile by the 98th percentile of the clear-day samples; returns that scale (kW).
double normalize(std::vector<DayProfile>& profiles, const PrepConfig& cfg = {});

/// Averages clear-day profiles per declination bin.
TransformedSignal bin_average(const std::vector<DayProfile>& profiles, const std::vector<DayGeometry>& geo,
                              const PrepConfig& cfg = {});

/// Everything the preparation produces, kept for reporting and inverse transforms.
struct Preparation {
    DayMatrix matrix;  ///< gap-filled
    SunTimes sun;
    std::vector<DayGeometry> geometry;
    std::vector<bool> clear;
    TransformedSignal signal;
};

/// regularize -> embed -> sunrise/sunset -> fill_gaps -> clear days -> mask/resample -> normalize -> bin average.
Preparation prepare(const RawSeries& series, const PrepConfig& cfg = {});

void write_transformed(const std::filesystem::path& matrix_csv, const std::filesystem::path& meta_kv,
                       const TransformedSignal& ts);
TransformedSignal read_transformed(const std::filesystem::path& matrix_csv, const std::filesystem::path& meta_kv);

}  // namespace shadeloss
