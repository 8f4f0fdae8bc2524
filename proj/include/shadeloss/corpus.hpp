#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "shadeloss/clearsky.hpp"

namespace shadeloss {

/// Geometry grid the clear-sky corpus is simulated over (degrees).
struct CorpusGrid {
    std::vector<double> latitudes{30.0, 35.0, 40.0};
    std::vector<double> tilts{5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60};
    std::vector<double> azimuths{90, 105, 120, 135, 150, 165, 180, 195, 210, 225, 240, 255, 270};
};

struct CorpusRowKey {
    double latitude = 0.0;
    double tilt = 0.0;
    double azimuth = 0.0;
    int bin = 0;
};

/// Normalized clear-sky daily profiles, one row per (latitude, tilt, azimuth, declination bin).
struct CorpusProfiles {
    Eigen::MatrixXd rows;  ///< N_c x 256
    std::vector<CorpusRowKey> keys;
};

/// Low-rank statistical model of the clear-sky corpus.
struct ClearSkyCorpus {
    Eigen::VectorXd mu;      ///< p
    Eigen::MatrixXd q;       ///< p x k, orthonormal columns
    Eigen::VectorXd lambda;  ///< k, descending
    int k = 0;               ///< effective rank kept
    int requested_k = 0;
    double total_variance = 0.0;  ///< trace of the empirical covariance
    long long n_profiles = 0;

    // provenance, written to the artifact header
    CorpusGrid grid;
    ClearSkyParams params;

    int p() const noexcept { return static_cast<int>(mu.size()); }
    double captured_variance() const;
};

/// Simulates a single normalized clear-sky day for each declination bin of one geometry.
/// Returns kNumBins x samples rows; rows that are identically zero are reported via `keep`.
Eigen::MatrixXd clearsky_year_profiles(double latitude, double tilt, double azimuth, const ClearSkyParams& params,
                                       std::vector<bool>& keep, int samples = 256);

CorpusProfiles generate_corpus(const CorpusGrid& grid, const ClearSkyParams& params = {}, int samples = 256);

/// Column mean, population covariance, symmetric eigendecomposition; keeps the top-k positive eigenpairs.
/// The first and last sample are treated as structurally zero.
ClearSkyCorpus fit_corpus(const Eigen::MatrixXd& profiles, int k = 6);

void write_corpus(const std::filesystem::path& path, const ClearSkyCorpus& corpus);
ClearSkyCorpus read_corpus(const std::filesystem::path& path);
std::string corpus_to_text(const ClearSkyCorpus& corpus);
ClearSkyCorpus corpus_from_text(const std::string& text);

}  // namespace shadeloss
