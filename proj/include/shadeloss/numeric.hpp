#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace shadeloss {

/// Missing-value marker used throughout: a quiet NaN.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) noexcept { return v != v; }

/// Percentile with linear interpolation between order statistics (q in [0, 100]).
/// Missing values are ignored. Returns kMissing for an empty input.
double percentile(std::span<const double> values, double q);

/// Linear interpolation of `column` at fractional index `pos`, clamped to the valid range.
double interp_at(std::span<const double> column, double pos);

/// Resamples the interval [from, to] of `column` (fractional row indices) onto `n` equally spaced points.
Eigen::VectorXd resample_span(std::span<const double> column, double from, double to, int n);

/// 64-bit FNV-1a; used for deterministic fingerprints of settings and artifacts.
class Fingerprint {
public:
    Fingerprint& add(std::string_view bytes);
    Fingerprint& add(double v);
    Fingerprint& add(std::int64_t v);
    Fingerprint& add(const Eigen::MatrixXd& m);
    std::uint64_t value() const noexcept { return h_; }
    std::string hex() const;

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

/// Platform-independent uniform [0,1) draw (53 random bits of a 64-bit Mersenne twister).
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace shadeloss
