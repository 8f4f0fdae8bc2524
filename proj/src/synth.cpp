#include "shadeloss/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "shadeloss/errors.hpp"
#include "shadeloss/numeric.hpp"
#include "shadeloss/solar_geometry.hpp"

namespace shadeloss {

void SystemGeometry::validate() const {
    if (!(std::abs(latitude) < 66.0)) throw ArgumentError("latitude must satisfy |latitude| < 66");
    if (!(longitude >= -180.0 && longitude <= 180.0)) throw ArgumentError("longitude must lie in [-180, 180]");
    if (!(tilt >= 0.0 && tilt <= 90.0)) throw ArgumentError("tilt must lie in [0, 90]");
    if (!(azimuth >= 0.0 && azimuth < 360.0)) throw ArgumentError("azimuth must lie in [0, 360)");
    if (!(capacity > 0.0)) throw ArgumentError("capacity must be positive");
}

void Obstruction::validate() const {
    for (const auto& s : segments) {
        if (!(s.azimuth_lo < s.azimuth_hi)) throw ArgumentError("obstruction azimuth_lo must be below azimuth_hi");
        if (!(s.elevation_threshold >= 0.0 && s.elevation_threshold <= 90.0))
            throw ArgumentError("obstruction elevation threshold must lie in [0, 90]");
        if (!(s.beam_block_fraction >= 0.0 && s.beam_block_fraction <= 1.0))
            throw ArgumentError("beam block fraction must lie in [0, 1]");
    }
}

double Obstruction::block_fraction(const SunPosition& sun) const {
    double f = 0.0;
    for (const auto& s : segments)
        if (sun.azimuth >= s.azimuth_lo && sun.azimuth <= s.azimuth_hi && sun.elevation() < s.elevation_threshold)
            f = std::max(f, s.beam_block_fraction);
    return f;
}

SimulatedSystem simulate_system(const SystemGeometry& g, int years, int interval, const ClearSkyParams& p,
                                std::chrono::sys_days start) {
    g.validate();
    p.validate();
    if (years < 1) throw ArgumentError("years must be at least 1");
    if (interval <= 0 || kSecondsPerDay % interval != 0)
        throw ArgumentError("interval must be a positive divisor of one day");
    const auto start_day = static_cast<LocalSeconds>(start.time_since_epoch().count());
    const std::chrono::sys_days end{std::chrono::year_month_day{start} + std::chrono::years{years}};
    const auto n_days = static_cast<LocalSeconds>((end - start).count());
    const LocalSeconds per_day = kSecondsPerDay / interval;
    const auto n = static_cast<std::size_t>(n_days * per_day);

    SimulatedSystem sim;
    sim.geometry = g;
    sim.series.interval = interval;
    sim.series.timestamps.resize(n);
    sim.series.power.resize(n);
    sim.beam.resize(n);
    sim.diffuse.resize(n);
    sim.sun.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const LocalSeconds t = start_day * kSecondsPerDay + static_cast<LocalSeconds>(i) * interval;
        const SunPosition sun = sun_position(g.latitude, g.longitude, t);
        const PoaIrradiance poa = poa_irradiance(sun, clearsky_irradiance(sun.zenith, p), g.tilt, g.azimuth, p.albedo);
        sim.series.timestamps[i] = t;
        sim.sun[i] = sun;
        sim.beam[i] = g.capacity * poa.beam / 1000.0;
        sim.diffuse[i] = g.capacity * poa.diffuse / 1000.0;
        sim.series.power[i] = sim.beam[i] + sim.diffuse[i];
    }
    return sim;
}

ShadedSeries inject_shade(const SimulatedSystem& sim, const Obstruction& obs) {
    obs.validate();
    ShadedSeries out;
    out.series = sim.series;
    out.loss.assign(sim.series.size(), 0.0);
    for (std::size_t i = 0; i < sim.series.size(); ++i) {
        const double f = obs.block_fraction(sim.sun[i]);
        if (f <= 0.0) continue;
        const double shaded = sim.beam[i] * (1.0 - f) + sim.diffuse[i];
        out.loss[i] = sim.series.power[i] - shaded;
        out.series.power[i] = shaded;
    }
    return out;
}

namespace {

LocalSeconds day_of(LocalSeconds t) {
    return t >= 0 ? t / kSecondsPerDay : -((-t + kSecondsPerDay - 1) / kSecondsPerDay);
}

}  // namespace

WeatheredSeries inject_weather(const RawSeries& series, double cloud_prob, std::uint64_t seed) {
    if (!(cloud_prob >= 0.0 && cloud_prob <= 1.0)) throw ArgumentError("cloud probability must lie in [0, 1]");
    constexpr int kKnots = 25;  // one per hour, both midnights included
    constexpr double kLo = 0.15;
    constexpr double kHi = 0.8;
    WeatheredSeries out;
    out.series = series;
    if (series.size() == 0) return out;
    const LocalSeconds first = day_of(series.timestamps.front());
    const LocalSeconds last = day_of(series.timestamps.back());
    const auto n_days = static_cast<std::size_t>(last - first + 1);
    std::mt19937_64 rng(seed);
    out.cloudy.assign(n_days, false);
    std::vector<std::vector<double>> knots(n_days);
    for (std::size_t d = 0; d < n_days; ++d) {
        out.cloudy[d] = uniform01(rng) < cloud_prob;
        if (!out.cloudy[d]) continue;
        knots[d].resize(kKnots);
        for (double& k : knots[d]) k = kLo + (kHi - kLo) * uniform01(rng);
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        const LocalSeconds t = series.timestamps[i];
        const auto d = static_cast<std::size_t>(day_of(t) - first);
        if (!out.cloudy[d] || is_missing(out.series.power[i])) continue;
        const double hour = static_cast<double>(t - day_of(t) * kSecondsPerDay) / 3600.0;
        const auto k = std::min(static_cast<int>(hour), kKnots - 2);
        const double f = hour - k;
        // cosine blend keeps the profile smooth and inside the knot range
        const double w = 0.5 - 0.5 * std::cos(std::numbers::pi * f);
        const double c = (1.0 - w) * knots[d][static_cast<std::size_t>(k)] + w * knots[d][static_cast<std::size_t>(k + 1)];
        out.series.power[i] *= c;
    }
    return out;
}

GroundTruth ground_truth(const SimulatedSystem& sim, const ShadedSeries& shaded, const std::vector<bool>& cloudy) {
    if (shaded.series.size() != sim.series.size()) throw ArgumentError("shaded series does not match simulation");
    GroundTruth gt;
    if (sim.series.size() == 0) throw InsufficientDataError("empty simulation");
    const double hours = static_cast<double>(sim.series.interval) / 3600.0;
    const LocalSeconds first = day_of(sim.series.timestamps.front());
    const auto n_days = static_cast<std::size_t>(day_of(sim.series.timestamps.back()) - first + 1);
    std::vector<double> e_clear(n_days, 0.0), e_shaded(n_days, 0.0), e_loss(n_days, 0.0);
    for (std::size_t i = 0; i < sim.series.size(); ++i) {
        const auto d = static_cast<std::size_t>(day_of(sim.series.timestamps[i]) - first);
        e_clear[d] += sim.series.power[i] * hours;
        e_shaded[d] += shaded.series.power[i] * hours;
        e_loss[d] += shaded.loss[i] * hours;
    }
    gt.clear_day_labels.assign(n_days, true);
    for (std::size_t d = 0; d < n_days && d < cloudy.size(); ++d) gt.clear_day_labels[d] = !cloudy[d];

    std::vector<int> bin(n_days);
    for (std::size_t d = 0; d < n_days; ++d) {
        const std::chrono::sys_days date{std::chrono::days{first + static_cast<LocalSeconds>(d)}};
        bin[d] = bin_declination(declination(day_of_year(date)));
    }
    auto bin_means = [&](const std::vector<double>& e) {
        std::vector<double> sum_clear(kNumBins, 0.0), sum_all(kNumBins, 0.0);
        std::vector<int> n_clear(kNumBins, 0), n_all(kNumBins, 0);
        for (std::size_t d = 0; d < n_days; ++d) {
            const auto b = static_cast<std::size_t>(bin[d]);
            sum_all[b] += e[d];
            ++n_all[b];
            if (gt.clear_day_labels[d]) {
                sum_clear[b] += e[d];
                ++n_clear[b];
            }
        }
        std::vector<double> out(kNumBins, kMissing);
        for (std::size_t b = 0; b < out.size(); ++b) {
            if (n_clear[b] > 0) out[b] = sum_clear[b] / n_clear[b];
            else if (n_all[b] > 0) out[b] = sum_all[b] / n_all[b];
        }
        return fill_missing_bins(out);
    };
    gt.per_bin_loss_ref = bin_means(e_loss);
    gt.per_bin_energy_ref = bin_means(e_clear);
    gt.per_bin_shaded_energy = bin_means(e_shaded);
    gt.yearly_loss_ref = yearly_total(gt.per_bin_loss_ref);
    gt.yearly_energy_ref = yearly_total(gt.per_bin_energy_ref);
    gt.yearly_shaded_energy = yearly_total(gt.per_bin_shaded_energy);
    return gt;
}

SdProblem make_tiny_problem(std::uint64_t seed, const SdParams& params, const TinyInstanceOptions& opts) {
    const int T = opts.T, p = opts.p, k = opts.k;
    if (T < 3 || p < 4 || k < 1 || k > p - 2) throw ArgumentError("invalid tiny instance dimensions");
    std::mt19937_64 rng(seed);
    auto u = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };

    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(p - 2, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < p - 2; ++i) raw(i, j) = u(-1.0, 1.0);
    const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ() *
                                  Eigen::MatrixXd::Identity(p - 2, k);

    ClearSkyCorpus c;
    c.k = k;
    c.requested_k = k;
    c.q = Eigen::MatrixXd::Zero(p, k);
    c.q.middleRows(1, p - 2) = basis;
    c.mu = Eigen::VectorXd::Zero(p);
    const double amp = u(0.8, 1.0);
    for (int i = 1; i < p - 1; ++i) c.mu[i] = amp * std::sin(std::numbers::pi * i / (p - 1));
    c.lambda.resize(k);
    double lam = u(0.5, 1.0);
    for (int j = 0; j < k; ++j) {
        c.lambda[j] = lam;
        lam *= u(0.2, 0.5);
    }
    c.total_variance = c.lambda.sum();
    c.n_profiles = 0;

    Eigen::MatrixXd y(T, p);
    const double drift = u(-0.05, 0.05);
    for (int t = 0; t < T; ++t) {
        const double season = 1.0 - 0.15 * std::pow((t - 0.5 * (T - 1)) / (0.5 * (T - 1)), 2);
        Eigen::VectorXd z(k);
        for (int j = 0; j < k; ++j) z[j] = drift * t + 0.05 * u(-1.0, 1.0);
        y.row(t) = (season * c.mu + c.q * z).transpose();
    }
    // a compact shaded block in the morning of the first half of the rows
    const int t1 = std::max(1, T / 2);
    const int i0 = 1, i1 = std::max(2, p / 2);
    for (int t = 0; t < t1; ++t)
        for (int i = i0; i < i1; ++i) y(t, i) -= opts.shade_depth * y(t, i) * u(0.7, 1.0);
    for (int t = 0; t < T; ++t)
        for (int i = 0; i < p; ++i) y(t, i) += opts.noise * u(-1.0, 1.0);

    return build_problem(y, std::vector<bool>(static_cast<std::size_t>(T), true), c, params);
}

}  // namespace shadeloss
