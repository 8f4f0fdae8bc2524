#include "shadeloss/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "shadeloss/errors.hpp"
#include "shadeloss/numeric.hpp"
#include "shadeloss/table_io.hpp"

namespace shadeloss {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr int kMinutes = 1440;
constexpr double kThresholdFraction = 0.005;
constexpr double kScalePercentile = 98.0;
constexpr double kClipMax = 1.05;

// Sun geometry and irradiance at one-minute resolution of a solar day.
struct SolarDay {
    std::vector<double> cos_zen, sin_zen, cos_az, sin_az;
    std::vector<double> dni, dhi, ghi;
};

SolarDay simulate_solar_day(double latitude, double decl, const ClearSkyParams& params) {
    SolarDay s;
    for (auto* v : {&s.cos_zen, &s.sin_zen, &s.cos_az, &s.sin_az, &s.dni, &s.dhi, &s.ghi}) v->assign(kMinutes, 0.0);
    for (int m = 0; m < kMinutes; ++m) {
        const double hour_angle = 15.0 * (m / 60.0 - 12.0);
        const SunPosition sun = sun_position_from_hour_angle(latitude, decl, hour_angle);
        const Irradiance irr = clearsky_irradiance(sun.zenith, params);
        s.cos_zen[m] = std::cos(sun.zenith * kDeg);
        s.sin_zen[m] = std::sin(sun.zenith * kDeg);
        s.cos_az[m] = std::cos(sun.azimuth * kDeg);
        s.sin_az[m] = std::sin(sun.azimuth * kDeg);
        s.dni[m] = irr.dni;
        s.dhi[m] = irr.dhi;
        s.ghi[m] = irr.ghi;
    }
    return s;
}

void poa_day(const SolarDay& s, double tilt, double azimuth, double albedo, std::vector<double>& out) {
    const double ct = std::cos(tilt * kDeg), st = std::sin(tilt * kDeg);
    const double ca = std::cos(azimuth * kDeg), sa = std::sin(azimuth * kDeg);
    out.resize(kMinutes);
    for (int m = 0; m < kMinutes; ++m) {
        if (s.ghi[m] <= 0.0 && s.dni[m] <= 0.0) {
            out[m] = 0.0;
            continue;
        }
        const double cos_aoi = s.cos_zen[m] * ct + s.sin_zen[m] * st * (s.cos_az[m] * ca + s.sin_az[m] * sa);
        out[m] = s.dni[m] * std::max(cos_aoi, 0.0) + s.dhi[m] * (1.0 + ct) / 2.0 + s.ghi[m] * albedo * (1.0 - ct) / 2.0;
    }
}

Eigen::MatrixXd profiles_from_days(const std::vector<std::vector<double>>& days, std::vector<bool>& keep, int samples) {
    std::vector<double> all;
    for (const auto& d : days) all.insert(all.end(), d.begin(), d.end());
    const double threshold = kThresholdFraction * percentile(all, kScalePercentile);

    const int n = static_cast<int>(days.size());
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(n, samples);
    keep.assign(static_cast<std::size_t>(n), false);
    for (int b = 0; b < n; ++b) {
        const auto& d = days[b];
        int first = -1, last = -1;
        for (int m = 0; m < kMinutes; ++m) {
            if (d[m] > threshold) {
                if (first < 0) first = m;
                last = m;
            }
        }
        if (first < 0 || last <= first) continue;
        rows.row(b) = resample_span(d, first, last, samples).transpose();
        rows(b, 0) = 0.0;
        rows(b, samples - 1) = 0.0;
        keep[b] = rows.row(b).maxCoeff() > 0.0;
    }
    // Scale from the resampled samples of the kept days, matching the measured-data normalization.
    std::vector<double> samples_all;
    for (int b = 0; b < n; ++b) {
        if (!keep[b]) continue;
        for (int j = 0; j < samples; ++j) samples_all.push_back(rows(b, j));
    }
    const double scale = percentile(samples_all, kScalePercentile);
    if (!(scale > 0.0)) {
        keep.assign(keep.size(), false);
        return rows;
    }
    rows = (rows / scale).cwiseMin(kClipMax);
    return rows;
}

}  // namespace

double ClearSkyCorpus::captured_variance() const {
    if (total_variance <= 0.0) return 1.0;
    return lambda.sum() / total_variance;
}

Eigen::MatrixXd clearsky_year_profiles(double latitude, double tilt, double azimuth, const ClearSkyParams& params,
                                       std::vector<bool>& keep, int samples) {
    std::vector<std::vector<double>> days(kNumBins);
    for (int b = 0; b < kNumBins; ++b) {
        const SolarDay s = simulate_solar_day(latitude, bin_center(b), params);
        poa_day(s, tilt, azimuth, params.albedo, days[b]);
    }
    return profiles_from_days(days, keep, samples);
}

CorpusProfiles generate_corpus(const CorpusGrid& grid, const ClearSkyParams& params, int samples) {
    if (grid.latitudes.empty() || grid.tilts.empty() || grid.azimuths.empty())
        throw ArgumentError("corpus grids must be nonempty");
    params.validate();
    for (double lat : grid.latitudes)
        if (!(std::abs(lat) < 66.0)) throw ArgumentError("unsupported corpus latitude " + std::to_string(lat));

    CorpusProfiles out;
    std::vector<Eigen::RowVectorXd> rows;
    std::vector<std::vector<double>> days(kNumBins);
    std::vector<bool> keep;
    for (double lat : grid.latitudes) {
        std::vector<SolarDay> solar;
        solar.reserve(kNumBins);
        for (int b = 0; b < kNumBins; ++b) solar.push_back(simulate_solar_day(lat, bin_center(b), params));
        for (double tilt : grid.tilts) {
            for (double az : grid.azimuths) {
                for (int b = 0; b < kNumBins; ++b) poa_day(solar[b], tilt, az, params.albedo, days[b]);
                const Eigen::MatrixXd prof = profiles_from_days(days, keep, samples);
                for (int b = 0; b < kNumBins; ++b) {
                    if (!keep[b]) continue;
                    rows.push_back(prof.row(b));
                    out.keys.push_back({lat, tilt, az, b});
                }
            }
        }
    }
    out.rows.resize(static_cast<Eigen::Index>(rows.size()), samples);
    for (std::size_t i = 0; i < rows.size(); ++i) out.rows.row(static_cast<Eigen::Index>(i)) = rows[i];
    return out;
}

ClearSkyCorpus fit_corpus(const Eigen::MatrixXd& profiles, int k) {
    if (k < 1) throw ArgumentError("k must be at least 1");
    const Eigen::Index n = profiles.rows();
    const Eigen::Index p = profiles.cols();
    if (p < 3) throw ArgumentError("profiles need at least 3 samples");
    if (n <= p) throw ArgumentError("corpus needs more profiles (" + std::to_string(n) + ") than samples per profile (" +
                                    std::to_string(p) + ")");

    ClearSkyCorpus c;
    c.requested_k = k;
    c.n_profiles = n;
    c.mu = profiles.colwise().mean().transpose();
    c.mu[0] = 0.0;
    c.mu[p - 1] = 0.0;

    // Interior block only: endpoint samples are zero in every profile.
    const Eigen::Index m = p - 2;
    const Eigen::MatrixXd centered = profiles.middleCols(1, m).rowwise() - c.mu.segment(1, m).transpose();
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);
    c.total_variance = cov.trace();

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw InvalidDataError("covariance eigendecomposition failed");
    const Eigen::VectorXd& vals = eig.eigenvalues();  // ascending
    const double top = std::max(vals[m - 1], 0.0);
    const double tol = std::max(1e-12, 1e-10 * top);
    int kept = 0;
    for (int j = 0; j < std::min<Eigen::Index>(k, m); ++j)
        if (vals[m - 1 - j] > tol) ++kept;

    c.k = kept;
    c.lambda.resize(kept);
    c.q = Eigen::MatrixXd::Zero(p, kept);
    for (int j = 0; j < kept; ++j) {
        c.lambda[j] = vals[m - 1 - j];
        Eigen::VectorXd v = eig.eigenvectors().col(m - 1 - j);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0.0) v = -v;  // deterministic sign
        c.q.col(j).segment(1, m) = v;
    }
    return c;
}

std::string corpus_to_text(const ClearSkyCorpus& c) {
    KeyValueDoc doc;
    doc.set("format", std::string("shadeloss-corpus-v1"));
    doc.set("latitudes", join_doubles(c.grid.latitudes));
    doc.set("tilts", join_doubles(c.grid.tilts));
    doc.set("azimuths", join_doubles(c.grid.azimuths));
    doc.set("aod700", c.params.aod700);
    doc.set("precipitable_water", c.params.precipitable_water);
    doc.set("pressure", c.params.pressure);
    doc.set("albedo", c.params.albedo);
    doc.set("p", static_cast<long long>(c.p()));
    doc.set("k", static_cast<long long>(c.k));
    doc.set("requested_k", static_cast<long long>(c.requested_k));
    doc.set("n_profiles", c.n_profiles);
    doc.set("total_variance", c.total_variance);

    std::ostringstream os;
    os << "# clear-sky corpus model: header, then [mu] (1 x p), [lambda] (1 x k), [q] (p x k)\n";
    doc.write(os);
    os << "[mu]\n";
    write_matrix(os, c.mu.transpose());
    os << "[lambda]\n";
    write_matrix(os, c.lambda.transpose());
    os << "[q]\n";
    write_matrix(os, c.q);
    return os.str();
}

ClearSkyCorpus corpus_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::ostringstream header;
    std::string section;
    std::ostringstream mu_s, lambda_s, q_s;
    while (std::getline(is, line)) {
        if (!line.empty() && line.front() == '[') {
            section = line;
            continue;
        }
        if (section.empty())
            header << line << '\n';
        else if (section == "[mu]")
            mu_s << line << '\n';
        else if (section == "[lambda]")
            lambda_s << line << '\n';
        else if (section == "[q]")
            q_s << line << '\n';
        else
            throw InvalidDataError("unknown corpus section " + section);
    }
    std::istringstream hs(header.str());
    const KeyValueDoc doc = KeyValueDoc::read(hs);
    if (doc.get("format") != "shadeloss-corpus-v1") throw InvalidDataError("unsupported corpus format");

    ClearSkyCorpus c;
    c.grid.latitudes = split_doubles(doc.get("latitudes"));
    c.grid.tilts = split_doubles(doc.get("tilts"));
    c.grid.azimuths = split_doubles(doc.get("azimuths"));
    c.params.aod700 = doc.get_double("aod700");
    c.params.precipitable_water = doc.get_double("precipitable_water");
    c.params.pressure = doc.get_double("pressure");
    c.params.albedo = doc.get_double("albedo");
    c.k = static_cast<int>(doc.get_int("k"));
    c.requested_k = static_cast<int>(doc.get_int("requested_k"));
    c.n_profiles = doc.get_int("n_profiles");
    c.total_variance = doc.get_double("total_variance");
    const auto p = static_cast<Eigen::Index>(doc.get_int("p"));

    std::istringstream ms(mu_s.str()), ls(lambda_s.str()), qs(q_s.str());
    const Eigen::MatrixXd mu = read_matrix(ms);
    if (mu.rows() != 1 || mu.cols() != p) throw InvalidDataError("corpus mu block has the wrong shape");
    c.mu = mu.row(0).transpose();
    if (c.k > 0) {
        const Eigen::MatrixXd lam = read_matrix(ls);
        const Eigen::MatrixXd q = read_matrix(qs);
        if (lam.rows() != 1 || lam.cols() != c.k) throw InvalidDataError("corpus lambda block has the wrong shape");
        if (q.rows() != p || q.cols() != c.k) throw InvalidDataError("corpus q block has the wrong shape");
        c.lambda = lam.row(0).transpose();
        c.q = q;
    } else {
        c.lambda.resize(0);
        c.q = Eigen::MatrixXd::Zero(p, 0);
    }
    return c;
}

void write_corpus(const std::filesystem::path& path, const ClearSkyCorpus& corpus) {
    write_text_file(path, corpus_to_text(corpus));
}

ClearSkyCorpus read_corpus(const std::filesystem::path& path) { return corpus_from_text(read_text_file(path)); }

}  // namespace shadeloss
