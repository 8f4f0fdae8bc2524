#include "shadeloss/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "shadeloss/errors.hpp"
#include "shadeloss/numeric.hpp"
#include "shadeloss/table_io.hpp"

namespace shadeloss {

std::string PrepConfig::fingerprint() const {
    Fingerprint fp;
    fp.add("prep-v1")
        .add(sun.threshold_fraction)
        .add(sun.sunrise_quantile)
        .add(sun.sunset_quantile)
        .add(sun.smoothing)
        .add(smoothness_factor)
        .add(smoothness_percentile)
        .add(energy_factor)
        .add(energy_percentile)
        .add(static_cast<std::int64_t>(energy_bin_window))
        .add(static_cast<std::int64_t>(samples_per_day))
        .add(min_day_length)
        .add(scale_percentile)
        .add(clip_max)
        .add(static_cast<std::int64_t>(min_known_rows));
    return fp.hex();
}

int TransformedSignal::known_count() const {
    return static_cast<int>(std::count(known_rows.begin(), known_rows.end(), true));
}

namespace {

struct DayStats {
    double curvature = kMissing;  // mean |second difference| of the daytime samples, kW
    double energy = kMissing;     // kWh
};

DayStats day_stats(const DayMatrix& m, int d, const DayGeometry& g) {
    const int lo = std::max(0, static_cast<int>(std::ceil(g.sunrise_idx)));
    const int hi = std::min(m.n_per_day() - 1, static_cast<int>(std::floor(g.sunset_idx)));
    DayStats s;
    if (hi - lo < 2) return s;
    double curv = 0.0;
    double energy = 0.0;
    for (int r = lo; r <= hi; ++r) {
        energy += m.values(r, d);
        if (r + 2 <= hi) curv += std::abs(m.values(r, d) - 2.0 * m.values(r + 1, d) + m.values(r + 2, d));
    }
    s.curvature = curv / (hi - lo - 1);
    s.energy = energy * m.interval / 3600.0;
    return s;
}

}  // namespace

std::vector<bool> detect_clear_days(const DayMatrix& m, const std::vector<DayGeometry>& geo, const PrepConfig& cfg) {
    const int n = m.n_days();
    std::vector<DayStats> stats(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> curv_by_bin(kNumBins);
    std::vector<std::vector<double>> energy_by_bin(kNumBins);
    for (int d = 0; d < n; ++d) {
        if (!m.usable[d]) continue;
        stats[d] = day_stats(m, d, geo[d]);
        if (is_missing(stats[d].curvature)) continue;
        curv_by_bin[geo[d].bin_index].push_back(stats[d].curvature);
        energy_by_bin[geo[d].bin_index].push_back(stats[d].energy);
    }
    std::vector<double> curv_limit(kNumBins, kMissing);
    std::vector<double> energy_limit(kNumBins, kMissing);
    for (int b = 0; b < kNumBins; ++b) {
        curv_limit[b] = cfg.smoothness_factor * percentile(curv_by_bin[b], cfg.smoothness_percentile);
        std::vector<double> pooled;
        for (int o = -cfg.energy_bin_window; o <= cfg.energy_bin_window; ++o) {
            const int bb = b + o;
            if (bb < 0 || bb >= kNumBins) continue;
            pooled.insert(pooled.end(), energy_by_bin[bb].begin(), energy_by_bin[bb].end());
        }
        energy_limit[b] = cfg.energy_factor * percentile(pooled, cfg.energy_percentile);
    }
    std::vector<bool> clear(static_cast<std::size_t>(n), false);
    for (int d = 0; d < n; ++d) {
        if (!m.usable[d] || is_missing(stats[d].curvature)) continue;
        const int b = geo[d].bin_index;
        clear[d] = stats[d].curvature <= curv_limit[b] && stats[d].energy >= energy_limit[b] && stats[d].energy > 0.0;
    }
    return clear;
}

std::vector<DayProfile> mask_resample(const DayMatrix& m, const std::vector<DayGeometry>& geo,
                                      const std::vector<bool>& clear, const PrepConfig& cfg) {
    std::vector<DayProfile> out;
    const int p = cfg.samples_per_day;
    for (int d = 0; d < m.n_days(); ++d) {
        if (!m.usable[d]) continue;
        const auto& g = geo[d];
        if (g.day_length < cfg.min_day_length) continue;
        DayProfile prof;
        prof.values = resample_span(std::span<const double>(m.values.col(d).data(), m.values.rows()), g.sunrise_idx,
                                    g.sunset_idx, p);
        prof.values[0] = 0.0;
        prof.values[p - 1] = 0.0;
        prof.day_index = d;
        prof.bin_index = g.bin_index;
        prof.clear_flag = !clear.empty() && clear[d];
        out.push_back(std::move(prof));
    }
    return out;
}

double normalize(std::vector<DayProfile>& profiles, const PrepConfig& cfg) {
    if (profiles.empty()) throw InvalidDataError("no usable day profiles to normalize");
    const bool any_clear = std::any_of(profiles.begin(), profiles.end(), [](const auto& p) { return p.clear_flag; });
    std::vector<double> samples;
    for (const auto& p : profiles) {
        if (any_clear && !p.clear_flag) continue;
        samples.insert(samples.end(), p.values.data(), p.values.data() + p.values.size());
    }
    const double scale = percentile(samples, cfg.scale_percentile);
    if (is_missing(scale) || !(scale > 0.0)) throw InvalidDataError("normalization scale is not positive");
    for (auto& p : profiles) p.values = (p.values / scale).cwiseMin(cfg.clip_max);
    return scale;
}

TransformedSignal bin_average(const std::vector<DayProfile>& profiles, const std::vector<DayGeometry>& geo,
                              const PrepConfig& cfg) {
    const int p = cfg.samples_per_day;
    TransformedSignal ts;
    ts.y = Eigen::MatrixXd::Zero(kNumBins, p);
    ts.known_rows.assign(kNumBins, false);
    ts.bin_members.assign(kNumBins, {});
    ts.bin_day_length.assign(kNumBins, kMissing);
    std::vector<double> length_sum(kNumBins, 0.0);
    for (const auto& prof : profiles) {
        if (!prof.clear_flag) continue;
        const int b = prof.bin_index;
        ts.y.row(b) += prof.values.transpose();
        ts.bin_members[b].push_back(prof.day_index);
        length_sum[b] += geo[prof.day_index].day_length;
    }
    for (int b = 0; b < kNumBins; ++b) {
        const auto count = static_cast<double>(ts.bin_members[b].size());
        if (count == 0) {
            ts.y.row(b).setConstant(kMissing);
            continue;
        }
        ts.y.row(b) /= count;
        ts.known_rows[b] = true;
        ts.bin_day_length[b] = length_sum[b] / count;
    }
    if (ts.known_count() < cfg.min_known_rows)
        throw InsufficientDataError("only " + std::to_string(ts.known_count()) +
                                    " declination bins have clear days; at least " +
                                    std::to_string(cfg.min_known_rows) + " are required");
    ts.params_hash = cfg.fingerprint();
    return ts;
}

Preparation prepare(const RawSeries& series, const PrepConfig& cfg) {
    Preparation prep;
    const RawSeries reg = regularize(series);
    const DayMatrix raw = embed(reg);
    prep.sun = detect_sunrise_sunset(raw, cfg.sun);
    prep.matrix = fill_gaps(raw, prep.sun);
    prep.geometry = day_geometry(prep.matrix, prep.sun);
    prep.clear = detect_clear_days(prep.matrix, prep.geometry, cfg);
    auto profiles = mask_resample(prep.matrix, prep.geometry, prep.clear, cfg);
    const double scale = normalize(profiles, cfg);
    prep.signal = bin_average(profiles, prep.geometry, cfg);
    prep.signal.scale = scale;
    Fingerprint f;
    f.add(cfg.fingerprint());
    f.add(static_cast<std::int64_t>(series.interval));
    for (std::size_t i = 0; i < series.size(); ++i) {
        f.add(static_cast<std::int64_t>(series.timestamps[i]));
        f.add(series.power[i]);
    }
    prep.signal.params_hash = f.hex();
    return prep;
}

void write_transformed(const std::filesystem::path& matrix_csv, const std::filesystem::path& meta_kv,
                       const TransformedSignal& ts) {
    std::ostringstream m;
    write_matrix(m, ts.y, "params_hash=" + ts.params_hash);
    write_text_file(matrix_csv, m.str());

    KeyValueDoc doc;
    doc.set("format", std::string("shadeloss-transformed-v1"));
    doc.set("params_hash", ts.params_hash);
    doc.set("rows", static_cast<long long>(ts.rows()));
    doc.set("cols", static_cast<long long>(ts.cols()));
    doc.set("scale_kw", ts.scale);
    doc.set("known_rows", static_cast<long long>(ts.known_count()));
    for (int b = 0; b < ts.rows(); ++b) {
        std::string members;
        for (std::size_t i = 0; i < ts.bin_members[b].size(); ++i) {
            if (i) members += ';';
            members += std::to_string(ts.bin_members[b][i]);
        }
        doc.set("bin_" + std::to_string(b) + "_members", members);
        doc.set("bin_" + std::to_string(b) + "_day_length_h", ts.bin_day_length[b]);
    }
    std::ostringstream kv;
    doc.write(kv);
    write_text_file(meta_kv, kv.str());
}

TransformedSignal read_transformed(const std::filesystem::path& matrix_csv, const std::filesystem::path& meta_kv) {
    TransformedSignal ts;
    std::istringstream m(read_text_file(matrix_csv));
    ts.y = read_matrix(m);
    std::istringstream kv(read_text_file(meta_kv));
    const KeyValueDoc doc = KeyValueDoc::read(kv);
    if (doc.get_int("rows") != ts.y.rows() || doc.get_int("cols") != ts.y.cols())
        throw InvalidDataError("transformed signal shape does not match its metadata");
    ts.scale = doc.get_double("scale_kw");
    ts.params_hash = doc.get("params_hash");
    const int rows = ts.rows();
    ts.known_rows.assign(static_cast<std::size_t>(rows), false);
    ts.bin_members.assign(static_cast<std::size_t>(rows), {});
    ts.bin_day_length.assign(static_cast<std::size_t>(rows), kMissing);
    for (int b = 0; b < rows; ++b) {
        ts.known_rows[b] = !is_missing(ts.y(b, 0));
        std::stringstream ss(doc.get("bin_" + std::to_string(b) + "_members"));
        std::string item;
        while (std::getline(ss, item, ';'))
            if (!item.empty()) ts.bin_members[b].push_back(std::stoi(item));
        const std::string& len = doc.get("bin_" + std::to_string(b) + "_day_length_h");
        if (!len.empty()) ts.bin_day_length[b] = std::stod(len);
    }
    return ts;
}

}  // namespace shadeloss
