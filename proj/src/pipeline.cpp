#include "shadeloss/pipeline.hpp"

#include <sstream>

#include "shadeloss/errors.hpp"
#include "shadeloss/numeric.hpp"
#include "shadeloss/table_io.hpp"

namespace shadeloss {

namespace {

void make_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

std::string corpus_fingerprint(const ClearSkyCorpus& corpus) {
    Fingerprint f;
    f.add(corpus.mu);
    f.add(corpus.q);
    f.add(corpus.lambda);
    return f.hex();
}

Analysis analyze(const RawSeries& series, const ClearSkyCorpus& corpus, const AnalyzeOptions& opts) {
    Analysis a;
    a.prep = prepare(series, opts.prep);
    const SdProblem prob = build_problem(a.prep.signal, corpus, opts.sd);
    a.dec = solve(prob);
    Fingerprint f;
    f.add(a.prep.signal.params_hash);
    f.add(opts.sd.fingerprint());
    f.add(corpus_fingerprint(corpus));
    a.params_hash = f.hex();
    a.report = build_report(a.dec, a.prep.signal);
    a.report.params_hash = a.params_hash;
    return a;
}

void write_analysis(const std::filesystem::path& dir, const Analysis& a, const SdParams& params) {
    make_dir(dir / "transformed");
    write_transformed(dir / "transformed" / "y.csv", dir / "transformed" / "meta.txt", a.prep.signal);
    write_decomposition(dir / "decomposition", a.dec, params, a.params_hash);
    write_heatmaps(dir / "heatmaps", a.prep.signal, a.dec, a.params_hash);
    write_report(dir / "report.txt", a.report);
    write_loss_table(dir / "loss_table.csv", a.report.per_bin_loss, nullptr, a.params_hash);
}

std::string SynthConfig::fingerprint() const {
    Fingerprint f;
    for (double v : {geometry.latitude, geometry.longitude, geometry.tilt, geometry.azimuth, geometry.capacity})
        f.add(v);
    for (const auto& s : obstruction.segments)
        for (double v : {s.azimuth_lo, s.azimuth_hi, s.elevation_threshold, s.beam_block_fraction}) f.add(v);
    f.add(static_cast<std::int64_t>(years));
    f.add(static_cast<std::int64_t>(interval));
    for (double v : {clearsky.aod700, clearsky.precipitable_water, clearsky.pressure, clearsky.albedo}) f.add(v);
    f.add(cloud_prob);
    f.add(static_cast<std::int64_t>(seed));
    return f.hex();
}

SynthOutput synthesize(const SynthConfig& cfg) {
    const SimulatedSystem sim = simulate_system(cfg.geometry, cfg.years, cfg.interval, cfg.clearsky);
    const ShadedSeries shaded = inject_shade(sim, cfg.obstruction);
    WeatheredSeries weather = inject_weather(shaded.series, cfg.cloud_prob, cfg.seed);
    SynthOutput out;
    out.truth = ground_truth(sim, shaded, weather.cloudy);
    out.series = std::move(weather.series);
    out.params_hash = cfg.fingerprint();
    return out;
}

void write_synth(const std::filesystem::path& dir, const SynthOutput& out) {
    make_dir(dir);
    std::ostringstream series;
    series << "# params_hash=" << out.params_hash << '\n';
    write_series(series, out.series);
    write_text_file(dir / "series.csv", series.str());
    write_reference(dir / "ground_truth.txt", out.truth.reference(), out.params_hash);
    write_loss_table(dir / "ground_truth.csv", out.truth.per_bin_loss_ref, nullptr, out.params_hash);
    std::ostringstream labels;
    labels << "# params_hash=" << out.params_hash << '\n' << "day,clear\n";
    for (std::size_t d = 0; d < out.truth.clear_day_labels.size(); ++d)
        labels << d << ',' << (out.truth.clear_day_labels[d] ? 1 : 0) << '\n';
    write_text_file(dir / "day_labels.csv", labels.str());
}

}  // namespace shadeloss
