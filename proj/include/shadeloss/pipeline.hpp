#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "shadeloss/corpus.hpp"
#include "shadeloss/preprocess.hpp"
#include "shadeloss/sd_engine.hpp"
#include "shadeloss/shade_report.hpp"
#include "shadeloss/synth.hpp"

namespace shadeloss {

struct AnalyzeOptions {
    PrepConfig prep;
    SdParams sd;
};

struct Analysis {
    Preparation prep;
    Decomposition dec;
    ShadeReport report;
    std::string params_hash;  ///< data, preparation, solver, and corpus combined
};

/// prepare -> build_problem -> solve -> build_report
Analysis analyze(const RawSeries& series, const ClearSkyCorpus& corpus, const AnalyzeOptions& opts = {});

/// Writes transformed/, decomposition/, heatmaps/, report.txt and loss_table.csv under `dir`.
void write_analysis(const std::filesystem::path& dir, const Analysis& a, const SdParams& params);

std::string corpus_fingerprint(const ClearSkyCorpus& corpus);

struct SynthConfig {
    SystemGeometry geometry;
    Obstruction obstruction;
    int years = 2;
    int interval = 300;  ///< seconds
    ClearSkyParams clearsky;
    double cloud_prob = 0.35;
    std::uint64_t seed = 42;

    std::string fingerprint() const;
};

struct SynthOutput {
    RawSeries series;  ///< shaded, weathered
    GroundTruth truth;
    std::string params_hash;
};

/// simulate_system -> inject_shade -> inject_weather -> ground_truth
SynthOutput synthesize(const SynthConfig& cfg);

/// Writes series.csv, ground_truth.txt, ground_truth.csv and day_labels.csv under `dir`.
void write_synth(const std::filesystem::path& dir, const SynthOutput& out);

}  // namespace shadeloss
