#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "shadeloss/preprocess.hpp"
#include "shadeloss/sd_engine.hpp"

namespace shadeloss {

struct ShadeReport {
    std::vector<double> per_bin_loss;    ///< kWh per representative day, >= 0
    std::vector<double> per_bin_energy;  ///< clear-sky kWh per representative day (from x2)
    std::vector<bool> interpolated;      ///< bin had no data; values filled from neighbors
    double yearly_loss = 0.0;            ///< kWh/yr
    double yearly_energy = 0.0;          ///< kWh/yr
    double loss_fraction = 0.0;          ///< percent
    std::optional<double> rmse;          ///< kWh
    std::optional<double> re;            ///< percent, estimate minus reference
    std::string params_hash;
};

/// Per-bin reference losses with yearly totals, e.g. simulator ground truth.
struct ReferenceLosses {
    std::vector<double> per_bin_loss;
    double yearly_loss = 0.0;
    double yearly_energy = 0.0;
};

struct Metrics {
    double rmse = 0.0;
    double re = 0.0;
};

/// Number of days n = 1..365 whose declination falls in each bin.
std::vector<int> days_per_bin();

/// sum over n = 1..365 of per_bin[bin(declination(n))]
double yearly_total(const std::vector<double>& per_bin);

/// Fills NaN entries by linear interpolation between the nearest finite neighbors (constant beyond the ends).
/// Throws ReportError when every entry is NaN.
std::vector<double> fill_missing_bins(std::vector<double> per_bin);

/// -(day_length/256) * scale * sum_i x3[b, i] per bin, missing bins interpolated.
std::vector<double> shade_energy(const Decomposition& dec, const TransformedSignal& ts);

ShadeReport build_report(const Decomposition& dec, const TransformedSignal& ts);

/// rmse over bins; re = 100 (yearly_loss - reference yearly_loss) / reference yearly_energy.
Metrics metrics(const ShadeReport& estimate, const ReferenceLosses& reference);
ReferenceLosses as_reference(const ShadeReport& report);

/// Attaches rmse and re to a report.
void attach_metrics(ShadeReport& report, const ReferenceLosses& reference);

/// One day's components mapped back to kW on the day's original sample grid.
struct DayComponents {
    Eigen::VectorXd x1, x2, x3;
    bool interpolated_bin = false;
};

DayComponents invert_transform(const Decomposition& dec, const TransformedSignal& ts, const DayGeometry& day,
                               int n_per_day);

/// key=value report; per-bin vectors are comma lists.
void write_report(const std::filesystem::path& path, const ShadeReport& report);
ShadeReport read_report(const std::filesystem::path& path);

/// Columns: bin, declination, loss_kWh, reference_kWh (empty without a reference).
void write_loss_table(const std::filesystem::path& path, const std::vector<double>& loss,
                      const std::vector<double>* reference = nullptr, const std::string& params_hash = {});

void write_reference(const std::filesystem::path& path, const ReferenceLosses& ref, const std::string& params_hash);
ReferenceLosses read_reference(const std::filesystem::path& path);

/// y, x1, x2, x3 in transformed space as y.csv ... x3.csv.
void write_heatmaps(const std::filesystem::path& dir, const TransformedSignal& ts, const Decomposition& dec,
                    const std::string& params_hash);

}  // namespace shadeloss
