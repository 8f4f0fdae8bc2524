#include "shadeloss/shade_report.hpp"

#include <cmath>
#include <sstream>

#include "shadeloss/errors.hpp"
#include "shadeloss/numeric.hpp"
#include "shadeloss/solar_geometry.hpp"
#include "shadeloss/table_io.hpp"

namespace shadeloss {

namespace {

constexpr int kDaysPerYear = 365;

std::vector<double> per_bin_integral(const Eigen::MatrixXd& comp, const TransformedSignal& ts, double sign) {
    const double p = static_cast<double>(comp.cols());
    std::vector<double> out(static_cast<std::size_t>(comp.rows()), kMissing);
    for (Eigen::Index b = 0; b < comp.rows(); ++b) {
        if (!ts.known_rows[static_cast<std::size_t>(b)]) continue;
        const double len = ts.bin_day_length[static_cast<std::size_t>(b)];
        if (is_missing(len)) continue;
        out[static_cast<std::size_t>(b)] = sign * (len / p) * ts.scale * comp.row(b).sum();
    }
    return out;
}

std::vector<bool> missing_flags(const std::vector<double>& v) {
    std::vector<bool> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = is_missing(v[i]);
    return out;
}

// Row b of m, or a linear blend of the nearest known rows when b is not known.
Eigen::VectorXd known_row(const Eigen::MatrixXd& m, const std::vector<bool>& known, int b, bool& interpolated) {
    interpolated = !known[static_cast<std::size_t>(b)];
    if (!interpolated) return m.row(b).transpose();
    int lo = b - 1, hi = b + 1;
    while (lo >= 0 && !known[static_cast<std::size_t>(lo)]) --lo;
    while (hi < static_cast<int>(known.size()) && !known[static_cast<std::size_t>(hi)]) ++hi;
    const bool has_lo = lo >= 0;
    const bool has_hi = hi < static_cast<int>(known.size());
    if (!has_lo && !has_hi) throw ReportError("no known bins to interpolate from");
    if (!has_lo) return m.row(hi).transpose();
    if (!has_hi) return m.row(lo).transpose();
    const double f = static_cast<double>(b - lo) / static_cast<double>(hi - lo);
    return ((1.0 - f) * m.row(lo) + f * m.row(hi)).transpose();
}

}  // namespace

std::vector<int> days_per_bin() {
    std::vector<int> counts(kNumBins, 0);
    for (int n = 1; n <= kDaysPerYear; ++n) ++counts[static_cast<std::size_t>(bin_declination(declination(n)))];
    return counts;
}

double yearly_total(const std::vector<double>& per_bin) {
    if (per_bin.size() != static_cast<std::size_t>(kNumBins))
        throw ReportError("expected " + std::to_string(kNumBins) + " bins, got " + std::to_string(per_bin.size()));
    double total = 0.0;
    for (int n = 1; n <= kDaysPerYear; ++n) total += per_bin[static_cast<std::size_t>(bin_declination(declination(n)))];
    return total;
}

std::vector<double> fill_missing_bins(std::vector<double> v) {
    std::vector<std::size_t> known;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!is_missing(v[i])) known.push_back(i);
    if (known.empty()) throw ReportError("every declination bin is missing");
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!is_missing(v[i])) continue;
        const auto hi = std::lower_bound(known.begin(), known.end(), i);
        if (hi == known.begin()) {
            v[i] = v[known.front()];
        } else if (hi == known.end()) {
            v[i] = v[known.back()];
        } else {
            const std::size_t b = *hi, a = *(hi - 1);
            const double f = static_cast<double>(i - a) / static_cast<double>(b - a);
            v[i] = (1.0 - f) * v[a] + f * v[b];
        }
    }
    return v;
}

std::vector<double> shade_energy(const Decomposition& dec, const TransformedSignal& ts) {
    if (dec.x3.rows() != ts.rows() || dec.x3.cols() != ts.cols())
        throw ReportError("decomposition and signal shapes differ");
    return fill_missing_bins(per_bin_integral(dec.x3, ts, -1.0));
}

ShadeReport build_report(const Decomposition& dec, const TransformedSignal& ts) {
    if (dec.x3.rows() != ts.rows() || dec.x3.cols() != ts.cols())
        throw ReportError("decomposition and signal shapes differ");
    ShadeReport r;
    const auto raw_loss = per_bin_integral(dec.x3, ts, -1.0);
    r.interpolated = missing_flags(raw_loss);
    r.per_bin_loss = fill_missing_bins(raw_loss);
    for (double& v : r.per_bin_loss) v = std::max(0.0, v);
    r.per_bin_energy = fill_missing_bins(per_bin_integral(dec.x2, ts, 1.0));
    r.yearly_loss = yearly_total(r.per_bin_loss);
    r.yearly_energy = yearly_total(r.per_bin_energy);
    r.loss_fraction = r.yearly_energy > 0.0 ? 100.0 * r.yearly_loss / r.yearly_energy : 0.0;
    r.params_hash = ts.params_hash;
    return r;
}

Metrics metrics(const ShadeReport& estimate, const ReferenceLosses& reference) {
    if (estimate.per_bin_loss.size() != reference.per_bin_loss.size())
        throw MetricError("estimate has " + std::to_string(estimate.per_bin_loss.size()) + " bins, reference has " +
                          std::to_string(reference.per_bin_loss.size()));
    if (!(reference.yearly_energy > 0.0)) throw MetricError("reference yearly energy must be positive");
    Metrics m;
    double ss = 0.0;
    for (std::size_t b = 0; b < reference.per_bin_loss.size(); ++b) {
        const double d = estimate.per_bin_loss[b] - reference.per_bin_loss[b];
        ss += d * d;
    }
    m.rmse = reference.per_bin_loss.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(reference.per_bin_loss.size()));
    m.re = 100.0 * (estimate.yearly_loss - reference.yearly_loss) / reference.yearly_energy;
    return m;
}

ReferenceLosses as_reference(const ShadeReport& report) {
    return {report.per_bin_loss, report.yearly_loss, report.yearly_energy};
}

void attach_metrics(ShadeReport& report, const ReferenceLosses& reference) {
    const Metrics m = metrics(report, reference);
    report.rmse = m.rmse;
    report.re = m.re;
}

DayComponents invert_transform(const Decomposition& dec, const TransformedSignal& ts, const DayGeometry& day,
                               int n_per_day) {
    if (n_per_day < 1) throw ArgumentError("samples per day must be positive");
    DayComponents out;
    const int b = day.bin_index;
    if (b < 0 || b >= ts.rows()) throw ArgumentError("bin index out of range");
    bool flag = false;
    const Eigen::VectorXd r1 = known_row(dec.x1, ts.known_rows, b, flag);
    const Eigen::VectorXd r2 = known_row(dec.x2, ts.known_rows, b, flag);
    const Eigen::VectorXd r3 = known_row(dec.x3, ts.known_rows, b, flag);
    out.interpolated_bin = flag;
    out.x1 = Eigen::VectorXd::Zero(n_per_day);
    out.x2 = Eigen::VectorXd::Zero(n_per_day);
    out.x3 = Eigen::VectorXd::Zero(n_per_day);
    const double span = day.sunset_idx - day.sunrise_idx;
    if (!(span > 0.0)) return out;
    const double last = static_cast<double>(ts.cols() - 1);
    for (int r = 0; r < n_per_day; ++r) {
        const double rr = static_cast<double>(r);
        if (rr < day.sunrise_idx || rr > day.sunset_idx) continue;
        const double pos = (rr - day.sunrise_idx) / span * last;
        out.x1[r] = ts.scale * interp_at(std::span<const double>(r1.data(), r1.size()), pos);
        out.x2[r] = ts.scale * interp_at(std::span<const double>(r2.data(), r2.size()), pos);
        out.x3[r] = ts.scale * interp_at(std::span<const double>(r3.data(), r3.size()), pos);
    }
    return out;
}

namespace {

std::string join_flags(const std::vector<bool>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += v[i] ? '1' : '0';
    }
    return s;
}

}  // namespace

void write_report(const std::filesystem::path& path, const ShadeReport& report) {
    KeyValueDoc doc;
    doc.set("format", std::string("shadeloss-report-v1"));
    doc.set("params_hash", report.params_hash);
    doc.set("yearly_loss_kwh", report.yearly_loss);
    doc.set("yearly_energy_kwh", report.yearly_energy);
    doc.set("loss_fraction_pct", report.loss_fraction);
    if (report.rmse) doc.set("rmse_kwh", *report.rmse);
    if (report.re) doc.set("re_pct", *report.re);
    doc.set("per_bin_loss_kwh", join_doubles(report.per_bin_loss));
    doc.set("per_bin_energy_kwh", join_doubles(report.per_bin_energy));
    doc.set("interpolated_bins", join_flags(report.interpolated));
    std::ostringstream os;
    doc.write(os);
    write_text_file(path, os.str());
}

ShadeReport read_report(const std::filesystem::path& path) {
    std::istringstream is(read_text_file(path));
    const KeyValueDoc doc = KeyValueDoc::read(is);
    ShadeReport r;
    r.params_hash = doc.has("params_hash") ? doc.get("params_hash") : "";
    r.yearly_loss = doc.get_double("yearly_loss_kwh");
    r.yearly_energy = doc.get_double("yearly_energy_kwh");
    r.loss_fraction = doc.get_double("loss_fraction_pct");
    if (doc.has("rmse_kwh")) r.rmse = doc.get_double("rmse_kwh");
    if (doc.has("re_pct")) r.re = doc.get_double("re_pct");
    r.per_bin_loss = split_doubles(doc.get("per_bin_loss_kwh"));
    r.per_bin_energy = split_doubles(doc.get("per_bin_energy_kwh"));
    r.interpolated.assign(r.per_bin_loss.size(), false);
    if (doc.has("interpolated_bins")) {
        const auto flags = split_doubles(doc.get("interpolated_bins"));
        for (std::size_t i = 0; i < flags.size() && i < r.interpolated.size(); ++i) r.interpolated[i] = flags[i] != 0.0;
    }
    return r;
}

void write_loss_table(const std::filesystem::path& path, const std::vector<double>& loss,
                      const std::vector<double>* reference, const std::string& params_hash) {
    if (reference && reference->size() != loss.size()) throw MetricError("reference and estimate bin counts differ");
    std::ostringstream os;
    if (!params_hash.empty()) os << "# params_hash=" << params_hash << '\n';
    os << "bin,declination,loss_kWh,reference_kWh\n";
    for (std::size_t b = 0; b < loss.size(); ++b) {
        os << b << ',' << format_double(bin_center(static_cast<int>(b))) << ',' << format_double(loss[b]) << ',';
        if (reference) os << format_double((*reference)[b]);
        os << '\n';
    }
    write_text_file(path, os.str());
}

void write_reference(const std::filesystem::path& path, const ReferenceLosses& ref, const std::string& params_hash) {
    KeyValueDoc doc;
    doc.set("format", std::string("shadeloss-reference-v1"));
    doc.set("params_hash", params_hash);
    doc.set("yearly_loss_kwh", ref.yearly_loss);
    doc.set("yearly_energy_kwh", ref.yearly_energy);
    doc.set("per_bin_loss_kwh", join_doubles(ref.per_bin_loss));
    std::ostringstream os;
    doc.write(os);
    write_text_file(path, os.str());
}

ReferenceLosses read_reference(const std::filesystem::path& path) {
    std::istringstream is(read_text_file(path));
    const KeyValueDoc doc = KeyValueDoc::read(is);
    ReferenceLosses r;
    r.yearly_loss = doc.get_double("yearly_loss_kwh");
    r.yearly_energy = doc.get_double("yearly_energy_kwh");
    r.per_bin_loss = split_doubles(doc.get("per_bin_loss_kwh"));
    return r;
}

void write_heatmaps(const std::filesystem::path& dir, const TransformedSignal& ts, const Decomposition& dec,
                    const std::string& params_hash) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
    const std::pair<const char*, const Eigen::MatrixXd*> mats[] = {
        {"y.csv", &ts.y}, {"x1.csv", &dec.x1}, {"x2.csv", &dec.x2}, {"x3.csv", &dec.x3}};
    for (const auto& [name, m] : mats) {
        std::ostringstream os;
        write_matrix(os, *m, "params_hash=" + params_hash);
        write_text_file(dir / name, os.str());
    }
}

}  // namespace shadeloss
