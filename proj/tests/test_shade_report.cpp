#include <doctest.h>

#include <cmath>
#include <numbers>
#include <fstream>
#include <limits>
#include <numeric>

#include "fixtures.hpp"
#include "shadeloss/errors.hpp"
#include "shadeloss/shade_report.hpp"
#include "shadeloss/table_io.hpp"

using namespace shadeloss;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

TransformedSignal uniform_signal(double scale, double day_length) {
    TransformedSignal ts;
    ts.y = Eigen::MatrixXd::Constant(kNumBins, 256, 0.5);
    ts.known_rows.assign(kNumBins, true);
    ts.scale = scale;
    ts.bin_members.assign(kNumBins, {});
    ts.bin_day_length.assign(kNumBins, day_length);
    ts.params_hash = "feedface";
    return ts;
}

Decomposition components(double x2_value, double x3_value) {
    Decomposition d;
    d.x2 = Eigen::MatrixXd::Constant(kNumBins, 256, x2_value);
    d.x3 = Eigen::MatrixXd::Constant(kNumBins, 256, x3_value);
    d.x1 = Eigen::MatrixXd::Zero(kNumBins, 256);
    d.z = Eigen::MatrixXd::Zero(kNumBins, 1);
    return d;
}

ShadeReport report_with(double yearly_loss, std::vector<double> per_bin) {
    ShadeReport r;
    r.yearly_loss = yearly_loss;
    r.per_bin_loss = std::move(per_bin);
    return r;
}

}  // namespace

TEST_CASE("no shade component means no loss") {
    const auto ts = uniform_signal(4.0, 10.0);
    const auto loss = shade_energy(components(0.5, 0.0), ts);
    REQUIRE(loss.size() == kNumBins);
    for (double v : loss) CHECK(v == 0.0);
    const auto report = build_report(components(0.5, 0.0), ts);
    CHECK(report.yearly_loss == 0.0);
    CHECK(report.loss_fraction == 0.0);
}

TEST_CASE("constant shade row integrates to depth times scale times day length") {
    const auto ts = uniform_signal(4.0, 10.0);
    auto dec = components(0.5, 0.0);
    dec.x3.row(12).setConstant(-0.1);
    const auto loss = shade_energy(dec, ts);
    CHECK(loss[12] == doctest::Approx(0.1 * 4.0 * 10.0));
    CHECK(loss[12] == doctest::Approx(4.0));
    CHECK(loss[11] == 0.0);
}

TEST_CASE("yearly totals weight bins by their day counts") {
    const auto counts = days_per_bin();
    CHECK(std::accumulate(counts.begin(), counts.end(), 0) == 365);
    for (int c : counts) CHECK(c > 0);
    CHECK(yearly_total(std::vector<double>(kNumBins, 1.0)) == doctest::Approx(365.0));
    std::vector<double> one_hot(kNumBins, 0.0);
    one_hot[30] = 2.0;
    CHECK(yearly_total(one_hot) == doctest::Approx(2.0 * counts[30]));
    CHECK_THROWS_AS(yearly_total(std::vector<double>(10, 1.0)), ReportError);
}

TEST_CASE("build_report keeps energy bookkeeping consistent") {
    const auto ts = uniform_signal(5.0, 12.0);
    const auto report = build_report(components(0.5, -0.05), ts);
    // per bin: 0.5 * 5 kW * 12 h = 30 kWh clear sky, 0.05 * 5 * 12 = 3 kWh shade
    for (double e : report.per_bin_energy) CHECK(e == doctest::Approx(30.0));
    for (double l : report.per_bin_loss) CHECK(l == doctest::Approx(3.0));
    CHECK(report.yearly_energy == doctest::Approx(365 * 30.0));
    CHECK(report.yearly_loss == doctest::Approx(365 * 3.0));
    CHECK(report.loss_fraction == doctest::Approx(10.0));
    CHECK(report.params_hash == "feedface");
    CHECK_FALSE(report.rmse.has_value());
}

TEST_CASE("missing bins are interpolated and flagged") {
    auto ts = uniform_signal(4.0, 10.0);
    ts.known_rows[20] = false;
    ts.bin_day_length[20] = kNaN;
    auto dec = components(0.5, 0.0);
    dec.x3.row(19).setConstant(-0.1);
    dec.x3.row(21).setConstant(-0.3);
    const auto report = build_report(dec, ts);
    CHECK(report.interpolated[20]);
    CHECK_FALSE(report.interpolated[19]);
    CHECK(report.per_bin_loss[20] == doctest::Approx(0.5 * (4.0 + 12.0)));
}

TEST_CASE("fill_missing_bins interpolates inside and holds at the ends") {
    const auto v = fill_missing_bins({kNaN, 1.0, kNaN, kNaN, 4.0, kNaN});
    CHECK(v == std::vector<double>{1.0, 1.0, 2.0, 3.0, 4.0, 4.0});
    CHECK_THROWS_AS(fill_missing_bins({kNaN, kNaN}), ReportError);
}

TEST_CASE("metrics of an estimate against itself vanish") {
    ShadeReport r = report_with(50.0, std::vector<double>(kNumBins, 0.3));
    r.yearly_energy = 900.0;
    const auto m = metrics(r, as_reference(r));
    CHECK(m.rmse == 0.0);
    CHECK(m.re == 0.0);
}

TEST_CASE("relative error is expressed against total yearly energy") {
    const ShadeReport est = report_with(100.0, std::vector<double>(kNumBins, 1.0));
    const ReferenceLosses ref{std::vector<double>(kNumBins, 1.0), 80.0, 1000.0};
    CHECK(metrics(est, ref).re == doctest::Approx(2.0));
}

TEST_CASE("rmse is symmetric and re flips sign when estimate and reference swap") {
    std::vector<double> a(kNumBins), b(kNumBins);
    for (int i = 0; i < kNumBins; ++i) {
        a[static_cast<std::size_t>(i)] = 0.1 * i;
        b[static_cast<std::size_t>(i)] = 0.2 * std::sin(i);
    }
    const ShadeReport ea = report_with(40.0, a), eb = report_with(25.0, b);
    const ReferenceLosses ra{a, 40.0, 500.0}, rb{b, 25.0, 500.0};
    const auto ab = metrics(ea, rb);
    const auto ba = metrics(eb, ra);
    CHECK(ab.rmse == doctest::Approx(ba.rmse));
    CHECK(ab.re == doctest::Approx(-ba.re));
    double ss = 0.0;
    for (int i = 0; i < kNumBins; ++i) ss += std::pow(a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)], 2);
    CHECK(ab.rmse == doctest::Approx(std::sqrt(ss / kNumBins)));
}

TEST_CASE("metrics reject mismatched bins and a zero reference energy") {
    const ShadeReport est = report_with(1.0, std::vector<double>(kNumBins, 0.0));
    CHECK_THROWS_AS(metrics(est, ReferenceLosses{std::vector<double>(10, 0.0), 1.0, 10.0}), MetricError);
    CHECK_THROWS_AS(metrics(est, ReferenceLosses{std::vector<double>(kNumBins, 0.0), 1.0, 0.0}), MetricError);
}

TEST_CASE("invert_transform maps a bin row back onto the day's grid") {
    auto ts = uniform_signal(4.0, 12.0);
    auto dec = components(0.0, 0.0);
    for (int i = 0; i < 256; ++i) {
        dec.x2(10, i) = std::sin(std::numbers::pi * i / 255.0);
        dec.x3(10, i) = -0.1 * dec.x2(10, i);
    }
    DayGeometry day;
    day.bin_index = 10;
    day.sunrise_idx = 72.0;
    day.sunset_idx = 216.0;
    const auto out = invert_transform(dec, ts, day, 288);
    CHECK(out.x2.size() == 288);
    CHECK(out.x2[10] == 0.0);
    CHECK(out.x2[144] == doctest::Approx(4.0).epsilon(1e-3));
    CHECK(out.x3.maxCoeff() <= 0.0);
    CHECK(out.x3[144] == doctest::Approx(-0.4).epsilon(1e-3));
    CHECK_FALSE(out.interpolated_bin);
    // the day's components sum to the scaled bin-average shape, not to any individual raw day
    for (int r = 72; r <= 216; ++r) {
        const double pos = (r - 72.0) / 144.0 * 255.0;
        const double expected = 4.0 * 0.9 * std::sin(std::numbers::pi * pos / 255.0);
        CHECK(out.x1[r] + out.x2[r] + out.x3[r] == doctest::Approx(expected).epsilon(2e-3));
    }
}

TEST_CASE("report, reference and loss table round trip through text") {
    const auto dir = testing::scratch_dir("report");
    ShadeReport r = build_report(components(0.4, -0.02), uniform_signal(5.0, 11.0));
    attach_metrics(r, ReferenceLosses{std::vector<double>(kNumBins, 0.5), 180.0, 9000.0});
    write_report(dir / "report.txt", r);
    const auto back = read_report(dir / "report.txt");
    CHECK(back.yearly_loss == r.yearly_loss);
    CHECK(back.per_bin_loss == r.per_bin_loss);
    CHECK(back.interpolated == r.interpolated);
    REQUIRE(back.re.has_value());
    CHECK(*back.re == *r.re);
    CHECK(back.params_hash == r.params_hash);

    const ReferenceLosses ref{std::vector<double>(kNumBins, 0.25), 91.25, 5000.0};
    write_reference(dir / "truth.txt", ref, "cafe");
    const auto ref_back = read_reference(dir / "truth.txt");
    CHECK(ref_back.per_bin_loss == ref.per_bin_loss);
    CHECK(ref_back.yearly_energy == ref.yearly_energy);

    write_loss_table(dir / "loss.csv", r.per_bin_loss, &ref.per_bin_loss, "cafe");
    std::ifstream in(dir / "loss.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "# params_hash=cafe");
    std::getline(in, line);
    CHECK(line == "bin,declination,loss_kWh,reference_kWh");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == kNumBins);
    std::filesystem::remove_all(dir);
}
