#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <filesystem>
#include <random>

#include "shadeloss/errors.hpp"
#include "shadeloss/numeric.hpp"
#include "shadeloss/preprocess.hpp"
#include "shadeloss/synth.hpp"

using namespace shadeloss;

namespace {

DayMatrix single_day(int rows, int interval) {
    DayMatrix m;
    m.interval = interval;
    m.values = Eigen::MatrixXd::Zero(rows, 1);
    m.gap_mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows, 1, false);
    m.usable = {true};
    return m;
}

DayGeometry daytime(double sunrise, double sunset, int interval, int bin = 23) {
    DayGeometry g;
    g.sunrise_idx = sunrise;
    g.sunset_idx = sunset;
    g.day_length = (sunset - sunrise) * interval / 3600.0;
    g.bin_index = bin;
    return g;
}

DayProfile flat_profile(double value, int day, int bin, bool clear = true) {
    DayProfile p;
    p.values = Eigen::VectorXd::Constant(kProfileSamples, value);
    p.day_index = day;
    p.bin_index = bin;
    p.clear_flag = clear;
    return p;
}

// One clear year at the default geometry, embedded and gap-filled.
struct ClearYear {
    DayMatrix m;
    std::vector<DayGeometry> geo;
};

const ClearYear& clear_year() {
    static const ClearYear y = [] {
        const auto sim = simulate_system(SystemGeometry{}, 1, 300);
        ClearYear out;
        const auto raw = embed(regularize(sim.series));
        const auto sun = detect_sunrise_sunset(raw);
        out.m = fill_gaps(raw, sun);
        out.geo = day_geometry(out.m, sun);
        return out;
    }();
    return y;
}

}  // namespace

TEST_CASE("clear-day detection accepts a clear day and rejects a dim noisy one") {
    ClearYear y = clear_year();
    const int day = 120;
    std::mt19937_64 rng(7);
    for (int r = 0; r < y.m.n_per_day(); ++r) y.m.values(r, day) *= 0.5 * (1.0 + 0.4 * (uniform01(rng) - 0.5));
    const auto clear = detect_clear_days(y.m, y.geo);
    CHECK(clear[day - 1]);
    CHECK(clear[day + 1]);
    CHECK_FALSE(clear[day]);
}

TEST_CASE("clear-day detection recovers injected cloudy days") {
    const auto sim = simulate_system(SystemGeometry{}, 2, 300);
    const auto weather = inject_weather(sim.series, 0.35, 42);
    const auto raw = embed(regularize(weather.series));
    const auto sun = detect_sunrise_sunset(raw);
    const auto m = fill_gaps(raw, sun);
    const auto geo = day_geometry(m, sun);
    const auto clear = detect_clear_days(m, geo);
    REQUIRE(clear.size() == weather.cloudy.size());
    int cloudy = 0, caught = 0;
    for (std::size_t d = 0; d < clear.size(); ++d) {
        if (!weather.cloudy[d]) continue;
        ++cloudy;
        caught += !clear[d];
    }
    REQUIRE(cloudy > 100);
    CHECK(static_cast<double>(caught) / cloudy >= 0.9);
}

TEST_CASE("mask_resample of a constant day is flat with zero endpoints") {
    auto m = single_day(288, 300);
    for (int r = 72; r <= 216; ++r) m.values(r, 0) = 1.0;
    const auto out = mask_resample(m, {daytime(72, 216, 300)}, {true});
    REQUIRE(out.size() == 1);
    const auto& v = out[0].values;
    REQUIRE(v.size() == kProfileSamples);
    CHECK(v[0] == 0.0);
    CHECK(v[kProfileSamples - 1] == 0.0);
    for (int i = 1; i < kProfileSamples - 1; ++i) CHECK(v[i] == doctest::Approx(1.0));
    CHECK(out[0].clear_flag);
}

TEST_CASE("mask_resample preserves a linear ramp") {
    auto m = single_day(288, 300);
    for (int r = 72; r <= 216; ++r) m.values(r, 0) = 0.01 * (r - 72);
    const auto out = mask_resample(m, {daytime(72, 216, 300)}, {});
    REQUIRE(out.size() == 1);
    const auto& v = out[0].values;
    for (int i = 1; i < kProfileSamples - 1; ++i) CHECK(v[i] == doctest::Approx(0.01 * 144.0 * i / 255.0));
    CHECK_FALSE(out[0].clear_flag);
}

TEST_CASE("mask_resample drops days shorter than four hours") {
    auto m = single_day(288, 300);
    for (int r = 100; r <= 140; ++r) m.values(r, 0) = 1.0;
    CHECK(mask_resample(m, {daytime(100, 140, 300)}, {true}).empty());
}

TEST_CASE("normalize divides by the 98th percentile") {
    std::vector<DayProfile> ps{flat_profile(4.0, 0, 10), flat_profile(4.0, 1, 11)};
    CHECK(normalize(ps) == doctest::Approx(4.0));
    for (const auto& p : ps) CHECK((p.values.array() == 1.0).all());
}

TEST_CASE("normalize is robust to a single outlier") {
    std::vector<DayProfile> ps;
    for (int d = 0; d < 20; ++d) {
        DayProfile p = flat_profile(0.0, d, 20);
        for (int i = 0; i < kProfileSamples; ++i) p.values[i] = 4.0 * std::sin(std::numbers::pi * i / (kProfileSamples - 1));
        ps.push_back(p);
    }
    auto base = ps;
    const double s0 = normalize(base);
    ps[3].values[128] *= 100.0;
    const double s1 = normalize(ps);
    CHECK(std::abs(s1 - s0) / s0 <= 0.02);
    CHECK(ps[3].values.maxCoeff() <= PrepConfig{}.clip_max);
}

TEST_CASE("normalize rejects all-zero data") {
    std::vector<DayProfile> ps{flat_profile(0.0, 0, 1)};
    CHECK_THROWS_AS(normalize(ps), InvalidDataError);
    std::vector<DayProfile> none;
    CHECK_THROWS_AS(normalize(none), InvalidDataError);
}

TEST_CASE("bin_average takes means and leaves empty bins missing") {
    PrepConfig cfg;
    cfg.min_known_rows = 2;
    std::vector<DayGeometry> geo(4, daytime(0, 120, 300));
    std::vector<DayProfile> ps{flat_profile(0.5, 0, 3), flat_profile(0.5, 1, 3), flat_profile(0.2, 2, 7),
                               flat_profile(0.9, 3, 7, false)};
    const auto ts = bin_average(ps, geo, cfg);
    CHECK(ts.rows() == kNumBins);
    CHECK(ts.cols() == kProfileSamples);
    CHECK((ts.y.row(3).array() == 0.5).all());
    CHECK((ts.y.row(7).array() == 0.2).all());
    CHECK(ts.known_count() == 2);
    CHECK_FALSE(ts.known_rows[0]);
    CHECK(std::isnan(ts.y(0, 5)));
    CHECK(ts.bin_members[3] == std::vector<int>{0, 1});
    CHECK(ts.bin_day_length[3] == doctest::Approx(10.0));
    CHECK(std::isnan(ts.bin_day_length[0]));
}

TEST_CASE("bin_average requires enough known bins") {
    std::vector<DayGeometry> geo(1, daytime(0, 120, 300));
    CHECK_THROWS_AS(bin_average({flat_profile(0.5, 0, 3)}, geo), InsufficientDataError);
}

TEST_CASE("a clear synthetic year fills every declination bin") {
    const auto sim = simulate_system(SystemGeometry{}, 1, 300);
    const auto prep = prepare(sim.series);
    const auto& ts = prep.signal;
    CHECK(ts.rows() == 47);
    CHECK(ts.cols() == 256);
    CHECK(ts.known_count() == 47);
    CHECK_FALSE(ts.y.hasNaN());
    CHECK(ts.y.minCoeff() >= 0.0);
    CHECK(ts.y.maxCoeff() <= PrepConfig{}.clip_max);
    CHECK((ts.y.col(0).array() == 0.0).all());
    CHECK((ts.y.col(255).array() == 0.0).all());
    // the 98th percentile of daytime samples sits just under the clear-sky peak
    const double peak = *std::max_element(sim.series.power.begin(), sim.series.power.end());
    CHECK(ts.scale <= peak);
    CHECK(ts.scale > 0.8 * peak);
}

TEST_CASE("prepare is deterministic and its hash tracks the data") {
    auto sim = simulate_system(SystemGeometry{}, 1, 300);
    const auto a = prepare(sim.series);
    const auto b = prepare(sim.series);
    CHECK(a.signal.params_hash == b.signal.params_hash);
    CHECK(a.signal.y.cwiseEqual(b.signal.y).count() + a.signal.y.array().isNaN().count() == a.signal.y.size());
    sim.series.power[5000] += 0.01;
    CHECK(prepare(sim.series).signal.params_hash != a.signal.params_hash);
}

TEST_CASE("transformed signal round trips through text") {
    PrepConfig cfg;
    cfg.min_known_rows = 1;
    std::vector<DayGeometry> geo(2, daytime(0, 130, 300));
    auto ts = bin_average({flat_profile(0.1 + 0.2, 0, 5), flat_profile(0.7, 1, 9)}, geo, cfg);
    ts.scale = 4.25;
    const auto dir = std::filesystem::temp_directory_path() / "shadeloss_test_transformed";
    std::filesystem::create_directories(dir);
    write_transformed(dir / "y.csv", dir / "meta.txt", ts);
    const auto back = read_transformed(dir / "y.csv", dir / "meta.txt");
    CHECK(back.known_rows == ts.known_rows);
    CHECK(back.scale == ts.scale);
    CHECK(back.params_hash == ts.params_hash);
    CHECK(back.bin_members == ts.bin_members);
    CHECK(back.y(5, 10) == ts.y(5, 10));
    CHECK(std::isnan(back.y(0, 0)));
    std::filesystem::remove_all(dir);
}
