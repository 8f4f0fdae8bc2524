#include <doctest.h>

#include <chrono>
#include <cmath>
#include <sstream>

#include "shadeloss/errors.hpp"
#include "shadeloss/ingest.hpp"
#include "shadeloss/numeric.hpp"

using namespace shadeloss;

namespace {

LocalSeconds ts(const std::string& s) {
    LocalSeconds t = 0;
    REQUIRE(parse_timestamp(s, t));
    return t;
}

ParseOptions any_length() {
    ParseOptions o;
    o.min_distinct_days = 1;
    return o;
}

RawSeries uniform_series(LocalSeconds start, int interval, int n, double value = 1.0) {
    RawSeries s;
    s.interval = interval;
    for (int i = 0; i < n; ++i) {
        s.timestamps.push_back(start + static_cast<LocalSeconds>(i) * interval);
        s.power.push_back(value);
    }
    return s;
}

}  // namespace

TEST_CASE("parse_series reads two samples at five-minute spacing") {
    const auto s = parse_series(std::string("2019-01-01T08:00,1.2\n2019-01-01T08:05,1.3"), any_length());
    REQUIRE(s.size() == 2);
    CHECK(s.interval == 300);
    CHECK(s.timestamps[1] - s.timestamps[0] == 300);
    CHECK(s.power[0] == 1.2);
    CHECK(s.power[1] == 1.3);
}

TEST_CASE("parse_series maps NaN to the missing marker") {
    const auto s = parse_series(std::string("2019-01-01T08:05,1.0\n2019-01-01T08:10,NaN"), any_length());
    REQUIRE(s.size() == 2);
    CHECK(is_missing(s.power[1]));
    CHECK_FALSE(is_missing(s.power[0]));
}

TEST_CASE("parse_series skips comments and a header, accepts tabs") {
    const auto s = parse_series(std::string("# produced elsewhere\ntimestamp\tpower\n2019-01-01 08:00\t2\n"
                                            "2019-01-01 08:15:00\t3\n"),
                                any_length());
    REQUIRE(s.size() == 2);
    CHECK(s.power[1] == 3.0);
    CHECK(s.interval == 900);
}

TEST_CASE("parse_series reports the line of a malformed row") {
    const std::string text = "2019-01-01T08:00,1\n2019-01-01T08:05,1\nnot-a-time,1\n";
    try {
        parse_series(text, any_length());
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_series(std::string("2019-01-01T08:00,1,2\n"), any_length()), InputError);
}

TEST_CASE("parse_series rejects 30 days of data") {
    std::ostringstream os;
    write_series(os, uniform_series(ts("2019-03-01T00:00"), 3600, 30 * 24));
    CHECK_THROWS_AS(parse_series(os.str()), InsufficientDataError);
}

TEST_CASE("write_series and parse_series round trip") {
    auto s = uniform_series(ts("2020-02-28T10:00"), 300, 700, 2.5);
    s.power[3] = kMissing;
    s.power[4] = 0.1 + 0.2;
    std::ostringstream os;
    write_series(os, s);
    const auto back = parse_series(os.str(), any_length());
    REQUIRE(back.size() == s.size());
    CHECK(back.timestamps == s.timestamps);
    CHECK(is_missing(back.power[3]));
    CHECK(back.power[4] == s.power[4]);
}

TEST_CASE("format_timestamp inverts parse_timestamp across a leap day") {
    for (const char* text : {"2020-02-29T23:55:00", "1999-12-31T00:00:00", "2021-07-04T12:34:56"})
        CHECK(format_timestamp(ts(text)) == text);
    LocalSeconds t = 0;
    CHECK_FALSE(parse_timestamp("2019-13-01T00:00", t));
    CHECK_FALSE(parse_timestamp("2019-01-01", t));
}

TEST_CASE("regularize inserts a missing slot for a skipped instant") {
    RawSeries s;
    const LocalSeconds t0 = ts("2019-05-01T00:00");
    s.timestamps = {t0, t0 + 300, t0 + 600, t0 + 1200};
    s.power = {1, 2, 3, 5};
    const auto r = regularize(s);
    REQUIRE(r.size() == 5);
    CHECK(r.interval == 300);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r.timestamps[i] == t0 + static_cast<LocalSeconds>(i) * 300);
    CHECK(is_missing(r.power[3]));
    CHECK(r.power[4] == 5.0);
}

TEST_CASE("regularize leaves a uniform series unchanged") {
    const auto s = uniform_series(ts("2019-05-01T00:00"), 300, 500, 1.5);
    const auto r = regularize(s);
    CHECK(r.timestamps == s.timestamps);
    CHECK(r.power == s.power);
}

TEST_CASE("regularize rejects a cadence that does not divide a day") {
    CHECK_THROWS_AS(regularize(uniform_series(ts("2019-05-01T00:00"), 420, 50)), UnsupportedCadenceError);
}

TEST_CASE("embed lays out two full days as 288 x 2") {
    const auto m = embed(uniform_series(ts("2019-05-01T00:00"), 300, 2 * 288));
    CHECK(m.n_per_day() == 288);
    CHECK(m.n_days() == 2);
    CHECK_FALSE(m.gap_mask.any());
}

TEST_CASE("embed pads the morning of a series that starts at noon") {
    const auto m = embed(uniform_series(ts("2019-05-01T12:00"), 300, 288));
    REQUIRE(m.n_days() == 2);
    for (int r = 0; r < 144; ++r) CHECK(m.gap_mask(r, 0));
    for (int r = 144; r < 288; ++r) CHECK_FALSE(m.gap_mask(r, 0));
    CHECK(m.gap_mask(144, 1));
}

TEST_CASE("embed of three years of five-minute data counts calendar days") {
    using namespace std::chrono;
    const sys_days first = year{2019} / 1 / 1;
    const sys_days last = year{2021} / 12 / 31;
    const int expected_days = (last - first).count() + 1;
    const auto m = embed(uniform_series(ts("2019-01-01T00:00"), 300, expected_days * 288));
    CHECK(m.n_per_day() == 288);
    CHECK(m.n_days() == expected_days);
    CHECK(m.n_days() == 1096);
    CHECK(m.start_date == first);
}

TEST_CASE("fill_gaps zero-fills night and interpolates daytime gaps") {
    auto s = uniform_series(ts("2019-05-01T00:00"), 3600, 24, 0.0);
    for (int h = 8; h <= 16; ++h) s.power[static_cast<std::size_t>(h)] = 2.0 * (h - 7);
    s.power[2] = kMissing;                            // night
    s.power[10] = kMissing;                           // between 4.0 and 8.0
    s.power[9] = 2.0;
    s.power[11] = 4.0;
    const auto m = embed(s);
    SunTimes sun{{6.0}, {18.0}};
    const auto f = fill_gaps(m, sun);
    CHECK(f.values(2, 0) == 0.0);
    CHECK(f.values(10, 0) == doctest::Approx(3.0));
    CHECK(f.usable[0]);
    CHECK(f.gap_mask(10, 0));
}

TEST_CASE("fill_gaps marks a fully missing day unusable") {
    auto s = uniform_series(ts("2019-05-01T00:00"), 3600, 72, 1.0);
    for (int h = 24; h < 48; ++h) s.power[static_cast<std::size_t>(h)] = kMissing;
    const auto m = embed(s);
    SunTimes sun{{6.0, 6.0, 6.0}, {18.0, 18.0, 18.0}};
    const auto f = fill_gaps(m, sun);
    CHECK(f.usable[0]);
    CHECK_FALSE(f.usable[1]);
    CHECK(f.usable[2]);
    for (int r = 0; r < 24; ++r) CHECK_FALSE(std::isnan(f.values(r, 1)));
}

TEST_CASE("modal_spacing prefers the smaller spacing on ties") {
    CHECK(modal_spacing({0, 300, 600, 1200, 1800}) == 300);
    CHECK(modal_spacing({0, 60, 120, 420, 720}) == 60);
}
