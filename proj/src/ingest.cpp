#include "shadeloss/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "shadeloss/errors.hpp"
#include "shadeloss/numeric.hpp"
#include "shadeloss/table_io.hpp"

namespace shadeloss {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
    return s;
}

double parse_power(std::string_view f) {
    f = trim(f);
    if (f.empty()) return kMissing;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v)) return kMissing;
    // Small negative readings (inverter standby draw) are not production.
    return std::max(v, 0.0);
}

}  // namespace

bool parse_timestamp(const std::string& field, LocalSeconds& out) {
    const std::string_view s = trim(field);
    // YYYY-MM-DD?HH:MM[:SS[.fff]]
    if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':')
        return false;
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    if (!parse_int(s.substr(0, 4), y) || !parse_int(s.substr(5, 2), mo) || !parse_int(s.substr(8, 2), d) ||
        !parse_int(s.substr(11, 2), h) || !parse_int(s.substr(14, 2), mi))
        return false;
    std::string_view rest = s.substr(16);
    if (!rest.empty()) {
        if (rest.size() < 3 || rest[0] != ':' || !parse_int(rest.substr(1, 2), sec)) return false;
        rest.remove_prefix(3);
        if (!rest.empty()) {
            if (rest[0] != '.') return false;
            for (char c : rest.substr(1))
                if (c < '0' || c > '9') return false;
        }
    }
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 59 || h < 0 || mi < 0 || sec < 0) return false;
    const auto days_since = sys_days{ymd}.time_since_epoch().count();
    out = static_cast<LocalSeconds>(days_since) * kSecondsPerDay + h * 3600 + mi * 60 + sec;
    return true;
}

std::string format_timestamp(LocalSeconds t) {
    using namespace std::chrono;
    const auto day_index = floor_div(t, kSecondsPerDay);
    const auto sod = t - day_index * kSecondsPerDay;
    const year_month_day ymd{sys_days{days{day_index}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(sod / 3600), static_cast<int>((sod / 60) % 60), static_cast<int>(sod % 60));
    return buf;
}

int modal_spacing(const std::vector<LocalSeconds>& timestamps) {
    std::map<std::int64_t, std::size_t> counts;
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        const auto d = timestamps[i] - timestamps[i - 1];
        if (d > 0) ++counts[d];
    }
    std::int64_t best = 0;
    std::size_t best_n = 0;
    for (const auto& [d, n] : counts) {
        if (n > best_n) {
            best = d;
            best_n = n;
        }
    }
    return static_cast<int>(best);
}

RawSeries parse_series(std::istream& text, const ParseOptions& opts) {
    struct Row {
        LocalSeconds t;
        double p;
    };
    std::vector<Row> rows;
    std::string line;
    std::size_t line_no = 0;
    bool first_content = true;
    while (std::getline(text, line)) {
        ++line_no;
        const auto trimmed = trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const bool header_allowed = first_content;
        first_content = false;
        const char sep = line.find('\t') != std::string::npos ? '\t' : ',';
        const auto cut = line.find(sep);
        if (cut == std::string::npos) {
            if (header_allowed) continue;
            throw InputError(line_no, "expected two columns");
        }
        const std::string ts = line.substr(0, cut);
        std::string_view power = std::string_view(line).substr(cut + 1);
        if (power.find(sep) != std::string_view::npos) throw InputError(line_no, "expected two columns");
        LocalSeconds t = 0;
        if (!parse_timestamp(ts, t)) {
            if (header_allowed) continue;
            throw InputError(line_no, "unparseable timestamp '" + ts + "'");
        }
        rows.push_back({t, parse_power(power)});
    }
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.t < b.t; });

    RawSeries s;
    for (const auto& r : rows) {
        if (!s.timestamps.empty() && s.timestamps.back() == r.t) {
            s.power.back() = r.p;  // duplicates: last one wins
            continue;
        }
        s.timestamps.push_back(r.t);
        s.power.push_back(r.p);
    }
    std::set<std::int64_t> days;
    for (auto t : s.timestamps) days.insert(floor_div(t, kSecondsPerDay));
    if (static_cast<int>(days.size()) < opts.min_distinct_days)
        throw InsufficientDataError("series covers " + std::to_string(days.size()) + " distinct days; at least " +
                                    std::to_string(opts.min_distinct_days) + " are required");
    s.interval = modal_spacing(s.timestamps);
    return s;
}

RawSeries parse_series(const std::string& text, const ParseOptions& opts) {
    std::istringstream is(text);
    return parse_series(is, opts);
}

void write_series(std::ostream& os, const RawSeries& s) {
    os << "timestamp,power_kw\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        os << format_timestamp(s.timestamps[i]) << ',' << format_double(s.power[i]) << '\n';
}

RawSeries regularize(const RawSeries& s) {
    if (s.size() < 2) throw ArgumentError("regularize needs at least two samples");
    const int interval = modal_spacing(s.timestamps);
    if (interval <= 0 || kSecondsPerDay % interval != 0)
        throw UnsupportedCadenceError("modal spacing of " + std::to_string(interval) +
                                      " s does not divide a day evenly");
    const LocalSeconds origin = floor_div(s.timestamps.front(), interval) * interval;
    auto slot = [&](LocalSeconds t) {
        // nearest grid instant; exact halves round up
        return floor_div(t - origin + interval / 2, interval);
    };
    const auto n = static_cast<std::size_t>(slot(s.timestamps.back()) + 1);
    RawSeries out;
    out.interval = interval;
    out.timestamps.resize(n);
    out.power.assign(n, kMissing);
    for (std::size_t i = 0; i < n; ++i) out.timestamps[i] = origin + static_cast<LocalSeconds>(i) * interval;
    for (std::size_t i = 0; i < s.size(); ++i) out.power[static_cast<std::size_t>(slot(s.timestamps[i]))] = s.power[i];
    return out;
}

DayMatrix embed(const RawSeries& s) {
    if (s.interval <= 0 || kSecondsPerDay % s.interval != 0 || s.timestamps.empty())
        throw ArgumentError("embed needs a non-empty regularized series");
    const int per_day = static_cast<int>(kSecondsPerDay / s.interval);
    const auto first_day = floor_div(s.timestamps.front(), kSecondsPerDay);
    const auto last_day = floor_div(s.timestamps.back(), kSecondsPerDay);
    const auto n_days = static_cast<Eigen::Index>(last_day - first_day + 1);

    DayMatrix m;
    m.interval = s.interval;
    m.start_date = std::chrono::sys_days{std::chrono::days{first_day}};
    m.values = Eigen::MatrixXd::Constant(per_day, n_days, kMissing);
    m.gap_mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(per_day, n_days, true);
    m.usable.assign(static_cast<std::size_t>(n_days), true);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto rel = s.timestamps[i] - first_day * kSecondsPerDay;
        const auto col = static_cast<Eigen::Index>(rel / kSecondsPerDay);
        const auto row = static_cast<Eigen::Index>((rel % kSecondsPerDay) / s.interval);
        if (is_missing(s.power[i])) continue;
        m.values(row, col) = s.power[i];
        m.gap_mask(row, col) = false;
    }
    return m;
}

DayMatrix fill_gaps(const DayMatrix& m, const SunTimes& sun) {
    const int rows = m.n_per_day();
    const int days = m.n_days();
    if (static_cast<int>(sun.sunrise.size()) != days || static_cast<int>(sun.sunset.size()) != days)
        throw ArgumentError("fill_gaps: sunrise/sunset vectors must have one entry per day");

    DayMatrix out = m;
    out.usable.resize(static_cast<std::size_t>(days), true);
    std::vector<int> valid;
    for (int d = 0; d < days; ++d) {
        valid.clear();
        for (int r = 0; r < rows; ++r)
            if (!m.gap_mask(r, d)) valid.push_back(r);

        const int first_day_row = std::max(0, static_cast<int>(std::ceil(sun.sunrise[d])));
        const int last_day_row = std::min(rows - 1, static_cast<int>(std::floor(sun.sunset[d])));
        int daytime = 0;
        int daytime_missing = 0;
        bool repairable = !valid.empty();

        for (int r = 0; r < rows; ++r) {
            const bool is_day = r >= first_day_row && r <= last_day_row;
            if (is_day) ++daytime;
            if (!m.gap_mask(r, d)) continue;
            out.values(r, d) = 0.0;
            if (!is_day) continue;
            ++daytime_missing;
            const auto after = std::upper_bound(valid.begin(), valid.end(), r);
            if (after == valid.begin() || after == valid.end()) {
                repairable = false;
                continue;
            }
            const int hi = *after;
            const int lo = *(after - 1);
            const double f = static_cast<double>(r - lo) / static_cast<double>(hi - lo);
            out.values(r, d) = m.values(lo, d) + f * (m.values(hi, d) - m.values(lo, d));
        }
        if (daytime > 0 && static_cast<double>(daytime_missing) > kMaxDaytimeMissingFraction * daytime)
            repairable = false;
        if (!repairable) out.usable[static_cast<std::size_t>(d)] = false;
    }
    return out;
}

}  // namespace shadeloss
