#include "shadeloss/numeric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

namespace shadeloss {

double percentile(std::span<const double> values, double q) {
    std::vector<double> v;
    v.reserve(values.size());
    for (double x : values) {
        if (!is_missing(x)) v.push_back(x);
    }
    if (v.empty()) return kMissing;
    std::sort(v.begin(), v.end());
    const double rank = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

double interp_at(std::span<const double> column, double pos) {
    if (column.empty()) return 0.0;
    const double last = static_cast<double>(column.size() - 1);
    pos = std::clamp(pos, 0.0, last);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    if (i + 1 >= column.size()) return column.back();
    const double f = pos - static_cast<double>(i);
    return column[i] + f * (column[i + 1] - column[i]);
}

Eigen::VectorXd resample_span(std::span<const double> column, double from, double to, int n) {
    Eigen::VectorXd out(n);
    for (int j = 0; j < n; ++j) {
        const double pos = from + (to - from) * static_cast<double>(j) / static_cast<double>(n - 1);
        out[j] = interp_at(column, pos);
    }
    return out;
}

Fingerprint& Fingerprint::add(std::string_view bytes) {
    for (unsigned char c : bytes) {
        h_ ^= c;
        h_ *= 0x100000001b3ULL;
    }
    return *this;
}

Fingerprint& Fingerprint::add(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    return add(std::string_view(buf, 8));
}

Fingerprint& Fingerprint::add(std::int64_t v) {
    return add(std::bit_cast<double>(v));
}

Fingerprint& Fingerprint::add(const Eigen::MatrixXd& m) {
    add(static_cast<std::int64_t>(m.rows()));
    add(static_cast<std::int64_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) add(m(i, j));
    return *this;
}

std::string Fingerprint::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h_));
    return buf;
}

}  // namespace shadeloss
