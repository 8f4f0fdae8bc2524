#include "shadeloss/table_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "shadeloss/errors.hpp"
#include "shadeloss/numeric.hpp"

namespace shadeloss {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_field(const std::string& raw) {
    const std::string f = trim(raw);
    if (f.empty()) return kMissing;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc{} || ptr != f.data() + f.size()) return kMissing;
    return v;
}

}  // namespace

std::string format_double(double v) {
    if (is_missing(v)) return {};
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_matrix(std::ostream& os, const Eigen::MatrixXd& m, std::string_view comment) {
    if (!comment.empty()) os << "# " << comment << '\n';
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << format_double(m(i, j));
        }
        os << '\n';
    }
}

Eigen::MatrixXd read_matrix(std::istream& is) {
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        const auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) row.push_back(parse_field(field));
        if (!line.empty() && line.back() == ',') row.push_back(kMissing);
        if (!rows.empty() && row.size() != rows.front().size())
            throw InputError(rows.size() + 1, "inconsistent column count in numeric block");
        rows.push_back(std::move(row));
    }
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = rows.empty() ? Eigen::Index{0} : static_cast<Eigen::Index>(rows.front().size());
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rows[i][j];
    return m;
}

void KeyValueDoc::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void KeyValueDoc::set(const std::string& key, double value) { set(key, format_double(value)); }

void KeyValueDoc::set(const std::string& key, long long value) { set(key, std::to_string(value)); }

bool KeyValueDoc::has(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return true;
    return false;
}

const std::string& KeyValueDoc::get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    throw InvalidDataError("missing key '" + key + "'");
}

double KeyValueDoc::get_double(const std::string& key) const {
    const double v = parse_field(get(key));
    if (is_missing(v)) throw InvalidDataError("key '" + key + "' is not numeric");
    return v;
}

long long KeyValueDoc::get_int(const std::string& key) const {
    return static_cast<long long>(get_double(key));
}

void KeyValueDoc::write(std::ostream& os) const {
    for (const auto& [k, v] : entries_) os << k << '=' << v << '\n';
}

KeyValueDoc KeyValueDoc::read(std::istream& is) {
    KeyValueDoc doc;
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw InputError(n, "expected key=value");
        doc.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return doc;
}

std::string join_doubles(const std::vector<double>& v, char sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += format_double(v[i]);
    }
    return out;
}

std::vector<double> split_doubles(const std::string& s, char sep) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, sep)) {
        if (trim(field).empty()) continue;
        const double v = parse_field(field);
        if (is_missing(v)) throw InvalidDataError("not a number: '" + field + "'");
        out.push_back(v);
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os << contents;
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

}  // namespace shadeloss
