#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace shadeloss {

/// Writes a matrix as comma-separated rows. NaN entries are written as empty fields.
/// A non-empty comment is written first as a '#' line.
void write_matrix(std::ostream& os, const Eigen::MatrixXd& m, std::string_view comment = {});
/// Reads a comma-separated numeric block; empty fields become NaN and '#' lines are skipped.
/// All rows must share a width.
Eigen::MatrixXd read_matrix(std::istream& is);

/// Ordered `key=value` document. Lines starting with '#' are comments.
class KeyValueDoc {
public:
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set(const std::string& key, long long value);
    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    void write(std::ostream& os) const;
    static KeyValueDoc read(std::istream& is);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// Shortest round-trip decimal rendering of a double.
std::string format_double(double v);

std::string join_doubles(const std::vector<double>& v, char sep = ',');
std::vector<double> split_doubles(const std::string& s, char sep = ',');

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace shadeloss
