#pragma once

// CSV files: first line "# format=1", then a header row, then numeric rows.
// Numbers are written in shortest round-trip form, so a reload is exact.

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <vector>

namespace beamobs::csv {

inline constexpr int kFormatVersion = 1;

struct Table {
    std::vector<std::string> header;
    Eigen::MatrixXd data;
};

void write(const std::filesystem::path& path, const Table& table);

/// Throws Error(Io) on a missing file, a format-version mismatch or a ragged row.
Table read(const std::filesystem::path& path);

/// header = prefix_1 .. prefix_n
std::vector<std::string> numbered(const std::string& prefix, Eigen::Index n);

} // namespace beamobs::csv
