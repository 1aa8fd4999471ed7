#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace skewifs::io {

// Round-trippable decimal with 17 significant digits.
std::string format_double(double v);

// FNV-1a, as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

// Numeric CSV: one header line, then one line per row of `rows`.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Eigen::MatrixXd& rows);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

struct Polyline {
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;
  std::string color = "black";
};

// Scatter plot of `points` with optional polylines, scaled to the joint bounds.
void write_svg(const std::filesystem::path& path, const std::string& title,
               const Eigen::Matrix<double, Eigen::Dynamic, 2>& points, const std::vector<Polyline>& lines = {},
               std::size_t max_points = 20000);

}  // namespace skewifs::io
