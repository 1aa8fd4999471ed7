#include "skewifs/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace skewifs::io {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::string short_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  auto res = std::to_chars(buf, buf + 16, h, 16);
  std::string hex(buf, res.ptr);
  return std::string(16 - hex.size(), '0') + hex;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header, const Eigen::MatrixXd& rows) {
  if (static_cast<Eigen::Index>(header.size()) != rows.cols())
    throw std::invalid_argument("CSV header does not match the column count");
  std::ofstream out = open_for_write(path);
  for (std::size_t j = 0; j < header.size(); ++j) out << (j ? "," : "") << header[j];
  out << '\n';
  std::string line;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      if (j) line += ',';
      line += format_double(rows(i, j));
    }
    line += '\n';
    out << line;
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out = open_for_write(path);
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_svg(const std::filesystem::path& path, const std::string& title,
               const Eigen::Matrix<double, Eigen::Dynamic, 2>& points, const std::vector<Polyline>& lines,
               std::size_t max_points) {
  constexpr double width = 800.0;
  constexpr double height = 500.0;
  constexpr double margin = 40.0;

  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  auto extend = [&](const Eigen::Matrix<double, Eigen::Dynamic, 2>& p) {
    if (p.rows() == 0) return;
    x_lo = std::min(x_lo, p.col(0).minCoeff());
    x_hi = std::max(x_hi, p.col(0).maxCoeff());
    y_lo = std::min(y_lo, p.col(1).minCoeff());
    y_hi = std::max(y_hi, p.col(1).maxCoeff());
  };
  extend(points);
  for (const Polyline& l : lines) extend(l.points);
  if (!(x_hi >= x_lo)) x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  if (y_hi == y_lo) y_hi = y_lo + 1.0;

  auto sx = [&](double x) { return margin + (x - x_lo) / (x_hi - x_lo) * (width - 2 * margin); };
  auto sy = [&](double y) { return height - margin - (y - y_lo) / (y_hi - y_lo) * (height - 2 * margin); };

  std::ofstream out = open_for_write(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << margin << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  out << "<text x=\"" << margin << "\" y=\"" << height - 12 << "\" font-family=\"sans-serif\" font-size=\"11\">x in ["
      << short_double(x_lo) << ", " << short_double(x_hi) << "], y in [" << short_double(y_lo) << ", "
      << short_double(y_hi) << "]</text>\n";

  const std::size_t stride = std::max<std::size_t>(1, (static_cast<std::size_t>(points.rows()) + max_points - 1) / max_points);
  out << "<g fill=\"steelblue\">\n";
  for (Eigen::Index i = 0; i < points.rows(); i += static_cast<Eigen::Index>(stride))
    out << "<circle cx=\"" << short_double(sx(points(i, 0))) << "\" cy=\"" << short_double(sy(points(i, 1)))
        << "\" r=\"0.8\"/>\n";
  out << "</g>\n";
  for (const Polyline& l : lines) {
    out << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1\" points=\"";
    for (Eigen::Index i = 0; i < l.points.rows(); ++i)
      out << (i ? " " : "") << short_double(sx(l.points(i, 0))) << ',' << short_double(sy(l.points(i, 1)));
    out << "\"/>\n";
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace skewifs::io
