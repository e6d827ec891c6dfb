#include "lqdim/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

#include <png.h>

namespace lqdim {

namespace {

constexpr std::size_t kMaxSide = 2048;

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void write_cells_csv(std::ostream& out, const GridMeasure& grid) {
  out << "cell_x,cell_y,mass\n";
  for (const Cell& c : grid.cells) out << c.x << ',' << c.y << ',' << format_double(c.mass) << '\n';
}

void write_moments_csv(std::ostream& out, const LqSpectrum& s) {
  out << "q,delta,log_delta,moment,used,depth_capped\n";
  for (std::size_t i = 0; i < s.qs.size(); ++i)
    for (std::size_t j = 0; j < s.deltas.size(); ++j)
      out << format_double(s.qs[i]) << ',' << format_double(s.deltas[j]) << ','
          << format_double(std::log(s.deltas[j])) << ',' << format_double(s.moments[i][j]) << ','
          << (s.used[j] ? 1 : 0) << ',' << (s.depth_capped[j] ? 1 : 0) << '\n';
}

void write_energy_csv(std::ostream& out, const EnergyReport& r, bool header) {
  if (header) out << "s,q,step,resolution,mean_depth,estimate,standard_error,flag\n";
  for (std::size_t j = 0; j < r.schedule.size(); ++j) {
    const EnergyStep& st = r.schedule[j];
    out << format_double(r.s) << ',' << format_double(r.q) << ',' << j << ',' << format_double(st.resolution) << ','
        << format_double(st.mean_depth) << ',' << format_double(st.estimate) << ','
        << format_double(st.standard_error) << ',' << to_string(r.flag) << '\n';
  }
}

void write_rcurve_csv(std::ostream& out, const RCurve& c, double s, double q, bool header) {
  if (header) out << "s,q,level,angle,partial\n";
  for (std::size_t n = 0; n < c.partial.size(); ++n)
    for (std::size_t k = 0; k < c.angles.size(); ++k)
      out << format_double(s) << ',' << format_double(q) << ',' << n << ',' << format_double(c.angles[k]) << ','
          << format_double(c.partial[n][k]) << '\n';
}

Image render_grid(const GridMeasure& grid) {
  Image img;
  if (grid.cells.empty()) return img;
  std::int64_t x0 = grid.cells.front().x, x1 = x0, y0 = grid.cells.front().y, y1 = y0;
  for (const Cell& c : grid.cells) {
    x0 = std::min(x0, c.x), x1 = std::max(x1, c.x);
    y0 = std::min(y0, c.y), y1 = std::max(y1, c.y);
  }
  const auto side = static_cast<std::size_t>(std::max(x1 - x0, y1 - y0)) + 1;
  // Cells are pooled f×f per pixel so neither side exceeds kMaxSide.
  const std::int64_t f = static_cast<std::int64_t>((side + kMaxSide - 1) / kMaxSide);
  img.width = static_cast<std::size_t>((x1 - x0) / f + 1);
  img.height = static_cast<std::size_t>((y1 - y0) / f + 1);

  std::map<std::pair<std::size_t, std::size_t>, double> pooled;
  for (const Cell& c : grid.cells)
    pooled[{static_cast<std::size_t>((y1 - c.y) / f), static_cast<std::size_t>((c.x - x0) / f)}] += c.mass;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& [_, m] : pooled) lo = std::min(lo, std::log(m)), hi = std::max(hi, std::log(m));

  img.pixels.assign(img.width * img.height, 0);
  for (const auto& [rc, m] : pooled) {
    const double t = hi > lo ? (std::log(m) - lo) / (hi - lo) : 1.0;
    img.pixels[rc.first * img.width + rc.second] = static_cast<std::uint8_t>(1 + std::lround(254 * t));
  }
  return img;
}

void write_png(const std::string& path, const Image& image) {
  if (image.width == 0 || image.height == 0) throw OutputError(path + ": empty image");
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.pixels.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw OutputError(path + ": " + msg);
  }
}

void write_text(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError(path + ": cannot open for writing");
  out << contents;
  out.close();
  if (!out) throw OutputError(path + ": write failed");
}

}  // namespace lqdim
