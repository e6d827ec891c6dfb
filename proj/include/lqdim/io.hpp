#ifndef LQDIM_IO_HPP
#define LQDIM_IO_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "lqdim/empirical.hpp"

namespace lqdim {

/// I/O failure while writing output files.
struct OutputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that round-trips.
std::string format_double(double x);

/// cell_x,cell_y,mass
void write_cells_csv(std::ostream& out, const GridMeasure& grid);

/// q,delta,log_delta,moment,used,depth_capped
void write_moments_csv(std::ostream& out, const LqSpectrum& spectrum);

/// s,q,step,resolution,mean_depth,estimate,standard_error,flag
void write_energy_csv(std::ostream& out, const EnergyReport& report, bool header = true);

/// s,q,level,angle,partial
void write_rcurve_csv(std::ostream& out, const RCurve& curve, double s, double q, bool header = true);

/// 8-bit grayscale bitmap of the occupied bounding box; log mass mapped to
/// [1, 255] with empty cells at 0. Row 0 is the largest y.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

Image render_grid(const GridMeasure& grid);

/// Throws OutputError.
void write_png(const std::string& path, const Image& image);
void write_text(const std::string& path, const std::string& contents);

}  // namespace lqdim

#endif  // LQDIM_IO_HPP
