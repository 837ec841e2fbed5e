#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpc/imaging.hpp"

namespace fpc {

enum class EdgeMethod : std::uint8_t { kNone = 0, kSobel = 1, kCanny = 2 };

std::string to_string(EdgeMethod method);
EdgeMethod parse_edge_method(const std::string& name);

struct EdgeConfig {
  EdgeMethod method = EdgeMethod::kNone;
  double canny_sigma = 1.4142135623730951;
  /// Percentile (0, 100) of the nonzero gradient magnitudes used as the
  /// strong threshold.
  double canny_high_percentile = 70.0;
  /// Weak threshold = canny_low_ratio * strong threshold.
  double canny_low_ratio = 0.4;
  /// Sobel threshold = factor * mean gradient magnitude.
  double sobel_threshold_factor = 4.0;

  /// Throws kInvalidArgument when a parameter is out of range.
  void validate() const;

  bool operator==(const EdgeConfig&) const = default;
};

/// Plain real-valued grid, row-major. Used for gradients and magnitudes.
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, double v = 0.0) : rows(r), cols(c), values(r * c, v) {}

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
};

struct Gradients {
  Grid gx;
  Grid gy;
  Grid magnitude;
};

/// Binary edge image; every pixel is 0.0 or 1.0.
using EdgeMap = GrayImage;

/// 3x3 Sobel correlation with replicate padding. gx responds to intensity
/// increasing with the column index, gy to intensity increasing with the row.
Gradients sobel_gradients(const Grid& img);
Gradients sobel_gradients(const GrayImage& img);

EdgeMap sobel_edges(const GrayImage& img, const EdgeConfig& cfg);

/// Separable Gaussian blur, radius ceil(3 sigma), truncated and renormalized,
/// replicate padding.
Grid gaussian_smooth(const GrayImage& img, double sigma);

/// Non-maximum suppression over four quantized gradient directions. A pixel
/// survives when it is >= its neighbour on the negative side of the
/// direction and strictly > its neighbour on the positive side, so plateaus
/// two pixels wide keep exactly one pixel.
Grid non_max_suppression(const Gradients& g);

/// Double-threshold linking: pixels >= high are strong, pixels >= low are
/// kept when 8-connected (transitively) to a strong pixel.
EdgeMap hysteresis(const Grid& magnitude, double high, double low);

/// Nearest-rank percentile of the strictly positive values; 0 if none.
double positive_percentile(const std::vector<double>& values, double percentile);

EdgeMap canny_edges(const GrayImage& img, const EdgeConfig& cfg);

/// Identity for EdgeMethod::kNone, otherwise the binary edge map.
GrayImage apply_edge_stage(const GrayImage& img, const EdgeConfig& cfg);

}  // namespace fpc
