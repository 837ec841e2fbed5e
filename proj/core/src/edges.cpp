#include "fpc/edges.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fpc/error.hpp"

namespace fpc {
namespace {


std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
  if (i < 0) return 0;
  if (static_cast<std::size_t>(i) >= n) return n - 1;
  return static_cast<std::size_t>(i);
}

Grid to_grid(const GrayImage& img) {
  Grid g(img.rows(), img.cols());
  std::copy(img.pixels().begin(), img.pixels().end(), g.values.begin());
  return g;
}

void require_min_size(std::size_t rows, std::size_t cols, std::size_t min, const char* what) {
  if (rows < min || cols < min) {
    throw Error(ErrorCode::kInvalidImage,
                std::string("image smaller than ") + what + " (" + std::to_string(min) + "x" +
                    std::to_string(min) + ")");
  }
}

}  // namespace

std::string to_string(EdgeMethod method) {
  switch (method) {
    case EdgeMethod::kNone: return "none";
    case EdgeMethod::kSobel: return "sobel";
    case EdgeMethod::kCanny: return "canny";
  }
  return "unknown";
}

EdgeMethod parse_edge_method(const std::string& name) {
  if (name == "none") return EdgeMethod::kNone;
  if (name == "sobel") return EdgeMethod::kSobel;
  if (name == "canny") return EdgeMethod::kCanny;
  throw Error(ErrorCode::kInvalidArgument, "unknown edge method: " + name);
}

void EdgeConfig::validate() const {
  if (!(canny_sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "canny sigma must be positive");
  }
  if (!(canny_high_percentile > 0.0 && canny_high_percentile < 100.0)) {
    throw Error(ErrorCode::kInvalidArgument, "canny high percentile must be in (0, 100)");
  }
  if (!(canny_low_ratio > 0.0 && canny_low_ratio < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "canny low ratio must be in (0, 1)");
  }
  if (!(sobel_threshold_factor > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sobel threshold factor must be positive");
  }
}

Gradients sobel_gradients(const Grid& img) {
  require_min_size(img.rows, img.cols, 3, "the Sobel kernel");
  Gradients g{Grid(img.rows, img.cols), Grid(img.rows, img.cols), Grid(img.rows, img.cols)};
  for (std::size_t r = 0; r < img.rows; ++r) {
    for (std::size_t c = 0; c < img.cols; ++c) {
      const std::size_t rows[3] = {clamp_index(static_cast<std::ptrdiff_t>(r) - 1, img.rows), r,
                                   clamp_index(static_cast<std::ptrdiff_t>(r) + 1, img.rows)};
      const std::size_t cols[3] = {clamp_index(static_cast<std::ptrdiff_t>(c) - 1, img.cols), c,
                                   clamp_index(static_cast<std::ptrdiff_t>(c) + 1, img.cols)};
      auto p = [&](int i, int j) { return img.at(rows[i], cols[j]); };
      // Opposite taps are subtracted before weighting, so flat regions give
      // exactly zero.
      double sx = (p(0, 2) - p(0, 0)) + 2.0 * (p(1, 2) - p(1, 0)) + (p(2, 2) - p(2, 0));
      double sy = (p(2, 0) - p(0, 0)) + 2.0 * (p(2, 1) - p(0, 1)) + (p(2, 2) - p(0, 2));
      g.gx.at(r, c) = sx;
      g.gy.at(r, c) = sy;
      g.magnitude.at(r, c) = std::sqrt(sx * sx + sy * sy);
    }
  }
  return g;
}

Gradients sobel_gradients(const GrayImage& img) { return sobel_gradients(to_grid(img)); }

EdgeMap sobel_edges(const GrayImage& img, const EdgeConfig& cfg) {
  cfg.validate();
  auto g = sobel_gradients(img);
  double sum = 0.0;
  for (double m : g.magnitude.values) sum += m;
  double threshold = cfg.sobel_threshold_factor * (sum / static_cast<double>(g.magnitude.values.size()));

  std::vector<double> out(g.magnitude.values.size());
  std::transform(g.magnitude.values.begin(), g.magnitude.values.end(), out.begin(),
                 [threshold](double m) { return m > threshold ? 1.0 : 0.0; });
  return EdgeMap(img.rows(), img.cols(), std::move(out));
}

Grid gaussian_smooth(const GrayImage& img, double sigma) {
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sigma must be positive");
  }
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  const auto width = static_cast<std::size_t>(2 * radius + 1);
  require_min_size(img.rows(), img.cols(), width, "the smoothing kernel");

  std::vector<double> kernel(width);
  double total = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    double w = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = w;
    total += w;
  }
  for (double& w : kernel) w /= total;

  const std::size_t rows = img.rows();
  const std::size_t cols = img.cols();
  Grid horiz(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        acc += kernel[static_cast<std::size_t>(i + radius)] *
               img.at(r, clamp_index(static_cast<std::ptrdiff_t>(c) + i, cols));
      }
      horiz.at(r, c) = acc;
    }
  }
  Grid out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        acc += kernel[static_cast<std::size_t>(i + radius)] *
               horiz.at(clamp_index(static_cast<std::ptrdiff_t>(r) + i, rows), c);
      }
      out.at(r, c) = acc;
    }
  }
  return out;
}

Grid non_max_suppression(const Gradients& g) {
  const std::size_t rows = g.magnitude.rows;
  const std::size_t cols = g.magnitude.cols;
  Grid out(rows, cols);

  auto mag_at = [&](std::ptrdiff_t r, std::ptrdiff_t c) {
    if (r < 0 || c < 0 || static_cast<std::size_t>(r) >= rows || static_cast<std::size_t>(c) >= cols) {
      return 0.0;
    }
    return g.magnitude.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };

  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double m = g.magnitude.at(r, c);
      if (m <= 0.0) continue;
      double angle = std::atan2(g.gy.at(r, c), g.gx.at(r, c)) * 180.0 / std::numbers::pi;
      if (angle < 0.0) angle += 180.0;
      // (dr, dc) of the positive-side neighbour.
      int dr = 0;
      int dc = 1;
      if (angle >= 22.5 && angle < 67.5) {
        dr = 1;
        dc = 1;
      } else if (angle >= 67.5 && angle < 112.5) {
        dr = 1;
        dc = 0;
      } else if (angle >= 112.5 && angle < 157.5) {
        dr = 1;
        dc = -1;
      }
      auto ir = static_cast<std::ptrdiff_t>(r);
      auto ic = static_cast<std::ptrdiff_t>(c);
      double ahead = mag_at(ir + dr, ic + dc);
      double behind = mag_at(ir - dr, ic - dc);
      if (m >= behind && m > ahead) {
        out.at(r, c) = m;
      }
    }
  }
  return out;
}

EdgeMap hysteresis(const Grid& magnitude, double high, double low) {
  const std::size_t rows = magnitude.rows;
  const std::size_t cols = magnitude.cols;
  std::vector<double> out(rows * cols, 0.0);
  if (!(high > 0.0)) {
    return EdgeMap(rows, cols, std::move(out));
  }

  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < magnitude.values.size(); ++i) {
    if (magnitude.values[i] >= high) {
      out[i] = 1.0;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    std::size_t i = stack.back();
    stack.pop_back();
    auto r = static_cast<std::ptrdiff_t>(i / cols);
    auto c = static_cast<std::ptrdiff_t>(i % cols);
    for (std::ptrdiff_t dr = -1; dr <= 1; ++dr) {
      for (std::ptrdiff_t dc = -1; dc <= 1; ++dc) {
        std::ptrdiff_t nr = r + dr;
        std::ptrdiff_t nc = c + dc;
        if (nr < 0 || nc < 0 || nr >= static_cast<std::ptrdiff_t>(rows) ||
            nc >= static_cast<std::ptrdiff_t>(cols)) {
          continue;
        }
        std::size_t j = static_cast<std::size_t>(nr) * cols + static_cast<std::size_t>(nc);
        if (out[j] == 0.0 && magnitude.values[j] > 0.0 && magnitude.values[j] >= low) {
          out[j] = 1.0;
          stack.push_back(j);
        }
      }
    }
  }
  return EdgeMap(rows, cols, std::move(out));
}

double positive_percentile(const std::vector<double>& values, double percentile) {
  std::vector<double> positive;
  std::copy_if(values.begin(), values.end(), std::back_inserter(positive),
               [](double v) { return v > 0.0; });
  if (positive.empty()) return 0.0;
  std::sort(positive.begin(), positive.end());
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(positive.size())));
  rank = std::clamp<std::size_t>(rank, 1, positive.size());
  return positive[rank - 1];
}

EdgeMap canny_edges(const GrayImage& img, const EdgeConfig& cfg) {
  cfg.validate();
  Grid smooth = gaussian_smooth(img, cfg.canny_sigma);
  Gradients g = sobel_gradients(smooth);
  double high = positive_percentile(g.magnitude.values, cfg.canny_high_percentile);
  double low = cfg.canny_low_ratio * high;
  return hysteresis(non_max_suppression(g), high, low);
}

GrayImage apply_edge_stage(const GrayImage& img, const EdgeConfig& cfg) {
  switch (cfg.method) {
    case EdgeMethod::kNone: return img;
    case EdgeMethod::kSobel: return sobel_edges(img, cfg);
    case EdgeMethod::kCanny: return canny_edges(img, cfg);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown edge method");
}

}  // namespace fpc
