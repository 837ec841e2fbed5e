#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fpc {

/// Row-major grayscale image with intensities in [0, 1].
class GrayImage {
 public:
  GrayImage() = default;
  /// Throws kInvalidImage on zero dimensions, size mismatch or out-of-range
  /// pixels.
  GrayImage(std::size_t rows, std::size_t cols, std::vector<double> pixels);
  /// Constant-valued image.
  GrayImage(std::size_t rows, std::size_t cols, double value = 0.0);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  double at(std::size_t r, std::size_t c) const { return pixels_[r * cols_ + c]; }
  double& at(std::size_t r, std::size_t c) { return pixels_[r * cols_ + c]; }

  std::span<const double> pixels() const noexcept { return pixels_; }
  std::span<double> pixels() noexcept { return pixels_; }

  bool operator==(const GrayImage&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> pixels_;
};

/// Column vector form of an image; element i*K + j is pixel (i, j).
struct ImageVector {
  Eigen::VectorXd values;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

enum class ImageFormat { kAuto, kTiff, kPgm };

struct ImageLabel {
  int finger = 0;
  int impression = 0;
  /// False when the filename did not follow the "finger_impression.ext"
  /// convention; the column order is then lexicographic.
  bool parsed = true;
  std::string path;

  bool operator==(const ImageLabel&) const = default;
};

/// Db_img: one column per image, all images share (rows, cols).
struct FingerprintDatabase {
  Eigen::MatrixXd data;
  std::vector<ImageLabel> labels;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t count() const noexcept { return static_cast<std::size_t>(data.cols()); }
  /// Column m reshaped back into an image.
  GrayImage image(std::size_t m) const;
};

struct NoiseSpec {
  double mean = 0.0;
  double variance = 0.0;
  std::uint64_t seed = 0;
};

GrayImage load_image(const std::filesystem::path& path, ImageFormat format = ImageFormat::kAuto);

/// Decoders over in-memory file contents. Only 8-bit single-channel data is
/// accepted; pixels are byte / 255.
GrayImage decode_pgm(std::span<const std::uint8_t> bytes);
GrayImage decode_tiff(std::span<const std::uint8_t> bytes);

/// Binary P5 writer; pixels are rounded to the nearest byte.
void write_pgm(const GrayImage& img, const std::filesystem::path& path);

ImageVector vectorize(const GrayImage& img);
GrayImage reshape(const ImageVector& vec);

/// Build a database from the matching files in `dir`. `pattern` is a shell
/// glob matched against the file name.
FingerprintDatabase ingest_database(const std::filesystem::path& dir, const std::string& pattern);

/// Assemble a database from already-loaded images. Throws on mixed dimensions
/// or fewer than two images.
FingerprintDatabase make_database(const std::vector<GrayImage>& images,
                                  std::vector<ImageLabel> labels);

/// Parses "101_3.tif" into finger 101, impression 3.
bool parse_fvc_name(const std::string& filename, int& finger, int& impression);

/// Additive Gaussian noise: out = clamp(in + mean + sqrt(variance) * z, 0, 1),
/// one standard normal draw per pixel in row-major order.
GrayImage add_gaussian_noise(const GrayImage& img, const NoiseSpec& spec);

/// The pre-clamp noise samples add_gaussian_noise would add for `count`
/// pixels. Exposed so the moment checks can look at the raw draws.
std::vector<double> gaussian_noise_samples(std::size_t count, const NoiseSpec& spec);

}  // namespace fpc
