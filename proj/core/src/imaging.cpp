#include "fpc/imaging.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>
#include <regex>

#include "fpc/error.hpp"

namespace fpc {

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

GrayImage from_bytes(std::size_t rows, std::size_t cols, std::span<const std::uint8_t> bytes) {
  std::vector<double> px(bytes.size());
  std::transform(bytes.begin(), bytes.end(), px.begin(),
                 [](std::uint8_t b) { return static_cast<double>(b) / 255.0; });
  return GrayImage(rows, cols, std::move(px));
}

}  // namespace

GrayImage::GrayImage(std::size_t rows, std::size_t cols, std::vector<double> pixels)
    : rows_(rows), cols_(cols), pixels_(std::move(pixels)) {
  if (rows_ == 0 || cols_ == 0) {
    throw Error(ErrorCode::kInvalidImage, "zero-dimension image");
  }
  if (pixels_.size() != rows_ * cols_) {
    throw Error(ErrorCode::kInvalidImage, "pixel count does not match dimensions");
  }
  for (double p : pixels_) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kInvalidImage, "pixel outside [0,1]");
    }
  }
}

GrayImage::GrayImage(std::size_t rows, std::size_t cols, double value)
    : GrayImage(rows, cols, std::vector<double>(rows * cols, value)) {}

GrayImage FingerprintDatabase::image(std::size_t m) const {
  ImageVector v{data.col(static_cast<Eigen::Index>(m)), rows, cols};
  return reshape(v);
}

// ---------------------------------------------------------------------------
// PGM

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&]() -> std::size_t {
    skip_space();
    std::size_t v = 0;
    std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      ++pos;
    }
    if (pos == start) {
      throw Error(ErrorCode::kUnsupportedFormat, "malformed PGM header");
    }
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw Error(ErrorCode::kUnsupportedFormat, "not a binary PGM (P5) file");
  }
  pos = 2;
  std::size_t cols = read_uint();
  std::size_t rows = read_uint();
  std::size_t maxval = read_uint();
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw Error(ErrorCode::kUnsupportedFormat, "malformed PGM header");
  }
  ++pos;
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::kInvalidImage, "zero-dimension image");
  }
  if (maxval != 255) {
    throw Error(ErrorCode::kUnsupportedFormat, "only 8-bit PGM (maxval 255) is supported");
  }
  if (bytes.size() - pos < rows * cols) {
    throw Error(ErrorCode::kUnexpectedEof, "PGM pixel data truncated");
  }
  return from_bytes(rows, cols, bytes.subspan(pos, rows * cols));
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  for (double p : img.pixels()) {
    out.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(p * 255.0))));
  }
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed for " + path.string());
  }
}

// ---------------------------------------------------------------------------
// TIFF (baseline, uncompressed or PackBits, 8-bit single channel)

namespace {

class TiffReader {
 public:
  explicit TiffReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
    if (bytes.size() < 8) {
      throw Error(ErrorCode::kUnsupportedFormat, "file too short for TIFF");
    }
    if (bytes[0] == 'I' && bytes[1] == 'I') {
      little_ = true;
    } else if (bytes[0] == 'M' && bytes[1] == 'M') {
      little_ = false;
    } else {
      throw Error(ErrorCode::kUnsupportedFormat, "not a TIFF file");
    }
    if (u16(2) != 42) {
      throw Error(ErrorCode::kUnsupportedFormat, "bad TIFF magic");
    }
  }

  std::uint16_t u16(std::size_t off) const {
    check(off, 2);
    return little_ ? static_cast<std::uint16_t>(bytes_[off] | bytes_[off + 1] << 8)
                   : static_cast<std::uint16_t>(bytes_[off] << 8 | bytes_[off + 1]);
  }

  std::uint32_t u32(std::size_t off) const {
    check(off, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      int shift = little_ ? 8 * i : 8 * (3 - i);
      v |= static_cast<std::uint32_t>(bytes_[off + i]) << shift;
    }
    return v;
  }

  void check(std::size_t off, std::size_t n) const {
    if (off > bytes_.size() || bytes_.size() - off < n) {
      throw Error(ErrorCode::kUnexpectedEof, "TIFF structure points past end of file");
    }
  }

  /// Values of a SHORT or LONG tag entry.
  std::vector<std::uint32_t> values(std::size_t entry) const {
    std::uint16_t type = u16(entry + 2);
    std::uint32_t count = u32(entry + 4);
    std::size_t width = type == 3 ? 2 : type == 4 ? 4 : type == 1 ? 1 : 0;
    if (width == 0) {
      throw Error(ErrorCode::kUnsupportedFormat, "unsupported TIFF tag type");
    }
    std::size_t at = entry + 8;
    if (count * width > 4) {
      at = u32(entry + 8);
    }
    check(at, count * width);
    std::vector<std::uint32_t> out(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      std::size_t off = at + i * width;
      out[i] = width == 1 ? bytes_[off] : width == 2 ? u16(off) : u32(off);
    }
    return out;
  }

  std::span<const std::uint8_t> bytes() const { return bytes_; }

 private:
  std::span<const std::uint8_t> bytes_;
  bool little_ = true;
};

void unpack_bits(std::span<const std::uint8_t> in, std::vector<std::uint8_t>& out) {
  std::size_t i = 0;
  while (i < in.size()) {
    auto n = static_cast<std::int8_t>(in[i++]);
    if (n >= 0) {
      std::size_t len = static_cast<std::size_t>(n) + 1;
      if (in.size() - i < len) {
        throw Error(ErrorCode::kUnexpectedEof, "PackBits literal run truncated");
      }
      out.insert(out.end(), in.begin() + static_cast<std::ptrdiff_t>(i),
                 in.begin() + static_cast<std::ptrdiff_t>(i + len));
      i += len;
    } else if (n != -128) {
      if (i >= in.size()) {
        throw Error(ErrorCode::kUnexpectedEof, "PackBits repeat run truncated");
      }
      out.insert(out.end(), static_cast<std::size_t>(1 - n), in[i++]);
    }
  }
}

}  // namespace

GrayImage decode_tiff(std::span<const std::uint8_t> bytes) {
  TiffReader tiff(bytes);
  std::size_t ifd = tiff.u32(4);
  std::uint16_t entries = tiff.u16(ifd);

  std::size_t width = 0, height = 0;
  std::uint32_t bits = 1, samples = 1, compression = 1, photometric = 1;
  std::vector<std::uint32_t> offsets, counts;

  for (std::uint16_t e = 0; e < entries; ++e) {
    std::size_t entry = ifd + 2 + 12u * e;
    std::uint16_t tag = tiff.u16(entry);
    switch (tag) {
      case 256: width = tiff.values(entry).at(0); break;
      case 257: height = tiff.values(entry).at(0); break;
      case 258: {
        auto v = tiff.values(entry);
        bits = v.at(0);
        if (v.size() > 1) samples = static_cast<std::uint32_t>(v.size());
        break;
      }
      case 259: compression = tiff.values(entry).at(0); break;
      case 262: photometric = tiff.values(entry).at(0); break;
      case 273: offsets = tiff.values(entry); break;
      case 277: samples = tiff.values(entry).at(0); break;
      case 279: counts = tiff.values(entry); break;
      default: break;
    }
  }

  if (width == 0 || height == 0) {
    throw Error(ErrorCode::kInvalidImage, "zero-dimension image");
  }
  if (samples != 1 || photometric > 1) {
    throw Error(ErrorCode::kUnsupportedFormat, "TIFF is not single-channel grayscale");
  }
  if (bits != 8) {
    throw Error(ErrorCode::kUnsupportedFormat, "TIFF is not 8 bits per sample");
  }
  if (compression != 1 && compression != 32773) {
    throw Error(ErrorCode::kUnsupportedFormat, "unsupported TIFF compression");
  }
  if (offsets.empty()) {
    throw Error(ErrorCode::kUnsupportedFormat, "TIFF has no strips");
  }
  if (counts.empty()) {
    // Allowed for a single uncompressed strip.
    if (offsets.size() != 1 || compression != 1) {
      throw Error(ErrorCode::kUnsupportedFormat, "TIFF lacks StripByteCounts");
    }
    counts.push_back(static_cast<std::uint32_t>(width * height));
  }
  if (counts.size() != offsets.size()) {
    throw Error(ErrorCode::kUnsupportedFormat, "TIFF strip tables disagree");
  }

  std::vector<std::uint8_t> pixels;
  pixels.reserve(width * height);
  for (std::size_t s = 0; s < offsets.size(); ++s) {
    tiff.check(offsets[s], counts[s]);
    auto strip = tiff.bytes().subspan(offsets[s], counts[s]);
    if (compression == 1) {
      pixels.insert(pixels.end(), strip.begin(), strip.end());
    } else {
      unpack_bits(strip, pixels);
    }
  }
  if (pixels.size() < width * height) {
    throw Error(ErrorCode::kUnexpectedEof, "TIFF pixel data truncated");
  }
  pixels.resize(width * height);
  return from_bytes(height, width, pixels);
}

GrayImage load_image(const std::filesystem::path& path, ImageFormat format) {
  auto bytes = read_file(path);
  if (format == ImageFormat::kAuto) {
    if (bytes.size() >= 2 && bytes[0] == 'P') {
      format = ImageFormat::kPgm;
    } else if (bytes.size() >= 2 &&
               ((bytes[0] == 'I' && bytes[1] == 'I') || (bytes[0] == 'M' && bytes[1] == 'M'))) {
      format = ImageFormat::kTiff;
    } else {
      throw Error(ErrorCode::kUnsupportedFormat, "unrecognized image format: " + path.string());
    }
  }
  try {
    return format == ImageFormat::kPgm ? decode_pgm(bytes) : decode_tiff(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

ImageVector vectorize(const GrayImage& img) {
  ImageVector v;
  v.rows = img.rows();
  v.cols = img.cols();
  v.values.resize(static_cast<Eigen::Index>(img.size()));
  auto px = img.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    v.values[static_cast<Eigen::Index>(i)] = px[i];
  }
  return v;
}

GrayImage reshape(const ImageVector& vec) {
  if (static_cast<std::size_t>(vec.values.size()) != vec.rows * vec.cols) {
    throw Error(ErrorCode::kDimensionMismatch, "vector length does not match dimensions");
  }
  std::vector<double> px(vec.values.data(), vec.values.data() + vec.values.size());
  return GrayImage(vec.rows, vec.cols, std::move(px));
}

bool parse_fvc_name(const std::string& filename, int& finger, int& impression) {
  static const std::regex kName(R"(^(\d+)_(\d+)\.[A-Za-z0-9]+$)");
  std::smatch m;
  if (!std::regex_match(filename, m, kName)) {
    return false;
  }
  try {
    finger = std::stoi(m[1].str());
    impression = std::stoi(m[2].str());
  } catch (const std::out_of_range&) {
    return false;
  }
  return true;
}

FingerprintDatabase make_database(const std::vector<GrayImage>& images,
                                  std::vector<ImageLabel> labels) {
  if (images.size() < 2) {
    throw Error(ErrorCode::kInsufficientImages, "insufficient images: need at least 2");
  }
  if (labels.size() != images.size()) {
    throw Error(ErrorCode::kInvalidArgument, "label count does not match image count");
  }
  FingerprintDatabase db;
  db.rows = images.front().rows();
  db.cols = images.front().cols();
  db.data.resize(static_cast<Eigen::Index>(db.rows * db.cols),
                 static_cast<Eigen::Index>(images.size()));
  for (std::size_t m = 0; m < images.size(); ++m) {
    const auto& img = images[m];
    if (img.rows() != db.rows || img.cols() != db.cols) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "mixed image dimensions in database (" + labels[m].path + ")");
    }
    db.data.col(static_cast<Eigen::Index>(m)) = vectorize(img).values;
  }
  db.labels = std::move(labels);
  return db;
}

FingerprintDatabase ingest_database(const std::filesystem::path& dir, const std::string& pattern) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  }
  std::vector<ImageLabel> labels;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    if (fnmatch(pattern.c_str(), name.c_str(), 0) != 0) continue;
    ImageLabel label;
    label.path = entry.path().string();
    label.parsed = parse_fvc_name(name, label.finger, label.impression);
    labels.push_back(std::move(label));
  }
  if (labels.size() < 2) {
    throw Error(ErrorCode::kInsufficientImages, "insufficient images: need at least 2");
  }

  bool all_parsed = std::all_of(labels.begin(), labels.end(),
                                [](const ImageLabel& l) { return l.parsed; });
  if (all_parsed) {
    std::sort(labels.begin(), labels.end(), [](const ImageLabel& a, const ImageLabel& b) {
      return std::tie(a.finger, a.impression, a.path) < std::tie(b.finger, b.impression, b.path);
    });
  } else {
    // Lexicographic fallback; each unparsed file becomes its own finger.
    std::sort(labels.begin(), labels.end(),
              [](const ImageLabel& a, const ImageLabel& b) { return a.path < b.path; });
    for (std::size_t i = 0; i < labels.size(); ++i) {
      labels[i].parsed = false;
      labels[i].finger = static_cast<int>(i);
      labels[i].impression = 1;
    }
  }

  std::vector<GrayImage> images;
  images.reserve(labels.size());
  for (const auto& l : labels) {
    images.push_back(load_image(l.path));
  }
  return make_database(images, std::move(labels));
}

// ---------------------------------------------------------------------------
// Noise. Generator: std::mt19937_64 seeded with NoiseSpec::seed; each standard
// normal is one Box-Muller (cosine branch) transform of two 53-bit uniforms.

std::vector<double> gaussian_noise_samples(std::size_t count, const NoiseSpec& spec) {
  if (!(spec.variance >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "noise variance must be non-negative");
  }
  std::mt19937_64 gen(spec.seed);
  constexpr double kScale = 0x1.0p-53;
  const double sigma = std::sqrt(spec.variance);
  std::vector<double> out(count);
  for (auto& s : out) {
    double u1 = 1.0 - static_cast<double>(gen() >> 11) * kScale;  // (0, 1]
    double u2 = static_cast<double>(gen() >> 11) * kScale;        // [0, 1)
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    s = spec.mean + sigma * z;
  }
  return out;
}

GrayImage add_gaussian_noise(const GrayImage& img, const NoiseSpec& spec) {
  auto noise = gaussian_noise_samples(img.size(), spec);
  GrayImage out = img;
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = std::clamp(px[i] + noise[i], 0.0, 1.0);
  }
  return out;
}

}  // namespace fpc
