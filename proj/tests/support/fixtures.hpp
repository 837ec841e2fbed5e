#pragma once

// Test-only fixtures: synthetic fingerprint-like images, random databases,
// a minimal TIFF/PGM writer and scratch directories.

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fpc/imaging.hpp"

namespace fpc::testing {

/// Parallel sinusoidal ridges; angle and period identify a "finger", the
/// phase and a small angular jitter make impressions differ.
inline GrayImage ridge_image(std::size_t rows, std::size_t cols, double angle, double period, double phase) {
  std::vector<double> px(rows * cols);
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double t = (static_cast<double>(c) * ca + static_cast<double>(r) * sa) / period;
      px[r * cols + c] = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * t + phase);
    }
  }
  return GrayImage(rows, cols, std::move(px));
}

/// Concentric rings around (cr, cc); structurally unlike ridge_image.
inline GrayImage ring_image(std::size_t rows, std::size_t cols, double cr, double cc, double period) {
  std::vector<double> px(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double d = std::hypot(static_cast<double>(r) - cr, static_cast<double>(c) - cc);
      px[r * cols + c] = 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * d / period);
    }
  }
  return GrayImage(rows, cols, std::move(px));
}

inline GrayImage random_image(std::size_t rows, std::size_t cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> px(rows * cols);
  for (auto& p : px) p = u(rng);
  return GrayImage(rows, cols, std::move(px));
}

inline std::vector<ImageLabel> labels_for(std::size_t fingers, std::size_t impressions) {
  std::vector<ImageLabel> out;
  for (std::size_t f = 0; f < fingers; ++f) {
    for (std::size_t i = 0; i < impressions; ++i) {
      ImageLabel l;
      l.finger = static_cast<int>(101 + f);
      l.impression = static_cast<int>(1 + i);
      l.path = std::to_string(l.finger) + "_" + std::to_string(l.impression) + ".pgm";
      out.push_back(l);
    }
  }
  return out;
}

inline FingerprintDatabase random_database(std::size_t rows, std::size_t cols, std::size_t count,
                                           std::mt19937_64& rng) {
  std::vector<GrayImage> imgs;
  for (std::size_t m = 0; m < count; ++m) imgs.push_back(random_image(rows, cols, rng));
  return make_database(imgs, labels_for(count, 1));
}

/// `fingers` x `impressions` ridge images; finger f has its own orientation
/// and period.
inline FingerprintDatabase ridge_database(std::size_t fingers, std::size_t impressions, std::size_t size,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<GrayImage> imgs;
  for (std::size_t f = 0; f < fingers; ++f) {
    double angle = std::numbers::pi * static_cast<double>(f) / static_cast<double>(fingers);
    double period = 5.0 + static_cast<double>(f % 3);
    for (std::size_t i = 0; i < impressions; ++i) {
      imgs.push_back(ridge_image(size, size, angle + jitter(rng), period, phase(rng)));
    }
  }
  return make_database(imgs, labels_for(fingers, impressions));
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<std::uint8_t> pgm_bytes(std::size_t rows, std::size_t cols, const std::vector<std::uint8_t>& px) {
  std::string header = "P5\n" + std::to_string(cols) + " " + std::to_string(rows) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), px.begin(), px.end());
  return out;
}

/// Little-endian baseline TIFF with one uncompressed strip.
inline std::vector<std::uint8_t> tiff_bytes(std::uint32_t rows, std::uint32_t cols, const std::vector<std::uint8_t>& px,
                                            std::uint16_t bits = 8, std::uint16_t samples = 1) {
  std::vector<std::uint8_t> out;
  auto u16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  out.push_back('I');
  out.push_back('I');
  u16(42);
  u32(8);
  const std::uint16_t entries = 8;
  const std::uint32_t data_offset = 8 + 2 + 12u * entries + 4;
  u16(entries);
  auto entry = [&](std::uint16_t tag, std::uint16_t type, std::uint32_t value) {
    u16(tag);
    u16(type);
    u32(1);
    if (type == 3) {
      u16(static_cast<std::uint16_t>(value));
      u16(0);
    } else {
      u32(value);
    }
  };
  entry(256, 4, cols);
  entry(257, 4, rows);
  entry(258, 3, bits);
  entry(259, 3, 1);
  entry(262, 3, 1);
  entry(273, 4, data_offset);
  entry(277, 3, samples);
  entry(279, 4, static_cast<std::uint32_t>(px.size()));
  u32(0);
  out.insert(out.end(), px.begin(), px.end());
  return out;
}

/// Bytes of an image after 8-bit quantization.
inline std::vector<std::uint8_t> to_bytes(const GrayImage& img) {
  std::vector<std::uint8_t> out;
  for (double p : img.pixels()) out.push_back(static_cast<std::uint8_t>(std::lround(p * 255.0)));
  return out;
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("fpc_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace fpc::testing
