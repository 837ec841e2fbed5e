#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "fpc/eigenspace.hpp"
#include "fpc/imaging.hpp"

namespace fpc {

inline constexpr std::uint32_t kFormatVersion = 1;
/// magic(4) + version(4) + N, K, M (12) + edge method (1) + four edge
/// parameters (32).
inline constexpr std::size_t kHeaderBytes = 53;

/// Byte size of a space file for the given dimensions.
std::size_t space_file_size(std::size_t rows, std::size_t cols, std::size_t count);

/// "FPCS" layout, all multi-byte fields little-endian: header, then the mean
/// (N*K), U (N*K x M, row-major), eigenvalues (M) and Omega (M x M,
/// row-major) as IEEE-754 doubles.
std::vector<std::uint8_t> encode_space(const EigenSpace& space);
EigenSpace decode_space(std::span<const std::uint8_t> bytes);

void save_space(const EigenSpace& space, const std::filesystem::path& path);
EigenSpace load_space(const std::filesystem::path& path);

/// "FPDB" layout: the same 53-byte header (method code 0, parameters zero),
/// the image matrix (N*K x M, row-major doubles), then one label record per
/// column: finger (i32), impression (i32), parsed flag (u8), path length
/// (u32) and the path bytes.
std::vector<std::uint8_t> encode_database(const FingerprintDatabase& db);
FingerprintDatabase decode_database(std::span<const std::uint8_t> bytes);

void save_database(const FingerprintDatabase& db, const std::filesystem::path& path);
FingerprintDatabase load_database(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`, so a
/// failed write never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace fpc
