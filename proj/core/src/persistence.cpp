#include "fpc/persistence.hpp"

#include <unistd.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "fpc/error.hpp"

namespace fpc {

namespace {

constexpr std::array<char, 4> kSpaceMagic = {'F', 'P', 'C', 'S'};
constexpr std::array<char, 4> kDatabaseMagic = {'F', 'P', 'D', 'B'};

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    auto b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void matrix_row_major(const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }
  void vector(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw Error(ErrorCode::kUnexpectedEof, "unexpected end of file");
    }
  }
  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return std::bit_cast<double>(bits);
  }
  std::string string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  Eigen::MatrixXd matrix_row_major(std::size_t rows, std::size_t cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = f64();
    return m;
  }
  Eigen::VectorXd vector(std::size_t n) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f64();
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

struct Header {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t count = 0;
  EdgeConfig edges;
};

void write_header(Writer& w, const std::array<char, 4>& magic, const Header& h) {
  w.raw(magic.data(), magic.size());
  w.u32(kFormatVersion);
  w.u32(h.rows);
  w.u32(h.cols);
  w.u32(h.count);
  w.u8(static_cast<std::uint8_t>(h.edges.method));
  w.f64(h.edges.canny_sigma);
  w.f64(h.edges.canny_high_percentile);
  w.f64(h.edges.canny_low_ratio);
  w.f64(h.edges.sobel_threshold_factor);
}

Header read_header(Reader& r, const std::array<char, 4>& magic) {
  if (r.remaining() < magic.size() ||
      r.string(magic.size()) != std::string(magic.data(), magic.size())) {
    throw Error(ErrorCode::kBadMagic, "bad magic: expected " + std::string(magic.data(), magic.size()));
  }
  std::uint32_t version = r.u32();
  if (version != kFormatVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "unsupported version " + std::to_string(version));
  }
  Header h;
  h.rows = r.u32();
  h.cols = r.u32();
  h.count = r.u32();
  std::uint8_t method = r.u8();
  if (method > 2) {
    throw Error(ErrorCode::kUnsupportedFormat, "unknown edge method code " + std::to_string(method));
  }
  h.edges.method = static_cast<EdgeMethod>(method);
  h.edges.canny_sigma = r.f64();
  h.edges.canny_high_percentile = r.f64();
  h.edges.canny_low_ratio = r.f64();
  h.edges.sobel_threshold_factor = r.f64();
  if (h.rows == 0 || h.cols == 0 || h.count == 0) {
    throw Error(ErrorCode::kInvalidImage, "header dimensions must be positive");
  }
  return h;
}

std::uint32_t checked_u32(std::size_t v) {
  if (v > 0xFFFFFFFFu) {
    throw Error(ErrorCode::kInvalidArgument, "dimension does not fit the file format");
  }
  return static_cast<std::uint32_t>(v);
}

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

std::size_t space_file_size(std::size_t rows, std::size_t cols, std::size_t count) {
  const std::size_t pixels = rows * cols;
  return kHeaderBytes + 8 * (pixels * (count + 1) + count * (count + 1));
}

std::vector<std::uint8_t> encode_space(const EigenSpace& space) {
  Writer w;
  write_header(w, kSpaceMagic,
               {checked_u32(space.rows), checked_u32(space.cols), checked_u32(space.count()), space.edge_config});
  w.vector(space.mean);
  w.matrix_row_major(space.basis);
  w.vector(space.eigenvalues);
  w.matrix_row_major(space.omega);
  return w.take();
}

EigenSpace decode_space(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  Header h = read_header(r, kSpaceMagic);
  const std::size_t expected = space_file_size(h.rows, h.cols, h.count);
  if (bytes.size() < expected) {
    throw Error(ErrorCode::kUnexpectedEof, "unexpected end of file");
  }
  if (bytes.size() != expected) {
    throw Error(ErrorCode::kLengthMismatch, "file length does not match header dimensions");
  }
  const std::size_t pixels = std::size_t{h.rows} * h.cols;
  EigenSpace s;
  s.rows = h.rows;
  s.cols = h.cols;
  s.edge_config = h.edges;
  s.mean = r.vector(pixels);
  s.basis = r.matrix_row_major(pixels, h.count);
  s.eigenvalues = r.vector(h.count);
  s.omega = r.matrix_row_major(h.count, h.count);
  s.effective_rank = effective_rank(s.eigenvalues);
  return s;
}

void save_space(const EigenSpace& space, const std::filesystem::path& path) {
  write_file_atomic(path, encode_space(space));
}

EigenSpace load_space(const std::filesystem::path& path) {
  try {
    return decode_space(read_all(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_database(const FingerprintDatabase& db) {
  Writer w;
  EdgeConfig zero{EdgeMethod::kNone, 0.0, 0.0, 0.0, 0.0};
  write_header(w, kDatabaseMagic, {checked_u32(db.rows), checked_u32(db.cols), checked_u32(db.count()), zero});
  w.matrix_row_major(db.data);
  for (const auto& l : db.labels) {
    w.i32(l.finger);
    w.i32(l.impression);
    w.u8(l.parsed ? 1 : 0);
    w.u32(checked_u32(l.path.size()));
    w.raw(l.path.data(), l.path.size());
  }
  return w.take();
}

FingerprintDatabase decode_database(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  Header h = read_header(r, kDatabaseMagic);
  FingerprintDatabase db;
  db.rows = h.rows;
  db.cols = h.cols;
  db.data = r.matrix_row_major(std::size_t{h.rows} * h.cols, h.count);
  db.labels.resize(h.count);
  for (auto& l : db.labels) {
    l.finger = r.i32();
    l.impression = r.i32();
    l.parsed = r.u8() != 0;
    l.path = r.string(r.u32());
  }
  if (r.remaining() != 0) {
    throw Error(ErrorCode::kLengthMismatch, "trailing bytes after database records");
  }
  return db;
}

void save_database(const FingerprintDatabase& db, const std::filesystem::path& path) {
  write_file_atomic(path, encode_database(db));
}

FingerprintDatabase load_database(const std::filesystem::path& path) {
  try {
    return decode_database(read_all(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorCode::kIo, "write failed for " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot rename into " + path.string());
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace fpc
