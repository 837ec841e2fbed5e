#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "fpc/error.hpp"
#include "fpc/persistence.hpp"
#include "support/fixtures.hpp"

namespace fpc {
namespace {

EigenSpace sample_space(EdgeMethod method = EdgeMethod::kCanny) {
  auto db = testing::ridge_database(3, 2, 14, 21);
  EdgeConfig cfg;
  cfg.method = method;
  cfg.canny_sigma = 1.25;
  return train(db, cfg);
}

void expect_bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  ASSERT_EQ(a.rows(), b.rows());
  ASSERT_EQ(a.cols(), b.cols());
  EXPECT_EQ(std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())), 0);
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

TEST(SpaceFile, RoundTripIsBitExact) {
  auto space = sample_space();
  testing::ScratchDir dir("space");
  save_space(space, dir / "s.fpcs");
  auto back = load_space(dir / "s.fpcs");
  EXPECT_EQ(back.rows, space.rows);
  EXPECT_EQ(back.cols, space.cols);
  EXPECT_EQ(back.edge_config, space.edge_config);
  EXPECT_EQ(back.effective_rank, space.effective_rank);
  expect_bit_equal(back.mean, space.mean);
  expect_bit_equal(back.basis, space.basis);
  expect_bit_equal(back.eigenvalues, space.eigenvalues);
  expect_bit_equal(back.omega, space.omega);
  EXPECT_EQ(encode_space(back), encode_space(space));
}

TEST(SpaceFile, SizeFormula) {
  auto space = sample_space(EdgeMethod::kNone);
  const std::size_t nk = 14 * 14, m = 6;
  EXPECT_EQ(space_file_size(14, 14, 6), 53 + 8 * (nk * (m + 1) + m * (m + 1)));
  EXPECT_EQ(encode_space(space).size(), space_file_size(14, 14, 6));
}

TEST(SpaceFile, HeaderLayout) {
  auto bytes = encode_space(sample_space());
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FPCS");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 14);   // N
  EXPECT_EQ(bytes[12], 14);  // K
  EXPECT_EQ(bytes[16], 6);   // M
  EXPECT_EQ(bytes[20], 2);   // canny
  double sigma = 0.0;
  std::memcpy(&sigma, bytes.data() + 21, 8);  // host is little-endian here
  EXPECT_EQ(sigma, 1.25);
}

TEST(SpaceFile, Corruption) {
  auto bytes = encode_space(sample_space());

  auto truncated = bytes;
  truncated.resize(bytes.size() - 1);
  EXPECT_EQ(code_of([&] { decode_space(truncated); }), ErrorCode::kUnexpectedEof);
  try {
    decode_space(truncated);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unexpected end of file"), std::string::npos);
  }
  std::vector<std::uint8_t> header_only(bytes.begin(), bytes.begin() + 30);
  EXPECT_EQ(code_of([&] { decode_space(header_only); }), ErrorCode::kUnexpectedEof);

  auto longer = bytes;
  longer.push_back(0);
  EXPECT_EQ(code_of([&] { decode_space(longer); }), ErrorCode::kLengthMismatch);

  auto magic = bytes;
  std::memcpy(magic.data(), "XXXX", 4);
  EXPECT_EQ(code_of([&] { decode_space(magic); }), ErrorCode::kBadMagic);

  auto version = bytes;
  version[4] = 2;
  EXPECT_EQ(code_of([&] { decode_space(version); }), ErrorCode::kUnsupportedVersion);
  try {
    decode_space(version);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unsupported version 2"), std::string::npos);
  }
}

TEST(SpaceFile, MissingFile) {
  EXPECT_EQ(code_of([] { load_space("/nonexistent/dir/space.fpcs"); }), ErrorCode::kIo);
}

TEST(SpaceFile, LoadedSpaceReprojectsTrainingImages) {
  auto db = testing::ridge_database(3, 3, 16, 22);
  EdgeConfig cfg;
  cfg.method = EdgeMethod::kCanny;
  auto space = train(db, cfg);
  testing::ScratchDir dir("reproj");
  save_space(space, dir / "s.fpcs");
  auto back = load_space(dir / "s.fpcs");
  for (std::size_t m = 0; m < db.count(); ++m) {
    auto p = project(back, db.image(m));
    for (Eigen::Index z = 0; z < p.coords.size(); ++z) {
      EXPECT_EQ(p.coords[z], back.omega(z, static_cast<Eigen::Index>(m)));
    }
  }
}

TEST(DatabaseFile, RoundTrip) {
  auto db = testing::ridge_database(3, 2, 10, 23);
  db.labels[1].parsed = false;
  db.labels[2].path = "nested/dir/x y.tif";
  testing::ScratchDir dir("db");
  save_database(db, dir / "d.fpdb");
  auto back = load_database(dir / "d.fpdb");
  EXPECT_EQ(back.rows, db.rows);
  EXPECT_EQ(back.cols, db.cols);
  expect_bit_equal(back.data, db.data);
  ASSERT_EQ(back.labels.size(), db.labels.size());
  for (std::size_t m = 0; m < db.labels.size(); ++m) {
    EXPECT_EQ(back.labels[m].finger, db.labels[m].finger);
    EXPECT_EQ(back.labels[m].impression, db.labels[m].impression);
    EXPECT_EQ(back.labels[m].parsed, db.labels[m].parsed);
    EXPECT_EQ(back.labels[m].path, db.labels[m].path);
  }
}

TEST(DatabaseFile, Corruption) {
  auto bytes = encode_database(testing::ridge_database(2, 2, 8, 24));
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "FPDB");
  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  EXPECT_EQ(code_of([&] { decode_database(truncated); }), ErrorCode::kUnexpectedEof);
  auto longer = bytes;
  longer.push_back(7);
  EXPECT_EQ(code_of([&] { decode_database(longer); }), ErrorCode::kLengthMismatch);
  auto space_bytes = encode_space(sample_space());
  EXPECT_EQ(code_of([&] { decode_database(space_bytes); }), ErrorCode::kBadMagic);
}

TEST(AtomicWrite, ReplacesAndLeavesNoTemporaries) {
  testing::ScratchDir dir("atomic");
  write_file_atomic(dir / "f.txt", std::string_view("first"));
  write_file_atomic(dir / "f.txt", std::string_view("second"));
  std::ifstream in(dir / "f.txt");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text, "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir.path())) ++entries;
  EXPECT_EQ(entries, 1u);
  EXPECT_EQ(code_of([&] { write_file_atomic(dir / "missing" / "f.txt", std::string_view("x")); }),
            ErrorCode::kIo);
}

}  // namespace
}  // namespace fpc
