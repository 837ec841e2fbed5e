#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fpc/error.hpp"
#include "fpc/evaluation.hpp"
#include "support/fixtures.hpp"

namespace fpc {
namespace {

HScanRow row(GroundTruth truth, double h) {
  HScanRow r;
  r.truth = truth;
  r.h = h;
  return r;
}

TEST(Split, HalfFingersEvenCount) {
  auto db = testing::ridge_database(10, 8, 16, 1);
  auto s = split_database(db);
  EXPECT_EQ(s.train.count(), 40u);
  ASSERT_EQ(s.tests.entries.size(), 80u);
  EXPECT_EQ(s.tests.policy, "half-fingers");
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_EQ(s.tests.entries[i].truth, GroundTruth::kInBase);
    EXPECT_LE(s.tests.entries[i].finger, 105);
    EXPECT_EQ(s.tests.entries[i].image, s.train.image(i));
  }
  for (std::size_t i = 40; i < 80; ++i) {
    EXPECT_EQ(s.tests.entries[i].truth, GroundTruth::kOutOfBase);
    EXPECT_GE(s.tests.entries[i].finger, 106);
  }
}

TEST(Split, SmallAndOddCounts) {
  auto s = split_database(testing::ridge_database(4, 2, 12, 2));
  EXPECT_EQ(s.train.count(), 4u);
  EXPECT_EQ(s.tests.entries.size(), 8u);

  auto odd = split_database(testing::ridge_database(5, 2, 12, 3));
  EXPECT_EQ(odd.train.count(), 4u);  // 2 fingers enrolled, 3 held out
  EXPECT_EQ(odd.tests.entries.size(), 10u);
}

TEST(Split, Errors) {
  try {
    split_database(testing::ridge_database(1, 2, 12, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientImages);
  }
  EXPECT_THROW(split_database(testing::ridge_database(4, 2, 12, 4), "random"), Error);
}

TEST(HScan, TrainingImagesGiveZero) {
  auto s = split_database(testing::ridge_database(6, 3, 16, 5));
  auto space = train(s.train, {});
  auto rows = h_scan(space, s.tests, noise_level("none"), 0, 2);
  ASSERT_EQ(rows.size(), s.tests.entries.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].index, i);
    EXPECT_EQ(rows[i].path, s.tests.entries[i].path);
    if (rows[i].truth == GroundTruth::kInBase) EXPECT_EQ(rows[i].h, 0.0);
    else EXPECT_GT(rows[i].h, 0.0);
  }
}

TEST(HScan, IndependentOfThreadCount) {
  auto s = split_database(testing::ridge_database(6, 3, 16, 6));
  auto space = train(s.train, {});
  auto base = h_scan(space, s.tests, noise_level("medium"), 42, 1);
  for (unsigned t : {2u, 3u, 8u, 0u}) {
    auto rows = h_scan(space, s.tests, noise_level("medium"), 42, t);
    ASSERT_EQ(rows.size(), base.size());
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i].h, base[i].h) << "threads " << t;
  }
  auto other = h_scan(space, s.tests, noise_level("medium"), 43, 1);
  EXPECT_NE(other[0].h, base[0].h);
}

TEST(Confusion, HandCounts) {
  using V = Verdict;
  using G = GroundTruth;
  std::vector<std::pair<V, G>> rows = {{V::kInBase, G::kInBase},       {V::kInBase, G::kInBase},
                                       {V::kOutOfBase, G::kInBase},    {V::kInBase, G::kOutOfBase},
                                       {V::kOutOfBase, G::kOutOfBase}, {V::kOutOfBase, G::kOutOfBase}};
  EXPECT_EQ(confusion_counts(rows), (ConfusionCounts{1, 1, 2, 2}));

  std::vector<std::pair<V, G>> correct = {{V::kInBase, G::kInBase}, {V::kOutOfBase, G::kOutOfBase}};
  EXPECT_EQ(confusion_counts(correct), (ConfusionCounts{0, 0, 1, 1}));
  std::vector<std::pair<V, G>> inverted = {{V::kOutOfBase, G::kInBase}, {V::kInBase, G::kOutOfBase}};
  EXPECT_EQ(confusion_counts(inverted), (ConfusionCounts{1, 1, 0, 0}));
}

TEST(Confusion, InconclusiveRejected) {
  try {
    confusion_counts({{Verdict::kInconclusive, GroundTruth::kInBase}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInconclusiveVerdict);
  }
}

TEST(ThresholdGrid, Points) {
  EXPECT_EQ(threshold_grid(0.0, 1.0, 3), (std::vector<double>{0.0, 0.5, 1.0}));
  auto g = threshold_grid(0.0, 1.0, 101);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
  EXPECT_EQ(threshold_grid(0.3, 0.7, 1), std::vector<double>{0.3});
  EXPECT_THROW(threshold_grid(1.0, 0.0, 3), Error);
  EXPECT_THROW(threshold_grid(0.0, 1.0, 0), Error);
}

TEST(Roc, SeparableScores) {
  std::vector<HScanRow> rows;
  for (int i = 0; i < 5; ++i) rows.push_back(row(GroundTruth::kInBase, 0.1 * i / 5.0));
  for (int i = 0; i < 5; ++i) rows.push_back(row(GroundTruth::kOutOfBase, 0.6 + 0.1 * i));
  auto pts = roc_from_scan(rows, {-1.0, 0.3, 2.0});
  EXPECT_EQ(pts[0].fn_rate, 1.0);
  EXPECT_EQ(pts[0].fp_rate, 0.0);
  EXPECT_EQ(pts[1].fn_rate, 0.0);
  EXPECT_EQ(pts[1].fp_rate, 0.0);
  EXPECT_EQ(pts[2].fn_rate, 0.0);
  EXPECT_EQ(pts[2].fp_rate, 1.0);
}

TEST(Roc, BoundaryIsInclusive) {
  std::vector<HScanRow> rows = {row(GroundTruth::kInBase, 0.5), row(GroundTruth::kOutOfBase, 0.7)};
  auto pts = roc_from_scan(rows, {0.5});
  EXPECT_EQ(pts[0].counts.tp, 1u);
  EXPECT_EQ(pts[0].counts.tn, 1u);
}

TEST(Roc, PropertiesOnRandomScores) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<HScanRow> rows;
    std::size_t n_in = 3 + trial % 7, n_out = 4 + trial % 5;
    for (std::size_t i = 0; i < n_in; ++i) rows.push_back(row(GroundTruth::kInBase, u(rng) * 0.8));
    for (std::size_t i = 0; i < n_out; ++i) rows.push_back(row(GroundTruth::kOutOfBase, 0.2 + u(rng) * 0.8));
    auto grid = threshold_grid(-0.01, 1.01, 57);
    auto pts = roc_from_scan(rows, grid);
    ASSERT_EQ(pts.size(), grid.size());
    EXPECT_EQ(pts.front().fn_rate, 1.0);
    EXPECT_EQ(pts.front().fp_rate, 0.0);
    EXPECT_EQ(pts.back().fn_rate, 0.0);
    EXPECT_EQ(pts.back().fp_rate, 1.0);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const auto& c = pts[k].counts;
      EXPECT_EQ(c.tp + c.fn, n_in);
      EXPECT_EQ(c.fp + c.tn, n_out);
      EXPECT_GE(pts[k].fn_rate, 0.0);
      EXPECT_LE(pts[k].fp_rate, 1.0);
      if (k > 0) {
        EXPECT_LE(pts[k].fn_rate, pts[k - 1].fn_rate);
        EXPECT_GE(pts[k].fp_rate, pts[k - 1].fp_rate);
      }
    }
  }
}

TEST(Roc, InputValidation) {
  std::vector<HScanRow> only_in = {row(GroundTruth::kInBase, 0.1)};
  EXPECT_THROW(roc_from_scan(only_in, {0.5}), Error);
  std::vector<HScanRow> both = {row(GroundTruth::kInBase, 0.1), row(GroundTruth::kOutOfBase, 0.9)};
  EXPECT_THROW(roc_from_scan(both, {0.5, 0.2}), Error);
  EXPECT_THROW(roc_from_scan(both, {}), Error);
}

TEST(NoiseLevels, Mapping) {
  EXPECT_EQ(noise_level("none").variance, 0.0);
  EXPECT_EQ(noise_level("low").variance, 0.001);
  EXPECT_EQ(noise_level("medium").variance, 0.01);
  EXPECT_EQ(noise_level("high").mean, 0.01);
  EXPECT_EQ(noise_level("high").variance, 0.1);
  EXPECT_THROW(noise_level("extreme"), Error);
}

TEST(Csv, HeadersAndMetadata) {
  RunMetadata meta{noise_level("low"), 9, {}, "db.fpdb"};
  std::ostringstream scan, roc;
  std::vector<HScanRow> rows = {row(GroundTruth::kInBase, 0.0), row(GroundTruth::kOutOfBase, 0.25)};
  rows[1].index = 1;
  rows[1].path = "b.tif";
  write_h_scan_csv(scan, meta, rows);
  write_roc_csv(roc, meta, roc_from_scan(rows, {0.0, 1.0}));

  auto data_lines = [](const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
      if (!line.starts_with("#")) out.push_back(line);
    }
    return out;
  };
  auto s = data_lines(scan.str());
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0], "index,truth,h,path");
  EXPECT_EQ(s[2], "1,OutOfBase,0.25,b.tif");
  auto r = data_lines(roc.str());
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0], "threshold,fn_rate,fp_rate,fp,fn,tp,tn");
  EXPECT_EQ(r[1], "0,0,0,0,0,1,1");
  EXPECT_EQ(r[2], "1,0,1,1,0,1,0");
  EXPECT_NE(scan.str().find("# seed: 9"), std::string::npos);
  EXPECT_NE(scan.str().find("variance=0.001"), std::string::npos);
}

}  // namespace
}  // namespace fpc
