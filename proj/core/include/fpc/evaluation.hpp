#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "fpc/classifier.hpp"
#include "fpc/eigenspace.hpp"
#include "fpc/imaging.hpp"

namespace fpc {

enum class GroundTruth { kInBase, kOutOfBase };

std::string to_string(GroundTruth t);

struct TestEntry {
  GrayImage image;
  GroundTruth truth = GroundTruth::kInBase;
  int finger = 0;
  std::string path;
};

struct LabeledTestSet {
  std::vector<TestEntry> entries;
  std::string policy;
};

struct HScanRow {
  std::size_t index = 0;
  GroundTruth truth = GroundTruth::kInBase;
  double h = 0.0;
  std::string path;
};

struct ConfusionCounts {
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tp = 0;
  std::size_t tn = 0;

  bool operator==(const ConfusionCounts&) const = default;
};

struct RocPoint {
  double threshold = 0.0;
  double fn_rate = 0.0;
  double fp_rate = 0.0;
  ConfusionCounts counts;
};

struct NoiseLevel {
  std::string name;
  double mean = 0.0;
  double variance = 0.0;
};

/// none (0, 0), low (0, 0.001), medium (0, 0.01), high (0.01, 0.1).
NoiseLevel noise_level(const std::string& name);

struct SplitResult {
  FingerprintDatabase train;
  LabeledTestSet tests;
};

/// "half-fingers": fingers sorted ascending, the first half (all
/// impressions) is enrolled, the rest are out-of-base probes. Every enrolled
/// image is also probed as in-base. With an odd finger count the extra
/// finger goes to the probe half.
SplitResult split_database(const FingerprintDatabase& db, const std::string& policy = "half-fingers");

/// H for every test entry, in input order. Probe i gets noise seed
/// `seed + i`. Work is spread over `threads` workers (0 = hardware
/// concurrency); the result does not depend on the thread count.
std::vector<HScanRow> h_scan(const EigenSpace& space, const LabeledTestSet& tests, const NoiseLevel& noise,
                             std::uint64_t seed, unsigned threads = 0);

/// Throws kInconclusiveVerdict if any verdict is Inconclusive.
ConfusionCounts confusion_counts(const std::vector<std::pair<Verdict, GroundTruth>>& rows);

/// `steps` evenly spaced thresholds from tmin to tmax inclusive.
std::vector<double> threshold_grid(double tmin, double tmax, std::size_t steps);

/// Binary rule per threshold: InBase iff H <= t.
std::vector<RocPoint> roc_from_scan(const std::vector<HScanRow>& rows, const std::vector<double>& thresholds);

std::vector<RocPoint> roc_sweep(const EigenSpace& space, const LabeledTestSet& tests, const NoiseLevel& noise,
                                std::uint64_t seed, const std::vector<double>& thresholds,
                                unsigned threads = 0);

/// Provenance written as '#' comment lines ahead of CSV output.
struct RunMetadata {
  NoiseLevel noise;
  std::uint64_t seed = 0;
  EdgeConfig edges;
  std::string database;
};

void write_h_scan_csv(std::ostream& out, const RunMetadata& meta, const std::vector<HScanRow>& rows);
void write_roc_csv(std::ostream& out, const RunMetadata& meta, const std::vector<RocPoint>& points);

}  // namespace fpc
