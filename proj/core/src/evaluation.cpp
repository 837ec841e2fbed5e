#include "fpc/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "fpc/error.hpp"
#include "fpc/version.hpp"

namespace fpc {

std::string to_string(GroundTruth t) { return t == GroundTruth::kInBase ? "InBase" : "OutOfBase"; }

NoiseLevel noise_level(const std::string& name) {
  if (name == "none") return {"none", 0.0, 0.0};
  if (name == "low") return {"low", 0.0, 0.001};
  if (name == "medium") return {"medium", 0.0, 0.01};
  if (name == "high") return {"high", 0.01, 0.1};
  throw Error(ErrorCode::kInvalidArgument, "unknown noise level: " + name);
}

SplitResult split_database(const FingerprintDatabase& db, const std::string& policy) {
  if (policy != "half-fingers") {
    throw Error(ErrorCode::kInvalidArgument, "unknown split policy: " + policy);
  }
  std::set<int> fingers;
  for (const auto& l : db.labels) fingers.insert(l.finger);
  if (fingers.size() < 2) {
    throw Error(ErrorCode::kInsufficientImages, "split needs at least two distinct fingers");
  }
  std::vector<int> sorted(fingers.begin(), fingers.end());
  std::set<int> enrolled(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2));

  std::vector<GrayImage> train_images;
  std::vector<ImageLabel> train_labels;
  SplitResult out;
  out.tests.policy = policy;
  std::vector<TestEntry> outside;
  for (std::size_t m = 0; m < db.count(); ++m) {
    const auto& label = db.labels[m];
    GrayImage img = db.image(m);
    if (enrolled.count(label.finger)) {
      train_images.push_back(img);
      train_labels.push_back(label);
      out.tests.entries.push_back({std::move(img), GroundTruth::kInBase, label.finger, label.path});
    } else {
      outside.push_back({std::move(img), GroundTruth::kOutOfBase, label.finger, label.path});
    }
  }
  out.train = make_database(train_images, std::move(train_labels));
  std::move(outside.begin(), outside.end(), std::back_inserter(out.tests.entries));
  return out;
}

std::vector<HScanRow> h_scan(const EigenSpace& space, const LabeledTestSet& tests, const NoiseLevel& noise,
                             std::uint64_t seed, unsigned threads) {
  const std::size_t n = tests.entries.size();
  std::vector<HScanRow> rows(n);
  const bool noisy = noise.mean != 0.0 || noise.variance != 0.0;
  DecisionConfig cfg;

  auto work = [&](std::size_t i) {
    const auto& e = tests.entries[i];
    std::optional<NoiseSpec> spec;
    if (noisy) spec = NoiseSpec{noise.mean, noise.variance, seed + i};
    auto report = verify(space, e.image, cfg, spec);
    rows[i] = {i, e.truth, report.h, e.path};
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return rows;
  }

  // Each worker writes only its own slots; output order is by index.
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

ConfusionCounts confusion_counts(const std::vector<std::pair<Verdict, GroundTruth>>& rows) {
  ConfusionCounts c;
  for (const auto& [verdict, truth] : rows) {
    if (verdict == Verdict::kInconclusive) {
      throw Error(ErrorCode::kInconclusiveVerdict, "confusion counts need binary verdicts");
    }
    bool accepted = verdict == Verdict::kInBase;
    if (truth == GroundTruth::kInBase) {
      accepted ? ++c.tp : ++c.fn;
    } else {
      accepted ? ++c.fp : ++c.tn;
    }
  }
  return c;
}

std::vector<double> threshold_grid(double tmin, double tmax, std::size_t steps) {
  if (steps == 0) {
    throw Error(ErrorCode::kInvalidArgument, "threshold grid needs at least one step");
  }
  if (!(tmin <= tmax)) {
    throw Error(ErrorCode::kInvalidArgument, "tmin must not exceed tmax");
  }
  std::vector<double> grid(steps);
  if (steps == 1) {
    grid[0] = tmin;
    return grid;
  }
  for (std::size_t i = 0; i < steps; ++i) {
    grid[i] = tmin + (tmax - tmin) * static_cast<double>(i) / static_cast<double>(steps - 1);
  }
  grid.back() = tmax;
  return grid;
}

std::vector<RocPoint> roc_from_scan(const std::vector<HScanRow>& rows, const std::vector<double>& thresholds) {
  if (thresholds.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "threshold list is empty");
  }
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw Error(ErrorCode::kInvalidArgument, "thresholds must be ascending");
  }
  bool has_in = std::any_of(rows.begin(), rows.end(), [](const HScanRow& r) { return r.truth == GroundTruth::kInBase; });
  bool has_out = std::any_of(rows.begin(), rows.end(), [](const HScanRow& r) { return r.truth == GroundTruth::kOutOfBase; });
  if (!has_in || !has_out) {
    throw Error(ErrorCode::kInvalidArgument, "ROC needs probes of both classes");
  }

  std::vector<RocPoint> points;
  points.reserve(thresholds.size());
  std::vector<std::pair<Verdict, GroundTruth>> judged(rows.size());
  for (double t : thresholds) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      judged[i] = {rows[i].h <= t ? Verdict::kInBase : Verdict::kOutOfBase, rows[i].truth};
    }
    RocPoint p;
    p.threshold = t;
    p.counts = confusion_counts(judged);
    p.fn_rate = static_cast<double>(p.counts.fn) / static_cast<double>(p.counts.fn + p.counts.tp);
    p.fp_rate = static_cast<double>(p.counts.fp) / static_cast<double>(p.counts.fp + p.counts.tn);
    points.push_back(p);
  }
  return points;
}

std::vector<RocPoint> roc_sweep(const EigenSpace& space, const LabeledTestSet& tests, const NoiseLevel& noise,
                                std::uint64_t seed, const std::vector<double>& thresholds, unsigned threads) {
  return roc_from_scan(h_scan(space, tests, noise, seed, threads), thresholds);
}

namespace {

void write_metadata(std::ostream& out, const RunMetadata& meta) {
  out << fmt::format("# tool: fpc {}\n", kVersion);
  out << fmt::format("# database: {}\n", meta.database);
  out << fmt::format("# noise_level: {} mean={} variance={}\n", meta.noise.name, meta.noise.mean,
                     meta.noise.variance);
  out << fmt::format("# seed: {} (per-probe seed + index; rng mt19937_64, box-muller)\n", meta.seed);
  out << fmt::format("# edges: {} sigma={} high_pct={} low_ratio={} sobel_factor={}\n",
                     to_string(meta.edges.method), meta.edges.canny_sigma, meta.edges.canny_high_percentile,
                     meta.edges.canny_low_ratio, meta.edges.sobel_threshold_factor);
}

}  // namespace

void write_h_scan_csv(std::ostream& out, const RunMetadata& meta, const std::vector<HScanRow>& rows) {
  write_metadata(out, meta);
  out << "index,truth,h,path\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{}\n", r.index, to_string(r.truth), r.h, r.path);
  }
}

void write_roc_csv(std::ostream& out, const RunMetadata& meta, const std::vector<RocPoint>& points) {
  write_metadata(out, meta);
  out << "threshold,fn_rate,fp_rate,fp,fn,tp,tn\n";
  for (const auto& p : points) {
    out << fmt::format("{},{},{},{},{},{},{}\n", p.threshold, p.fn_rate, p.fp_rate, p.counts.fp,
                       p.counts.fn, p.counts.tp, p.counts.tn);
  }
}

}  // namespace fpc
