#include "cli.hpp"

#include <filesystem>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "fpc/classifier.hpp"
#include "fpc/eigenspace.hpp"
#include "fpc/error.hpp"
#include "fpc/evaluation.hpp"
#include "fpc/imaging.hpp"
#include "fpc/persistence.hpp"
#include "fpc/version.hpp"

namespace fpc::cli {

namespace {

struct IngestArgs {
  std::string dir;
  std::string pattern = "*";
  std::string out;
};

struct TrainArgs {
  std::string db;
  std::string edges = "none";
  double sigma = EdgeConfig{}.canny_sigma;
  double high_pct = EdgeConfig{}.canny_high_percentile;
  double low_ratio = EdgeConfig{}.canny_low_ratio;
  double sobel_factor = EdgeConfig{}.sobel_threshold_factor;
  std::string split;
  std::string dump_edges;
  std::string out;
};

struct VerifyArgs {
  std::string space;
  std::string image;
  double h_in = DecisionConfig{}.h_in;
  double h_out = DecisionConfig{}.h_out;
  std::string mode = "h_band";
  double alpha = DecisionConfig{}.alpha;
  double beta = DecisionConfig{}.beta;
  std::string noise;
  std::uint64_t seed = 0;
};

struct ScanArgs {
  std::string space;
  std::string db;
  std::string split = "half-fingers";
  std::string noise_level = "none";
  std::string noise;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::size_t steps = 101;
  double tmin = 0.0;
  double tmax = 1.0;
  std::string out;
};

/// "m,v" -> (mean, variance).
std::pair<double, double> parse_noise_pair(const std::string& text) {
  auto comma = text.find(',');
  if (comma == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "--noise expects 'mean,variance'");
  }
  try {
    std::size_t used_m = 0, used_v = 0;
    std::string ms = text.substr(0, comma), vs = text.substr(comma + 1);
    double m = std::stod(ms, &used_m);
    double v = std::stod(vs, &used_v);
    if (used_m != ms.size() || used_v != vs.size()) throw std::invalid_argument("trailing");
    if (v < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "noise variance must be non-negative");
    }
    return {m, v};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kInvalidArgument, "--noise expects 'mean,variance', got '" + text + "'");
  }
}

NoiseLevel resolve_noise(const ScanArgs& a) {
  NoiseLevel level = noise_level(a.noise_level);
  if (!a.noise.empty()) {
    auto [m, v] = parse_noise_pair(a.noise);
    level.mean = m;
    level.variance = v;
  }
  return level;
}

EdgeConfig edge_config(const TrainArgs& a) {
  EdgeConfig cfg;
  cfg.method = parse_edge_method(a.edges);
  cfg.canny_sigma = a.sigma;
  cfg.canny_high_percentile = a.high_pct;
  cfg.canny_low_ratio = a.low_ratio;
  cfg.sobel_threshold_factor = a.sobel_factor;
  cfg.validate();
  return cfg;
}

int do_ingest(const IngestArgs& a, std::ostream& out) {
  auto db = ingest_database(a.dir, a.pattern);
  save_database(db, a.out);
  out << "ingested " << db.count() << " images (" << db.rows << "x" << db.cols << ") into " << a.out << "\n";
  return 0;
}

int do_train(const TrainArgs& a, std::ostream& out) {
  EdgeConfig cfg = edge_config(a);
  if (!a.split.empty() && a.split != "half-fingers") {
    throw Error(ErrorCode::kInvalidArgument, "unknown split policy: " + a.split);
  }
  auto db = load_database(a.db);
  if (!a.split.empty()) {
    db = split_database(db, a.split).train;
  }
  if (!a.dump_edges.empty()) {
    std::filesystem::create_directories(a.dump_edges);
    for (std::size_t m = 0; m < db.count(); ++m) {
      auto name = std::filesystem::path(db.labels[m].path).stem().string();
      if (name.empty()) name = std::to_string(m);
      write_pgm(apply_edge_stage(db.image(m), cfg),
                std::filesystem::path(a.dump_edges) / (std::to_string(m) + "_" + name + ".pgm"));
    }
  }
  auto space = train(db, cfg);
  save_space(space, a.out);
  out << "trained eigenspace: M=" << space.count() << " effective_rank=" << space.effective_rank
      << " edges=" << to_string(cfg.method) << " -> " << a.out << "\n";
  return 0;
}

int do_verify(const VerifyArgs& a, std::ostream& out) {
  DecisionConfig cfg;
  cfg.mode = parse_decision_mode(a.mode);
  cfg.h_in = a.h_in;
  cfg.h_out = a.h_out;
  cfg.alpha = a.alpha;
  cfg.beta = a.beta;
  cfg.validate();
  std::optional<NoiseSpec> noise;
  if (!a.noise.empty()) {
    auto [m, v] = parse_noise_pair(a.noise);
    noise = NoiseSpec{m, v, a.seed};
  }

  auto space = load_space(a.space);
  auto img = load_image(a.image);
  auto report = verify(space, img, cfg, noise);
  out << report.to_json_line() << "\n";
  switch (report.verdict) {
    case Verdict::kInBase: return kExitInBase;
    case Verdict::kOutOfBase: return kExitOutOfBase;
    case Verdict::kInconclusive: return kExitInconclusive;
  }
  return kExitError;
}

struct ScanInputs {
  EigenSpace space;
  SplitResult split;
};

ScanInputs load_scan_inputs(const ScanArgs& a) {
  ScanInputs in;
  in.space = load_space(a.space);
  auto db = load_database(a.db);
  in.split = split_database(db, a.split);
  if (in.split.train.count() != in.space.count() || db.rows != in.space.rows || db.cols != in.space.cols) {
    throw Error(ErrorCode::kDimensionMismatch,
                "eigenspace was not trained on the '" + a.split + "' enrolment half of " + a.db +
                    " (train it with --split " + a.split + ")");
  }
  return in;
}

int do_h_scan(const ScanArgs& a, std::ostream& out) {
  NoiseLevel noise = resolve_noise(a);
  auto in = load_scan_inputs(a);
  auto rows = h_scan(in.space, in.split.tests, noise, a.seed, a.threads);
  std::ostringstream csv;
  write_h_scan_csv(csv, {noise, a.seed, in.space.edge_config, a.db}, rows);
  write_file_atomic(a.out, csv.str());
  out << "wrote " << rows.size() << " rows to " << a.out << "\n";
  return 0;
}

int do_roc(const ScanArgs& a, std::ostream& out) {
  NoiseLevel noise = resolve_noise(a);
  auto grid = threshold_grid(a.tmin, a.tmax, a.steps);
  auto in = load_scan_inputs(a);
  auto points = roc_sweep(in.space, in.split.tests, noise, a.seed, grid, a.threads);
  std::ostringstream csv;
  write_roc_csv(csv, {noise, a.seed, in.space.edge_config, a.db}, points);
  write_file_atomic(a.out, csv.str());
  out << "wrote " << points.size() << " ROC points to " << a.out << "\n";
  return 0;
}

void add_scan_flags(CLI::App* cmd, ScanArgs& a) {
  cmd->add_option("--space", a.space, "Trained eigenspace (.fpcs)")->required();
  cmd->add_option("--db", a.db, "Full database (.fpdb)")->required();
  cmd->add_option("--split", a.split, "Split policy")->check(CLI::IsMember({"half-fingers"}));
  cmd->add_option("--noise-level", a.noise_level, "none|low|medium|high")
      ->check(CLI::IsMember({"none", "low", "medium", "high"}));
  cmd->add_option("--noise", a.noise, "Override the level's mean,variance");
  cmd->add_option("--seed", a.seed, "Base noise seed");
  cmd->add_option("--threads", a.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--out", a.out, "Output CSV")->required();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fingerprint membership verification with PCA eigenspaces and the H statistic", "fpc"};
  app.set_version_flag("--version", std::string("fpc ") + kVersion);
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "Load a directory of images into a database file");
  ingest->add_option("--dir", ingest_args.dir, "Image directory")->required();
  ingest->add_option("--pattern", ingest_args.pattern, "Filename glob");
  ingest->add_option("--out", ingest_args.out, "Output database (.fpdb)")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Build an eigenspace from a database");
  train_cmd->add_option("--db", train_args.db, "Database (.fpdb)")->required();
  train_cmd->add_option("--edges", train_args.edges, "none|sobel|canny")
      ->check(CLI::IsMember({"none", "sobel", "canny"}));
  train_cmd->add_option("--sigma", train_args.sigma, "Canny Gaussian sigma");
  train_cmd->add_option("--high-pct", train_args.high_pct, "Canny strong-threshold percentile");
  train_cmd->add_option("--low-ratio", train_args.low_ratio, "Canny weak/strong ratio");
  train_cmd->add_option("--sobel-factor", train_args.sobel_factor, "Sobel threshold factor");
  train_cmd->add_option("--split", train_args.split, "Train only on the enrolment half (half-fingers)");
  train_cmd->add_option("--dump-edges", train_args.dump_edges, "Write edge images as PGM to this directory");
  train_cmd->add_option("--out", train_args.out, "Output eigenspace (.fpcs)")->required();

  VerifyArgs verify_args;
  auto* verify_cmd = app.add_subcommand("verify", "Decide whether a probe image is in the database");
  verify_cmd->add_option("--space", verify_args.space, "Trained eigenspace (.fpcs)")->required();
  verify_cmd->add_option("--image", verify_args.image, "Probe image (TIFF or PGM)")->required();
  verify_cmd->add_option("--h-in", verify_args.h_in, "Accept when H <= h-in");
  verify_cmd->add_option("--h-out", verify_args.h_out, "Reject when H >= h-out");
  verify_cmd->add_option("--mode", verify_args.mode, "h_band|legacy_euclidean|legacy_mahalanobis|legacy_euclid_eigen")
      ->check(CLI::IsMember({"h_band", "legacy_euclidean", "legacy_mahalanobis", "legacy_euclid_eigen"}));
  verify_cmd->add_option("--alpha", verify_args.alpha, "Mahalanobis threshold factor");
  verify_cmd->add_option("--beta", verify_args.beta, "Euclidean/eigenvalue threshold factor");
  verify_cmd->add_option("--noise", verify_args.noise, "Add Gaussian noise 'mean,variance'");
  verify_cmd->add_option("--seed", verify_args.seed, "Noise seed");

  ScanArgs scan_args;
  auto* scan_cmd = app.add_subcommand("h-scan", "Compute H for every probe of a split database");
  add_scan_flags(scan_cmd, scan_args);

  ScanArgs roc_args;
  auto* roc_cmd = app.add_subcommand("roc", "Sweep the H threshold and report FN/FP rates");
  add_scan_flags(roc_cmd, roc_args);
  roc_cmd->add_option("--steps", roc_args.steps, "Number of thresholds");
  roc_cmd->add_option("--tmin", roc_args.tmin, "First threshold");
  roc_cmd->add_option("--tmax", roc_args.tmax, "Last threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "fpc " << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "fpc: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (*ingest) return do_ingest(ingest_args, out);
    if (*train_cmd) return do_train(train_args, out);
    if (*verify_cmd) return do_verify(verify_args, out);
    if (*scan_cmd) return do_h_scan(scan_args, out);
    if (*roc_cmd) return do_roc(roc_args, out);
  } catch (const std::exception& e) {
    err << "fpc: " << e.what() << "\n";
    return kExitError;
  }
  err << "fpc: no subcommand\n";
  return kExitError;
}

}  // namespace fpc::cli
