#include "fpc/classifier.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "fpc/error.hpp"

namespace fpc {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kInBase: return "InBase";
    case Verdict::kOutOfBase: return "OutOfBase";
    case Verdict::kInconclusive: return "Inconclusive";
  }
  return "unknown";
}

std::string to_string(DecisionMode m) {
  switch (m) {
    case DecisionMode::kHBand: return "h_band";
    case DecisionMode::kLegacyEuclidean: return "legacy_euclidean";
    case DecisionMode::kLegacyMahalanobis: return "legacy_mahalanobis";
    case DecisionMode::kLegacyEuclidEigen: return "legacy_euclid_eigen";
  }
  return "unknown";
}

DecisionMode parse_decision_mode(const std::string& name) {
  if (name == "h_band") return DecisionMode::kHBand;
  if (name == "legacy_euclidean") return DecisionMode::kLegacyEuclidean;
  if (name == "legacy_mahalanobis") return DecisionMode::kLegacyMahalanobis;
  if (name == "legacy_euclid_eigen") return DecisionMode::kLegacyEuclidEigen;
  throw Error(ErrorCode::kInvalidArgument, "unknown decision mode: " + name);
}

void DecisionConfig::validate() const {
  if (!(h_in <= h_out)) {
    throw Error(ErrorCode::kInvalidArgument, "h_in must not exceed h_out");
  }
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha and beta must be positive");
  }
  if (!(epsilon_d > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon_d must be positive");
  }
}

std::string VerificationReport::to_json_line() const {
  nlohmann::ordered_json j;
  j["d_e"] = d_e;
  j["d_m"] = d_m;
  j["argmin_e"] = argmin_e;
  j["argmin_m"] = argmin_m;
  j["h"] = h;
  j["theta_L"] = theta_l;
  j["verdict"] = to_string(verdict);
  j["mode"] = to_string(mode);
  return j.dump();
}

double euclidean(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "euclidean: length mismatch");
  }
  double s = 0.0;
  for (Eigen::Index z = 0; z < a.size(); ++z) {
    double d = a[z] - b[z];
    s += d * d;
  }
  return std::sqrt(s);
}

double mahalanobis(const Eigen::Ref<const Eigen::VectorXd>& omega_k,
                   const Eigen::Ref<const Eigen::VectorXd>& probe,
                   const Eigen::VectorXd& eigenvalues, double epsilon) {
  if (omega_k.size() != probe.size() || probe.size() != eigenvalues.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "mahalanobis: length mismatch");
  }
  const double top = eigenvalues.size() ? eigenvalues.maxCoeff() : 0.0;
  if (!(top > 0.0)) {
    double scale = 1.0 + std::max(omega_k.cwiseAbs().maxCoeff(), probe.cwiseAbs().maxCoeff());
    if ((omega_k - probe).cwiseAbs().maxCoeff() <= 1e-12 * scale) {
      return 0.0;
    }
    throw Error(ErrorCode::kDegenerateSpace,
                "mahalanobis: all eigenvalues are zero but the vectors differ");
  }
  const double cut = epsilon * top;
  double s = 0.0;
  for (Eigen::Index z = 0; z < probe.size(); ++z) {
    if (eigenvalues[z] <= cut) continue;
    double d = omega_k[z] - probe[z];
    s += d * d / eigenvalues[z];
  }
  return std::sqrt(s);
}

double theta_l(const Eigen::MatrixXd& omega) {
  if (omega.cols() < 2) {
    throw Error(ErrorCode::kInsufficientImages, "theta_L needs at least two training columns");
  }
  double best = 0.0;
  for (Eigen::Index j = 0; j < omega.cols(); ++j) {
    for (Eigen::Index k = j + 1; k < omega.cols(); ++k) {
      best = std::max(best, euclidean(omega.col(j), omega.col(k)));
    }
  }
  return 0.5 * best;
}

double h_value(std::span<const double> d_e, std::span<const double> d_m, double epsilon_d) {
  if (d_e.empty() || d_m.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "h_value: empty distance arrays");
  }
  double min_e = *std::min_element(d_e.begin(), d_e.end());
  double min_m = *std::min_element(d_m.begin(), d_m.end());
  if (min_e <= epsilon_d) {
    return 0.0;
  }
  return min_m * min_m / min_e;
}

Verdict decide_h(double h, const DecisionConfig& cfg) {
  if (h <= cfg.h_in) return Verdict::kInBase;
  if (h >= cfg.h_out) return Verdict::kOutOfBase;
  return Verdict::kInconclusive;
}

VerificationReport measure(const EigenSpace& space, const Projection& probe, const DecisionConfig& cfg) {
  if (static_cast<std::size_t>(probe.coords.size()) != space.count()) {
    throw Error(ErrorCode::kDimensionMismatch, "projection length does not match the eigenspace");
  }
  const std::size_t m = space.count();
  VerificationReport r;
  r.mode = cfg.mode;
  r.d_e.resize(m);
  r.d_m.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    auto col = space.omega.col(static_cast<Eigen::Index>(k));
    r.d_e[k] = euclidean(col, probe.coords);
    r.d_m[k] = mahalanobis(col, probe.coords, space.eigenvalues);
  }
  // min_element returns the first minimum, i.e. the lowest index on ties.
  r.argmin_e = static_cast<std::size_t>(std::min_element(r.d_e.begin(), r.d_e.end()) - r.d_e.begin());
  r.argmin_m = static_cast<std::size_t>(std::min_element(r.d_m.begin(), r.d_m.end()) - r.d_m.begin());
  const double guard = cfg.epsilon_d * (1.0 + (m ? space.omega.cwiseAbs().maxCoeff() : 0.0));
  r.h = h_value(r.d_e, r.d_m, guard);
  r.theta_l = theta_l(space.omega);
  return r;
}

namespace {

Verdict legacy_verdict(const EigenSpace& space, const VerificationReport& r, const DecisionConfig& cfg) {
  const double min_e = r.d_e[r.argmin_e];
  const double min_m = r.d_m[r.argmin_m];
  bool in_base = false;
  switch (cfg.mode) {
    case DecisionMode::kLegacyEuclidean: in_base = min_e <= r.theta_l; break;
    case DecisionMode::kLegacyMahalanobis: in_base = min_m <= cfg.alpha * space.lambda_max(); break;
    case DecisionMode::kLegacyEuclidEigen: in_base = min_e <= cfg.beta * space.lambda_max(); break;
    case DecisionMode::kHBand:
      throw Error(ErrorCode::kInvalidArgument, "decide_legacy called with h_band mode");
  }
  return in_base ? Verdict::kInBase : Verdict::kOutOfBase;
}

}  // namespace

Verdict decide_legacy(const EigenSpace& space, const Projection& probe, const DecisionConfig& cfg) {
  if (cfg.mode == DecisionMode::kHBand) {
    throw Error(ErrorCode::kInvalidArgument, "decide_legacy called with h_band mode");
  }
  return legacy_verdict(space, measure(space, probe, cfg), cfg);
}

VerificationReport verify(const EigenSpace& space, const GrayImage& img, const DecisionConfig& cfg,
                          const std::optional<NoiseSpec>& noise) {
  cfg.validate();
  Projection p = noise ? project(space, add_gaussian_noise(img, *noise)) : project(space, img);
  p.noise = noise;
  VerificationReport r = measure(space, p, cfg);
  r.verdict = cfg.mode == DecisionMode::kHBand ? decide_h(r.h, cfg) : legacy_verdict(space, r, cfg);
  return r;
}

}  // namespace fpc
