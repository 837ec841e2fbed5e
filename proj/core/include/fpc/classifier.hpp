#pragma once

#include <optional>
#include <span>
#include <string>

#include <Eigen/Core>

#include "fpc/eigenspace.hpp"
#include "fpc/imaging.hpp"

namespace fpc {

enum class Verdict { kInBase, kOutOfBase, kInconclusive };

enum class DecisionMode { kHBand, kLegacyEuclidean, kLegacyMahalanobis, kLegacyEuclidEigen };

std::string to_string(Verdict v);
std::string to_string(DecisionMode m);
DecisionMode parse_decision_mode(const std::string& name);

struct DecisionConfig {
  DecisionMode mode = DecisionMode::kHBand;
  double h_in = 0.5;   ///< accept iff H <= h_in
  double h_out = 0.55; ///< reject iff H >= h_out
  double alpha = 1.0;
  double beta = 1.0;
  /// Relative zero-distance guard; the absolute guard used for H is
  /// epsilon_d * (1 + max |Omega|).
  double epsilon_d = 1e-12;

  void validate() const;
};

struct VerificationReport {
  std::vector<double> d_e;
  std::vector<double> d_m;
  std::size_t argmin_e = 0;
  std::size_t argmin_m = 0;
  double h = 0.0;
  double theta_l = 0.0;
  Verdict verdict = Verdict::kInconclusive;
  DecisionMode mode = DecisionMode::kHBand;

  /// One JSON object, no trailing newline.
  std::string to_json_line() const;
};

double euclidean(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b);

/// Eigenvalue-weighted distance. Directions with eigenvalue <= epsilon *
/// lambda_max are excluded. When every eigenvalue is zero the distance is 0
/// for (numerically) equal vectors and an error otherwise.
double mahalanobis(const Eigen::Ref<const Eigen::VectorXd>& omega_k,
                   const Eigen::Ref<const Eigen::VectorXd>& probe,
                   const Eigen::VectorXd& eigenvalues, double epsilon = kRankTolerance);

/// Half the largest pairwise Euclidean distance between columns.
double theta_l(const Eigen::MatrixXd& omega);

/// (min d_m)^2 / min d_e, or 0 when min d_e <= epsilon_d.
double h_value(std::span<const double> d_e, std::span<const double> d_m, double epsilon_d);

Verdict decide_h(double h, const DecisionConfig& cfg);

/// Distances from a projection to every training column, argmins and H.
/// Verdict is left for the caller.
VerificationReport measure(const EigenSpace& space, const Projection& probe, const DecisionConfig& cfg);

Verdict decide_legacy(const EigenSpace& space, const Projection& probe, const DecisionConfig& cfg);

/// Full probe path: optional noise, edge stage and projection, distances,
/// H and the verdict for cfg.mode.
VerificationReport verify(const EigenSpace& space, const GrayImage& img, const DecisionConfig& cfg,
                          const std::optional<NoiseSpec>& noise = std::nullopt);

}  // namespace fpc
