#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "fpc/edges.hpp"
#include "fpc/imaging.hpp"

namespace fpc {

/// Eigenvalues at or below this fraction of the largest count as zero when
/// computing the effective rank.
inline constexpr double kRankTolerance = 1e-10;

/// Negative eigenvalues down to -kClampTolerance * lambda_max are rounding
/// noise and are clamped to zero; anything more negative is an error.
inline constexpr double kClampTolerance = 1e-9;

/// Trained PCA model. Immutable after construction; safe to share across
/// threads for projection.
struct EigenSpace {
  Eigen::VectorXd mean;         ///< mean image, length N*K
  Eigen::MatrixXd basis;        ///< U = A*V, N*K x M, columns not normalized
  Eigen::VectorXd eigenvalues;  ///< length M, descending
  Eigen::MatrixXd omega;        ///< M x M, column m = reduced image m
  std::size_t effective_rank = 0;
  EdgeConfig edge_config;
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t count() const noexcept { return static_cast<std::size_t>(omega.cols()); }
  /// Largest eigenvalue (0 for an empty space).
  double lambda_max() const noexcept { return eigenvalues.size() ? eigenvalues[0] : 0.0; }
};

struct Projection {
  Eigen::VectorXd coords;
  std::string path;
  std::optional<NoiseSpec> noise;
  EdgeMethod edge_method = EdgeMethod::kNone;
};

struct SymmetricEigen {
  Eigen::MatrixXd vectors;  ///< column k pairs with values[k]
  Eigen::VectorXd values;   ///< descending
};

Eigen::VectorXd compute_mean(const Eigen::MatrixXd& data);

/// A = data - mean, column by column.
Eigen::MatrixXd center(const Eigen::MatrixXd& data, const Eigen::VectorXd& mean);

/// R_A = A^T A (M x M). The N*K x N*K covariance A A^T is never formed.
Eigen::MatrixXd reduced_covariance(const Eigen::MatrixXd& centered);

/// Cyclic Jacobi eigensolver for a symmetric matrix. Values sorted descending
/// (stable by original index on ties), small negatives clamped to zero.
SymmetricEigen eig_symmetric(const Eigen::MatrixXd& sym, int max_sweeps = 100);

/// U = A * V.
Eigen::MatrixXd build_space(const Eigen::MatrixXd& centered, const Eigen::MatrixXd& vectors);

/// Omega = U^T A, computed column by column with the same kernel `project`
/// uses so that a training image projects bit-identically onto its column.
Eigen::MatrixXd train_matrix(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& centered);

/// U^T d with a fixed summation order.
Eigen::VectorXd project_centered(const Eigen::MatrixXd& basis, const Eigen::VectorXd& centered);

std::size_t effective_rank(const Eigen::VectorXd& eigenvalues);

/// Edge stage on every image, then mean, centering, snapshot eigenproblem,
/// basis and training matrix.
EigenSpace train(const FingerprintDatabase& db, const EdgeConfig& edge_cfg);

/// Applies the space's own edge configuration, vectorizes, subtracts the
/// mean and projects onto the basis.
Projection project(const EigenSpace& space, const GrayImage& img);

}  // namespace fpc
