#include "fpc/eigenspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fpc/error.hpp"

namespace fpc {

Eigen::VectorXd compute_mean(const Eigen::MatrixXd& data) {
  if (data.cols() == 0 || data.rows() == 0) {
    throw Error(ErrorCode::kInsufficientImages, "empty database");
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(data.rows());
  for (Eigen::Index m = 0; m < data.cols(); ++m) {
    sum += data.col(m);
  }
  return sum / static_cast<double>(data.cols());
}

Eigen::MatrixXd center(const Eigen::MatrixXd& data, const Eigen::VectorXd& mean) {
  if (mean.size() != data.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "mean length does not match image size");
  }
  Eigen::MatrixXd a(data.rows(), data.cols());
  for (Eigen::Index m = 0; m < data.cols(); ++m) {
    a.col(m) = data.col(m) - mean;
  }
  return a;
}

Eigen::MatrixXd reduced_covariance(const Eigen::MatrixXd& centered) {
  Eigen::MatrixXd r = centered.transpose() * centered;
  // Exact symmetry; the product kernel does not guarantee it bitwise.
  return (0.5 * (r + r.transpose())).eval();
}

SymmetricEigen eig_symmetric(const Eigen::MatrixXd& sym, int max_sweeps) {
  const Eigen::Index n = sym.rows();
  if (sym.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "eigensolver input is not square");
  }
  const double scale = std::max(1.0, sym.cwiseAbs().maxCoeff());
  if ((sym - sym.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw Error(ErrorCode::kNotSymmetric, "eigensolver input is not symmetric");
  }

  Eigen::MatrixXd a = 0.5 * (sym + sym.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  auto off_norm = [&] {
    double s = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(s);
  };

  const double total = a.norm();
  bool converged = n < 2 || total == 0.0;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    if (off_norm() <= 1e-15 * total) {
      converged = true;
      break;
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (apq == 0.0) continue;
        double app = a(p, p);
        double aqq = a(q, q);
        // Rotation angle from the classic Rutishauser formulation.
        double theta = (aqq - app) / (2.0 * apq);
        double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (std::isinf(theta)) t = 0.5 / theta;
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;

        for (Eigen::Index k = 0; k < n; ++k) {
          double akp = a(k, p);
          double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          double apk = a(p, k);
          double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < n; ++k) {
          double vkp = v(k, p);
          double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && off_norm() > 1e-15 * total) {
    throw Error(ErrorCode::kNoConvergence, "Jacobi eigensolver did not converge");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  SymmetricEigen out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }

  const double top = n ? std::max(out.values.cwiseAbs().maxCoeff(), 0.0) : 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (out.values[k] < 0.0) {
      if (out.values[k] < -kClampTolerance * top) {
        throw Error(ErrorCode::kNegativeEigenvalue,
                    "matrix is not positive semi-definite within tolerance");
      }
      out.values[k] = 0.0;
    }
  }
  return out;
}

Eigen::MatrixXd build_space(const Eigen::MatrixXd& centered, const Eigen::MatrixXd& vectors) {
  if (centered.cols() != vectors.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "basis construction shape mismatch");
  }
  return centered * vectors;
}

Eigen::VectorXd project_centered(const Eigen::MatrixXd& basis, const Eigen::VectorXd& centered) {
  if (basis.rows() != centered.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "probe length does not match the eigenspace");
  }
  Eigen::VectorXd out(basis.cols());
  for (Eigen::Index k = 0; k < basis.cols(); ++k) {
    const double* u = basis.col(k).data();
    const double* d = centered.data();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < centered.size(); ++i) {
      acc += u[i] * d[i];
    }
    out[k] = acc;
  }
  return out;
}

Eigen::MatrixXd train_matrix(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& centered) {
  if (basis.rows() != centered.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "training matrix shape mismatch");
  }
  Eigen::MatrixXd omega(basis.cols(), centered.cols());
  for (Eigen::Index m = 0; m < centered.cols(); ++m) {
    omega.col(m) = project_centered(basis, centered.col(m));
  }
  return omega;
}

std::size_t effective_rank(const Eigen::VectorXd& eigenvalues) {
  if (eigenvalues.size() == 0 || eigenvalues[0] <= 0.0) return 0;
  const double cut = kRankTolerance * eigenvalues[0];
  return static_cast<std::size_t>((eigenvalues.array() > cut).count());
}

EigenSpace train(const FingerprintDatabase& db, const EdgeConfig& edge_cfg) {
  if (db.count() < 2) {
    throw Error(ErrorCode::kInsufficientImages, "insufficient images: need at least 2");
  }
  edge_cfg.validate();

  Eigen::MatrixXd data(db.data.rows(), db.data.cols());
  if (edge_cfg.method == EdgeMethod::kNone) {
    data = db.data;
  } else {
    for (std::size_t m = 0; m < db.count(); ++m) {
      data.col(static_cast<Eigen::Index>(m)) = vectorize(apply_edge_stage(db.image(m), edge_cfg)).values;
    }
  }

  EigenSpace space;
  space.rows = db.rows;
  space.cols = db.cols;
  space.edge_config = edge_cfg;
  space.mean = compute_mean(data);
  Eigen::MatrixXd a = center(data, space.mean);
  SymmetricEigen eig = eig_symmetric(reduced_covariance(a));
  space.eigenvalues = eig.values;
  space.basis = build_space(a, eig.vectors);
  space.omega = train_matrix(space.basis, a);
  space.effective_rank = effective_rank(space.eigenvalues);
  return space;
}

Projection project(const EigenSpace& space, const GrayImage& img) {
  if (img.rows() != space.rows || img.cols() != space.cols) {
    throw Error(ErrorCode::kDimensionMismatch,
                "probe is " + std::to_string(img.rows()) + "x" + std::to_string(img.cols()) +
                    ", eigenspace expects " + std::to_string(space.rows) + "x" +
                    std::to_string(space.cols));
  }
  Eigen::VectorXd x = vectorize(apply_edge_stage(img, space.edge_config)).values;
  Projection p;
  p.coords = project_centered(space.basis, (x - space.mean).eval());
  p.edge_method = space.edge_config.method;
  return p;
}

}  // namespace fpc
