#include "msk/kernel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace msk {

double diameter(const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  if (n < 2) {
    throw std::invalid_argument("diameter: need at least 2 points, got " +
                                std::to_string(n));
  }
  double best = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d2 = (X.row(i) - X.row(j)).squaredNorm();
      if (d2 > best) best = d2;
    }
  }
  return std::sqrt(best);
}

double bounding_box_diagonal(const Eigen::MatrixXd& X) {
  if (X.rows() < 2) {
    throw std::invalid_argument("bounding_box_diagonal: need at least 2 points");
  }
  const Eigen::VectorXd lengths =
      (X.colwise().maxCoeff() - X.colwise().minCoeff()).transpose();
  return lengths.norm();
}

double normalizing_constant_from_diameter(double diam) {
  if (!(diam > 0.0)) {
    throw std::invalid_argument(
        "normalizing_constant: zero diameter (all points coincide)");
  }
  const double half = diam / 2.0;
  return 2.0 * half * half;
}

double normalizing_constant(const Eigen::MatrixXd& X) {
  return normalizing_constant_from_diameter(diameter(X));
}

double length_scale(double T, int s) {
  if (!(T > 0.0)) throw std::invalid_argument("length_scale: T must be positive");
  if (s < 0) throw std::invalid_argument("length_scale: s must be non-negative");
  return std::ldexp(T, -s);
}

Eigen::VectorXd kernel_column(const Eigen::MatrixXd& X_eval,
                              const Eigen::RowVectorXd& center, double kappa) {
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("kernel_column: kappa must be positive");
  }
  return ((X_eval.rowwise() - center).rowwise().squaredNorm() / -kappa)
      .array()
      .exp();
}

double min_column_norm(const Eigen::MatrixXd& X, double kappa) {
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("min_column_norm: kappa must be positive");
  }
  const Eigen::Index n = X.rows();
  double best2 = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < n; ++j) {
    const double norm2 =
        kernel_column(X, X.row(j), kappa).squaredNorm();
    if (norm2 < best2) best2 = norm2;
  }
  return std::sqrt(best2);
}

Eigen::VectorXd bounding_box_lengths(const Eigen::MatrixXd& X) {
  return (X.colwise().maxCoeff() - X.colwise().minCoeff()).transpose();
}

double rank_bound_raw(const Eigen::VectorXd& box_lengths, int s, double delta0,
                      double T) {
  if (!(delta0 > 0.0 && delta0 < 1.0)) {
    throw std::invalid_argument("rank_bound: delta0 must lie in (0, 1)");
  }
  if ((box_lengths.array() < 0.0).any()) {
    throw std::invalid_argument("rank_bound: box lengths must be non-negative");
  }
  const double root = std::sqrt(std::ldexp(1.0, s) * std::log(1.0 / delta0));
  double prod = 1.0;
  for (Eigen::Index i = 0; i < box_lengths.size(); ++i) {
    prod *= (2.0 * box_lengths(i) / (std::numbers::pi * std::sqrt(T))) * root + 1.0;
  }
  return prod;
}

long rank_bound(const Eigen::VectorXd& box_lengths, int s, double delta0,
                double T) {
  return static_cast<long>(std::ceil(rank_bound_raw(box_lengths, s, delta0, T)));
}

std::shared_ptr<const Eigen::MatrixXd> pairwise_squared_distances(
    const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  auto d2 = std::make_shared<Eigen::MatrixXd>(n, n);
  d2->diagonal().setZero();
  // Mirrored assignment keeps the matrix exactly symmetric.
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (X.row(i) - X.row(j)).squaredNorm();
      (*d2)(i, j) = v;
      (*d2)(j, i) = v;
    }
  }
  return d2;
}

ScaleColumns::ScaleColumns(const Eigen::MatrixXd& X, double kappa,
                           const std::shared_ptr<const Eigen::MatrixXd>& sq_dists)
    : X_(&X), kappa_(kappa) {
  if (!(kappa > 0.0)) {
    throw std::invalid_argument("ScaleColumns: kappa must be positive");
  }
  const Eigen::Index n = X.rows();
  if (sq_dists) {
    dense_.emplace((sq_dists->array() / -kappa).exp());
    sq_norms_ = dense_->colwise().squaredNorm();
  } else {
    sq_norms_.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      sq_norms_(j) = kernel_column(X, X.row(j), kappa).squaredNorm();
    }
  }
  min_norm_ = std::sqrt(sq_norms_.minCoeff());
}

Eigen::VectorXd ScaleColumns::column(Eigen::Index j) const {
  if (dense_) return dense_->col(j);
  return kernel_column(*X_, X_->row(j), kappa_);
}

Eigen::VectorXd ScaleColumns::correlations(const Eigen::VectorXd& r) const {
  if (dense_) return dense_->transpose() * r;
  const Eigen::Index n = X_->rows();
  Eigen::VectorXd out(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    out(j) = kernel_column(*X_, X_->row(j), kappa_).dot(r);
  }
  return out;
}

}  // namespace msk
