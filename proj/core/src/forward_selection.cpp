#include "msk/forward_selection.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace msk {

namespace {

// Argmax of |corr_j|^2 / ||b_j||^2 over non-excluded candidates, optionally
// restricted to those whose weight score z_j clears `min_z`.
Eigen::Index best_gain_index(const Eigen::VectorXd& corr,
                             const Eigen::VectorXd& sq,
                             const std::vector<char>& excluded, double min_z) {
  Eigen::Index best = -1;
  double best_gain = -1.0;
  for (Eigen::Index j = 0; j < corr.size(); ++j) {
    if (j < static_cast<Eigen::Index>(excluded.size()) && excluded[j]) continue;
    if (min_z > 0.0 && std::abs(corr(j)) / sq(j) < min_z) continue;
    const double gain = corr(j) * corr(j) / sq(j);
    if (gain > best_gain) {
      best_gain = gain;
      best = j;
    }
  }
  return best;
}

}  // namespace

SelectionScore select_column(const Eigen::VectorXd& residual,
                             const ScaleColumns& cols,
                             const std::vector<char>& excluded) {
  const Eigen::VectorXd corr = cols.correlations(residual);
  const Eigen::Index best =
      best_gain_index(corr, cols.squared_norms(), excluded, 0.0);
  if (best < 0) {
    throw std::invalid_argument("select_column: all candidate columns excluded");
  }
  return SelectionScore{best, std::abs(corr(best)) / cols.squared_norms()(best)};
}

std::optional<InverseExtension> extend_inverse(
    const Eigen::MatrixXd& gram_inverse, const Eigen::MatrixXd& columns,
    const Eigen::VectorXd& b_new, double tol_indep) {
  const Eigen::Index k = columns.cols();
  const double c = b_new.squaredNorm();
  if (k == 0) {
    if (c <= tol_indep) return std::nullopt;
    InverseExtension ext;
    ext.inverse = Eigen::MatrixXd::Constant(1, 1, 1.0 / c);
    ext.denom = c;
    return ext;
  }
  const Eigen::VectorXd b0 = columns.transpose() * b_new;
  const Eigen::VectorXd m0b0 = gram_inverse * b0;
  const double denom = c - b0.dot(m0b0);
  if (denom <= tol_indep) return std::nullopt;
  const double p = 1.0 / denom;
  InverseExtension ext;
  ext.denom = denom;
  ext.inverse.resize(k + 1, k + 1);
  ext.inverse.topLeftCorner(k, k) = gram_inverse + p * m0b0 * m0b0.transpose();
  ext.inverse.topRightCorner(k, 1) = -p * m0b0;
  ext.inverse.bottomLeftCorner(1, k) = -p * m0b0.transpose();
  ext.inverse(k, k) = p;
  return ext;
}

double independence_quotient(const Eigen::MatrixXd& basis_columns,
                             const Eigen::VectorXd& candidate) {
  if (basis_columns.cols() == 0) return candidate.norm();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis_columns);
  if (qr.rank() < basis_columns.cols()) {
    throw std::invalid_argument("independence_quotient: rank-deficient basis");
  }
  return (candidate - basis_columns * qr.solve(candidate)).norm();
}

ForwardResult forward_select(double eps, const ScaleColumns& cols, int scale,
                             const Eigen::VectorXd& target, double tol_indep,
                             bool record_step_weights) {
  if (!(eps > 0.0)) {
    throw std::invalid_argument("forward_select: eps must be positive");
  }
  const Eigen::Index n = cols.count();
  if (target.size() != n) {
    throw std::invalid_argument("forward_select: target length mismatch");
  }

  ForwardResult out;
  out.basis.scale = scale;
  out.basis.columns.resize(n, 0);
  out.basis.gram_inverse.resize(0, 0);

  Eigen::VectorXd r = target;
  Eigen::VectorXd bt;  // B^T t, grown with the basis
  bt.resize(0);
  Eigen::MatrixXd gram(0, 0);  // B^T B, grown alongside the inverse
  std::vector<char> excluded(static_cast<std::size_t>(n), 0);
  Eigen::Index available = n;
  double mse = r.squaredNorm() / static_cast<double>(n);

  while (available > 0) {
    // Best-gain candidate among those whose score clears eps; termination
    // therefore means every unselected column scores below eps, which the
    // deletion budget and the scale analysis both rely on. (The unrestricted
    // argmax can fall below eps while a shorter column still clears it.)
    const Eigen::VectorXd corr = cols.correlations(r);
    const Eigen::Index index =
        best_gain_index(corr, cols.squared_norms(), excluded, eps);
    if (index < 0) break;
    const SelectionScore pick{index,
                              std::abs(corr(index)) / cols.squared_norms()(index)};

    const Eigen::VectorXd b = cols.column(pick.index);
    const auto ext =
        extend_inverse(out.basis.gram_inverse, out.basis.columns, b, tol_indep);
    if (!ext) {
      // Numerically dependent on the current basis: drop it from the candidate
      // pool and try the next-best column.
      excluded[static_cast<std::size_t>(pick.index)] = 1;
      --available;
      ++out.rejected_dependent;
      continue;
    }

    const Eigen::Index k = out.basis.size();
    const Eigen::VectorXd b0 = out.basis.columns.transpose() * b;
    out.basis.columns.conservativeResize(Eigen::NoChange, k + 1);
    out.basis.columns.col(k) = b;
    out.basis.center_indices.push_back(pick.index);
    bt.conservativeResize(k + 1);
    bt(k) = b.dot(target);
    gram.conservativeResize(k + 1, k + 1);
    gram.topRightCorner(k, 1) = b0;
    gram.bottomLeftCorner(1, k) = b0.transpose();
    gram(k, k) = b.squaredNorm();
    out.basis.gram_inverse = ext->inverse;
    out.basis.weights = out.basis.gram_inverse * bt;
    // One round of iterative refinement with the maintained inverse keeps the
    // incremental weights at direct-solve accuracy without re-inverting.
    out.basis.weights +=
        out.basis.gram_inverse * (bt - gram * out.basis.weights);

    r.noalias() = target - out.basis.columns * out.basis.weights;
    const double new_mse = r.squaredNorm() / static_cast<double>(n);

    ForwardStep step;
    step.center = pick.index;
    step.z = pick.z;
    step.mu = std::sqrt(ext->denom);
    step.mse_before = mse;
    step.mse_after = new_mse;
    if (record_step_weights) step.weights = out.basis.weights;
    out.steps.push_back(std::move(step));

    mse = new_mse;
    excluded[static_cast<std::size_t>(pick.index)] = 1;
    --available;
  }

  out.mse = mse;
  out.residual = std::move(r);
  return out;
}

}  // namespace msk
