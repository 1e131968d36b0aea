#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include <Eigen/Dense>

#include "gwcusum/errors.hpp"
#include "gwcusum/model.hpp"
#include "gwcusum/simulate.hpp"

namespace gwcusum {

/// Conditional least squares, or its weighted variant that divides the process by sqrt(1'Y_{n-1}).
enum class Flavor { Cls, Wcls };

[[nodiscard]] std::string to_string(Flavor flavor);
[[nodiscard]] Flavor parse_flavor(const std::string& name);

/// Training-sample averages of Y_{n-1} / (1'Y_{n-1})^(kappa/2) and of the outer products.
struct EmpiricalSums {
  std::array<Eigen::VectorXd, 5> mean_y;   ///< indexed by kappa = 0..4
  std::array<Eigen::MatrixXd, 5> mean_yy;  ///< indexed by kappa = 0..4
};

/// Frozen training-sample estimates.
///
/// Rows of the moment matrices follow `types` (original 0-based type indices);
/// a full estimate has types = {0, ..., p-1}, a reduced one keeps a subset.
/// I_hat is diagonal with one entry per kept type; J_hat is block diagonal with
/// one symmetric 2x2 block per kept type.
struct EstimateSet {
  Flavor flavor = Flavor::Cls;
  std::size_t m = 0;
  IndexSet types;
  Eigen::MatrixXd mu_hat;
  Eigen::MatrixXd V_hat;
  Eigen::MatrixXd A_hat;
  Eigen::MatrixXd B_hat;
  Eigen::MatrixXd I_hat;
  Eigen::MatrixXd J_hat;
  EmpiricalSums sums;
  /// Condition numbers of the Gram matrices used for mu, V, A, B (in that order).
  std::array<double, 4> gram_condition{};

  [[nodiscard]] std::size_t full_types() const noexcept {
    return static_cast<std::size_t>(mu_hat.cols()) - 1;
  }
};

/// Residual series over observation indices first..first+rows-1.
struct ResidualSet {
  Flavor flavor = Flavor::Cls;
  std::size_t first = 0;
  IndexSet types;
  Eigen::MatrixXd M;  ///< rows: time, cols: kept types
  Eigen::MatrixXd N;

  [[nodiscard]] Eigen::Index length() const noexcept { return M.rows(); }
  /// Interleaved [M_1, N_1, M_2, N_2, ...] per row.
  [[nodiscard]] Eigen::MatrixXd stacked() const;
};

inline constexpr double kGramConditionLimit = 1e12;

/// CLS estimates from the training sample X_0..X_m.
[[nodiscard]] EstimateSet cls_estimate(const Trajectory& traj, std::size_t m);
/// WCLS estimates from the training sample X_0..X_m.
[[nodiscard]] EstimateSet wcls_estimate(const Trajectory& traj, std::size_t m);
[[nodiscard]] EstimateSet estimate(const Trajectory& traj, std::size_t m, Flavor flavor);

/// Residuals of X_n against the frozen estimates for n in [first, last].
[[nodiscard]] ResidualSet residuals(const Trajectory& traj, std::size_t first, std::size_t last,
                                    const EstimateSet& estimates);

/// Residual pair (M, N) of one transition x_prev -> x, restricted to estimates.types.
void residual_at(const EstimateSet& estimates, const CountVector& x_prev, const CountVector& x,
                 Eigen::Ref<Eigen::VectorXd> m_out, Eigen::Ref<Eigen::VectorXd> n_out);

enum class WhitenKind { Diagonal, Block2x2 };

/// Symmetric W with W * mat * W = I.
///
/// Diagonal: elementwise inverse square roots of the diagonal. Block2x2: closed form
/// per 2x2 block, using sqrt(B) = (B + sqrt(det B) I) / sqrt(tr B + 2 sqrt(det B)).
template <typename Derived>
[[nodiscard]] Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> inv_sqrt(
    const Eigen::MatrixBase<Derived>& mat, WhitenKind kind, typename Derived::Scalar tolerance = 1e-12) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (mat.rows() != mat.cols()) throw InvalidParameter("whitening needs a square matrix");
  const Eigen::Index n = mat.rows();
  Mat out = Mat::Zero(n, n);
  if (kind == WhitenKind::Diagonal) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar d = mat(i, i);
      if (!(d > tolerance)) {
        throw NotPositiveDefinite("diagonal entry " + std::to_string(i) + " is " + std::to_string(d));
      }
      out(i, i) = Scalar(1) / std::sqrt(d);
    }
    return out;
  }
  if (n % 2 != 0) throw InvalidParameter("block whitening needs an even dimension");
  for (Eigen::Index k = 0; k < n; k += 2) {
    const Scalar a = mat(k, k);
    const Scalar b = (mat(k, k + 1) + mat(k + 1, k)) / Scalar(2);
    const Scalar c = mat(k + 1, k + 1);
    const Scalar det = a * c - b * b;
    const Scalar trace = a + c;
    if (!(det > tolerance) || !(trace > Scalar(0))) {
      throw NotPositiveDefinite("2x2 block " + std::to_string(k / 2) + " has determinant " + std::to_string(det));
    }
    const Scalar s = std::sqrt(det);
    const Scalar t = std::sqrt(trace + Scalar(2) * s);
    const Scalar scale = Scalar(1) / (t * s);
    out(k, k) = (c + s) * scale;
    out(k, k + 1) = -b * scale;
    out(k + 1, k) = -b * scale;
    out(k + 1, k + 1) = (a + s) * scale;
  }
  return out;
}

/// Keeps only the types in `keep` (original indices; must be a nonempty subset of the current types).
[[nodiscard]] EstimateSet reduce(const EstimateSet& estimates, const IndexSet& keep);
[[nodiscard]] ResidualSet reduce(const ResidualSet& residuals, const IndexSet& keep);

}  // namespace gwcusum
