#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "gwcusum/errors.hpp"
#include "gwcusum/laws.hpp"

namespace gwcusum {

using CountVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Type indices (0-based) of the monitored components.
using IndexSet = std::vector<std::size_t>;

/// p-type Galton-Watson model: offspring(j, i) is the law of the number of
/// type-j children of one type-i individual; innovation[j] the type-j immigrants.
class ModelSpec {
 public:
  ModelSpec(std::size_t p, std::vector<Law> offspring_row_major, std::vector<Law> innovation);

  [[nodiscard]] std::size_t types() const noexcept { return p_; }
  [[nodiscard]] const Law& offspring(std::size_t child_type, std::size_t parent_type) const {
    return offspring_[child_type * p_ + parent_type];
  }
  [[nodiscard]] const Law& innovation(std::size_t type) const { return innovation_[type]; }
  [[nodiscard]] const std::vector<Law>& offspring_laws() const noexcept { return offspring_; }
  [[nodiscard]] const std::vector<Law>& innovation_laws() const noexcept { return innovation_; }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

 private:
  std::size_t p_;
  std::vector<Law> offspring_;
  std::vector<Law> innovation_;
};

/// Mean matrix m (p x p) and the p x (p+1) moment matrices whose last column
/// belongs to the innovations.
struct MomentSet {
  Eigen::MatrixXd m;
  Eigen::MatrixXd mu;
  Eigen::MatrixXd V;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
};

struct GinarSpec {
  std::vector<Law> zeta;  ///< zeta[i] is the offspring law attached to lag i+1
  Law eta;
  /// Initial values, most recent first: [Z_0, Z_-1, ..., Z_-p+1]. Empty means zeros.
  std::vector<std::int64_t> init;

  [[nodiscard]] std::size_t order() const noexcept { return zeta.size(); }
};

struct EmbeddedGinar {
  ModelSpec spec;
  CountVector x0;
};

[[nodiscard]] MomentSet build_moments(const ModelSpec& spec);

/// Largest eigenvalue modulus.
///
/// Nonnegative input runs power iteration on A + I, whose Perron root rho(A) + 1
/// strictly dominates every other eigenvalue modulus. Falls back to a full
/// eigensolve when the iteration stalls or the input has negative entries.
template <typename Derived>
[[nodiscard]] typename Derived::Scalar spectral_radius(const Eigen::MatrixBase<Derived>& matrix,
                                                       double tolerance = 1e-12,
                                                       int max_iterations = 100000) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (matrix.rows() != matrix.cols()) throw InvalidParameter("spectral_radius needs a square matrix");
  const Eigen::Index n = matrix.rows();
  if (n == 0) return Scalar(0);
  const Mat a = matrix;
  if (n == 1) return std::abs(a(0, 0));

  if ((a.array() >= Scalar(0)).all()) {
    const Mat shifted = a + Mat::Identity(n, n);
    Vec x = Vec::Ones(n) / std::sqrt(Scalar(n));
    Scalar estimate = Scalar(0);
    for (int it = 0; it < max_iterations; ++it) {
      Vec y = shifted * x;
      const Scalar norm = y.norm();
      y /= norm;
      const Scalar next = y.dot(shifted * y);
      const bool settled = std::abs(next - estimate) <= tolerance * std::max(Scalar(1), next) &&
                           (y - x).norm() <= std::sqrt(tolerance);
      x = y;
      estimate = next;
      if (settled) return std::max(Scalar(0), estimate - Scalar(1));
    }
  }

  Eigen::EigenSolver<Mat> solver(a, false);
  if (solver.info() != Eigen::Success) throw NonConvergence("eigensolver failed to converge");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Throws Unstable unless rho(m) < 1 - margin.
void assert_stable(const ModelSpec& spec, double margin = 1e-9);

/// Types whose conditional variance row v_i is not identically zero.
/// Throws EmptyReduction if no such type exists.
[[nodiscard]] IndexSet reduction_set(const ModelSpec& spec);

/// Multitype embedding X_n = [Z_n, ..., Z_{n-p+1}] of a GINAR(p) process.
[[nodiscard]] EmbeddedGinar ginar_embed(const GinarSpec& g);

void validate(const GinarSpec& g);

}  // namespace gwcusum
