#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gwcusum/errors.hpp"
#include "gwcusum/estimate.hpp"
#include "gwcusum/experiments.hpp"
#include "test_support.hpp"

using namespace gwcusum;

namespace {

Eigen::VectorXd y_of(const CountVector& x) {
  Eigen::VectorXd y(x.size() + 1);
  y << x.cast<double>(), 1.0;
  return y;
}

Trajectory two_type_path(double cross, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return simulate(two_type_model(cross), CountVector::Zero(2), n, rng);
}

// Plain least squares of each row of `target` (n x p) on the rows of `design` (n x (p+1)).
Eigen::MatrixXd regress(const Eigen::MatrixXd& design, const Eigen::MatrixXd& target) {
  return design.colPivHouseholderQr().solve(target).transpose();
}

}  // namespace

TEST(Cls, ExactFitPath) {
  const Trajectory t = testsupport::path_1d({1, 2, 3});
  const EstimateSet est = cls_estimate(t, 2);
  EXPECT_NEAR(est.mu_hat(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(est.mu_hat(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(est.V_hat.cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR(est.A_hat.cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR(est.B_hat.cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR(est.I_hat.cwiseAbs().maxCoeff(), 0.0, 1e-12);
  const ResidualSet res = residuals(t, 1, 2, est);
  EXPECT_NEAR(res.M.cwiseAbs().maxCoeff(), 0.0, 1e-12);
  EXPECT_NEAR(res.N.cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Cls, HandNormalEquations) {
  // Path (2, 1, 3): Gram [[5,3],[3,2]], RHS [5,4] gives slope -2, intercept 5.
  const EstimateSet est = cls_estimate(testsupport::path_1d({2, 1, 3}), 2);
  Eigen::Matrix2d gram;
  gram << 5, 3, 3, 2;
  const Eigen::Vector2d sol = gram.inverse() * Eigen::Vector2d(5, 4);
  EXPECT_NEAR(est.mu_hat(0, 0), sol(0), 1e-12);
  EXPECT_NEAR(est.mu_hat(0, 1), sol(1), 1e-12);
}

TEST(Wcls, ExactFitMatchesCls) {
  const Trajectory t = testsupport::path_1d({1, 2, 3});
  const EstimateSet w = wcls_estimate(t, 2);
  EXPECT_NEAR(w.mu_hat(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(w.mu_hat(0, 1), 1.0, 1e-12);
  EXPECT_NEAR(w.V_hat.cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Estimate, ConstantPathIsSingular) {
  const Trajectory t = testsupport::path_1d({4, 4, 4, 4, 4, 4});
  EXPECT_THROW((void)cls_estimate(t, 5), SingularGram);
  EXPECT_THROW((void)wcls_estimate(t, 5), SingularGram);
}

TEST(Estimate, InsufficientData) {
  const Trajectory t = testsupport::path_1d({1, 2, 3});
  EXPECT_THROW((void)cls_estimate(t, 1), InsufficientData);
  EXPECT_THROW((void)cls_estimate(t, 3), InsufficientData);
}

TEST(Cls, NormalEquationOrthogonality) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Trajectory t = two_type_path(0.2 * (seed % 3), 300, seed);
    const EstimateSet est = cls_estimate(t, 300);
    const ResidualSet res = residuals(t, 1, 300, est);
    Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(2, 3);
    double scale = 1.0;
    for (std::size_t n = 1; n <= 300; ++n) {
      cross += res.M.row(n - 1).transpose() * y_of(t[n - 1]).transpose();
      scale = std::max(scale, (t[n].cast<double>() * y_of(t[n - 1]).transpose()).cwiseAbs().maxCoeff());
    }
    EXPECT_LT(cross.cwiseAbs().maxCoeff(), 1e-8 * scale * 300);
    EXPECT_LT(res.M.colwise().sum().cwiseAbs().maxCoeff(), 1e-8 * scale);
  }
}

TEST(Wcls, WeightedOrthogonality) {
  const Trajectory t = two_type_path(0.2, 400, 3);
  const EstimateSet est = wcls_estimate(t, 400);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(2, 3);
  for (std::size_t n = 1; n <= 400; ++n) {
    const Eigen::VectorXd y = y_of(t[n - 1]);
    const Eigen::VectorXd r = t[n].cast<double>() - est.mu_hat * y;
    cross += r * y.transpose() / y.sum();
  }
  EXPECT_LT(cross.cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Cls, MatchesIndependentRegressionChain) {
  const Trajectory t = two_type_path(0.4, 800, 21);
  const std::size_t m = 800;
  const EstimateSet est = cls_estimate(t, m);
  Eigen::MatrixXd design(m, 3), x(m, 2);
  for (std::size_t n = 1; n <= m; ++n) {
    design.row(n - 1) = y_of(t[n - 1]).transpose();
    x.row(n - 1) = t[n].cast<double>().transpose();
  }
  const Eigen::MatrixXd mu = regress(design, x);
  const Eigen::MatrixXd r = x - design * mu.transpose();
  const Eigen::MatrixXd v = regress(design, r.array().square().matrix());
  const Eigen::MatrixXd a = regress(design, r.array().cube().matrix());
  const Eigen::MatrixXd vy = design * v.transpose();
  const Eigen::MatrixXd k4 = regress(design, (r.array().pow(4) - 3.0 * vy.array().square()).matrix());
  const Eigen::MatrixXd b = k4 + 3.0 * v.array().square().matrix();
  EXPECT_LT((est.mu_hat - mu).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((est.V_hat - v).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((est.A_hat - a).cwiseAbs().maxCoeff(), 1e-7);
  EXPECT_LT((est.B_hat - b).cwiseAbs().maxCoeff(), 1e-6);

  const Eigen::VectorXd ybar = design.colwise().mean().transpose();
  const Eigen::MatrixXd yybar = design.transpose() * design / static_cast<double>(m);
  for (int i = 0; i < 2; ++i) {
    const Eigen::VectorXd vi = v.row(i).transpose();
    EXPECT_NEAR(est.I_hat(i, i), vi.dot(ybar), 1e-8);
    EXPECT_NEAR(est.J_hat(2 * i, 2 * i), vi.dot(ybar), 1e-8);
    EXPECT_NEAR(est.J_hat(2 * i, 2 * i + 1), a.row(i).dot(ybar), 1e-7);
    const double nn = (b.row(i).array() - 3.0 * v.row(i).array().square()).matrix().dot(ybar) +
                      2.0 * vi.dot(yybar * vi);
    EXPECT_NEAR(est.J_hat(2 * i + 1, 2 * i + 1), nn, 1e-6);
  }
}

TEST(Estimate, CovarianceStructure) {
  for (Flavor f : {Flavor::Cls, Flavor::Wcls}) {
    const EstimateSet est = estimate(two_type_path(0.2, 500, 4), 500, f);
    EXPECT_EQ(est.I_hat.rows(), 2);
    EXPECT_EQ(est.J_hat.rows(), 4);
    EXPECT_EQ(est.I_hat(0, 1), 0.0);
    EXPECT_EQ(est.I_hat(1, 0), 0.0);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c)
        if (r / 2 != c / 2) EXPECT_EQ(est.J_hat(r, c), 0.0);
    EXPECT_TRUE(est.J_hat.isApprox(est.J_hat.transpose()));
    for (int i = 0; i < 2; ++i) EXPECT_DOUBLE_EQ(est.J_hat(2 * i, 2 * i), est.I_hat(i, i));
  }
}

TEST(Wcls, CovarianceUsesWeightedSums) {
  const Trajectory t = two_type_path(0.2, 600, 6);
  const EstimateSet est = wcls_estimate(t, 600);
  Eigen::VectorXd y2 = Eigen::VectorXd::Zero(3), y3 = Eigen::VectorXd::Zero(3);
  for (std::size_t n = 1; n <= 600; ++n) {
    const Eigen::VectorXd y = y_of(t[n - 1]);
    y2 += y / y.sum();
    y3 += y / std::pow(y.sum(), 1.5);
  }
  y2 /= 600.0;
  y3 /= 600.0;
  for (int i = 0; i < 2; ++i) {
    EXPECT_NEAR(est.I_hat(i, i), est.V_hat.row(i).dot(y2), 1e-10);
    EXPECT_NEAR(est.J_hat(2 * i, 2 * i + 1), est.A_hat.row(i).dot(y3), 1e-10);
  }
}

TEST(Estimate, LargeSampleRecovery) {
  const MomentSet truth = build_moments(two_type_model(0.2));
  const Trajectory t = two_type_path(0.2, 10000, 8);
  for (Flavor f : {Flavor::Cls, Flavor::Wcls}) {
    const EstimateSet est = estimate(t, 10000, f);
    // Across 100 seeds the RMSE is about .01 for the mean matrix and .04 for the innovation column.
    EXPECT_LT((est.mu_hat - truth.mu).leftCols(2).cwiseAbs().maxCoeff(), 0.05) << to_string(f);
    EXPECT_LT((est.mu_hat - truth.mu).col(2).cwiseAbs().maxCoeff(), 0.2) << to_string(f);
  }
}

TEST(Estimate, DeterministicGinarRowsVanish) {
  const EmbeddedGinar e = ginar_embed(GinarSpec{{Law::bernoulli(0.3), Law::poisson(0.3)}, Law::poisson(1.0), {}});
  Rng rng(2);
  const Trajectory t = simulate(e.spec, e.x0, 10000, rng);
  const EstimateSet est = cls_estimate(t, 10000);
  EXPECT_LT(std::abs(est.I_hat(1, 1)), 1e-3);
  EXPECT_GT(est.I_hat(0, 0), 0.1);
}

TEST(Residuals, InterleavingAndDefinition) {
  const Trajectory t = two_type_path(0.2, 300, 12);
  const EstimateSet est = cls_estimate(t, 200);
  const ResidualSet res = residuals(t, 201, 300, est);
  ASSERT_EQ(res.length(), 100);
  const Eigen::MatrixXd st = res.stacked();
  for (Eigen::Index r = 0; r < res.length(); ++r) {
    const std::size_t n = 201 + static_cast<std::size_t>(r);
    const Eigen::VectorXd y = y_of(t[n - 1]);
    const Eigen::VectorXd mres = t[n].cast<double>() - est.mu_hat * y;
    const Eigen::VectorXd nres = mres.array().square().matrix() - est.V_hat * y;
    for (int i = 0; i < 2; ++i) {
      EXPECT_NEAR(res.M(r, i), mres(i), 1e-12);
      EXPECT_NEAR(res.N(r, i), nres(i), 1e-12);
      EXPECT_EQ(st(r, 2 * i), res.M(r, i));
      EXPECT_EQ(st(r, 2 * i + 1), res.N(r, i));
    }
    Eigen::VectorXd mo(2), no(2);
    residual_at(est, t[n - 1], t[n], mo, no);
    EXPECT_EQ(mo.transpose(), res.M.row(r));
  }
  EXPECT_THROW((void)residuals(t, 0, 10, est), RangeError);
  EXPECT_THROW((void)residuals(t, 10, 301, est), RangeError);
  EXPECT_THROW((void)residuals(t, 20, 10, est), RangeError);
}

TEST(Residuals, WeightedForms) {
  const Trajectory t = two_type_path(0.2, 300, 13);
  const EstimateSet est = wcls_estimate(t, 300);
  const ResidualSet res = residuals(t, 5, 5, est);
  const Eigen::VectorXd y = y_of(t[4]);
  const Eigen::VectorXd mres = (t[5].cast<double>() - est.mu_hat * y) / std::sqrt(y.sum());
  const Eigen::VectorXd nres = mres.array().square().matrix() - est.V_hat * y / y.sum();
  EXPECT_NEAR(res.M(0, 0), mres(0), 1e-12);
  EXPECT_NEAR(res.N(0, 1), nres(1), 1e-12);
}

TEST(InvSqrt, IdentityAndDiagonal) {
  EXPECT_TRUE(inv_sqrt(Eigen::MatrixXd::Identity(3, 3), WhitenKind::Diagonal).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  EXPECT_TRUE(inv_sqrt(Eigen::MatrixXd::Identity(4, 4), WhitenKind::Block2x2).isApprox(Eigen::MatrixXd::Identity(4, 4)));
  Eigen::Matrix2d d;
  d << 4, 0, 0, 9;
  const Eigen::MatrixXd w = inv_sqrt(d, WhitenKind::Diagonal);
  EXPECT_DOUBLE_EQ(w(0, 0), 0.5);
  EXPECT_NEAR(w(1, 1), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(w(0, 1), 0.0);
}

TEST(InvSqrt, BlockClosedForm) {
  Eigen::Matrix2d b;
  b << 2, 1, 1, 2;
  const Eigen::MatrixXd w = inv_sqrt(b, WhitenKind::Block2x2);
  EXPECT_LT((w * b * w - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_TRUE(w.isApprox(w.transpose()));
  // Eigen-decomposition oracle: B^{-1/2} = Q diag(1/sqrt(l)) Q'.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(b);
  EXPECT_TRUE(w.isApprox(es.operatorInverseSqrt(), 1e-12));
}

TEST(InvSqrt, RandomSpdBlocks) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(6, 6);
    for (int k = 0; k < 6; k += 2) {
      Eigen::Matrix2d g;
      g << z(gen), z(gen), z(gen), z(gen);
      full.block<2, 2>(k, k) = g * g.transpose() + 0.1 * Eigen::Matrix2d::Identity();
    }
    const Eigen::MatrixXd w = inv_sqrt(full, WhitenKind::Block2x2);
    EXPECT_LT((w * full * w - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(InvSqrt, NotPositiveDefinite) {
  Eigen::Matrix2d d;
  d << 1, 0, 0, 0;
  EXPECT_THROW((void)inv_sqrt(d, WhitenKind::Diagonal), NotPositiveDefinite);
  Eigen::Matrix2d b;
  b << 1, 2, 2, 1;
  EXPECT_THROW((void)inv_sqrt(b, WhitenKind::Block2x2), NotPositiveDefinite);
  EXPECT_THROW((void)inv_sqrt(Eigen::MatrixXd::Identity(3, 3), WhitenKind::Block2x2), InvalidParameter);
}

TEST(Reduce, FullSetIsIdentityAndIdempotent) {
  const Trajectory t = two_type_path(0.2, 300, 14);
  const EstimateSet est = cls_estimate(t, 300);
  const EstimateSet same = reduce(est, {0, 1});
  EXPECT_EQ(same.mu_hat, est.mu_hat);
  EXPECT_EQ(same.J_hat, est.J_hat);
  const EstimateSet once = reduce(est, {1});
  const EstimateSet twice = reduce(once, {1});
  EXPECT_EQ(once.mu_hat, twice.mu_hat);
  EXPECT_EQ(once.I_hat, twice.I_hat);
  EXPECT_EQ(once.J_hat, twice.J_hat);
  EXPECT_EQ(once.types, (IndexSet{1}));
  EXPECT_EQ(once.mu_hat.row(0), est.mu_hat.row(1));
  EXPECT_EQ(once.J_hat, est.J_hat.block(2, 2, 2, 2));
  EXPECT_THROW((void)reduce(est, {}), EmptyReduction);
  EXPECT_THROW((void)reduce(est, {2}), RangeError);
  EXPECT_THROW((void)reduce(once, {0}), RangeError);
}

TEST(Reduce, ResidualsFollowTypes) {
  const Trajectory t = two_type_path(0.2, 300, 15);
  const EstimateSet est = cls_estimate(t, 200);
  const ResidualSet full = residuals(t, 201, 250, est);
  const ResidualSet red = reduce(full, {1});
  EXPECT_EQ(red.M.col(0), full.M.col(1));
  EXPECT_EQ(red.N.col(0), full.N.col(1));
  const ResidualSet direct = residuals(t, 201, 250, reduce(est, {1}));
  EXPECT_TRUE(direct.M.isApprox(red.M));
}

TEST(Reduce, GinarScalarWhitener) {
  const EmbeddedGinar e = ginar_embed(GinarSpec{{Law::bernoulli(0.4), Law::bernoulli(0.3)}, Law::poisson(1.0), {}});
  Rng rng(5);
  const Trajectory t = simulate(e.spec, e.x0, 1000, rng);
  const EstimateSet est = cls_estimate(t, 1000);
  const EstimateSet red = reduce(est, reduction_set(e.spec));
  ASSERT_EQ(red.I_hat.rows(), 1);
  EXPECT_DOUBLE_EQ(red.I_hat(0, 0), est.V_hat.row(0).dot(est.sums.mean_y[0]));
  EXPECT_EQ(red.J_hat, est.J_hat.topLeftCorner(2, 2));
}
