#include "gwcusum/estimate.hpp"

#include <algorithm>
#include <vector>

namespace gwcusum {

std::string to_string(Flavor flavor) { return flavor == Flavor::Cls ? "cls" : "wcls"; }

Flavor parse_flavor(const std::string& name) {
  if (name == "cls" || name == "CLS") return Flavor::Cls;
  if (name == "wcls" || name == "WCLS") return Flavor::Wcls;
  throw InvalidParameter("unknown estimator flavor '" + name + "' (expected cls or wcls)");
}

Eigen::MatrixXd ResidualSet::stacked() const {
  Eigen::MatrixXd out(M.rows(), 2 * M.cols());
  for (Eigen::Index i = 0; i < M.cols(); ++i) {
    out.col(2 * i) = M.col(i);
    out.col(2 * i + 1) = N.col(i);
  }
  return out;
}

namespace {

Eigen::VectorXd regressor(const CountVector& x) {
  Eigen::VectorXd y(x.size() + 1);
  y.head(x.size()) = x.cast<double>();
  y(x.size()) = 1.0;
  return y;
}

// Solves coef' = rhs' * gram^-1 after checking the conditioning of gram.
Eigen::MatrixXd gram_solve(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs, double& condition) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  if (!(condition < kGramConditionLimit)) {
    throw SingularGram("Gram matrix of the training regressors is singular (condition " +
                           std::to_string(condition) + ")",
                       condition);
  }
  // rhs is (p+1) x p; the estimate is its transpose times gram^-1.
  return gram.partialPivLu().solve(rhs).transpose();
}

struct TrainingData {
  std::vector<Eigen::VectorXd> y;  // Y_{n-1}, n = 1..m
  std::vector<Eigen::VectorXd> x;  // X_n, n = 1..m
  std::vector<double> s;           // 1'Y_{n-1}
};

TrainingData collect(const Trajectory& traj, std::size_t m) {
  const std::size_t p = traj.p;
  if (p == 0 || traj.observations.empty()) throw InsufficientData("empty trajectory");
  if (m < p + 1) {
    throw InsufficientData("training length m = " + std::to_string(m) + " is below p + 1 = " +
                           std::to_string(p + 1));
  }
  if (traj.last_index() < m) {
    throw InsufficientData("trajectory has " + std::to_string(traj.last_index()) +
                           " transitions, training needs " + std::to_string(m));
  }
  TrainingData data;
  data.y.reserve(m);
  data.x.reserve(m);
  data.s.reserve(m);
  for (std::size_t n = 1; n <= m; ++n) {
    data.y.push_back(regressor(traj[n - 1]));
    data.x.push_back(traj[n].cast<double>());
    data.s.push_back(data.y.back().sum());
  }
  return data;
}

// omega = 0 gives CLS, omega = 1 gives WCLS: every weight is a power of 1'Y_{n-1}.
EstimateSet estimate_impl(const Trajectory& traj, std::size_t m, Flavor flavor) {
  const TrainingData data = collect(traj, m);
  const auto p = static_cast<Eigen::Index>(traj.p);
  const double omega = flavor == Flavor::Wcls ? 1.0 : 0.0;
  const auto count = static_cast<Eigen::Index>(m);

  EstimateSet est;
  est.flavor = flavor;
  est.m = m;
  est.types.resize(traj.p);
  for (std::size_t i = 0; i < traj.p; ++i) est.types[i] = i;

  for (int kappa = 0; kappa <= 4; ++kappa) {
    est.sums.mean_y[kappa] = Eigen::VectorXd::Zero(p + 1);
    est.sums.mean_yy[kappa] = Eigen::MatrixXd::Zero(p + 1, p + 1);
  }
  std::array<Eigen::MatrixXd, 5> gram;
  for (auto& g : gram) g = Eigen::MatrixXd::Zero(p + 1, p + 1);
  for (Eigen::Index n = 0; n < count; ++n) {
    const Eigen::VectorXd& y = data.y[n];
    const Eigen::MatrixXd yy = y * y.transpose();
    for (int kappa = 0; kappa <= 4; ++kappa) {
      const double half = std::pow(data.s[n], -0.5 * kappa);
      est.sums.mean_y[kappa] += y * half;
      est.sums.mean_yy[kappa] += yy * half;
      gram[kappa] += yy * std::pow(data.s[n], -static_cast<double>(kappa));
    }
  }
  for (int kappa = 0; kappa <= 4; ++kappa) {
    est.sums.mean_y[kappa] /= static_cast<double>(m);
    est.sums.mean_yy[kappa] /= static_cast<double>(m);
  }
  const auto gram_for = [&](int kappa) -> const Eigen::MatrixXd& {
    return gram[static_cast<std::size_t>(omega * kappa)];
  };

  // mu
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(p + 1, p);
  for (Eigen::Index n = 0; n < count; ++n) {
    rhs += data.y[n] * data.x[n].transpose() * std::pow(data.s[n], -omega);
  }
  est.mu_hat = gram_solve(gram_for(1), rhs, est.gram_condition[0]);

  // weighted residuals M_n
  std::vector<Eigen::ArrayXd> resid(m);
  for (Eigen::Index n = 0; n < count; ++n) {
    resid[n] = (data.x[n] - est.mu_hat * data.y[n]).array() * std::pow(data.s[n], -0.5 * omega);
  }

  // V
  rhs.setZero();
  for (Eigen::Index n = 0; n < count; ++n) {
    rhs += data.y[n] * resid[n].square().matrix().transpose() * std::pow(data.s[n], -omega);
  }
  est.V_hat = gram_solve(gram_for(2), rhs, est.gram_condition[1]);

  // A
  rhs.setZero();
  for (Eigen::Index n = 0; n < count; ++n) {
    rhs += data.y[n] * resid[n].cube().matrix().transpose() * std::pow(data.s[n], -1.5 * omega);
  }
  est.A_hat = gram_solve(gram_for(3), rhs, est.gram_condition[2]);

  // B via K_n = M^4 - 3 (V Y)^2 + 3 V^(2) Y, all conditional-mean terms scaled by s^-2omega
  const Eigen::MatrixXd v_squared = est.V_hat.array().square().matrix();
  rhs.setZero();
  for (Eigen::Index n = 0; n < count; ++n) {
    const double w2 = std::pow(data.s[n], -2.0 * omega);
    const Eigen::ArrayXd vy = (est.V_hat * data.y[n]).array();
    const Eigen::ArrayXd k =
        resid[n].square().square() - 3.0 * vy.square() * w2 + 3.0 * (v_squared * data.y[n]).array() * w2;
    rhs += data.y[n] * k.matrix().transpose() * w2;
  }
  est.B_hat = gram_solve(gram_for(4), rhs, est.gram_condition[3]);

  // covariance estimators
  const auto kap = [&](int kappa) { return static_cast<std::size_t>(omega * kappa); };
  const Eigen::VectorXd& y_var = est.sums.mean_y[kap(2)];
  const Eigen::VectorXd& y_cov = est.sums.mean_y[kap(3)];
  const Eigen::VectorXd& y_fourth = est.sums.mean_y[kap(4)];
  const Eigen::MatrixXd& yy_fourth = est.sums.mean_yy[kap(4)];
  est.I_hat = Eigen::MatrixXd::Zero(p, p);
  est.J_hat = Eigen::MatrixXd::Zero(2 * p, 2 * p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const Eigen::RowVectorXd v = est.V_hat.row(i);
    const double var_m = v.dot(y_var);
    const double cov_mn = est.A_hat.row(i).dot(y_cov);
    const double var_n = (est.B_hat.row(i) - 3.0 * v.array().square().matrix()).dot(y_fourth) +
                         2.0 * (v * yy_fourth * v.transpose())(0, 0);
    est.I_hat(i, i) = var_m;
    est.J_hat(2 * i, 2 * i) = var_m;
    est.J_hat(2 * i, 2 * i + 1) = cov_mn;
    est.J_hat(2 * i + 1, 2 * i) = cov_mn;
    est.J_hat(2 * i + 1, 2 * i + 1) = var_n;
  }
  return est;
}

std::vector<Eigen::Index> positions_of(const IndexSet& current, const IndexSet& keep) {
  if (keep.empty()) throw EmptyReduction("reduction set is empty");
  IndexSet sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<Eigen::Index> pos;
  for (std::size_t type : sorted) {
    const auto it = std::find(current.begin(), current.end(), type);
    if (it == current.end()) {
      throw RangeError("type " + std::to_string(type) + " is not among the available types");
    }
    pos.push_back(it - current.begin());
  }
  return pos;
}

}  // namespace

EstimateSet cls_estimate(const Trajectory& traj, std::size_t m) { return estimate_impl(traj, m, Flavor::Cls); }

EstimateSet wcls_estimate(const Trajectory& traj, std::size_t m) { return estimate_impl(traj, m, Flavor::Wcls); }

EstimateSet estimate(const Trajectory& traj, std::size_t m, Flavor flavor) { return estimate_impl(traj, m, flavor); }

void residual_at(const EstimateSet& est, const CountVector& x_prev, const CountVector& x,
                 Eigen::Ref<Eigen::VectorXd> m_out, Eigen::Ref<Eigen::VectorXd> n_out) {
  const Eigen::VectorXd y = regressor(x_prev);
  const double s = y.sum();
  const double omega = est.flavor == Flavor::Wcls ? 1.0 : 0.0;
  const double root = std::pow(s, -0.5 * omega);
  const double full = std::pow(s, -omega);
  for (std::size_t r = 0; r < est.types.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    const double mean = est.mu_hat.row(row).dot(y);
    const double resid = (static_cast<double>(x(static_cast<Eigen::Index>(est.types[r]))) - mean) * root;
    m_out(row) = resid;
    n_out(row) = resid * resid - est.V_hat.row(row).dot(y) * full;
  }
}

ResidualSet residuals(const Trajectory& traj, std::size_t first, std::size_t last, const EstimateSet& est) {
  if (first < 1 || first > last || last > traj.last_index()) {
    throw RangeError("residual range [" + std::to_string(first) + ", " + std::to_string(last) +
                     "] outside trajectory 1.." + std::to_string(traj.last_index()));
  }
  if (traj.p != est.full_types()) throw InvalidParameter("estimates were built for a different type count");
  ResidualSet out;
  out.flavor = est.flavor;
  out.first = first;
  out.types = est.types;
  const auto rows = static_cast<Eigen::Index>(last - first + 1);
  const auto cols = static_cast<Eigen::Index>(est.types.size());
  out.M.resize(rows, cols);
  out.N.resize(rows, cols);
  Eigen::VectorXd m_row(cols), n_row(cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t n = first + static_cast<std::size_t>(r);
    residual_at(est, traj[n - 1], traj[n], m_row, n_row);
    out.M.row(r) = m_row.transpose();
    out.N.row(r) = n_row.transpose();
  }
  return out;
}

EstimateSet reduce(const EstimateSet& est, const IndexSet& keep) {
  const auto pos = positions_of(est.types, keep);
  EstimateSet out = est;
  const auto d = static_cast<Eigen::Index>(pos.size());
  const auto cols = est.mu_hat.cols();
  out.types.clear();
  out.mu_hat.resize(d, cols);
  out.V_hat.resize(d, cols);
  out.A_hat.resize(d, cols);
  out.B_hat.resize(d, cols);
  out.I_hat = Eigen::MatrixXd::Zero(d, d);
  out.J_hat = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  for (Eigen::Index r = 0; r < d; ++r) {
    const Eigen::Index src = pos[r];
    out.types.push_back(est.types[src]);
    out.mu_hat.row(r) = est.mu_hat.row(src);
    out.V_hat.row(r) = est.V_hat.row(src);
    out.A_hat.row(r) = est.A_hat.row(src);
    out.B_hat.row(r) = est.B_hat.row(src);
    for (Eigen::Index c = 0; c < d; ++c) {
      out.I_hat(r, c) = est.I_hat(src, pos[c]);
      out.J_hat.block<2, 2>(2 * r, 2 * c) = est.J_hat.block<2, 2>(2 * src, 2 * pos[c]);
    }
  }
  return out;
}

ResidualSet reduce(const ResidualSet& res, const IndexSet& keep) {
  const auto pos = positions_of(res.types, keep);
  ResidualSet out;
  out.flavor = res.flavor;
  out.first = res.first;
  out.M.resize(res.M.rows(), static_cast<Eigen::Index>(pos.size()));
  out.N.resize(res.N.rows(), static_cast<Eigen::Index>(pos.size()));
  for (std::size_t c = 0; c < pos.size(); ++c) {
    out.types.push_back(res.types[pos[c]]);
    out.M.col(static_cast<Eigen::Index>(c)) = res.M.col(pos[c]);
    out.N.col(static_cast<Eigen::Index>(c)) = res.N.col(pos[c]);
  }
  return out;
}

}  // namespace gwcusum
