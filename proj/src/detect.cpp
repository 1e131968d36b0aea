#include "gwcusum/detect.hpp"

#include <algorithm>

namespace gwcusum {

std::string to_string(StatisticKind kind) {
  switch (kind) {
    case StatisticKind::Psi1:
      return "psi1";
    case StatisticKind::Psi2:
      return "psi2";
    case StatisticKind::Psi3:
      return "psi3";
  }
  return "unknown";
}

std::string to_string(Detector detector) { return detector == Detector::Mean ? "mean" : "mean-variance"; }

StatisticKind parse_statistic(const std::string& name) {
  if (name == "psi1") return StatisticKind::Psi1;
  if (name == "psi2") return StatisticKind::Psi2;
  if (name == "psi3") return StatisticKind::Psi3;
  throw InvalidParameter("unknown statistic '" + name + "' (expected psi1, psi2 or psi3)");
}

Detector parse_detector(const std::string& name) {
  if (name == "mean" || name == "y" || name == "Y") return Detector::Mean;
  if (name == "mean-variance" || name == "meanvar" || name == "z" || name == "Z") return Detector::MeanVariance;
  throw InvalidParameter("unknown detector '" + name + "' (expected mean or mean-variance)");
}

void validate(const MonitorConfig& config) {
  if (!(config.gamma >= 0.0 && config.gamma < 0.5)) throw InvalidParameter("gamma must lie in [0, 0.5)");
  if (config.horizon && !(*config.horizon > 0.0)) throw InvalidParameter("closed-end horizon T must be positive");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw InvalidParameter("alpha must lie in (0, 1)");
  if (config.reduction.empty()) throw EmptyReduction("monitor needs a nonempty set of monitored types");
  if (config.statistic == StatisticKind::Psi2) {
    if (static_cast<std::size_t>(config.direction.size()) != monitored_dimension(config)) {
      throw InvalidParameter("psi2 direction must have " + std::to_string(monitored_dimension(config)) +
                             " components");
    }
    if (config.direction.norm() == 0.0) throw InvalidParameter("psi2 direction must be nonzero");
  }
}

std::size_t monitored_dimension(const MonitorConfig& config) {
  return config.reduction.size() * (config.detector == Detector::Mean ? 1 : 2);
}

std::optional<std::size_t> last_tested_index(const MonitorConfig& config, std::size_t m) {
  if (!config.horizon) return std::nullopt;
  return static_cast<std::size_t>(std::floor(*config.horizon * static_cast<double>(m)));
}

double detector_value(StatisticKind kind, const Eigen::VectorXd& direction, const Eigen::VectorXd& whitened,
                      double gamma, std::size_t m, std::size_t k) {
  if (k == 0) throw InvalidParameter("statistic is defined for k >= 1");
  double numerator = 0.0;
  switch (kind) {
    case StatisticKind::Psi1:
      numerator = whitened.norm();
      break;
    case StatisticKind::Psi2:
      numerator = std::abs(direction.dot(whitened));
      break;
    case StatisticKind::Psi3:
      numerator = whitened.size() == 0 ? 0.0 : whitened.cwiseAbs().maxCoeff();
      break;
  }
  return numerator / boundary(gamma, m, k);
}

namespace {

// Residual vector fed into the cumulative sum: M for the mean detector, interleaved (M, N) otherwise.
void transition_residual(const MonitorState& state, const CountVector& x_prev, const CountVector& x,
                         Eigen::VectorXd& m_buf, Eigen::VectorXd& n_buf, Eigen::VectorXd& out) {
  residual_at(state.estimates, x_prev, x, m_buf, n_buf);
  if (state.config.detector == Detector::Mean) {
    out = m_buf;
    return;
  }
  for (Eigen::Index i = 0; i < m_buf.size(); ++i) {
    out(2 * i) = m_buf(i);
    out(2 * i + 1) = n_buf(i);
  }
}

}  // namespace

MonitorState monitor_init(const Trajectory& training, std::size_t m, const MonitorConfig& config) {
  validate(config);
  MonitorState state;
  state.config = config;
  state.m = m;
  state.estimates = reduce(estimate(training, m, config.flavor), config.reduction);
  if (config.detector == Detector::Mean) {
    state.whitener = inv_sqrt(state.estimates.I_hat, WhitenKind::Diagonal);
  } else {
    state.whitener = inv_sqrt(state.estimates.J_hat, WhitenKind::Block2x2);
  }
  state.cumsum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(monitored_dimension(config)));
  state.last_observation = training[m];
  const auto last = last_tested_index(config, m);
  state.exhausted = last && *last == 0;
  return state;
}

MonitorState monitor_init(const Trajectory& training, const MonitorConfig& config) {
  return monitor_init(training, training.last_index(), config);
}

Decision monitor_update(MonitorState& state, const CountVector& x_new) {
  if (state.alarm) return {DecisionKind::Alarm, *state.alarm, state.last_statistic};
  if (state.exhausted) return {DecisionKind::HorizonExhausted, state.k, state.last_statistic};
  if (static_cast<std::size_t>(x_new.size()) != state.estimates.full_types()) {
    throw InvalidParameter("observation has " + std::to_string(x_new.size()) + " components, expected " +
                           std::to_string(state.estimates.full_types()));
  }

  const auto d = static_cast<Eigen::Index>(state.estimates.types.size());
  Eigen::VectorXd m_buf(d), n_buf(d), r(state.cumsum.size());
  transition_residual(state, state.last_observation, x_new, m_buf, n_buf, r);
  state.cumsum += r;
  state.k += 1;
  state.last_observation = x_new;

  const Eigen::VectorXd whitened = state.whitener * state.cumsum;
  const double stat = detector_value(state.config.statistic, state.config.direction, whitened,
                                     state.config.gamma, state.m, state.k);
  state.last_statistic = stat;
  state.running_sup = std::max(state.running_sup, stat);
  if (stat > state.config.critical_value) {
    state.alarm = state.k;
    return {DecisionKind::Alarm, state.k, stat};
  }
  const auto last = last_tested_index(state.config, state.m);
  if (last && state.k >= *last) {
    state.exhausted = true;
    return {DecisionKind::HorizonExhausted, state.k, stat};
  }
  return {DecisionKind::Continue, state.k, stat};
}

OfflineScan offline_scan(const Trajectory& traj, const MonitorState& initial, std::size_t steps) {
  if (initial.k != 0) throw InvalidParameter("offline scan needs a freshly initialized state");
  OfflineScan scan;
  if (steps == 0) return scan;
  const ResidualSet res = residuals(traj, initial.m + 1, initial.m + steps, initial.estimates);
  const Eigen::MatrixXd rows = initial.config.detector == Detector::Mean ? res.M : res.stacked();
  Eigen::VectorXd cumsum = Eigen::VectorXd::Zero(rows.cols());
  scan.statistics.reserve(steps);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    cumsum += rows.row(r).transpose();
    const auto k = static_cast<std::size_t>(r) + 1;
    const Eigen::VectorXd whitened = initial.whitener * cumsum;
    const double stat = detector_value(initial.config.statistic, initial.config.direction, whitened,
                                       initial.config.gamma, initial.m, k);
    scan.statistics.push_back(stat);
    if (!scan.tau && stat > initial.config.critical_value) scan.tau = k;
  }
  return scan;
}

}  // namespace gwcusum
