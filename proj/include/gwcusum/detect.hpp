#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gwcusum/estimate.hpp"

namespace gwcusum {

/// Euclidean norm (Psi1), fixed direction |c'x| (Psi2), or componentwise max |x_i| (Psi3).
enum class StatisticKind { Psi1, Psi2, Psi3 };

/// Mean-level detector on M residuals, or mean-and-variance detector on interleaved (M, N).
enum class Detector { Mean, MeanVariance };

[[nodiscard]] std::string to_string(StatisticKind kind);
[[nodiscard]] std::string to_string(Detector detector);
[[nodiscard]] StatisticKind parse_statistic(const std::string& name);
[[nodiscard]] Detector parse_detector(const std::string& name);

struct MonitorConfig {
  double gamma = 0.25;
  /// Closed-end horizon T; empty means open-end.
  std::optional<double> horizon;
  double alpha = 0.05;
  StatisticKind statistic = StatisticKind::Psi3;
  /// Direction c for Psi2, in the whitened monitored coordinates.
  Eigen::VectorXd direction;
  Flavor flavor = Flavor::Cls;
  Detector detector = Detector::Mean;
  /// Monitored types (0-based).
  IndexSet reduction;
  double critical_value = 0.0;
};

void validate(const MonitorConfig& config);

/// |R| for the mean detector, 2|R| for the mean-variance detector.
[[nodiscard]] std::size_t monitored_dimension(const MonitorConfig& config);

/// Last tested index floor(T m) of a closed-end procedure; empty for open-end.
[[nodiscard]] std::optional<std::size_t> last_tested_index(const MonitorConfig& config, std::size_t m);

/// Normalizer sqrt(m) (1 + k/m) (k / (m + k))^gamma; zero at k = 0.
template <typename Scalar = double>
[[nodiscard]] Scalar boundary(Scalar gamma, std::size_t m, std::size_t k) {
  if (k == 0) return Scalar(0);
  const Scalar mm = static_cast<Scalar>(m);
  const Scalar kk = static_cast<Scalar>(k);
  return std::sqrt(mm) * (Scalar(1) + kk / mm) * std::pow(kk / (mm + kk), gamma);
}

/// Statistic value at post-training step k >= 1 for an already whitened cumulative sum.
[[nodiscard]] double detector_value(StatisticKind kind, const Eigen::VectorXd& direction,
                                    const Eigen::VectorXd& whitened_cumsum, double gamma, std::size_t m,
                                    std::size_t k);

enum class DecisionKind { Continue, Alarm, HorizonExhausted };

struct Decision {
  DecisionKind kind = DecisionKind::Continue;
  std::size_t k = 0;
  double statistic = 0.0;
};

/// Streaming detector state, frozen on the training sample.
struct MonitorState {
  MonitorConfig config;
  std::size_t m = 0;
  EstimateSet estimates;  ///< reduced to config.reduction
  Eigen::MatrixXd whitener;
  Eigen::VectorXd cumsum;  ///< raw residual cumulative sum over n = m+1..m+k
  std::size_t k = 0;
  double last_statistic = 0.0;
  double running_sup = 0.0;
  std::optional<std::size_t> alarm;
  bool exhausted = false;
  CountVector last_observation;

  /// Whitened cumulative sum at the current k.
  [[nodiscard]] Eigen::VectorXd whitened_cumsum() const { return whitener * cumsum; }
};

/// Estimates on X_0..X_m of `training`, reduces to config.reduction and freezes the whitener.
[[nodiscard]] MonitorState monitor_init(const Trajectory& training, std::size_t m, const MonitorConfig& config);
/// Uses the whole trajectory as training sample (m = last index).
[[nodiscard]] MonitorState monitor_init(const Trajectory& training, const MonitorConfig& config);

/// Feeds X_{m+k+1}. After an alarm or an exhausted closed-end horizon the state no longer changes.
Decision monitor_update(MonitorState& state, const CountVector& x_new);

[[nodiscard]] inline std::optional<std::size_t> stopping_time(const MonitorState& state) { return state.alarm; }

struct OfflineScan {
  std::vector<double> statistics;  ///< index k-1 holds the value at k
  std::optional<std::size_t> tau;
};

/// Batch evaluation of the statistic for k = 1..steps on X_{m+1}..X_{m+steps} of `traj`,
/// using the frozen state (which must still be at k = 0).
[[nodiscard]] OfflineScan offline_scan(const Trajectory& traj, const MonitorState& initial, std::size_t steps);

}  // namespace gwcusum
