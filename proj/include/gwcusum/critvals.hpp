#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gwcusum/detect.hpp"

namespace gwcusum {

/// How the d components of the Wiener path are combined at each time point.
enum class SupNorm { MaxAbs, Euclidean };

[[nodiscard]] std::string to_string(SupNorm norm);
[[nodiscard]] SupNorm parse_norm(const std::string& name);

inline constexpr int kTableFormatVersion = 1;

/// Monte Carlo quantiles of sup_{0 < t <= u} |W(t)| / t^gamma, with u = T/(1+T) (u = 1 open-end).
struct CriticalValueTable {
  int version = kTableFormatVersion;
  double gamma = 0.0;
  std::size_t dimension = 1;
  std::optional<double> horizon;
  SupNorm norm = SupNorm::MaxAbs;
  std::vector<double> alphas;  ///< ascending
  std::vector<double> quantiles;
  std::vector<double> standard_errors;
  std::size_t paths = 0;
  std::size_t grid = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const CriticalValueTable&, const CriticalValueTable&) = default;
};

struct QuantileEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Per-path suprema over the grid t_j = j / grid, j = 1..round(time_fraction * grid),
/// of the combined |W(t_j)| / t_j^gamma for a d-dimensional standard Wiener path.
[[nodiscard]] std::vector<double> simulate_sup_statistics(double gamma, std::size_t dimension, std::size_t paths,
                                                          std::size_t grid, std::uint64_t seed,
                                                          double time_fraction = 1.0,
                                                          SupNorm norm = SupNorm::MaxAbs);

/// Order statistic at rank ceil((1 - alpha) n), no interpolation.
[[nodiscard]] double upper_quantile(std::vector<double> sample, double alpha);

/// Quantile with a batch-means standard error over 20 contiguous batches.
[[nodiscard]] QuantileEstimate quantile_with_error(const std::vector<double>& sample, double alpha);

/// Open-end (1 - alpha) quantile; needs paths >= 1e4 and grid >= 1e3.
[[nodiscard]] QuantileEstimate simulate_sup_quantile(double gamma, std::size_t dimension, double alpha,
                                                     std::size_t paths, std::size_t grid, std::uint64_t seed,
                                                     SupNorm norm = SupNorm::MaxAbs);

/// (T / (1 + T))^(1/2 - gamma); 1 for the open-end procedure.
[[nodiscard]] double closed_end_scale(std::optional<double> horizon, double gamma);

/// Per-component level 1 - (1 - alpha)^(1/d) for a max over d independent components.
[[nodiscard]] double componentwise_alpha(double alpha, std::size_t dimension);

[[nodiscard]] CriticalValueTable build_table(double gamma, std::size_t dimension, std::vector<double> alphas,
                                             std::size_t paths, std::size_t grid, std::uint64_t seed,
                                             std::optional<double> horizon = std::nullopt,
                                             SupNorm norm = SupNorm::MaxAbs);

/// Critical value for `config` from `table`. Throws TableMiss when the table cannot serve it.
[[nodiscard]] double critical_value(const MonitorConfig& config, const CriticalValueTable& table);

void save_table(const CriticalValueTable& table, const std::string& path);
[[nodiscard]] CriticalValueTable load_table(const std::string& path);
[[nodiscard]] std::string table_to_json(const CriticalValueTable& table);
[[nodiscard]] CriticalValueTable table_from_json(const std::string& text);

/// True when the table was built with fewer paths or a coarser grid than requested.
[[nodiscard]] bool table_is_stale(const CriticalValueTable& table, std::size_t paths, std::size_t grid);

/// FNV-1a hash of the serialized table, hex encoded.
[[nodiscard]] std::string table_fingerprint(const CriticalValueTable& table);

}  // namespace gwcusum
