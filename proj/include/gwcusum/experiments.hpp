#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gwcusum/critvals.hpp"
#include "gwcusum/detect.hpp"
#include "gwcusum/model.hpp"

namespace gwcusum {

inline constexpr const char* kLibraryVersion = "1.0.0";

enum class Scenario { NullTable2Type, PowerTable2Type, GinarTypeComparison };

[[nodiscard]] std::string to_string(Scenario scenario);
[[nodiscard]] Scenario parse_scenario(const std::string& name);

struct StudyConfig {
  Scenario scenario = Scenario::NullTable2Type;
  std::size_t m = 500;
  double horizon = 1.0;  ///< closed-end T; monitoring runs over floor(T m) post-training steps
  std::size_t k_star = 500;
  std::size_t replicates = 1000;
  double gamma = 0.25;
  /// Overall level of the componentwise-max tests; .049375 makes each of two components .025.
  double alpha = 0.049375;
  /// Level of the one-dimensional GINAR Type 1 test.
  double alpha_single = 0.05;
  std::uint64_t seed = 1;
  std::vector<Flavor> flavors{Flavor::Cls, Flavor::Wcls};
  std::vector<double> cross_probs{0.0, 0.2, 0.4};
  std::vector<double> ginar_means{0.2, 0.5, 0.8};
};

/// Paper defaults for a named scenario (m, T, k*, levels).
[[nodiscard]] StudyConfig default_study(Scenario scenario);

void validate(const StudyConfig& cfg);

struct RateCell {
  double rate = 0.0;  ///< percent
  double se = 0.0;    ///< sqrt(rate (100 - rate) / n)
  std::size_t n = 0;  ///< replicates that produced a statistic
  std::size_t failures = 0;
};

struct RateTable {
  std::string title;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<RateCell> cells;  ///< row-major

  [[nodiscard]] const RateCell& at(std::size_t row, std::size_t col) const {
    return cells[row * col_labels.size() + col];
  }
  RateCell& at(std::size_t row, std::size_t col) { return cells[row * col_labels.size() + col]; }
};

/// 2-type model: Bernoulli(.5) own-type offspring, Bernoulli(cross) opposite-type offspring,
/// Poisson(1) innovations.
[[nodiscard]] ModelSpec two_type_model(double cross);

/// GINAR(1) with the given offspring law and Poisson(1) innovations.
[[nodiscard]] GinarSpec ginar1_model(const Law& offspring);

/// Rejection rates under H0 for each cross probability, flavor and open/closed procedure.
[[nodiscard]] RateTable run_null_table(const StudyConfig& cfg, const CriticalValueTable& table);

/// Closed-end rejection rates over the (p1, p2) grid, one table per flavor.
[[nodiscard]] std::vector<RateTable> run_power_table(const StudyConfig& cfg, const CriticalValueTable& table);

struct GinarComparison {
  RateTable type1;  ///< mean detector, psi3 on M
  RateTable type2;  ///< mean-variance detector, psi3 on whitened (M, N)
};

/// Bernoulli(a) -> Poisson(b) offspring change in GINAR(1), closed-end CLS.
[[nodiscard]] GinarComparison run_ginar_comparison(const StudyConfig& cfg, const CriticalValueTable& table);

/// Open-end one-dimensional table with the levels every named scenario reads.
[[nodiscard]] CriticalValueTable study_table(const StudyConfig& cfg, std::size_t paths, std::size_t grid,
                                             std::uint64_t seed);

/// Runs the configured scenario; the ginar scenario yields {type1, type2}.
[[nodiscard]] std::vector<RateTable> run_study(const StudyConfig& cfg, const CriticalValueTable& table);

/// Short names used for output files, parallel to run_study's result.
[[nodiscard]] std::vector<std::string> study_table_names(const StudyConfig& cfg);

/// Long-format CSV: header `row,col,rate,se,n`, one line per cell.
[[nodiscard]] std::string rate_table_csv(const RateTable& table);
/// Fixed-width grid of rates for terminals.
[[nodiscard]] std::string format_rate_table(const RateTable& table);

/// JSON manifest with the full study config, library version, table fingerprint and failure counts.
[[nodiscard]] std::string study_manifest(const StudyConfig& cfg, const CriticalValueTable& table,
                                         const std::vector<RateTable>& tables);

}  // namespace gwcusum
