#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "gwcusum/estimate.hpp"
#include "gwcusum/model.hpp"
#include "gwcusum/simulate.hpp"

namespace gwcusum::io {

using Json = nlohmann::json;

// Law literals: {"kind":"bernoulli","p":0.5}, {"kind":"poisson","lambda":1.0},
// {"kind":"degenerate","value":1}, {"kind":"pmf","probs":[...]}.
[[nodiscard]] Law law_from_json(const Json& j);
[[nodiscard]] Json law_to_json(const Law& law);

// {"p":2,"offspring":[[law,law],[law,law]],"innovation":[law,law]}; offspring[j][i] is
// the law of type-j children of a type-i parent.
[[nodiscard]] ModelSpec model_from_json(const Json& j);
[[nodiscard]] Json model_to_json(const ModelSpec& spec);

// {"order":2,"zeta":[law,law],"eta":law,"init":[z0,z_-1,...]}
[[nodiscard]] GinarSpec ginar_from_json(const Json& j);
[[nodiscard]] Json ginar_to_json(const GinarSpec& g);

[[nodiscard]] Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// CSV with header `n,x1,...,xp`.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
/// Accepts the `n,x1,...,xp` layout or headerless rows of counts.
[[nodiscard]] Trajectory read_trajectory_csv(std::istream& in);

[[nodiscard]] Json trajectory_metadata(const Trajectory& traj, const std::optional<Json>& spec = std::nullopt);

/// Writes `<prefix>.csv` and the `<prefix>.json` sidecar.
void save_trajectory(const Trajectory& traj, const std::string& prefix,
                     const std::optional<Json>& spec = std::nullopt);
/// Reads a trajectory CSV and, when present, the sidecar next to it.
[[nodiscard]] Trajectory load_trajectory(const std::string& csv_path);

/// Observation count vector from one CSV line of nonnegative integers.
[[nodiscard]] CountVector parse_counts(const std::string& line);

[[nodiscard]] Json matrix_to_json(const Eigen::MatrixXd& mat, const std::vector<std::string>& row_labels,
                                  const std::vector<std::string>& col_labels);
[[nodiscard]] Json estimates_to_json(const EstimateSet& est);
/// Header `n,M1,N1,...`; columns follow the residual set's types (1-based labels).
[[nodiscard]] std::string residuals_csv(const ResidualSet& res);

}  // namespace gwcusum::io
