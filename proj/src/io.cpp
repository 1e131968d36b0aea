#include "gwcusum/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gwcusum/errors.hpp"

namespace gwcusum::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string sidecar_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

}  // namespace

Law law_from_json(const Json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "bernoulli") return Law::bernoulli(j.at("p").get<double>());
    if (kind == "poisson") return Law::poisson(j.at("lambda").get<double>());
    if (kind == "degenerate") return Law::degenerate(j.at("value").get<std::int64_t>());
    if (kind == "pmf") return Law::finite_pmf(j.at("probs").get<std::vector<double>>());
    throw InvalidParameter("unknown law kind '" + kind + "'");
  } catch (const Json::exception& e) {
    throw InvalidParameter(std::string("malformed law literal: ") + e.what());
  }
}

Json law_to_json(const Law& law) {
  switch (law.kind()) {
    case LawKind::Bernoulli:
      return {{"kind", "bernoulli"}, {"p", law.parameter()}};
    case LawKind::Poisson:
      return {{"kind", "poisson"}, {"lambda", law.parameter()}};
    case LawKind::Degenerate:
      return {{"kind", "degenerate"}, {"value", law.value()}};
    case LawKind::FinitePmf:
      return {{"kind", "pmf"}, {"probs", law.probabilities()}};
  }
  return {};
}

ModelSpec model_from_json(const Json& j) {
  try {
    const auto p = j.at("p").get<std::size_t>();
    const Json& grid = j.at("offspring");
    if (!grid.is_array() || grid.size() != p) throw InvalidParameter("offspring must be a p x p array of laws");
    std::vector<Law> offspring;
    for (const Json& row : grid) {
      if (!row.is_array() || row.size() != p) throw InvalidParameter("offspring must be a p x p array of laws");
      for (const Json& law : row) offspring.push_back(law_from_json(law));
    }
    std::vector<Law> innovation;
    for (const Json& law : j.at("innovation")) innovation.push_back(law_from_json(law));
    return ModelSpec(p, std::move(offspring), std::move(innovation));
  } catch (const Json::exception& e) {
    throw InvalidParameter(std::string("malformed model config: ") + e.what());
  }
}

Json model_to_json(const ModelSpec& spec) {
  Json grid = Json::array();
  for (std::size_t j = 0; j < spec.types(); ++j) {
    Json row = Json::array();
    for (std::size_t i = 0; i < spec.types(); ++i) row.push_back(law_to_json(spec.offspring(j, i)));
    grid.push_back(row);
  }
  Json innovation = Json::array();
  for (const Law& law : spec.innovation_laws()) innovation.push_back(law_to_json(law));
  return {{"p", spec.types()}, {"offspring", grid}, {"innovation", innovation}};
}

GinarSpec ginar_from_json(const Json& j) {
  try {
    GinarSpec g{{}, law_from_json(j.at("eta")), {}};
    for (const Json& law : j.at("zeta")) g.zeta.push_back(law_from_json(law));
    if (j.contains("order") && j.at("order").get<std::size_t>() != g.zeta.size()) {
      throw InvalidParameter("GINAR order does not match the number of zeta laws");
    }
    if (j.contains("init")) g.init = j.at("init").get<std::vector<std::int64_t>>();
    validate(g);
    return g;
  } catch (const Json::exception& e) {
    throw InvalidParameter(std::string("malformed GINAR config: ") + e.what());
  }
}

Json ginar_to_json(const GinarSpec& g) {
  Json zeta = Json::array();
  for (const Law& law : g.zeta) zeta.push_back(law_to_json(law));
  Json out{{"order", g.order()}, {"zeta", zeta}, {"eta", law_to_json(g.eta)}};
  if (!g.init.empty()) out["init"] = g.init;
  return out;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("failed writing " + path);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << 'n';
  for (std::size_t i = 1; i <= traj.p; ++i) out << ",x" << i;
  out << '\n';
  for (std::size_t n = 0; n < traj.observations.size(); ++n) {
    out << n;
    for (Eigen::Index i = 0; i < traj[n].size(); ++i) out << ',' << traj[n](i);
    out << '\n';
  }
}

CountVector parse_counts(const std::string& line) {
  const auto fields = split(trim(line), ',');
  CountVector x(static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string f = trim(fields[i]);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(f, &used);
    } catch (const std::exception&) {
      throw IoError("not an integer count: '" + f + "'");
    }
    if (used != f.size() || v < 0) throw IoError("not a nonnegative integer count: '" + f + "'");
    x(static_cast<Eigen::Index>(i)) = v;
  }
  return x;
}

Trajectory read_trajectory_csv(std::istream& in) {
  Trajectory traj;
  std::string line;
  bool indexed = false;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (first) {
      first = false;
      const auto fields = split(trim(line), ',');
      if (!fields.empty() && trim(fields[0]) == "n") {
        indexed = true;
        traj.p = fields.size() - 1;
        continue;
      }
    }
    CountVector row = parse_counts(line);
    if (indexed) {
      if (row.size() < 2) throw IoError("trajectory row needs an index and at least one count");
      row = CountVector(row.tail(row.size() - 1));
    }
    if (traj.p == 0) traj.p = static_cast<std::size_t>(row.size());
    if (static_cast<std::size_t>(row.size()) != traj.p) {
      throw IoError("trajectory row has " + std::to_string(row.size()) + " counts, expected " +
                    std::to_string(traj.p));
    }
    traj.observations.push_back(std::move(row));
  }
  if (traj.observations.empty()) throw IoError("trajectory file has no observations");
  return traj;
}

Json trajectory_metadata(const Trajectory& traj, const std::optional<Json>& spec) {
  Json j{{"p", traj.p}, {"length", traj.observations.size()}};
  j["m"] = traj.training_length ? Json(*traj.training_length) : Json(nullptr);
  j["k_star"] = traj.change_index ? Json(*traj.change_index) : Json(nullptr);
  j["seed"] = traj.seed ? Json(*traj.seed) : Json(nullptr);
  if (spec) j["spec"] = *spec;
  return j;
}

void save_trajectory(const Trajectory& traj, const std::string& prefix, const std::optional<Json>& spec) {
  std::ofstream csv(prefix + ".csv");
  if (!csv) throw IoError("cannot write " + prefix + ".csv");
  write_trajectory_csv(traj, csv);
  write_text_file(prefix + ".json", trajectory_metadata(traj, spec).dump(2) + "\n");
}

Trajectory load_trajectory(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open " + csv_path);
  Trajectory traj = read_trajectory_csv(in);
  const std::string meta_path = sidecar_path(csv_path);
  if (std::filesystem::exists(meta_path)) {
    const Json meta = read_json_file(meta_path);
    if (meta.contains("m") && !meta["m"].is_null()) traj.training_length = meta["m"].get<std::size_t>();
    if (meta.contains("k_star") && !meta["k_star"].is_null()) traj.change_index = meta["k_star"].get<std::size_t>();
    if (meta.contains("seed") && !meta["seed"].is_null()) traj.seed = meta["seed"].get<std::uint64_t>();
  }
  return traj;
}

Json matrix_to_json(const Eigen::MatrixXd& mat, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels) {
  Json data = Json::array();
  for (Eigen::Index r = 0; r < mat.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < mat.cols(); ++c) row.push_back(mat(r, c));
    data.push_back(row);
  }
  return {{"rows", mat.rows()}, {"cols", mat.cols()}, {"row_labels", row_labels}, {"col_labels", col_labels},
          {"data", data}};
}

Json estimates_to_json(const EstimateSet& est) {
  std::vector<std::string> rows, cols, mn_labels;
  for (std::size_t t : est.types) {
    rows.push_back("type" + std::to_string(t + 1));
    mn_labels.push_back("M" + std::to_string(t + 1));
    mn_labels.push_back("N" + std::to_string(t + 1));
  }
  for (std::size_t i = 1; i <= est.full_types(); ++i) cols.push_back("x" + std::to_string(i));
  cols.emplace_back("innovation");
  std::vector<std::string> m_labels;
  for (std::size_t t : est.types) m_labels.push_back("M" + std::to_string(t + 1));

  Json types = Json::array();
  for (std::size_t t : est.types) types.push_back(t + 1);
  return {{"flavor", to_string(est.flavor)},
          {"m", est.m},
          {"p", est.full_types()},
          {"types", types},
          {"mu_hat", matrix_to_json(est.mu_hat, rows, cols)},
          {"V_hat", matrix_to_json(est.V_hat, rows, cols)},
          {"A_hat", matrix_to_json(est.A_hat, rows, cols)},
          {"B_hat", matrix_to_json(est.B_hat, rows, cols)},
          {"I_hat", matrix_to_json(est.I_hat, m_labels, m_labels)},
          {"J_hat", matrix_to_json(est.J_hat, mn_labels, mn_labels)},
          {"gram_condition", est.gram_condition}};
}

std::string residuals_csv(const ResidualSet& res) {
  std::ostringstream os;
  os.precision(17);
  os << 'n';
  for (std::size_t t : res.types) os << ",M" << t + 1 << ",N" << t + 1;
  os << '\n';
  for (Eigen::Index r = 0; r < res.length(); ++r) {
    os << res.first + static_cast<std::size_t>(r);
    for (Eigen::Index c = 0; c < res.M.cols(); ++c) os << ',' << res.M(r, c) << ',' << res.N(r, c);
    os << '\n';
  }
  return os.str();
}

}  // namespace gwcusum::io
