#include "gwcusum/critvals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gwcusum/errors.hpp"
#include "gwcusum/rng.hpp"

namespace gwcusum {

namespace {

constexpr std::size_t kPathsPerBlock = 1000;
constexpr std::size_t kErrorBatches = 20;
constexpr double kAlphaMatch = 1e-9;

}  // namespace

std::string to_string(SupNorm norm) { return norm == SupNorm::MaxAbs ? "maxabs" : "euclidean"; }

SupNorm parse_norm(const std::string& name) {
  if (name == "maxabs") return SupNorm::MaxAbs;
  if (name == "euclidean") return SupNorm::Euclidean;
  throw InvalidParameter("unknown norm '" + name + "' (expected maxabs or euclidean)");
}

std::vector<double> simulate_sup_statistics(double gamma, std::size_t dimension, std::size_t paths,
                                            std::size_t grid, std::uint64_t seed, double time_fraction,
                                            SupNorm norm) {
  if (!(gamma >= 0.0 && gamma < 0.5)) throw InvalidParameter("gamma must lie in [0, 0.5)");
  if (dimension == 0) throw InvalidParameter("dimension must be at least 1");
  if (grid == 0) throw InvalidParameter("grid must be positive");
  if (!(time_fraction > 0.0 && time_fraction <= 1.0)) throw InvalidParameter("time fraction must lie in (0, 1]");

  const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(time_fraction * grid)));
  std::vector<double> weight(steps);
  for (std::size_t j = 0; j < steps; ++j) {
    weight[j] = std::pow(static_cast<double>(j + 1) / static_cast<double>(grid), -gamma);
  }
  const double sd = std::sqrt(1.0 / static_cast<double>(grid));

  std::vector<double> out(paths);
  const std::size_t blocks = (paths + kPathsPerBlock - 1) / kPathsPerBlock;
  parallel_for(blocks, [&](std::size_t block) {
    Rng rng = make_rng(seed, block);
    std::normal_distribution<double> normal(0.0, sd);
    std::vector<double> position(dimension);
    std::vector<double> component_sup(dimension);
    const std::size_t begin = block * kPathsPerBlock;
    const std::size_t end = std::min(paths, begin + kPathsPerBlock);
    for (std::size_t path = begin; path < end; ++path) {
      double sup = 0.0;
      if (norm == SupNorm::MaxAbs) {
        // Components are independent, so each can be run to completion separately.
        for (std::size_t i = 0; i < dimension; ++i) {
          double x = 0.0;
          double s = 0.0;
          for (std::size_t j = 0; j < steps; ++j) {
            x += normal(rng);
            s = std::max(s, std::abs(x) * weight[j]);
          }
          sup = std::max(sup, s);
        }
      } else {
        std::fill(position.begin(), position.end(), 0.0);
        for (std::size_t j = 0; j < steps; ++j) {
          double sq = 0.0;
          for (std::size_t i = 0; i < dimension; ++i) {
            position[i] += normal(rng);
            sq += position[i] * position[i];
          }
          sup = std::max(sup, std::sqrt(sq) * weight[j]);
        }
      }
      out[path] = sup;
    }
  });
  return out;
}

double upper_quantile(std::vector<double> sample, double alpha) {
  if (sample.empty()) throw InvalidParameter("quantile of an empty sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must lie in (0, 1)");
  const auto n = sample.size();
  auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  auto nth = sample.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(sample.begin(), nth, sample.end());
  return *nth;
}

QuantileEstimate quantile_with_error(const std::vector<double>& sample, double alpha) {
  QuantileEstimate est;
  est.value = upper_quantile(sample, alpha);
  const std::size_t per_batch = sample.size() / kErrorBatches;
  if (per_batch < 2) return est;
  std::vector<double> batch_q;
  for (std::size_t b = 0; b < kErrorBatches; ++b) {
    std::vector<double> part(sample.begin() + static_cast<std::ptrdiff_t>(b * per_batch),
                             sample.begin() + static_cast<std::ptrdiff_t>((b + 1) * per_batch));
    batch_q.push_back(upper_quantile(std::move(part), alpha));
  }
  const double mean = std::accumulate(batch_q.begin(), batch_q.end(), 0.0) / static_cast<double>(kErrorBatches);
  double ss = 0.0;
  for (double q : batch_q) ss += (q - mean) * (q - mean);
  est.standard_error = std::sqrt(ss / static_cast<double>(kErrorBatches - 1) / static_cast<double>(kErrorBatches));
  return est;
}

QuantileEstimate simulate_sup_quantile(double gamma, std::size_t dimension, double alpha, std::size_t paths,
                                       std::size_t grid, std::uint64_t seed, SupNorm norm) {
  if (paths < 10000) throw InvalidParameter("at least 1e4 paths are required");
  if (grid < 1000) throw InvalidParameter("grid must have at least 1e3 points");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must lie in (0, 1)");
  return quantile_with_error(simulate_sup_statistics(gamma, dimension, paths, grid, seed, 1.0, norm), alpha);
}

double closed_end_scale(std::optional<double> horizon, double gamma) {
  if (!horizon || std::isinf(*horizon)) return 1.0;
  if (!(*horizon > 0.0)) throw InvalidParameter("horizon T must be positive");
  return std::pow(*horizon / (1.0 + *horizon), 0.5 - gamma);
}

double componentwise_alpha(double alpha, std::size_t dimension) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must lie in (0, 1)");
  if (dimension == 0) throw InvalidParameter("dimension must be at least 1");
  if (dimension == 1) return alpha;
  return 1.0 - std::pow(1.0 - alpha, 1.0 / static_cast<double>(dimension));
}

CriticalValueTable build_table(double gamma, std::size_t dimension, std::vector<double> alphas, std::size_t paths,
                               std::size_t grid, std::uint64_t seed, std::optional<double> horizon, SupNorm norm) {
  if (alphas.empty()) throw InvalidParameter("table needs at least one alpha");
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  if (paths < 10000) throw InvalidParameter("at least 1e4 paths are required");
  if (grid < 1000) throw InvalidParameter("grid must have at least 1e3 points");
  double fraction = 1.0;
  if (horizon && !std::isinf(*horizon)) {
    if (!(*horizon > 0.0)) throw InvalidParameter("horizon T must be positive");
    fraction = *horizon / (1.0 + *horizon);
  } else {
    horizon.reset();
  }
  const auto sample = simulate_sup_statistics(gamma, dimension, paths, grid, seed, fraction, norm);

  CriticalValueTable table;
  table.gamma = gamma;
  table.dimension = dimension;
  table.horizon = horizon;
  table.norm = norm;
  table.paths = paths;
  table.grid = grid;
  table.seed = seed;
  for (double a : alphas) {
    const auto q = quantile_with_error(sample, a);
    table.alphas.push_back(a);
    table.quantiles.push_back(q.value);
    table.standard_errors.push_back(q.standard_error);
  }
  return table;
}

namespace {

std::optional<double> lookup(const CriticalValueTable& table, double alpha) {
  for (std::size_t i = 0; i < table.alphas.size(); ++i) {
    if (std::abs(table.alphas[i] - alpha) <= kAlphaMatch) return table.quantiles[i];
  }
  return std::nullopt;
}

std::string describe(const CriticalValueTable& t) {
  std::ostringstream os;
  os << "table(gamma=" << t.gamma << ", d=" << t.dimension << ", norm=" << to_string(t.norm) << ")";
  return os.str();
}

}  // namespace

double critical_value(const MonitorConfig& config, const CriticalValueTable& table) {
  if (std::abs(table.gamma - config.gamma) > 1e-12) {
    throw TableMiss(describe(table) + " does not match gamma " + std::to_string(config.gamma));
  }
  const std::size_t dim = monitored_dimension(config);

  double scale = 1.0;
  if (table.horizon) {
    if (!config.horizon || std::abs(*table.horizon - *config.horizon) > 1e-12) {
      throw TableMiss(describe(table) + " was built for a different horizon T");
    }
  } else {
    scale = closed_end_scale(config.horizon, config.gamma);
  }

  double level = config.alpha;
  switch (config.statistic) {
    case StatisticKind::Psi1:
      if (table.dimension != dim || (dim > 1 && table.norm != SupNorm::Euclidean)) {
        throw TableMiss(describe(table) + " cannot serve psi1 in dimension " + std::to_string(dim));
      }
      break;
    case StatisticKind::Psi2:
      if (table.dimension != 1) throw TableMiss("psi2 needs a one-dimensional table");
      scale *= config.direction.norm();
      break;
    case StatisticKind::Psi3:
      if (table.dimension == 1) {
        level = componentwise_alpha(config.alpha, dim);
      } else if (table.dimension != dim || table.norm != SupNorm::MaxAbs) {
        throw TableMiss(describe(table) + " cannot serve psi3 in dimension " + std::to_string(dim));
      }
      break;
  }
  const auto q = lookup(table, level);
  if (!q) throw TableMiss(describe(table) + " has no entry for alpha " + std::to_string(level));
  return *q * scale;
}

std::string table_to_json(const CriticalValueTable& table) {
  nlohmann::json j;
  j["version"] = table.version;
  j["gamma"] = table.gamma;
  j["d"] = table.dimension;
  j["T"] = table.horizon ? nlohmann::json(*table.horizon) : nlohmann::json(nullptr);
  j["norm"] = to_string(table.norm);
  j["alphas"] = table.alphas;
  j["quantiles"] = table.quantiles;
  j["standard_errors"] = table.standard_errors;
  j["paths"] = table.paths;
  j["grid"] = table.grid;
  j["seed"] = table.seed;
  return j.dump(2);
}

CriticalValueTable table_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("critical-value table is not valid JSON: ") + e.what());
  }
  const int version = j.value("version", 0);
  if (version != kTableFormatVersion) {
    throw FormatVersionMismatch("critical-value table has format version " + std::to_string(version) +
                                ", expected " + std::to_string(kTableFormatVersion));
  }
  CriticalValueTable t;
  try {
    t.version = version;
    t.gamma = j.at("gamma").get<double>();
    t.dimension = j.at("d").get<std::size_t>();
    if (!j.at("T").is_null()) t.horizon = j.at("T").get<double>();
    t.norm = parse_norm(j.value("norm", std::string("maxabs")));
    t.alphas = j.at("alphas").get<std::vector<double>>();
    t.quantiles = j.at("quantiles").get<std::vector<double>>();
    t.standard_errors = j.value("standard_errors", std::vector<double>(t.alphas.size(), 0.0));
    t.paths = j.at("paths").get<std::size_t>();
    t.grid = j.at("grid").get<std::size_t>();
    t.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed critical-value table: ") + e.what());
  }
  if (t.alphas.size() != t.quantiles.size()) throw IoError("alphas and quantiles differ in length");
  return t;
}

void save_table(const CriticalValueTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write critical-value table to " + path);
  out << table_to_json(table) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

CriticalValueTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open critical-value table " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return table_from_json(buffer.str());
}

bool table_is_stale(const CriticalValueTable& table, std::size_t paths, std::size_t grid) {
  return table.paths < paths || table.grid < grid;
}

std::string table_fingerprint(const CriticalValueTable& table) {
  const std::string text = table_to_json(table);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace gwcusum
