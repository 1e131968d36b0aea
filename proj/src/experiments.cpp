#include "gwcusum/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "gwcusum/errors.hpp"
#include "gwcusum/rng.hpp"
#include "gwcusum/simulate.hpp"

namespace gwcusum {

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::NullTable2Type:
      return "null";
    case Scenario::PowerTable2Type:
      return "power";
    case Scenario::GinarTypeComparison:
      return "ginar";
  }
  return "unknown";
}

Scenario parse_scenario(const std::string& name) {
  if (name == "null") return Scenario::NullTable2Type;
  if (name == "power") return Scenario::PowerTable2Type;
  if (name == "ginar") return Scenario::GinarTypeComparison;
  throw InvalidParameter("unknown scenario '" + name + "' (expected null, power or ginar)");
}

StudyConfig default_study(Scenario scenario) {
  StudyConfig cfg;
  cfg.scenario = scenario;
  switch (scenario) {
    case Scenario::NullTable2Type:
      cfg.m = 500;
      cfg.horizon = 1.0;
      break;
    case Scenario::PowerTable2Type:
      cfg.m = 500;
      cfg.horizon = 2.0;
      cfg.k_star = 500;
      break;
    case Scenario::GinarTypeComparison:
      cfg.m = 100;
      cfg.horizon = 2.0;
      cfg.k_star = 100;
      cfg.flavors = {Flavor::Cls};
      break;
  }
  return cfg;
}

void validate(const StudyConfig& cfg) {
  if (cfg.replicates == 0) throw InvalidParameter("replicate count must be at least 1");
  if (cfg.m == 0) throw InvalidParameter("training length m must be at least 1");
  if (!(cfg.horizon > 0.0) || std::isinf(cfg.horizon)) throw InvalidParameter("horizon T must be finite and positive");
  if (!(cfg.gamma >= 0.0 && cfg.gamma < 0.5)) throw InvalidParameter("gamma must lie in [0, 0.5)");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0) || !(cfg.alpha_single > 0.0 && cfg.alpha_single < 1.0)) {
    throw InvalidParameter("alpha must lie in (0, 1)");
  }
  if (cfg.flavors.empty()) throw InvalidParameter("at least one estimator flavor is required");
  if (cfg.scenario != Scenario::NullTable2Type) {
    const auto steps = static_cast<std::size_t>(std::floor(cfg.horizon * static_cast<double>(cfg.m)));
    if (cfg.k_star == 0 || cfg.k_star > steps) {
      throw InvalidParameter("change index k* must lie in 1..floor(T m)");
    }
  }
}

ModelSpec two_type_model(double cross) {
  std::vector<Law> offspring{Law::bernoulli(0.5), Law::bernoulli(cross), Law::bernoulli(cross), Law::bernoulli(0.5)};
  return ModelSpec(2, std::move(offspring), {Law::poisson(1.0), Law::poisson(1.0)});
}

GinarSpec ginar1_model(const Law& offspring) { return GinarSpec{{offspring}, Law::poisson(1.0), {}}; }

namespace {

std::string label(const std::string& prefix, double value, const std::string& suffix = "") {
  std::ostringstream os;
  os << prefix << value << suffix;
  return os.str();
}

// Largest statistic value over k = 1..steps, or empty if estimation/whitening failed.
std::optional<double> sup_statistic(const Trajectory& traj, std::size_t m, std::size_t steps,
                                    MonitorConfig config) {
  config.critical_value = std::numeric_limits<double>::infinity();
  config.horizon.reset();
  try {
    MonitorState state = monitor_init(traj, m, config);
    for (std::size_t n = m + 1; n <= m + steps; ++n) monitor_update(state, traj[n]);
    return state.running_sup;
  } catch (const Error&) {
    return std::nullopt;
  }
}

void finish(RateCell& cell, std::size_t alarms, std::size_t valid, std::size_t failures) {
  cell.n = valid;
  cell.failures = failures;
  cell.rate = valid == 0 ? 0.0 : 100.0 * static_cast<double>(alarms) / static_cast<double>(valid);
  cell.se = valid == 0 ? 0.0 : std::sqrt(cell.rate * (100.0 - cell.rate) / static_cast<double>(valid));
}

MonitorConfig psi3_config(const StudyConfig& cfg, Flavor flavor, Detector detector, IndexSet reduction,
                          double alpha, std::optional<double> horizon) {
  MonitorConfig mc;
  mc.gamma = cfg.gamma;
  mc.horizon = horizon;
  mc.alpha = alpha;
  mc.statistic = StatisticKind::Psi3;
  mc.flavor = flavor;
  mc.detector = detector;
  mc.reduction = std::move(reduction);
  return mc;
}

std::size_t monitoring_steps(const StudyConfig& cfg) {
  return static_cast<std::size_t>(std::floor(cfg.horizon * static_cast<double>(cfg.m)));
}

}  // namespace

RateTable run_null_table(const StudyConfig& cfg, const CriticalValueTable& table) {
  validate(cfg);
  const std::size_t steps = monitoring_steps(cfg);
  const std::size_t nf = cfg.flavors.size();

  RateTable out;
  out.title = label("H0 rejection rates, m=" + std::to_string(cfg.m) + ", T=", cfg.horizon);
  for (double p : cfg.cross_probs) out.row_labels.push_back(label("p=", p));
  for (Flavor f : cfg.flavors) {
    for (const char* mode : {"open", "closed"}) {
      std::string name = to_string(f);
      for (auto& ch : name) ch = static_cast<char>(std::toupper(ch));
      out.col_labels.push_back(name + " " + mode);
    }
  }
  out.cells.resize(out.row_labels.size() * out.col_labels.size());

  for (std::size_t row = 0; row < cfg.cross_probs.size(); ++row) {
    const ModelSpec spec = two_type_model(cfg.cross_probs[row]);
    const IndexSet reduction = reduction_set(spec);
    std::vector<double> crit_open(nf), crit_closed(nf);
    std::vector<MonitorConfig> configs;
    for (std::size_t f = 0; f < nf; ++f) {
      configs.push_back(psi3_config(cfg, cfg.flavors[f], Detector::Mean, reduction, cfg.alpha, std::nullopt));
      crit_open[f] = critical_value(configs[f], table);
      MonitorConfig closed = configs[f];
      closed.horizon = cfg.horizon;
      crit_closed[f] = critical_value(closed, table);
    }

    std::vector<std::vector<std::optional<double>>> sups(cfg.replicates, std::vector<std::optional<double>>(nf));
    const std::uint64_t cell_seed = derive_seed(cfg.seed, row);
    parallel_for(cfg.replicates, [&](std::size_t rep) {
      Rng rng = make_rng(cell_seed, rep);
      const CountVector x0 = CountVector::Zero(2);
      const Trajectory traj = simulate(spec, x0, cfg.m + steps, rng);
      for (std::size_t f = 0; f < nf; ++f) sups[rep][f] = sup_statistic(traj, cfg.m, steps, configs[f]);
    });

    for (std::size_t f = 0; f < nf; ++f) {
      std::size_t valid = 0, failures = 0, open_alarms = 0, closed_alarms = 0;
      for (const auto& rep : sups) {
        if (!rep[f]) {
          ++failures;
          continue;
        }
        ++valid;
        if (*rep[f] > crit_open[f]) ++open_alarms;
        if (*rep[f] > crit_closed[f]) ++closed_alarms;
      }
      finish(out.at(row, 2 * f), open_alarms, valid, failures);
      finish(out.at(row, 2 * f + 1), closed_alarms, valid, failures);
    }
  }
  return out;
}

std::vector<RateTable> run_power_table(const StudyConfig& cfg, const CriticalValueTable& table) {
  validate(cfg);
  const std::size_t steps = monitoring_steps(cfg);
  const std::size_t nf = cfg.flavors.size();
  const std::size_t grid = cfg.cross_probs.size();

  std::vector<RateTable> out(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    std::string name = to_string(cfg.flavors[f]);
    for (auto& ch : name) ch = static_cast<char>(std::toupper(ch));
    out[f].title = name + " closed-end rejection rates, m=" + std::to_string(cfg.m) +
                   ", k*=" + std::to_string(cfg.k_star) + label(", T=", cfg.horizon);
    for (double p : cfg.cross_probs) {
      out[f].row_labels.push_back(label("p1=", p));
      out[f].col_labels.push_back(label("p2=", p));
    }
    out[f].cells.resize(grid * grid);
  }

  for (std::size_t r = 0; r < grid; ++r) {
    const ModelSpec before = two_type_model(cfg.cross_probs[r]);
    const IndexSet reduction = reduction_set(before);
    std::vector<MonitorConfig> configs;
    std::vector<double> crit(nf);
    for (std::size_t f = 0; f < nf; ++f) {
      configs.push_back(psi3_config(cfg, cfg.flavors[f], Detector::Mean, reduction, cfg.alpha, cfg.horizon));
      crit[f] = critical_value(configs[f], table);
    }
    for (std::size_t c = 0; c < grid; ++c) {
      const ModelSpec after = two_type_model(cfg.cross_probs[c]);
      std::vector<std::vector<std::optional<double>>> sups(cfg.replicates, std::vector<std::optional<double>>(nf));
      const std::uint64_t cell_seed = derive_seed(cfg.seed, r * grid + c);
      parallel_for(cfg.replicates, [&](std::size_t rep) {
        Rng rng = make_rng(cell_seed, rep);
        const Trajectory traj =
            simulate_with_change(before, after, cfg.m, cfg.k_star, cfg.m + steps, CountVector::Zero(2), rng);
        for (std::size_t f = 0; f < nf; ++f) sups[rep][f] = sup_statistic(traj, cfg.m, steps, configs[f]);
      });
      for (std::size_t f = 0; f < nf; ++f) {
        std::size_t valid = 0, failures = 0, alarms = 0;
        for (const auto& rep : sups) {
          if (!rep[f]) {
            ++failures;
            continue;
          }
          ++valid;
          if (*rep[f] > crit[f]) ++alarms;
        }
        finish(out[f].at(r, c), alarms, valid, failures);
      }
    }
  }
  return out;
}

GinarComparison run_ginar_comparison(const StudyConfig& cfg, const CriticalValueTable& table) {
  validate(cfg);
  const std::size_t steps = monitoring_steps(cfg);
  const std::size_t grid = cfg.ginar_means.size();

  GinarComparison out;
  const std::string suffix = ", m=" + std::to_string(cfg.m) + ", k*=" + std::to_string(cfg.k_star) +
                             label(", T=", cfg.horizon);
  out.type1.title = "Type 1 (mean detector) rejection rates" + suffix;
  out.type2.title = "Type 2 (mean-variance detector) rejection rates" + suffix;
  for (RateTable* t : {&out.type1, &out.type2}) {
    for (double a : cfg.ginar_means) {
      t->row_labels.push_back(label("Bern(", a, ")"));
      t->col_labels.push_back(label("Poi(", a, ")"));
    }
    t->cells.resize(grid * grid);
  }

  const Flavor flavor = cfg.flavors.front();
  const IndexSet reduction{0};
  const MonitorConfig type1 =
      psi3_config(cfg, flavor, Detector::Mean, reduction, cfg.alpha_single, cfg.horizon);
  const MonitorConfig type2 = psi3_config(cfg, flavor, Detector::MeanVariance, reduction, cfg.alpha, cfg.horizon);
  const double crit1 = critical_value(type1, table);
  const double crit2 = critical_value(type2, table);

  for (std::size_t r = 0; r < grid; ++r) {
    const EmbeddedGinar before = ginar_embed(ginar1_model(Law::bernoulli(cfg.ginar_means[r])));
    for (std::size_t c = 0; c < grid; ++c) {
      const EmbeddedGinar after = ginar_embed(ginar1_model(Law::poisson(cfg.ginar_means[c])));
      std::vector<std::array<std::optional<double>, 2>> sups(cfg.replicates);
      const std::uint64_t cell_seed = derive_seed(cfg.seed, r * grid + c);
      parallel_for(cfg.replicates, [&](std::size_t rep) {
        Rng rng = make_rng(cell_seed, rep);
        const Trajectory traj =
            simulate_with_change(before.spec, after.spec, cfg.m, cfg.k_star, cfg.m + steps, before.x0, rng);
        sups[rep][0] = sup_statistic(traj, cfg.m, steps, type1);
        sups[rep][1] = sup_statistic(traj, cfg.m, steps, type2);
      });
      for (std::size_t t = 0; t < 2; ++t) {
        const double crit = t == 0 ? crit1 : crit2;
        std::size_t valid = 0, failures = 0, alarms = 0;
        for (const auto& rep : sups) {
          if (!rep[t]) {
            ++failures;
            continue;
          }
          ++valid;
          if (*rep[t] > crit) ++alarms;
        }
        finish((t == 0 ? out.type1 : out.type2).at(r, c), alarms, valid, failures);
      }
    }
  }
  return out;
}

std::string rate_table_csv(const RateTable& table) {
  std::ostringstream os;
  os << "row,col,rate,se,n\n";
  os << std::fixed;
  for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
    for (std::size_t c = 0; c < table.col_labels.size(); ++c) {
      const RateCell& cell = table.at(r, c);
      os << table.row_labels[r] << ',' << table.col_labels[c] << ',' << std::setprecision(2) << cell.rate << ','
         << std::setprecision(3) << cell.se << ',' << cell.n << '\n';
    }
  }
  return os.str();
}

std::string format_rate_table(const RateTable& table) {
  std::ostringstream os;
  os << table.title << '\n';
  std::size_t first = 0;
  for (const auto& l : table.row_labels) first = std::max(first, l.size());
  std::size_t width = 8;
  for (const auto& l : table.col_labels) width = std::max(width, l.size() + 2);
  os << std::string(first, ' ');
  for (const auto& l : table.col_labels) os << std::setw(static_cast<int>(width)) << l;
  os << '\n' << std::fixed << std::setprecision(1);
  for (std::size_t r = 0; r < table.row_labels.size(); ++r) {
    os << std::left << std::setw(static_cast<int>(first)) << table.row_labels[r] << std::right;
    for (std::size_t c = 0; c < table.col_labels.size(); ++c) {
      os << std::setw(static_cast<int>(width)) << table.at(r, c).rate;
    }
    os << '\n';
  }
  return os.str();
}

std::string study_manifest(const StudyConfig& cfg, const CriticalValueTable& table,
                           const std::vector<RateTable>& tables) {
  nlohmann::json j;
  j["library"] = "gwcusum";
  j["version"] = kLibraryVersion;
  j["config"] = {{"scenario", to_string(cfg.scenario)},
                 {"m", cfg.m},
                 {"T", cfg.horizon},
                 {"k_star", cfg.k_star},
                 {"replicates", cfg.replicates},
                 {"gamma", cfg.gamma},
                 {"alpha", cfg.alpha},
                 {"alpha_single", cfg.alpha_single},
                 {"seed", cfg.seed},
                 {"cross_probs", cfg.cross_probs},
                 {"ginar_means", cfg.ginar_means}};
  std::vector<std::string> flavors;
  for (Flavor f : cfg.flavors) flavors.push_back(to_string(f));
  j["config"]["flavors"] = flavors;
  j["initial_state"] = "zero vector, no burn-in";
  j["critical_values"] = {{"fingerprint", table_fingerprint(table)},
                          {"gamma", table.gamma},
                          {"d", table.dimension},
                          {"paths", table.paths},
                          {"grid", table.grid},
                          {"seed", table.seed}};
  j["notes"] = "open-end rates are evaluated on the finite monitoring window and bound the true open-end size from below";
  nlohmann::json out_tables = nlohmann::json::array();
  for (const auto& t : tables) {
    nlohmann::json failures = nlohmann::json::array();
    for (std::size_t r = 0; r < t.row_labels.size(); ++r) {
      for (std::size_t c = 0; c < t.col_labels.size(); ++c) {
        failures.push_back({{"row", t.row_labels[r]}, {"col", t.col_labels[c]}, {"failures", t.at(r, c).failures}});
      }
    }
    out_tables.push_back({{"title", t.title}, {"estimation_failures", failures}});
  }
  j["tables"] = out_tables;
  return j.dump(2);
}

CriticalValueTable study_table(const StudyConfig& cfg, std::size_t paths, std::size_t grid,
                                std::uint64_t seed) {
  std::vector<double> alphas{componentwise_alpha(cfg.alpha, 2), cfg.alpha_single};
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-12; }),
               alphas.end());
  return build_table(cfg.gamma, 1, alphas, paths, grid, seed);
}

std::vector<RateTable> run_study(const StudyConfig& cfg, const CriticalValueTable& table) {
  switch (cfg.scenario) {
    case Scenario::NullTable2Type:
      return {run_null_table(cfg, table)};
    case Scenario::PowerTable2Type:
      return run_power_table(cfg, table);
    case Scenario::GinarTypeComparison: {
      GinarComparison g = run_ginar_comparison(cfg, table);
      return {std::move(g.type1), std::move(g.type2)};
    }
  }
  return {};
}

std::vector<std::string> study_table_names(const StudyConfig& cfg) {
  switch (cfg.scenario) {
    case Scenario::NullTable2Type:
      return {"null"};
    case Scenario::PowerTable2Type: {
      std::vector<std::string> names;
      for (Flavor f : cfg.flavors) names.push_back("power_" + to_string(f));
      return names;
    }
    case Scenario::GinarTypeComparison:
      return {"ginar_type1", "ginar_type2"};
  }
  return {};
}

}  // namespace gwcusum
