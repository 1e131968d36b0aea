#include "gwcusum/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "gwcusum/critvals.hpp"
#include "gwcusum/detect.hpp"
#include "gwcusum/errors.hpp"
#include "gwcusum/estimate.hpp"
#include "gwcusum/experiments.hpp"
#include "gwcusum/io.hpp"
#include "gwcusum/simulate.hpp"

namespace gwcusum {

namespace {

using io::Json;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char c) { return std::isspace(c); }),
               item.end());
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// "1,3" -> {0, 2}
IndexSet parse_types(const std::string& text) {
  IndexSet out;
  for (const std::string& item : split_list(text)) {
    const long v = std::stol(item);
    if (v < 1) throw InvalidParameter("type labels start at 1, got " + item);
    out.push_back(static_cast<std::size_t>(v - 1));
  }
  if (out.empty()) throw InvalidParameter("empty type list");
  return out;
}

Eigen::VectorXd parse_vector(const std::string& text) {
  const auto items = split_list(text);
  Eigen::VectorXd v(static_cast<Eigen::Index>(items.size()));
  for (std::size_t i = 0; i < items.size(); ++i) v(static_cast<Eigen::Index>(i)) = std::stod(items[i]);
  return v;
}

struct ModelChoice {
  ModelSpec spec;
  CountVector x0;
  Json literal;
};

ModelChoice load_model(const std::string& path, bool ginar) {
  const Json j = io::read_json_file(path);
  if (ginar) {
    const GinarSpec g = io::ginar_from_json(j);
    EmbeddedGinar e = ginar_embed(g);
    return {std::move(e.spec), std::move(e.x0), Json{{"ginar", io::ginar_to_json(g)}}};
  }
  ModelSpec spec = io::model_from_json(j);
  const auto p = static_cast<Eigen::Index>(spec.types());
  return {std::move(spec), CountVector::Zero(p), Json{{"model", j}}};
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
  std::string model, ginar, change_model, change_ginar, x0, out;
  std::size_t steps = 1000;
  std::optional<std::size_t> m, k_star;
  std::size_t burn_in = 0;
  std::uint64_t seed = 1;
};

int run_simulate(const SimulateOptions& o, std::ostream& out) {
  if (o.model.empty() == o.ginar.empty()) throw InvalidParameter("give exactly one of --model or --ginar");
  ModelChoice base = load_model(o.ginar.empty() ? o.model : o.ginar, !o.ginar.empty());
  if (!o.x0.empty()) {
    base.x0 = io::parse_counts(o.x0);
    if (static_cast<std::size_t>(base.x0.size()) != base.spec.types()) {
      throw InvalidParameter("--x0 needs " + std::to_string(base.spec.types()) + " counts");
    }
  }
  Json literal = base.literal;
  Rng rng = make_rng(o.seed, 0);
  Trajectory traj;
  const bool has_change = !o.change_model.empty() || !o.change_ginar.empty();
  if (has_change) {
    if (!o.change_model.empty() && !o.change_ginar.empty()) {
      throw InvalidParameter("give at most one of --change-model or --change-ginar");
    }
    if (!o.m || !o.k_star) throw InvalidParameter("a change needs --m and --k-star");
    const ModelChoice post = load_model(o.change_ginar.empty() ? o.change_model : o.change_ginar,
                                        !o.change_ginar.empty());
    if (post.spec.types() != base.spec.types()) throw InvalidParameter("pre- and post-change models differ in p");
    assert_stable(base.spec);
    traj = simulate_with_change(base.spec, post.spec, *o.m, *o.k_star, o.steps, base.x0, rng);
    literal["change"] = post.literal;
  } else {
    if (o.k_star) throw InvalidParameter("--k-star needs --change-model or --change-ginar");
    traj = simulate(base.spec, base.x0, o.steps, rng, o.burn_in);
    traj.training_length = o.m;
  }
  traj.seed = o.seed;
  io::save_trajectory(traj, o.out, literal);
  out << "wrote " << o.out << ".csv and " << o.out << ".json (" << traj.observations.size()
      << " observations)\n";
  return 0;
}

// ---------------------------------------------------------------- estimate

struct EstimateOptions {
  std::string input, flavor = "cls", types, out, residuals;
  std::optional<std::size_t> m;
};

int run_estimate(const EstimateOptions& o, std::ostream& out) {
  const Trajectory traj = io::load_trajectory(o.input);
  const std::size_t m = o.m ? *o.m : traj.training_length.value_or(traj.last_index());
  EstimateSet est = estimate(traj, m, parse_flavor(o.flavor));
  if (!o.types.empty()) est = reduce(est, parse_types(o.types));
  const std::string text = io::estimates_to_json(est).dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    io::write_text_file(o.out, text);
  }
  if (!o.residuals.empty()) io::write_text_file(o.residuals, io::residuals_csv(residuals(traj, 1, m, est)));
  return 0;
}

// ---------------------------------------------------------------- monitor

struct MonitorOptions {
  std::string training, stream, flavor = "cls", statistic = "psi3", detector = "mean", types, direction, table;
  std::optional<std::size_t> m;
  std::optional<double> horizon, crit;
  double gamma = 0.25, alpha = 0.05;
  std::size_t paths = 20000, grid = 2000;
  std::uint64_t seed = 1;
};

/// Streams count rows, skipping blank lines and a header; drops a leading index column
/// when the header starts with `n`.
class RowReader {
 public:
  explicit RowReader(std::istream& in) : in_(in) {}

  std::optional<CountVector> next() {
    std::string line;
    while (std::getline(in_, line)) {
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      if (std::isalpha(static_cast<unsigned char>(line[b]))) {
        indexed_ = line[b] == 'n' && (b + 1 == line.size() || line[b + 1] == ',');
        continue;
      }
      CountVector x = io::parse_counts(line);
      if (indexed_) {
        if (x.size() < 2) throw IoError("stream row needs an index and at least one count");
        x = CountVector(x.tail(x.size() - 1));
      }
      return x;
    }
    return std::nullopt;
  }

 private:
  std::istream& in_;
  bool indexed_ = false;
};

MonitorConfig monitor_config(const MonitorOptions& o, std::size_t p) {
  MonitorConfig cfg;
  cfg.gamma = o.gamma;
  cfg.horizon = o.horizon;
  cfg.alpha = o.alpha;
  cfg.statistic = parse_statistic(o.statistic);
  cfg.flavor = parse_flavor(o.flavor);
  cfg.detector = parse_detector(o.detector);
  if (o.types.empty()) {
    for (std::size_t i = 0; i < p; ++i) cfg.reduction.push_back(i);
  } else {
    cfg.reduction = parse_types(o.types);
  }
  if (!o.direction.empty()) cfg.direction = parse_vector(o.direction);
  return cfg;
}

double resolve_critical_value(const MonitorOptions& o, const MonitorConfig& cfg, std::ostream& err) {
  if (o.crit) return *o.crit;
  if (!o.table.empty()) return critical_value(cfg, load_table(o.table));
  const std::size_t dim = monitored_dimension(cfg);
  std::size_t table_dim = 1;
  SupNorm norm = SupNorm::MaxAbs;
  double level = cfg.alpha;
  if (cfg.statistic == StatisticKind::Psi1 && dim > 1) {
    table_dim = dim;
    norm = SupNorm::Euclidean;
  } else if (cfg.statistic == StatisticKind::Psi3) {
    level = componentwise_alpha(cfg.alpha, dim);
  }
  err << "note: simulating critical value (" << o.paths << " paths, grid " << o.grid << ")\n";
  const CriticalValueTable table = build_table(cfg.gamma, table_dim, {level}, o.paths, o.grid, o.seed,
                                               std::nullopt, norm);
  return critical_value(cfg, table);
}

int run_monitor(const MonitorOptions& o, std::istream& in, std::ostream& out, std::ostream& err) {
  const Trajectory training = io::load_trajectory(o.training);
  const std::size_t m = o.m ? *o.m : training.training_length.value_or(training.last_index());
  if (m > training.last_index()) throw InsufficientData("training file has fewer than m + 1 observations");

  MonitorConfig cfg = monitor_config(o, training.p);
  validate(cfg);
  cfg.critical_value = resolve_critical_value(o, cfg, err);
  MonitorState state = monitor_init(training, m, cfg);

  std::ifstream file;
  std::istringstream tail;
  std::istream* source = &in;
  if (!o.stream.empty() && o.stream != "-") {
    file.open(o.stream);
    if (!file) throw IoError("cannot open " + o.stream);
    source = &file;
  } else if (o.stream.empty() && training.last_index() > m) {
    std::ostringstream rows;
    for (std::size_t n = m + 1; n <= training.last_index(); ++n) {
      for (Eigen::Index i = 0; i < training[n].size(); ++i) rows << (i ? "," : "") << training[n](i);
      rows << '\n';
    }
    tail.str(rows.str());
    source = &tail;
  }

  RowReader reader(*source);
  Decision last;
  while (!state.alarm && !state.exhausted) {
    const auto x = reader.next();
    if (!x) break;
    if (static_cast<std::size_t>(x->size()) != training.p) {
      throw IoError("stream row has " + std::to_string(x->size()) + " counts, expected " +
                    std::to_string(training.p));
    }
    last = monitor_update(state, *x);
    out << Json{{"k", last.k}, {"stat", last.statistic}, {"alarm", last.kind == DecisionKind::Alarm}}.dump()
        << '\n';
  }

  Json verdict{{"verdict", state.alarm ? "alarm" : (state.exhausted ? "horizon_exhausted" : "no_alarm")},
               {"steps", state.k},
               {"m", m},
               {"critical_value", cfg.critical_value},
               {"sup_stat", state.running_sup}};
  verdict["tau"] = state.alarm ? Json(*state.alarm) : Json(nullptr);
  out << verdict.dump() << '\n';
  return 0;
}

// ---------------------------------------------------------------- critvals

struct CritvalsOptions {
  double gamma = 0.25;
  std::size_t dim = 1;
  std::vector<double> alphas{0.05};
  std::size_t paths = 200000, grid = 10000;
  std::uint64_t seed = 1;
  std::optional<double> horizon;
  std::string norm = "maxabs", out;
};

int run_critvals(const CritvalsOptions& o, std::ostream& out) {
  std::vector<double> alphas = o.alphas;
  std::sort(alphas.begin(), alphas.end());
  const CriticalValueTable table =
      build_table(o.gamma, o.dim, alphas, o.paths, o.grid, o.seed, o.horizon, parse_norm(o.norm));
  if (!o.out.empty()) save_table(table, o.out);
  out << "gamma=" << table.gamma << " d=" << table.dimension << " T="
      << (table.horizon ? std::to_string(*table.horizon) : std::string("inf")) << " paths=" << table.paths
      << " grid=" << table.grid << '\n';
  for (std::size_t i = 0; i < table.alphas.size(); ++i) {
    out << "  alpha=" << table.alphas[i] << "  c=" << table.quantiles[i] << "  se=" << table.standard_errors[i]
        << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- study

struct StudyOptions {
  std::string scenario, out_dir = ".", table;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicates, m, k_star;
  std::optional<double> horizon;
  std::size_t paths = 200000, grid = 10000;
  std::uint64_t table_seed = 20240601;
};

CriticalValueTable obtain_study_table(const StudyOptions& o, const StudyConfig& cfg, std::ostream& err) {
  const std::string path = o.table.empty() ? (std::filesystem::path(o.out_dir) / "critvals_study.json").string()
                                           : o.table;
  if (std::filesystem::exists(path)) {
    try {
      CriticalValueTable cached = load_table(path);
      if (table_is_stale(cached, o.paths, o.grid)) {
        err << "warning: " << path << " was built with fewer paths or a coarser grid; regenerating\n";
      } else {
        MonitorConfig probe;
        probe.gamma = cfg.gamma;
        probe.alpha = cfg.alpha_single;
        probe.reduction = {0};
        (void)critical_value(probe, cached);
        probe.alpha = cfg.alpha;
        probe.reduction = {0, 1};
        (void)critical_value(probe, cached);
        return cached;
      }
    } catch (const FormatVersionMismatch& e) {
      err << "warning: " << e.what() << "; regenerating " << path << '\n';
    } catch (const TableMiss& e) {
      err << "warning: cached table cannot serve this study (" << e.what() << "); regenerating\n";
    }
  }
  err << "simulating critical values (" << o.paths << " paths, grid " << o.grid << ")\n";
  CriticalValueTable table = study_table(cfg, o.paths, o.grid, o.table_seed);
  save_table(table, path);
  return table;
}

int run_study_command(const StudyOptions& o, std::ostream& out, std::ostream& err) {
  StudyConfig cfg = default_study(parse_scenario(o.scenario));
  if (o.seed) cfg.seed = *o.seed;
  if (o.replicates) cfg.replicates = *o.replicates;
  if (o.m) cfg.m = *o.m;
  if (o.k_star) cfg.k_star = *o.k_star;
  if (o.horizon) cfg.horizon = *o.horizon;
  validate(cfg);

  std::filesystem::create_directories(o.out_dir);
  const CriticalValueTable table = obtain_study_table(o, cfg, err);
  const std::vector<RateTable> tables = run_study(cfg, table);
  const std::vector<std::string> names = study_table_names(cfg);

  std::string text;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto base = std::filesystem::path(o.out_dir) / names[i];
    io::write_text_file(base.string() + ".csv", rate_table_csv(tables[i]));
    text += format_rate_table(tables[i]) + "\n";
  }
  io::write_text_file((std::filesystem::path(o.out_dir) / (to_string(cfg.scenario) + ".txt")).string(), text);
  io::write_text_file((std::filesystem::path(o.out_dir) / (to_string(cfg.scenario) + "_manifest.json")).string(),
                      study_manifest(cfg, table, tables));
  out << text;
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequential change-point monitoring for multitype Galton-Watson processes", "gwcusum"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kLibraryVersion);

  SimulateOptions sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a trajectory, optionally with a change");
  simulate_cmd->add_option("--model", sim.model, "Model config JSON");
  simulate_cmd->add_option("--ginar", sim.ginar, "GINAR config JSON");
  simulate_cmd->add_option("--change-model", sim.change_model, "Post-change model config JSON");
  simulate_cmd->add_option("--change-ginar", sim.change_ginar, "Post-change GINAR config JSON");
  simulate_cmd->add_option("--steps", sim.steps, "Number of generations after X_0");
  simulate_cmd->add_option("--m", sim.m, "Training length");
  simulate_cmd->add_option("--k-star", sim.k_star, "Change index after training");
  simulate_cmd->add_option("--burn-in", sim.burn_in, "Discarded generations (no change only)");
  simulate_cmd->add_option("--x0", sim.x0, "Initial state, comma separated");
  simulate_cmd->add_option("--seed", sim.seed, "RNG seed");
  simulate_cmd->add_option("--out", sim.out, "Output prefix for .csv and .json")->required();

  EstimateOptions est;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate moments on a training sample");
  estimate_cmd->add_option("--input", est.input, "Trajectory CSV")->required();
  estimate_cmd->add_option("--m", est.m, "Training length (default: sidecar m or whole file)");
  estimate_cmd->add_option("--flavor", est.flavor, "cls or wcls");
  estimate_cmd->add_option("--types", est.types, "Monitored types, 1-based, comma separated");
  estimate_cmd->add_option("--out", est.out, "Estimates JSON (default stdout)");
  estimate_cmd->add_option("--residuals", est.residuals, "Training residuals CSV");

  MonitorOptions mon;
  auto* monitor_cmd = app.add_subcommand("monitor", "Run the sequential detector on a stream");
  monitor_cmd->add_option("--training", mon.training, "Training trajectory CSV")->required();
  monitor_cmd->add_option("--stream", mon.stream, "Monitoring CSV ('-' for stdin)");
  monitor_cmd->add_option("--m", mon.m, "Training length");
  monitor_cmd->add_option("--gamma", mon.gamma, "Boundary exponent in [0, 0.5)");
  monitor_cmd->add_option("--T", mon.horizon, "Closed-end horizon (omit for open-end)");
  monitor_cmd->add_option("--alpha", mon.alpha, "Significance level");
  monitor_cmd->add_option("--statistic", mon.statistic, "psi1, psi2 or psi3");
  monitor_cmd->add_option("--direction", mon.direction, "Direction for psi2, comma separated");
  monitor_cmd->add_option("--flavor", mon.flavor, "cls or wcls");
  monitor_cmd->add_option("--detector", mon.detector, "mean or meanvar");
  monitor_cmd->add_option("--types", mon.types, "Monitored types, 1-based, comma separated");
  monitor_cmd->add_option("--crit", mon.crit, "Critical value (skips simulation)");
  monitor_cmd->add_option("--table", mon.table, "Critical-value table JSON");
  monitor_cmd->add_option("--paths", mon.paths, "Paths for an on-the-fly critical value");
  monitor_cmd->add_option("--grid", mon.grid, "Grid for an on-the-fly critical value");
  monitor_cmd->add_option("--seed", mon.seed, "Seed for an on-the-fly critical value");

  CritvalsOptions cv;
  auto* critvals_cmd = app.add_subcommand("critvals", "Simulate a critical-value table");
  critvals_cmd->add_option("--gamma", cv.gamma, "Boundary exponent in [0, 0.5)");
  critvals_cmd->add_option("--dim", cv.dim, "Dimension d");
  critvals_cmd->add_option("--alpha", cv.alphas, "Levels (repeat or comma separate)")->delimiter(',');
  critvals_cmd->add_option("--paths", cv.paths, "Monte Carlo paths");
  critvals_cmd->add_option("--grid", cv.grid, "Grid points on [0, 1]");
  critvals_cmd->add_option("--seed", cv.seed, "Seed");
  critvals_cmd->add_option("--T", cv.horizon, "Closed-end horizon (omit for open-end)");
  critvals_cmd->add_option("--norm", cv.norm, "maxabs or euclidean");
  critvals_cmd->add_option("--out", cv.out, "Table JSON path");

  StudyOptions st;
  auto* study_cmd = app.add_subcommand("study", "Reproduce a simulation-study table");
  study_cmd->add_option("--scenario", st.scenario, "null, power or ginar")->required();
  study_cmd->add_option("--seed", st.seed, "Master seed");
  study_cmd->add_option("--replicates", st.replicates, "Replicates per cell");
  study_cmd->add_option("--m", st.m, "Training length");
  study_cmd->add_option("--k-star", st.k_star, "Change index");
  study_cmd->add_option("--T", st.horizon, "Closed-end horizon");
  study_cmd->add_option("--out-dir", st.out_dir, "Output directory");
  study_cmd->add_option("--table", st.table, "Critical-value cache (default <out-dir>/critvals_study.json)");
  study_cmd->add_option("--paths", st.paths, "Paths for the critical-value table");
  study_cmd->add_option("--grid", st.grid, "Grid for the critical-value table");
  study_cmd->add_option("--table-seed", st.table_seed, "Seed for the critical-value table");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate_cmd) return run_simulate(sim, out);
    if (*estimate_cmd) return run_estimate(est, out);
    if (*monitor_cmd) return run_monitor(mon, in, out, err);
    if (*critvals_cmd) return run_critvals(cv, out);
    if (*study_cmd) return run_study_command(st, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

int cli_main(const std::vector<std::string>& args) { return cli_main(args, std::cin, std::cout, std::cerr); }

}  // namespace gwcusum
