#include "edmc/edm.hpp"
#include "edmc/harness/experiment.hpp"
#include "edmc/harness/io.hpp"
#include "edmc/harness/probes.hpp"
#include "edmc/harness/selfcheck.hpp"
#include "edmc/sampling.hpp"
#include "edmc/solvers.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace edmc;
using namespace edmc::harness;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string config;
  std::optional<int> threads;
};

ConfigFile load(const Globals& g) {
  ConfigFile cfg = g.config.empty() ? ConfigFile{} : load_config(g.config);
  if (g.threads) {
    cfg.experiment.threads = *g.threads;
    cfg.phase_grid.threads = *g.threads;
  }
  return cfg;
}

// Writes to <out>/<name> when --out is given, stdout otherwise.
void emit(const Globals& g, const std::string& name, const std::string& contents) {
  if (g.out.empty()) {
    std::cout << contents;
    return;
  }
  fs::create_directories(g.out);
  write_file((fs::path(g.out) / name).string(), contents);
}

int cmd_simulate(const Globals& g, std::optional<double> value) {
  ConfigFile cfg = load(g);
  ExperimentSpec spec = cfg.experiment;
  if (value) spec = with_axis(spec, spec.sweep_axis.empty() ? "r" : spec.sweep_axis, *value);
  const std::uint64_t seed = g.seed.value_or(spec.master_seed);
  const Instance inst = make_instance(spec, seed);
  if (g.out.empty()) {
    std::cout << measurements_json(measurements_of(inst, spec));
    return 0;
  }
  emit(g, "scene.json", scene_json(inst.scene));
  const Measurements m = measurements_of(inst, spec);
  emit(g, "measurements.json", measurements_json(m));
  emit(g, "measurements.csv", measurements_csv(m));
  return 0;
}

int cmd_solve(const Globals& g, const std::string& solver, const std::string& scene_path, const std::string& meas_path,
              std::optional<double> value) {
  ConfigFile cfg = load(g);
  ExperimentSpec spec = cfg.experiment;
  if (value) spec = with_axis(spec, spec.sweep_axis.empty() ? "r" : spec.sweep_axis, *value);
  if (!is_known_solver(solver)) throw CLI::ValidationError("--solver", "unknown solver " + solver);

  Instance inst;
  if (!scene_path.empty() || !meas_path.empty()) {
    if (scene_path.empty() || meas_path.empty())
      throw CLI::ValidationError("--scene/--measurements", "both files are required together");
    inst.scene = scene_from_json(read_file(scene_path));
    const std::string text = read_file(meas_path);
    const Measurements m = fs::path(meas_path).extension() == ".csv"
                               ? measurements_from_csv(text, inst.scene.positions.n())
                               : measurements_from_json(text);
    if (m.mask.n != inst.scene.positions.n()) throw std::invalid_argument("scene and measurements disagree on n");
    inst.truth = Edm{squared_distances(inst.scene.positions.data)};
    inst.observed = m.observed;
    inst.mask = m.mask;
    inst.seed = g.seed.value_or(m.seed);
    spec.sigma = m.sigma;
    spec.gamma = m.gamma;
    spec.p_out = m.p_out;
    spec.v_out = m.v_out;
    inst.weights = build_weights(inst.observed, inst.truth);
  } else {
    inst = make_instance(spec, g.seed.value_or(spec.master_seed));
  }
  const TrialReport rep = run_pipeline(solver, inst, spec);
  if (rep.failed()) {
    std::cout << error_json(std::string("solver failed: ") + to_string(rep.status));
    if (!g.out.empty()) emit(g, "report.json", report_json(rep));
    return 1;
  }
  emit(g, "report.json", report_json(rep));
  return 0;
}

int cmd_sweep(const Globals& g, const std::vector<std::string>& solvers, bool dump_trials) {
  ConfigFile cfg = load(g);
  ExperimentSpec spec = cfg.experiment;
  if (g.seed) spec.master_seed = *g.seed;
  if (!solvers.empty()) spec.solvers = solvers;
  const SweepResult res = run_sweep(spec);
  emit(g, "sweep.csv", sweep_csv(res));
  if (dump_trials) emit(g, "trials.csv", trials_csv(res));
  return 0;
}

int cmd_basin(const Globals& g) {
  ConfigFile cfg = load(g);
  BasinSpec spec = cfg.basin;
  if (g.seed) spec.seed = *g.seed;
  emit(g, "basin.json", basin_json(basin_probe(spec)));
  return 0;
}

int cmd_phase(const Globals& g) {
  ConfigFile cfg = load(g);
  if (!cfg.has_phase_grid) throw std::invalid_argument("phase-grid needs a [phase_grid] table in --config");
  PhaseGridSpec spec = cfg.phase_grid;
  if (g.seed) spec.seed = *g.seed;
  emit(g, "phase_grid.csv", phase_grid_csv(phase_grid(spec)));
  return 0;
}

int cmd_rigidity(const Globals& g) {
  ConfigFile cfg = load(g);
  ExperimentSpec spec = cfg.experiment;
  if (g.seed) spec.master_seed = *g.seed;
  emit(g, "rigidity.csv", rigidity_csv(rigidity_curve(spec)));
  return 0;
}

int cmd_selfcheck(const Globals& g) {
  bool ok = true;
  for (const auto& c : run_selfcheck(g.seed.value_or(1))) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    ok = ok && c.passed;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensor network localization by EDM completion on a quotient manifold"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed = 0;
  int threads = 1;
  auto* seed_opt = app.add_option("--seed", seed, "Seed (master seed for sweeps)");
  app.add_option("--out", g.out, "Output directory; stdout when omitted");
  app.add_option("--config", g.config, "TOML experiment file")->check(CLI::ExistingFile);
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* simulate = app.add_subcommand("simulate", "Generate a scene and its measurements");
  std::optional<double> sim_value;
  simulate->add_option("--value", sim_value, "Value of the sweep axis to use");

  auto* solve = app.add_subcommand("solve", "Solve one instance and print the report as JSON");
  std::string solver = "rank-reduction", scene_path, meas_path;
  std::optional<double> solve_value;
  solve->add_option("--solver", solver, "rank-reduction | rcg | gd | madmm");
  solve->add_option("--scene", scene_path, "Scene JSON written by simulate")->check(CLI::ExistingFile);
  solve->add_option("--measurements", meas_path, "Measurement JSON or CSV")->check(CLI::ExistingFile);
  solve->add_option("--value", solve_value, "Value of the sweep axis to use");

  auto* sweep = app.add_subcommand("sweep", "Run the configured sweep and write sweep.csv");
  std::vector<std::string> sweep_solvers;
  bool dump_trials = false;
  sweep->add_option("--solver", sweep_solvers, "Override the solver list");
  sweep->add_flag("--dump-trials", dump_trials, "Also write per-trial trials.csv");

  auto* basin = app.add_subcommand("basin-probe", "Sample the attractive region and report gradient ratios");
  auto* phase = app.add_subcommand("phase-grid", "Success fractions of spectral-init gradient descent");
  auto* rigid = app.add_subcommand("rigidity-curve", "Rigidity rates of sampled masks along the sweep");
  auto* check = app.add_subcommand("selfcheck", "Run the invariant suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }
  if (*seed_opt) g.seed = seed;
  if (*threads_opt) g.threads = threads;

  try {
    if (*simulate) return cmd_simulate(g, sim_value);
    if (*solve) return cmd_solve(g, solver, scene_path, meas_path, solve_value);
    if (*sweep) return cmd_sweep(g, sweep_solvers, dump_trials);
    if (*basin) return cmd_basin(g);
    if (*phase) return cmd_phase(g);
    if (*rigid) return cmd_rigidity(g);
    if (*check) return cmd_selfcheck(g);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << '\n' << app.help();
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cout << error_json(e.what());
    return 1;
  }
  return 2;
}
