#include "edmc/harness/io.hpp"

#include "edmc/sampling.hpp"

#include <json.hpp>
#include <toml.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

namespace edmc::harness {

using nlohmann::json;

namespace {

const char* scheme_name(SamplingScheme s) {
  switch (s) {
    case SamplingScheme::UnitBall: return "unit_ball";
    case SamplingScheme::Bernoulli: return "bernoulli";
    case SamplingScheme::Explicit: return "explicit";
  }
  return "explicit";
}

SamplingScheme parse_scheme(const std::string& s) {
  if (s == "unit_ball") return SamplingScheme::UnitBall;
  if (s == "bernoulli") return SamplingScheme::Bernoulli;
  if (s == "explicit") return SamplingScheme::Explicit;
  throw std::invalid_argument("unknown sampling scheme: " + s);
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Malformed documents surface as invalid_argument like every other input error.
template <class F>
auto json_guard(const char* what, F&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string(what) + ": " + e.what());
  }
}

json matrix_rows(const Matrix& M) {
  json rows = json::array();
  for (Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Table view that remembers which keys were read so leftovers can be reported.
class Section {
 public:
  Section(const toml::table* tbl, std::string name) : tbl_(tbl), name_(std::move(name)) {}

  bool present() const { return tbl_ != nullptr; }

  template <typename T>
  void get(const char* key, T& out) {
    const toml::node* node = find(key);
    if (!node) return;
    if constexpr (std::is_same_v<T, bool>) {
      auto v = node->value<bool>();
      if (!v) fail(key, "expected a boolean");
      out = *v;
    } else if constexpr (std::is_same_v<T, std::string>) {
      auto v = node->value<std::string>();
      if (!v) fail(key, "expected a string");
      out = *v;
    } else if constexpr (std::is_floating_point_v<T>) {
      auto v = node->value<double>();
      if (!v) fail(key, "expected a number");
      out = static_cast<T>(*v);
    } else {
      auto v = node->value<std::int64_t>();
      if (!v) fail(key, "expected an integer");
      if (*v < 0 && std::is_unsigned_v<T>) fail(key, "expected a non-negative integer");
      out = static_cast<T>(*v);
    }
  }

  void get_numbers(const char* key, std::vector<double>& out) {
    const toml::node* node = find(key);
    if (!node) return;
    const toml::array* arr = node->as_array();
    if (!arr) fail(key, "expected an array of numbers");
    out.clear();
    for (const auto& el : *arr) {
      auto v = el.value<double>();
      if (!v) fail(key, "expected an array of numbers");
      out.push_back(*v);
    }
  }

  void get_strings(const char* key, std::vector<std::string>& out) {
    const toml::node* node = find(key);
    if (!node) return;
    const toml::array* arr = node->as_array();
    if (!arr) fail(key, "expected an array of strings");
    out.clear();
    for (const auto& el : *arr) {
      auto v = el.value<std::string>();
      if (!v) fail(key, "expected an array of strings");
      out.push_back(*v);
    }
  }

  void get_points(const char* key, std::vector<std::array<double, 2>>& out) {
    const toml::node* node = find(key);
    if (!node) return;
    const toml::array* arr = node->as_array();
    if (!arr) fail(key, "expected an array of [x, y] pairs");
    out.clear();
    for (const auto& el : *arr) {
      const toml::array* pt = el.as_array();
      if (!pt || pt->size() != 2) fail(key, "expected an array of [x, y] pairs");
      auto x = (*pt)[0].value<double>();
      auto y = (*pt)[1].value<double>();
      if (!x || !y) fail(key, "expected an array of [x, y] pairs");
      out.push_back({*x, *y});
    }
  }

  void finish() const {
    if (!tbl_) return;
    for (const auto& [k, v] : *tbl_) {
      const std::string key(k.str());
      if (!used_.count(key)) throw std::invalid_argument("unknown key '" + key + "' in [" + name_ + "]");
    }
  }

 private:
  const toml::node* find(const char* key) {
    if (!tbl_) return nullptr;
    const toml::node* node = tbl_->get(key);
    if (node) used_.insert(key);
    return node;
  }
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw std::invalid_argument("[" + name_ + "] " + key + ": " + what);
  }

  const toml::table* tbl_;
  std::string name_;
  std::set<std::string> used_;
};

Metric parse_metric(const std::string& s) {
  if (s == "g1") return Metric::G1;
  if (s == "g2") return Metric::G2;
  throw std::invalid_argument("metric must be g1 or g2");
}

bool parse_bernoulli_model(const std::string& s) {
  if (s == "pair") return false;
  if (s == "entry") return true;
  throw std::invalid_argument("bernoulli_model must be pair or entry");
}

}  // namespace

Scenario parse_scenario(const std::string& name) {
  if (name == "paper_square") return Scenario::PaperSquare;
  if (name == "gaussian_cloud") return Scenario::GaussianCloud;
  if (name == "irregular") return Scenario::Irregular;
  throw std::invalid_argument("unknown scenario: " + name);
}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::PaperSquare: return "paper_square";
    case Scenario::GaussianCloud: return "gaussian_cloud";
    case Scenario::Irregular: return "irregular";
  }
  return "paper_square";
}

std::string scene_json(const Scene& scene) {
  json anchors = json::array();
  for (Index a : scene.anchors) {
    json pt = json::array();
    for (Index k = 0; k < scene.positions.d(); ++k) pt.push_back(scene.positions.data(a, k));
    anchors.push_back(std::move(pt));
  }
  json j{{"n", scene.positions.n()},
         {"d", scene.positions.d()},
         {"side", scene.side},
         {"seed", scene.seed},
         {"anchors", anchors},
         {"anchor_indices", scene.anchors},
         {"positions", matrix_rows(scene.positions.data)}};
  return j.dump(2) + "\n";
}

static Scene scene_from_json_impl(const std::string& text) {
  const json j = json::parse(text);
  Scene sc;
  const auto& rows = j.at("positions");
  const Index n = static_cast<Index>(rows.size());
  const Index d = n > 0 ? static_cast<Index>(rows[0].size()) : 0;
  sc.positions.data.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != d) throw std::invalid_argument("scene: ragged positions");
    for (Index k = 0; k < d; ++k) sc.positions.data(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  if (j.contains("n") && j["n"].get<Index>() != n) throw std::invalid_argument("scene: n disagrees with positions");
  if (j.contains("anchor_indices")) {
    sc.anchors = j["anchor_indices"].get<std::vector<Index>>();
  } else if (j.contains("anchors")) {
    // Anchors given by coordinates: locate the matching position rows.
    for (const auto& pt : j["anchors"]) {
      Index found = -1;
      for (Index i = 0; i < n && found < 0; ++i) {
        bool same = static_cast<Index>(pt.size()) == d;
        for (Index k = 0; same && k < d; ++k)
          same = std::abs(sc.positions.data(i, k) - pt[static_cast<std::size_t>(k)].get<double>()) <= 1e-12;
        if (same) found = i;
      }
      if (found < 0) throw std::invalid_argument("scene: anchor not among positions");
      sc.anchors.push_back(found);
    }
  }
  for (Index a : sc.anchors)
    if (a < 0 || a >= n) throw std::invalid_argument("scene: anchor index out of range");
  sc.side = j.value("side", 1.0);
  sc.seed = j.value("seed", std::uint64_t{0});
  return sc;
}

Measurements measurements_of(const Instance& inst, const ExperimentSpec& spec) {
  Measurements m;
  m.observed = inst.observed;
  m.mask = inst.mask;
  m.sigma = spec.sigma;
  m.gamma = spec.gamma;
  m.p_out = spec.p_out;
  m.v_out = spec.v_out;
  m.seed = inst.seed;
  return m;
}

namespace {

json measurement_header(const Measurements& m) {
  json h{{"n", m.mask.n},
         {"scheme", scheme_name(m.mask.scheme)},
         {"anchor_clique", m.mask.anchor_clique},
         {"sigma", m.sigma},
         {"gamma", m.gamma},
         {"p_out", m.p_out},
         {"v_out", m.v_out},
         {"seed", m.seed}};
  if (m.mask.scheme == SamplingScheme::UnitBall) h["r"] = m.mask.parameter;
  if (m.mask.scheme == SamplingScheme::Bernoulli) h["p"] = m.mask.parameter;
  return h;
}

void apply_header(Measurements& m, const json& h) {
  m.mask.scheme = parse_scheme(h.value("scheme", std::string("explicit")));
  if (h.contains("r")) m.mask.parameter = h["r"].get<double>();
  if (h.contains("p")) m.mask.parameter = h["p"].get<double>();
  m.mask.anchor_clique = h.value("anchor_clique", false);
  m.sigma = h.value("sigma", 0.0);
  m.gamma = h.value("gamma", 2.0);
  m.p_out = h.value("p_out", 0.0);
  m.v_out = h.value("v_out", 0.5);
  m.seed = h.value("seed", std::uint64_t{0});
}

}  // namespace

std::string measurements_json(const Measurements& m) {
  json pairs = json::array();
  for (const auto& [i, j] : m.mask.pairs) pairs.push_back({i, j, m.observed.data(i, j)});
  json out = measurement_header(m);
  out["pairs"] = pairs;
  return out.dump(2) + "\n";
}

namespace {

Measurements assemble(Index n, std::vector<std::tuple<Index, Index, double>> entries) {
  if (n < 1) throw std::invalid_argument("measurements: n must be positive");
  Measurements m;
  m.observed.data = Matrix::Zero(n, n);
  std::vector<std::pair<Index, Index>> pairs;
  for (auto [i, j, v] : entries) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw std::invalid_argument("measurements: bad pair index");
    if (!std::isfinite(v) || v < 0) throw std::invalid_argument("measurements: squared distance must be finite and >= 0");
    if (i > j) std::swap(i, j);
    m.observed.data(i, j) = m.observed.data(j, i) = v;
    pairs.emplace_back(i, j);
  }
  m.mask = mask_from_pairs(n, pairs);
  return m;
}

}  // namespace

static Measurements measurements_from_json_impl(const std::string& text) {
  const json j = json::parse(text);
  std::vector<std::tuple<Index, Index, double>> entries;
  for (const auto& p : j.at("pairs")) {
    if (p.size() != 3) throw std::invalid_argument("measurements: each pair is [i, j, d2]");
    entries.emplace_back(p[0].get<Index>(), p[1].get<Index>(), p[2].get<double>());
  }
  Measurements m = assemble(j.at("n").get<Index>(), std::move(entries));
  apply_header(m, j);
  return m;
}

std::string measurements_csv(const Measurements& m) {
  std::ostringstream os;
  os << "# " << measurement_header(m).dump() << "\n";
  os << "i,j,d2\n";
  char buf[64];
  for (const auto& [i, j] : m.mask.pairs) {
    std::snprintf(buf, sizeof buf, "%.17g", m.observed.data(i, j));
    os << i << ',' << j << ',' << buf << '\n';
  }
  return os.str();
}

static Measurements measurements_from_csv_impl(const std::string& text, Index n) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::tuple<Index, Index, double>> entries;
  Index max_index = -1;
  json header = json::object();
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      header = json::parse(line.substr(1));
      continue;
    }
    if (line.rfind("i,j", 0) == 0) continue;
    long long i = 0, j = 0;
    double v = 0;
    if (std::sscanf(line.c_str(), "%lld,%lld,%lf", &i, &j, &v) != 3)
      throw std::invalid_argument("measurements csv: cannot parse line '" + line + "'");
    entries.emplace_back(static_cast<Index>(i), static_cast<Index>(j), v);
    max_index = std::max<Index>(max_index, static_cast<Index>(std::max(i, j)));
  }
  if (n <= 0) n = header.contains("n") ? header["n"].get<Index>() : max_index + 1;
  Measurements m = assemble(n, std::move(entries));
  apply_header(m, header);
  return m;
}

Scene scene_from_json(const std::string& text) {
  return json_guard("scene", [&] { return scene_from_json_impl(text); });
}

Measurements measurements_from_json(const std::string& text) {
  return json_guard("measurements", [&] { return measurements_from_json_impl(text); });
}

Measurements measurements_from_csv(const std::string& text, Index n) {
  return json_guard("measurements csv header", [&] { return measurements_from_csv_impl(text, n); });
}

std::string report_json(const TrialReport& r, bool include_points) {
  json j{{"solver", r.solver},
         {"seed", r.seed},
         {"status", to_string(r.status)},
         {"re", finite_or_null(r.re)},
         {"msle", finite_or_null(r.msle)},
         {"iters", r.iters},
         {"final_grad_norm", finite_or_null(r.final_grad_norm)},
         {"hessian_psd", r.hessian_psd ? json(*r.hessian_psd) : json(nullptr)},
         {"wall_ms", r.wall_ms},
         {"cost_trace", json::array()},
         {"rank_trace", r.rank_trace},
         {"regularizations", r.regularizations},
         {"perturbations", r.perturbations},
         {"init_padded", r.init_padded}};
  for (double c : r.cost_trace) j["cost_trace"].push_back(finite_or_null(c));
  if (include_points) j["y_hat"] = matrix_rows(r.y_hat.data);
  return j.dump(2) + "\n";
}

std::string error_json(const std::string& message) { return json{{"error", message}}.dump() + "\n"; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << contents;
  if (!out) throw std::runtime_error("write failed for " + path);
}

ConfigFile load_config(const std::string& path) { return parse_config(read_file(path), path); }

ConfigFile parse_config(const std::string& text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ": " << e.description() << " (line " << e.source().begin.line << ")";
    throw std::invalid_argument(os.str());
  }

  static const std::set<std::string> tables{"scene", "measurements", "sweep", "solver", "admm", "basin", "phase_grid"};
  for (const auto& [k, v] : root) {
    const std::string key(k.str());
    if (key == "name") continue;
    if (!tables.count(key) || !v.is_table()) throw std::invalid_argument("unknown top-level key '" + key + "'");
  }

  ConfigFile cfg;
  ExperimentSpec& e = cfg.experiment;
  if (auto name = root["name"].value<std::string>()) e.name = *name;

  Section scene(root["scene"].as_table(), "scene");
  std::string scenario = to_string(e.scenario);
  scene.get("scenario", scenario);
  e.scenario = parse_scenario(scenario);
  scene.get("sensors", e.sensors);
  scene.get("n", e.n);
  scene.get("d", e.d);
  scene.get("side", e.side);
  scene.get_points("polygon", e.polygon);
  scene.get_points("anchors", e.anchor_positions);
  scene.finish();

  Section meas(root["measurements"].as_table(), "measurements");
  std::string sampling = e.sampling == SamplingKind::UnitBall ? "unit_ball" : "bernoulli";
  meas.get("sampling", sampling);
  if (sampling == "unit_ball")
    e.sampling = SamplingKind::UnitBall;
  else if (sampling == "bernoulli")
    e.sampling = SamplingKind::Bernoulli;
  else
    throw std::invalid_argument("sampling must be unit_ball or bernoulli");
  std::string model = e.entrywise ? "entry" : "pair";
  meas.get("bernoulli_model", model);
  e.entrywise = parse_bernoulli_model(model);
  meas.get("radius", e.radius);
  meas.get("p", e.p);
  meas.get("anchor_clique", e.anchor_clique);
  meas.get("sigma", e.sigma);
  meas.get("gamma", e.gamma);
  meas.get("p_out", e.p_out);
  meas.get("v_out", e.v_out);
  meas.finish();

  Section sweep(root["sweep"].as_table(), "sweep");
  sweep.get("axis", e.sweep_axis);
  sweep.get_numbers("values", e.sweep_values);
  sweep.get("trials", e.trials);
  sweep.get("master_seed", e.master_seed);
  sweep.get_strings("solvers", e.solvers);
  sweep.get("re_exact", e.re_exact);
  sweep.get("re_loose", e.re_loose);
  sweep.get("loose_success", e.loose_success);
  sweep.get("hessian_check", e.hessian_check);
  sweep.get("threads", e.threads);
  sweep.finish();

  Section solver(root["solver"].as_table(), "solver");
  if (solver.present()) {
    SolverConfig& s = e.solver;
    std::string preset = e.noiseless() ? "noiseless" : "noisy";
    solver.get("preset", preset);
    if (preset == "noiseless")
      s = SolverConfig::noiseless();
    else if (preset == "noisy")
      s = SolverConfig::noisy();
    else
      throw std::invalid_argument("[solver] preset must be noiseless or noisy");
    std::string metric = s.metric == Metric::G1 ? "g1" : "g2";
    solver.get("metric", metric);
    s.metric = parse_metric(metric);
    solver.get("imax", s.imax);
    solver.get("grad_tol", s.grad_tol);
    solver.get("step_tol", s.step_tol);
    solver.get("c1", s.ls.c1);
    solver.get("c2", s.ls.c2);
    solver.get("eps", s.ls.eps);
    solver.get("alpha_max", s.ls.alpha_max);
    solver.get("theta", s.ls.theta);
    solver.get("gamma_bracket", s.ls.gamma_bracket);
    solver.get("armijo_c1", s.armijo_c1);
    solver.get("armijo_max_halvings", s.armijo_max_halvings);
    solver.get("switch_omega", s.switch_omega);
    solver.get("switch_delta", s.switch_delta);
    solver.get("start_with_hz", s.start_with_hz);
    solver.get("eta_bar", s.eta_bar);
    solver.get("n1", s.n1);
    solver.get("n2", s.n2);
    solver.get("gd_grad_tol", s.gd_grad_tol);
    solver.get("gd_step_tol", s.gd_step_tol);
    solver.get("gd_cost_tol", s.gd_cost_tol);
    solver.get("gd_max_ascents", s.gd_max_ascents);
    solver.finish();
    s.ls.validate();
    e.solver_overridden = true;
  }

  Section admm(root["admm"].as_table(), "admm");
  admm.get("rho0", e.admm.rho0);
  admm.get("lambda", e.admm.lambda);
  admm.get("tau", e.admm.tau);
  admm.get("rho_max", e.admm.rho_max);
  admm.get("t_f", e.admm.t_f);
  admm.get("eps_tol", e.admm.eps_tol);
  admm.get("n_outer", e.admm.n_outer);
  admm.get("inner_iters", e.admm.inner_iters);
  admm.get("residual_dual_init", e.admm.residual_dual_init);
  admm.finish();

  Section basin(root["basin"].as_table(), "basin");
  if (basin.present()) {
    cfg.has_basin = true;
    BasinSpec& b = cfg.basin;
    basin.get("n", b.n);
    basin.get("d", b.d);
    basin.get("p", b.p);
    std::string bm = b.entrywise ? "entry" : "pair";
    basin.get("bernoulli_model", bm);
    b.entrywise = parse_bernoulli_model(bm);
    basin.get("draws", b.draws);
    basin.get("seed", b.seed);
    basin.get("frob_divisor", b.frob_divisor);
    basin.finish();
  }

  Section grid(root["phase_grid"].as_table(), "phase_grid");
  if (grid.present()) {
    cfg.has_phase_grid = true;
    PhaseGridSpec& g = cfg.phase_grid;
    grid.get("axis", g.axis);
    grid.get_numbers("rows", g.rows);
    grid.get_numbers("p_values", g.p_values);
    grid.get_numbers("c_values", g.c_values);
    grid.get("fixed_n", g.fixed_n);
    grid.get("fixed_d", g.fixed_d);
    std::string bm = g.entrywise ? "entry" : "pair";
    grid.get("bernoulli_model", bm);
    g.entrywise = parse_bernoulli_model(bm);
    grid.get("trials", g.trials);
    grid.get("seed", g.seed);
    grid.get("threads", g.threads);
    grid.get("re_threshold", g.re_threshold);
    grid.finish();
  }

  if (root["scene"] || root["measurements"] || root["sweep"]) e.validate();
  return cfg;
}

}  // namespace edmc::harness
