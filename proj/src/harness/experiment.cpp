#include "edmc/harness/experiment.hpp"

#include "edmc/alignment.hpp"
#include "edmc/edm.hpp"
#include "edmc/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace edmc::harness {

namespace {

bool inside_polygon(const std::vector<std::array<double, 2>>& poly, double x, double y) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    if ((a[1] > y) != (b[1] > y) && x < (b[0] - a[0]) * (y - a[1]) / (b[1] - a[1]) + a[0]) in = !in;
  }
  return in;
}

std::vector<std::array<double, 2>> default_polygon(double s) {
  const double h = s / 2;
  // U-shaped region: a notch removed from the top of the square.
  return {{-h, -h}, {h, -h}, {h, h}, {0.2 * s, h}, {0.2 * s, -0.1 * s}, {-0.2 * s, -0.1 * s}, {-0.2 * s, h}, {-h, h}};
}

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (trials < 1) throw std::invalid_argument("trials must be at least 1");
  if (d < 1) throw std::invalid_argument("d must be at least 1");
  for (std::size_t i = 1; i < sweep_values.size(); ++i)
    if (!(sweep_values[i] > sweep_values[i - 1])) throw std::invalid_argument("sweep values must be strictly increasing");
  if (!sweep_axis.empty() && sweep_values.empty()) throw std::invalid_argument("sweep axis without values");
  static const std::vector<std::string> axes{"r", "sigma", "p", "p_out", "v_out", "n"};
  if (!sweep_axis.empty() && std::find(axes.begin(), axes.end(), sweep_axis) == axes.end())
    throw std::invalid_argument("unknown sweep axis: " + sweep_axis);
  if (solvers.empty()) throw std::invalid_argument("no solvers configured");
  for (const auto& s : solvers)
    if (!is_known_solver(s)) throw std::invalid_argument("unknown solver: " + s);
  if (scenario == Scenario::PaperSquare && d != 2) throw std::invalid_argument("paper_square scenes are planar");
}

ExperimentSpec with_axis(ExperimentSpec spec, const std::string& axis, double value) {
  if (axis.empty()) return spec;
  if (axis == "r")
    spec.radius = value;
  else if (axis == "sigma")
    spec.sigma = value;
  else if (axis == "p")
    spec.p = value;
  else if (axis == "p_out")
    spec.p_out = value;
  else if (axis == "v_out")
    spec.v_out = value;
  else if (axis == "n") {
    if (spec.scenario == Scenario::GaussianCloud)
      spec.n = static_cast<Index>(value);
    else
      spec.sensors = static_cast<Index>(value);
  } else {
    throw std::invalid_argument("unknown sweep axis: " + axis);
  }
  return spec;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over a combined state
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t sweep_index, std::uint64_t trial_index) {
  return mix_seed(mix_seed(master, sweep_index), trial_index);
}

Scene gen_scene(const ExperimentSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Scene sc;
  sc.seed = seed;
  sc.side = spec.side;
  if (spec.scenario == Scenario::GaussianCloud) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix Y(spec.n, spec.d);
    for (Index i = 0; i < spec.n; ++i)
      for (Index k = 0; k < spec.d; ++k) Y(i, k) = normal(rng);
    sc.positions.data = Y;
    return sc;
  }

  const double h = spec.side / 2;
  std::vector<std::array<double, 2>> anchors = spec.anchor_positions;
  if (anchors.empty()) anchors = {{-h, -h}, {-h, h}, {h, h}, {h, -h}};
  const auto na = static_cast<Index>(anchors.size());
  Matrix Y(na + spec.sensors, 2);
  for (Index a = 0; a < na; ++a) {
    Y(a, 0) = anchors[static_cast<std::size_t>(a)][0];
    Y(a, 1) = anchors[static_cast<std::size_t>(a)][1];
    sc.anchors.push_back(a);
  }
  std::uniform_real_distribution<double> unif(-h, h);
  const auto poly = spec.polygon.empty() ? default_polygon(spec.side) : spec.polygon;
  for (Index i = 0; i < spec.sensors; ++i) {
    double x = unif(rng), y = unif(rng);
    if (spec.scenario == Scenario::Irregular) {
      while (!inside_polygon(poly, x, y)) {
        x = unif(rng);
        y = unif(rng);
      }
    }
    Y(na + i, 0) = x;
    Y(na + i, 1) = y;
  }
  sc.positions.data = Y;
  return sc;
}

Instance make_instance(const ExperimentSpec& spec, std::uint64_t seed) {
  Instance inst;
  inst.seed = seed;
  inst.scene = gen_scene(spec, mix_seed(seed, 1));
  const Index n = inst.scene.positions.n();
  inst.truth = Edm{squared_distances(inst.scene.positions.data)};

  if (spec.sampling == SamplingKind::UnitBall) {
    inst.mask = sample_unit_ball(inst.truth, spec.radius, inst.scene.anchors, spec.anchor_clique);
  } else {
    SampleMask m = spec.entrywise ? sample_bernoulli_entrywise(n, spec.p, mix_seed(seed, 2))
                                   : sample_bernoulli(n, spec.p, mix_seed(seed, 2));
    if (spec.anchor_clique && inst.scene.anchors.size() > 1) {
      auto pairs = m.pairs;
      for (std::size_t a = 0; a < inst.scene.anchors.size(); ++a)
        for (std::size_t b = a + 1; b < inst.scene.anchors.size(); ++b)
          pairs.emplace_back(inst.scene.anchors[a], inst.scene.anchors[b]);
      SampleMask merged = mask_from_pairs(n, pairs);
      merged.scheme = SamplingScheme::Bernoulli;
      merged.parameter = spec.p;
      merged.anchor_clique = true;
      m = merged;
    }
    inst.mask = m;
  }

  inst.observed = apply_rssi_noise(inst.truth, spec.sigma, spec.gamma, mix_seed(seed, 3));
  std::vector<char> is_anchor(static_cast<std::size_t>(n), 0);
  for (Index a : inst.scene.anchors) is_anchor[static_cast<std::size_t>(a)] = 1;
  for (Index a : inst.scene.anchors)
    for (Index b : inst.scene.anchors) inst.observed.data(a, b) = inst.truth.data(a, b);

  if (spec.p_out > 0.0) {
    SampleMask free = inst.mask;
    free.pairs.clear();
    for (const auto& pr : inst.mask.pairs)
      if (!(is_anchor[static_cast<std::size_t>(pr.first)] && is_anchor[static_cast<std::size_t>(pr.second)]))
        free.pairs.push_back(pr);
    inst.observed = inject_outliers(inst.observed, free, spec.p_out, spec.v_out, mix_seed(seed, 4));
  }
  inst.weights = spec.noiseless() ? WeightMatrix{Matrix::Ones(n, n)} : build_weights(inst.observed, inst.truth);
  return inst;
}

const std::vector<std::string>& known_solvers() {
  static const std::vector<std::string> names{"rank-reduction", "rcg", "gd", "madmm"};
  return names;
}

bool is_known_solver(const std::string& name) {
  const auto& k = known_solvers();
  return std::find(k.begin(), k.end(), name) != k.end();
}

TrialReport run_pipeline(const std::string& solver, const Instance& inst, const ExperimentSpec& spec) {
  const bool clean = spec.noiseless();
  const SstressProblem problem =
      clean ? SstressProblem(inst.observed, inst.mask) : SstressProblem(inst.observed, inst.mask, inst.weights);
  SolverConfig cfg = spec.solver_overridden ? spec.solver : (clean ? SolverConfig::noiseless() : SolverConfig::noisy());
  cfg.perturb_seed = mix_seed(inst.seed, 5);
  const Index d = inst.scene.positions.d();

  const auto start = std::chrono::steady_clock::now();
  TrialReport rep;
  if (solver == "rank-reduction") {
    rep = rank_reduction(problem, d, cfg);
  } else if (solver == "rcg" || solver == "gd") {
    const SpectralInit init = svd_mds_init(inst.observed, inst.mask, d, d + 2);
    const Matrix Y0 = ensure_full_rank(init.Y, cfg.perturb_seed);
    rep = solver == "rcg" ? rcg(problem, Y0, cfg) : gd(problem, Y0, cfg);
    rep.init_padded = init.padded;
  } else if (solver == "madmm") {
    // Warm start from the rank-reduction estimate, then the l1 refinement.
    const TrialReport warm = rank_reduction(problem, d, cfg);
    rep = madmm(problem, warm.y_hat.data, spec.admm, cfg);
  } else {
    throw std::invalid_argument("unknown solver: " + solver);
  }
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  rep.solver = solver;
  rep.seed = inst.seed;

  if (rep.y_hat.data.allFinite()) {
    const RecoveryMetrics m = recovery_metrics(rep.y_hat.data, inst.scene, inst.truth);
    rep.re = m.re;
    rep.msle = m.msle;
    if (spec.hessian_check && clean && inst.scene.positions.n() <= 500)
      rep.hessian_psd = hessian_psd_at(problem, rep.y_hat.data);
  } else {
    rep.re = rep.msle = std::numeric_limits<double>::infinity();
  }
  return rep;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) fn(i);
    });
  for (auto& th : pool) th.join();
}

std::vector<SweepRow> aggregate(const std::vector<TrialRecord>& trials, const ExperimentSpec& spec) {
  // Group by (sweep index, solver order) to keep output order stable.
  std::map<std::pair<Index, std::size_t>, std::vector<const TrialRecord*>> groups;
  for (const auto& t : trials) {
    const auto it = std::find(spec.solvers.begin(), spec.solvers.end(), t.report.solver);
    const auto order = static_cast<std::size_t>(it - spec.solvers.begin());
    groups[{t.sweep_index, order}].push_back(&t);
  }
  std::vector<SweepRow> rows;
  for (const auto& [key, list] : groups) {
    SweepRow row;
    row.value = list.front()->value;
    row.solver = list.front()->report.solver;
    std::vector<double> re, msle;
    double succ = 0, wall = 0, vanish = 0, psd = 0, psd_count = 0;
    for (const auto* t : list) {
      re.push_back(t->report.re);
      msle.push_back(t->report.msle);
      succ += t->report.re < spec.success_threshold() ? 1 : 0;
      wall += t->report.wall_ms;
      vanish += t->report.status == SolverStatus::GradientTolerance ? 1 : 0;
      if (t->report.hessian_psd) {
        psd_count += 1;
        psd += *t->report.hessian_psd ? 1 : 0;
      }
    }
    const double m = static_cast<double>(list.size());
    row.re_q85 = quantile(re, 0.85);
    row.msle_q85 = quantile(msle, 0.85);
    row.success = succ / m;
    row.wall_ms = wall / m;
    double rs = 0, ms = 0;
    for (double v : re) rs += v;
    for (double v : msle) ms += v;
    row.re_mean = rs / m;
    row.msle_mean = ms / m;
    row.grad_vanish_rate = vanish / m;
    row.hessian_psd_rate = psd_count > 0 ? psd / psd_count : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

SweepResult run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<double> values = spec.sweep_values;
  const bool swept = !spec.sweep_axis.empty();
  if (!swept) values = {0.0};

  struct Job {
    Index sweep_index;
    int trial;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < values.size(); ++s)
    for (int t = 0; t < spec.trials; ++t) jobs.push_back({static_cast<Index>(s), t});

  const std::size_t ns = spec.solvers.size();
  SweepResult result;
  result.trials.resize(jobs.size() * ns);
  parallel_for(static_cast<int>(jobs.size()), spec.threads, [&](int j) {
    const Job job = jobs[static_cast<std::size_t>(j)];
    const double value = values[static_cast<std::size_t>(job.sweep_index)];
    const ExperimentSpec local = swept ? with_axis(spec, spec.sweep_axis, value) : spec;
    const std::uint64_t seed =
        trial_seed(spec.master_seed, static_cast<std::uint64_t>(job.sweep_index), static_cast<std::uint64_t>(job.trial));
    const Instance inst = make_instance(local, seed);
    for (std::size_t s = 0; s < ns; ++s) {
      TrialRecord rec;
      rec.sweep_index = job.sweep_index;
      rec.value = value;
      rec.trial = job.trial;
      try {
        rec.report = run_pipeline(spec.solvers[s], inst, local);
      } catch (const std::exception&) {
        rec.report.solver = spec.solvers[s];
        rec.report.seed = seed;
        rec.report.status = SolverStatus::Diverged;
        rec.report.re = rec.report.msle = std::numeric_limits<double>::infinity();
      }
      rec.report.y_hat.data.resize(0, 0);
      rec.report.cost_trace.clear();
      result.trials[static_cast<std::size_t>(j) * ns + s] = std::move(rec);
    }
  });
  result.rows = aggregate(result.trials, spec);
  return result;
}

std::string sweep_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "value,solver,re_q85,msle_q85,success,wall_ms\n";
  for (const auto& r : result.rows)
    os << fmt(r.value, 10) << ',' << r.solver << ',' << fmt(r.re_q85, 10) << ',' << fmt(r.msle_q85, 10) << ','
       << fmt(r.success, 10) << ',' << fmt(r.wall_ms, 6) << '\n';
  return os.str();
}

std::string trials_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "sweep_index,value,trial,solver,seed,re,msle,iters,final_grad_norm,hessian_psd,status,wall_ms\n";
  for (const auto& t : result.trials) {
    const auto& r = t.report;
    os << t.sweep_index << ',' << fmt(t.value, 17) << ',' << t.trial << ',' << r.solver << ',' << r.seed << ','
       << fmt(r.re, 17) << ',' << fmt(r.msle, 17) << ',' << r.iters << ',' << fmt(r.final_grad_norm, 17) << ','
       << (r.hessian_psd ? (*r.hessian_psd ? "1" : "0") : "") << ',' << to_string(r.status) << ','
       << fmt(r.wall_ms, 6) << '\n';
  }
  return os.str();
}

}  // namespace edmc::harness
