#include "edmc/harness/probes.hpp"

#include "edmc/alignment.hpp"
#include "edmc/edm.hpp"
#include "edmc/rigidity.hpp"
#include "edmc/sampling.hpp"
#include "edmc/sstress.hpp"

#include <json.hpp>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

namespace edmc::harness {

namespace {

RatioSummary summarize(std::vector<double> v) {
  RatioSummary s;
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  s.median = quantile(v, 0.5);
  return s;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

BasinReport basin_probe(const BasinSpec& spec) {
  if (spec.n <= spec.d + 1 || spec.d < 1) throw std::invalid_argument("basin_probe: need n > d + 1");
  if (!(spec.p > 0.0 && spec.p <= 1.0)) throw std::invalid_argument("basin_probe: p outside (0,1]");
  if (spec.draws < 1) throw std::invalid_argument("basin_probe: draws must be positive");

  std::mt19937_64 rng(mix_seed(spec.seed, 1));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Matrix Ystar(spec.n, spec.d);
  for (Index i = 0; i < Ystar.size(); ++i) Ystar(i) = normal(rng);
  Ystar = center_rows(Ystar);

  Eigen::JacobiSVD<Matrix> svd(Ystar, Eigen::ComputeThinU);
  BasinReport rep;
  rep.sigma_1 = svd.singularValues()(0) * svd.singularValues()(0);
  rep.sigma_d = svd.singularValues()(spec.d - 1) * svd.singularValues()(spec.d - 1);
  rep.kappa = rep.sigma_1 / rep.sigma_d;
  const double max_row = svd.matrixU().rowwise().squaredNorm().maxCoeff();
  rep.mu = static_cast<double>(spec.n) / static_cast<double>(spec.d) * max_row;
  // mu d sigma_1 delta_t / (16 kappa n) with delta_t = 1 / (5 mu d)
  rep.row_cap = rep.sigma_1 / (80.0 * rep.kappa * static_cast<double>(spec.n));

  const Edm truth{squared_distances(Ystar)};
  const SampleMask mask = spec.entrywise ? sample_bernoulli_entrywise(spec.n, spec.p, mix_seed(spec.seed, 2))
                                         : sample_bernoulli(spec.n, spec.p, mix_seed(spec.seed, 2));
  const SstressProblem problem(truth, mask);

  const double frob_cap = rep.sigma_d / spec.frob_divisor;
  const double frob_floor = 1e-12 * rep.sigma_d;
  const double d = static_cast<double>(spec.d);
  for (int k = 0; k < spec.draws; ++k) {
    Matrix raw;
    int local_rejects = 0;
    for (;;) {
      raw.resize(spec.n, spec.d);
      for (Index i = 0; i < raw.size(); ++i) raw(i) = normal(rng);
      raw = center_rows(raw);
      const double target = std::max(unif(rng) * frob_cap, frob_floor);
      raw *= std::sqrt(target) / raw.norm();
      if (raw.rowwise().squaredNorm().maxCoeff() <= rep.row_cap) break;
      ++rep.rejects;
      if (++local_rejects > spec.max_rejects) {
        rep.row_cap *= 2.0;
        ++rep.cap_widenings;
        std::fprintf(stderr, "basin_probe: row cap widened to %g after %d rejects\n", rep.row_cap, local_rejects);
        local_rejects = 0;
      }
    }
    const Matrix Y = Ystar + raw;
    const Matrix delta = procrustes(Y, Ystar).delta;
    const double dn2 = delta.squaredNorm();
    const Matrix grad = problem.egrad(Y);
    rep.convexity.push_back((grad.array() * delta.array()).sum() / (spec.p * rep.sigma_d * dn2));
    rep.smoothness.push_back(grad.norm() / (spec.p * rep.mu * d * rep.sigma_1 * std::sqrt(dn2)));
  }
  rep.convexity_summary = summarize(rep.convexity);
  rep.smoothness_summary = summarize(rep.smoothness);
  return rep;
}

std::string basin_json(const BasinReport& r) {
  auto summary = [](const RatioSummary& s) { return nlohmann::json{{"min", s.min}, {"median", s.median}, {"max", s.max}}; };
  nlohmann::json j{{"sigma_1", r.sigma_1},         {"sigma_d", r.sigma_d},
                   {"kappa", r.kappa},             {"mu", r.mu},
                   {"row_cap", r.row_cap},         {"rejects", r.rejects},
                   {"cap_widenings", r.cap_widenings},
                   {"convexity", summary(r.convexity_summary)},
                   {"smoothness", summary(r.smoothness_summary)},
                   {"convexity_ratios", r.convexity},
                   {"smoothness_ratios", r.smoothness}};
  return j.dump(2) + "\n";
}

std::vector<PhaseCell> phase_grid(const PhaseGridSpec& spec) {
  if (spec.axis != "n" && spec.axis != "d") throw std::invalid_argument("phase_grid: axis must be n or d");
  if (spec.p_values.empty() == spec.c_values.empty())
    throw std::invalid_argument("phase_grid: give exactly one of p_values or c_values");
  if (spec.rows.empty()) throw std::invalid_argument("phase_grid: no rows");
  if (spec.trials < 1) throw std::invalid_argument("phase_grid: trials must be positive");

  std::vector<PhaseCell> cells;
  const std::size_t ncols = std::max(spec.p_values.size(), spec.c_values.size());
  for (std::size_t r = 0; r < spec.rows.size(); ++r) {
    const Index n = spec.axis == "n" ? static_cast<Index>(spec.rows[r]) : spec.fixed_n;
    const Index d = spec.axis == "d" ? static_cast<Index>(spec.rows[r]) : spec.fixed_d;
    const double logn_n = std::log(static_cast<double>(n)) / static_cast<double>(n);
    for (std::size_t c = 0; c < ncols; ++c) {
      const double p = spec.p_values.empty() ? spec.c_values[c] * logn_n : spec.p_values[c];
      ExperimentSpec es;
      es.name = "phase";
      es.scenario = Scenario::GaussianCloud;
      es.n = n;
      es.d = d;
      es.sampling = SamplingKind::Bernoulli;
      es.p = std::min(p, 1.0);
      es.entrywise = spec.entrywise;
      es.anchor_clique = false;
      es.trials = spec.trials;
      es.master_seed = mix_seed(spec.seed, r * ncols + c);
      es.solvers = {"gd"};
      es.re_loose = spec.re_threshold;
      es.loose_success = true;
      es.hessian_check = false;
      es.threads = spec.threads;
      const SweepResult res = run_sweep(es);
      PhaseCell cell;
      cell.row = spec.rows[r];
      cell.p = es.p;
      cell.c = es.p / logn_n;
      cell.success = res.rows.front().success;
      cell.trials = spec.trials;
      cells.push_back(cell);
    }
  }
  return cells;
}

std::string phase_grid_csv(const std::vector<PhaseCell>& cells) {
  std::ostringstream os;
  os << "row,p,c,success,trials\n";
  for (const auto& c : cells)
    os << fmt(c.row) << ',' << fmt(c.p) << ',' << fmt(c.c) << ',' << fmt(c.success) << ',' << c.trials << '\n';
  return os.str();
}

std::vector<RigidityRow> rigidity_curve(const ExperimentSpec& spec) {
  spec.validate();
  const bool swept = !spec.sweep_axis.empty();
  const std::vector<double> values = swept ? spec.sweep_values : std::vector<double>{0.0};
  const auto nv = values.size();
  std::vector<RigidityReport> reports(nv * static_cast<std::size_t>(spec.trials));
  parallel_for(static_cast<int>(reports.size()), spec.threads, [&](int j) {
    const auto s = static_cast<std::size_t>(j) / static_cast<std::size_t>(spec.trials);
    const auto t = static_cast<std::size_t>(j) % static_cast<std::size_t>(spec.trials);
    const ExperimentSpec local = swept ? with_axis(spec, spec.sweep_axis, values[s]) : spec;
    const std::uint64_t seed = trial_seed(spec.master_seed, s, t);
    const Instance inst = make_instance(local, seed);
    reports[static_cast<std::size_t>(j)] = rigidity_probe(inst.mask, inst.scene.positions.data, mix_seed(seed, 6));
  });
  std::vector<RigidityRow> rows;
  for (std::size_t s = 0; s < nv; ++s) {
    RigidityRow row;
    row.value = values[s];
    row.trials = spec.trials;
    double rigid = 0, global = 0;
    for (int t = 0; t < spec.trials; ++t) {
      const auto& r = reports[s * static_cast<std::size_t>(spec.trials) + static_cast<std::size_t>(t)];
      rigid += r.generically_rigid ? 1 : 0;
      global += r.generically_globally_rigid ? 1 : 0;
    }
    row.rigid_rate = rigid / spec.trials;
    row.globally_rigid_rate = global / spec.trials;
    rows.push_back(row);
  }
  return rows;
}

std::string rigidity_csv(const std::vector<RigidityRow>& rows) {
  std::ostringstream os;
  os << "value,rigid_rate,globally_rigid_rate,trials\n";
  for (const auto& r : rows)
    os << fmt(r.value) << ',' << fmt(r.rigid_rate) << ',' << fmt(r.globally_rigid_rate) << ',' << r.trials << '\n';
  return os.str();
}

}  // namespace edmc::harness
