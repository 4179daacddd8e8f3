#include "edmc/edm.hpp"
#include "edmc/harness/experiment.hpp"
#include "edmc/harness/io.hpp"
#include "edmc/harness/probes.hpp"
#include "edmc/harness/selfcheck.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <set>

using namespace edmc;
using namespace edmc::harness;
namespace fs = std::filesystem;

TEST(Seeds, FrozenSplitmixValues) {
  EXPECT_EQ(mix_seed(0, 0), 16294208416658607535ULL);
  EXPECT_EQ(mix_seed(1, 2), 17911839290282890590ULL);
  EXPECT_EQ(trial_seed(7, 1, 3), 15673753217524345152ULL);
}

TEST(Seeds, TrialSeedsDistinctAcrossGrid) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 20; ++s)
    for (std::uint64_t t = 0; t < 50; ++t) seen.insert(trial_seed(1, s, t));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({3, 1, 2, 4}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile({3, 1, 2, 4}, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({0, 10}, 0.85), 8.5);
  EXPECT_TRUE(std::isnan(quantile({}, 0.5)));
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](int i) { hits[static_cast<std::size_t>(i)]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Scene, PaperSquareHasCornerAnchors) {
  const ExperimentSpec spec;
  const Scene s = gen_scene(spec, 5);
  ASSERT_EQ(s.positions.n(), 104);
  ASSERT_EQ(s.anchors.size(), 4u);
  std::set<std::pair<double, double>> corners;
  for (Index a : s.anchors) corners.insert({s.positions.data(a, 0), s.positions.data(a, 1)});
  const double h = spec.side / 2;
  const std::set<std::pair<double, double>> expected{{-h, -h}, {-h, h}, {h, -h}, {h, h}};
  EXPECT_EQ(corners, expected);
  EXPECT_EQ(gen_scene(spec, 5).positions.data, s.positions.data);
}

TEST(Scene, GaussianCloudNearlyCentered) {
  ExperimentSpec spec;
  spec.scenario = Scenario::GaussianCloud;
  spec.n = 300;
  const Scene s = gen_scene(spec, 9);
  EXPECT_LT(s.positions.data.colwise().mean().cwiseAbs().maxCoeff(), 5 / std::sqrt(300.0));
}

TEST(Instance, AnchorPairsStayExactUnderNoise) {
  ExperimentSpec spec;
  spec.sigma = 2.0;
  spec.p_out = 0.2;
  const Instance inst = make_instance(spec, 3);
  for (Index a : inst.scene.anchors)
    for (Index b : inst.scene.anchors) EXPECT_DOUBLE_EQ(inst.observed.data(a, b), inst.truth.data(a, b));
  EXPECT_EQ(make_instance(spec, 3).observed.data, inst.observed.data);
}

TEST(Spec, ValidateRejectsBadValues) {
  ExperimentSpec spec;
  spec.trials = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = {};
  spec.solvers = {"nope"};
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  EXPECT_THROW(with_axis(ExperimentSpec{}, "bogus", 1.0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(with_axis(ExperimentSpec{}, "r", 0.3).radius, 0.3);
  EXPECT_DOUBLE_EQ(with_axis(ExperimentSpec{}, "sigma", 2).sigma, 2.0);
}

TEST(Sweep, CsvSchemaAndAggregation) {
  ExperimentSpec spec;
  spec.sensors = 30;
  spec.sweep_axis = "r";
  spec.sweep_values = {0.5, 0.6};
  spec.trials = 3;
  spec.solvers = {"rank-reduction", "rcg"};
  const SweepResult res = run_sweep(spec);
  ASSERT_EQ(res.rows.size(), 4u);
  ASSERT_EQ(res.trials.size(), 12u);
  const std::string csv = sweep_csv(res);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "value,solver,re_q85,msle_q85,success,wall_ms");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  const std::string tcsv = trials_csv(res);
  EXPECT_EQ(std::count(tcsv.begin(), tcsv.end(), '\n'), 13);
  for (const auto& r : res.rows) {
    EXPECT_GE(r.success, 0.0);
    EXPECT_LE(r.success, 1.0);
  }
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  ExperimentSpec spec;
  spec.sensors = 30;
  spec.radius = 0.5;
  spec.sigma = 1.0;
  spec.trials = 4;
  spec.solvers = {"rcg"};
  const SweepResult one = run_sweep(spec);
  spec.threads = 3;
  const SweepResult many = run_sweep(spec);
  ASSERT_EQ(one.trials.size(), many.trials.size());
  for (std::size_t k = 0; k < one.trials.size(); ++k) {
    EXPECT_EQ(one.trials[k].report.seed, many.trials[k].report.seed);
    EXPECT_EQ(one.trials[k].report.re, many.trials[k].report.re);
  }
}

TEST(Io, MeasurementsRoundTripJsonAndCsv) {
  ExperimentSpec spec;
  spec.sigma = 1.0;
  spec.p_out = 0.05;
  const Instance inst = make_instance(spec, 4);
  const Measurements m = measurements_of(inst, spec);
  for (const Measurements& back : {measurements_from_json(measurements_json(m)), measurements_from_csv(measurements_csv(m))}) {
    EXPECT_EQ(back.mask.pairs, m.mask.pairs);
    EXPECT_EQ(back.sigma, 1.0);
    EXPECT_EQ(back.p_out, 0.05);
    for (const auto& [i, j] : m.mask.pairs) EXPECT_EQ(back.observed.data(i, j), m.observed.data(i, j));
  }
}

TEST(Io, SceneRoundTrip) {
  const Scene s = gen_scene(ExperimentSpec{}, 8);
  const Scene back = scene_from_json(scene_json(s));
  EXPECT_EQ(back.positions.data, s.positions.data);
  EXPECT_EQ(back.anchors, s.anchors);
  EXPECT_EQ(back.seed, s.seed);
}

TEST(Io, MalformedMeasurementsRejected) {
  EXPECT_THROW(measurements_from_json("{\"n\": 3, \"pairs\": [[0, 7, 1.0]]}"), std::invalid_argument);
  EXPECT_THROW(measurements_from_csv("i,j,d2\n0,1,-2\n", 3), std::invalid_argument);
  EXPECT_THROW(measurements_from_json("not json"), std::invalid_argument);
}

TEST(Io, ReportJsonUsesNullForNonFinite) {
  TrialReport r;
  r.solver = "rcg";
  r.re = std::numeric_limits<double>::infinity();
  r.msle = 0.25;
  const auto j = nlohmann::json::parse(report_json(r, false));
  EXPECT_TRUE(j.at("re").is_null());
  EXPECT_DOUBLE_EQ(j.at("msle").get<double>(), 0.25);
  EXPECT_EQ(j.at("solver"), "rcg");
  EXPECT_EQ(nlohmann::json::parse(error_json("boom")).at("error"), "boom");
}

TEST(Config, EveryShippedConfigParses) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(EDMC_CONFIG_DIR)) {
    if (entry.path().extension() != ".toml") continue;
    ++count;
    EXPECT_NO_THROW({
      const ConfigFile cfg = load_config(entry.path().string());
      cfg.experiment.validate();
    }) << entry.path();
  }
  EXPECT_GE(count, 10);
}

TEST(Config, UnknownKeysAndTablesRejected) {
  EXPECT_THROW(parse_config("[scene]\nsensorz = 3\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("[bogus]\nx = 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("[scene\n"), std::invalid_argument);
}

TEST(Config, FieldsReachTheSpec) {
  const ConfigFile cfg = parse_config(R"(
name = "t"
[scene]
scenario = "gaussian_cloud"
n = 120
d = 3
[measurements]
sampling = "bernoulli"
p = 0.2
bernoulli_model = "entry"
[sweep]
axis = "p"
values = [0.1, 0.2]
trials = 7
solvers = ["gd", "rcg"]
[solver]
imax = 77
metric = "g2"
[basin]
n = 50
draws = 5
)");
  const ExperimentSpec& e = cfg.experiment;
  EXPECT_EQ(e.scenario, Scenario::GaussianCloud);
  EXPECT_EQ(e.n, 120);
  EXPECT_EQ(e.d, 3);
  EXPECT_EQ(e.sampling, SamplingKind::Bernoulli);
  EXPECT_TRUE(e.entrywise);
  EXPECT_EQ(e.sweep_values, (std::vector<double>{0.1, 0.2}));
  EXPECT_EQ(e.trials, 7);
  EXPECT_EQ(e.solvers, (std::vector<std::string>{"gd", "rcg"}));
  EXPECT_EQ(e.solver.imax, 77);
  EXPECT_EQ(e.solver.metric, Metric::G2);
  EXPECT_TRUE(e.solver_overridden);
  EXPECT_TRUE(cfg.has_basin);
  EXPECT_EQ(cfg.basin.n, 50);
  EXPECT_EQ(cfg.basin.draws, 5);
  EXPECT_FALSE(cfg.has_phase_grid);
}

TEST(Config, ScenarioNamesRoundTrip) {
  for (Scenario s : {Scenario::PaperSquare, Scenario::GaussianCloud, Scenario::Irregular})
    EXPECT_EQ(parse_scenario(to_string(s)), s);
  EXPECT_THROW(parse_scenario("hexagon"), std::invalid_argument);
}

TEST(Basin, SmallProbeStaysInRegion) {
  BasinSpec spec;
  spec.n = 60;
  spec.draws = 10;
  const BasinReport r = basin_probe(spec);
  ASSERT_EQ(r.convexity.size(), 10u);
  EXPECT_GT(r.sigma_1, 0.0);
  EXPECT_GE(r.kappa, 1.0);
  EXPECT_GT(r.convexity_summary.min, 0.0);
  EXPECT_LE(r.convexity_summary.min, r.convexity_summary.median);
  const auto j = nlohmann::json::parse(basin_json(r));
  EXPECT_TRUE(j.contains("convexity"));
}

TEST(PhaseGrid, CompleteColumnAlwaysSucceeds) {
  PhaseGridSpec spec;
  spec.rows = {30};
  spec.p_values = {1.0, 0.01};
  spec.trials = 4;
  const auto cells = phase_grid(spec);
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[0].success, 1.0);
  EXPECT_EQ(cells[1].success, 0.0);
  const std::string csv = phase_grid_csv(cells);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "row,p,c,success,trials");
}

TEST(Selfcheck, AllSuitesPass) {
  for (const auto& c : run_selfcheck(3)) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}
