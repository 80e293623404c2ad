#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mflab/harness/config.hpp"
#include "mflab/harness/csv.hpp"
#include "mflab/harness/empirical.hpp"
#include "mflab/harness/experiments.hpp"
#include "mflab/harness/pool.hpp"

using namespace mflab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("mflab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST_CASE("empirical W1") {
  const std::vector<double> a{0.0, 1.0};
  const std::vector<double> b{0.5, 1.5};
  CHECK(wasserstein1(a, b) == doctest::Approx(0.5));
  CHECK(wasserstein1(a, a) == 0.0);
  const std::vector<double> c{0.2, 0.9, 0.4};
  const std::vector<double> d{0.3};
  CHECK(wasserstein1(c, d) == doctest::Approx((0.1 + 0.6 + 0.1) / 3));
  CHECK(wasserstein1(c, d) == wasserstein1(d, c));
  CHECK_THROWS_AS(wasserstein1(std::vector<double>{}, d), std::domain_error);
}

TEST_CASE("histograms") {
  const std::vector<double> v{0.0, 0.001, 0.5, 0.999, 1.0, -0.1, 1.2};
  const auto h = histogram(v, 200);
  CHECK(h.total == 7);
  CHECK(h.counts.front() == 3);
  CHECK(h.counts[100] == 1);
  CHECK(h.counts.back() == 3);
  double integral = 0.0;
  for (std::size_t i = 0; i < 200; ++i) {
    integral += h.density(i) * h.bin_width();
  }
  CHECK(integral == doctest::Approx(1.0));
}

TEST_CASE("halving schedule") {
  const auto s = halving_schedule(5000);
  CHECK(s.back() == 5000);
  CHECK(s[s.size() - 2] == 2500);
  CHECK(s.front() == 1);
  CHECK(halving_schedule(1) == std::vector<std::uint64_t>{1});
}

TEST_CASE("parallel_for is order independent") {
  std::vector<int> out(100);
  parallel_for(out.size(), 3, [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(out[i] == static_cast<int>(i * i));
  }
  CHECK_THROWS_AS(parallel_for(10, 2,
                               [](std::size_t i) {
                                 if (i == 7) {
                                   throw std::runtime_error("x");
                                 }
                               }),
                  std::runtime_error);
}

TEST_CASE("config precedence and validation") {
  auto c = ExperimentConfig::defaults(Experiment::Drift);
  CHECK(c.N_grid == std::vector<std::size_t>{200, 800, 3200});
  CHECK(c.seeds == 10);
  const auto h0 = c.hash();
  apply_json(c, nlohmann::json::parse(R"({"N_grid": [50, 100, 200], "model": {"beta": 0.7}})"));
  CHECK(c.N_grid.size() == 3);
  CHECK(c.beta == 0.7);
  CHECK(c.hash() != h0);
  CHECK(c.hash_hex().size() == 16);

  auto d = c;
  d.jobs = 4;
  d.out_dir = "elsewhere";
  CHECK(d.hash() == c.hash());

  CHECK_THROWS_AS(apply_json(c, nlohmann::json::parse(R"({"bogus": 1})")), ConfigError);
  CHECK_THROWS_AS(apply_json(c, nlohmann::json::parse(R"({"seeds": "ten"})")), ConfigError);
  CHECK_THROWS_AS(apply_json(c, nlohmann::json::parse(R"({"experiment": "ode"})")), ConfigError);
  CHECK_THROWS_AS(apply_json(c, nlohmann::json::parse(R"({"model": {"b_update": "x"}})")),
                  ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/cfg.json"), ConfigError);

  auto w = ExperimentConfig::defaults(Experiment::Drift);
  w.gamma = 0.2;
  CHECK_THROWS_AS(validate_config(w), ConfigError);

  auto L = ExperimentConfig::defaults(Experiment::Drift);
  L.L = 0.95;
  CHECK_THROWS_AS(validate_config(L), ConfigError);
  L.allow_assumption_violation = true;
  CHECK(validate_config(L).overridden);

  CHECK(parse_experiment("gamma-rates") == Experiment::GammaRates);
  CHECK_THROWS_AS(parse_experiment("nope"), ConfigError);
}

TEST_CASE("csv provenance") {
  const auto dir = scratch("csv");
  {
    CsvWriter w(dir / "a.csv", {"drift", "00ff", 7, true}, {"x", "y"});
    w.row(1, 2.5);
  }
  CHECK(slurp(dir / "a.csv") ==
        "# mflab drift config_hash=00ff seed=7 assumption_override=1\nx,y\n1,2.5\n");
}

TEST_CASE("small experiments write reproducible CSVs") {
  const auto dir1 = scratch("rep1");
  const auto dir2 = scratch("rep2");

  auto e = ExperimentConfig::defaults(Experiment::Ergodicity);
  e.N_grid = {10, 40, 160};
  e.paths = 4;
  e.steps = 200;
  e.out_dir = dir1.string();
  const auto r1 = run_ergodicity(e);
  e.out_dir = dir2.string();
  e.jobs = 3;
  const auto r2 = run_ergodicity(e);
  REQUIRE(r1.files.size() == r2.files.size());
  for (std::size_t i = 0; i < r1.files.size(); ++i) {
    CHECK(slurp(r1.files[i]) == slurp(r2.files[i]));
  }
  CHECK(r1.w1.size() == 2);
  CHECK(slurp(dir1 / "ergodicity_hist.csv").rfind("# mflab ergodicity config_hash=", 0) == 0);

  auto g = ExperimentConfig::defaults(Experiment::GammaRates);
  g.N_grid = {20, 40, 80};
  g.seeds = 2;
  g.lambda_samples = 2000;
  g.out_dir = dir1.string();
  const auto gr = run_gamma_rates(g);
  CHECK(gr.mean_e1_sq.size() == 3);
  // The first trace row of each width is k = 0 and all zeros.
  std::ifstream tr(dir1 / "gamma_rates_trace.csv");
  std::string line;
  std::getline(tr, line);
  std::getline(tr, line);
  std::getline(tr, line);
  CHECK(line == "20,0,0,0,0,0,0,0,0");

  auto o = ExperimentConfig::defaults(Experiment::Ode);
  o.M = 20;
  o.lambda_samples = 2000;
  o.ode_T = 2.0;
  o.out_dir = dir1.string();
  const auto od = run_ode(o);
  CHECK(od.passed());
  o.zero_targets = true;
  const auto oz = run_ode(o);
  CHECK(oz.loss0 == 0.0);
  CHECK(oz.lossT == 0.0);

  auto d = ExperimentConfig::defaults(Experiment::Drift);
  d.N_grid = {20, 80, 320};
  d.seeds = 2;
  d.out_dir = dir1.string();
  const auto dr = run_drift(d);
  CHECK(dr.mean_max_drift.size() == 3);

  auto i = ExperimentConfig::defaults(Experiment::Increment);
  i.N_grid = {20, 60};
  i.seeds = 1;
  i.out_dir = dir1.string();
  const auto in = run_increment(i);
  CHECK(in.mean_max_err.size() == 2);

  auto n = ExperimentConfig::defaults(Experiment::Ntk);
  n.N_grid = {20, 40};
  n.seeds = 2;
  n.M = 16;
  n.lambda_samples = 2000;
  n.init_seeds = 20;
  n.out_dir = dir1.string();
  const auto nt = run_ntk(n);
  CHECK(nt.mean_sup_err.size() == 2);
  CHECK(fs::exists(dir1 / "ntk_limit.csv"));

  auto v = ExperimentConfig::defaults(Experiment::Validate);
  v.out_dir = dir1.string();
  CHECK(run_validate(v).passed());
  v.L = 0.9;
  CHECK_FALSE(run_validate(v).passed());
}
