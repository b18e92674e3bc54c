#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include "nnstokes/error.hpp"
#include "nnstokes/experiments.hpp"
#include "oracle_baselines.hpp"

using namespace nnstokes;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("nnstokes-test-" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

const Table& table_of(const ExperimentReport& r, const std::string& name) {
  const Table* t = r.find_table(name);
  REQUIRE(t != nullptr);
  return *t;
}

std::vector<double> column(const Table& t, const std::string& name) {
  std::size_t c = 0;
  while (c < t.columns.size() && t.columns[c] != name) ++c;
  REQUIRE(c < t.columns.size());
  std::vector<double> out;
  for (const auto& row : t.rows) out.push_back(row[c]);
  return out;
}

bool assertion_passed(const ExperimentReport& r, const std::string& name) {
  const Assertion* a = r.find(name);
  REQUIRE_MESSAGE(a != nullptr, name);
  return a->passed;
}

}  // namespace

TEST_CASE("least squares order and spread") {
  const std::vector<double> h{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> e2, e1;
  for (double x : h) {
    e2.push_back(3.0 * x * x);
    e1.push_back(0.5 * x);
  }
  CHECK(least_squares_order(h, e2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(least_squares_order(h, e1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::isinf(least_squares_order(h, {0, 0, 0, 0})));
  CHECK_THROWS_AS(least_squares_order({0.1}, {1.0}), ParameterError);

  CHECK(spread({2.0, 1.0, 4.0}) == 4.0);
  CHECK(spread({0.0, 0.0}) == 1.0);
  CHECK(std::isinf(spread({0.0, 1.0})));
}

TEST_CASE("parallel_map keeps index order and rethrows the first failure") {
  for (int workers : {1, 3, 8}) {
    const auto out = parallel_map<int>(20, workers, [](std::size_t k) { return static_cast<int>(k * k); });
    for (std::size_t k = 0; k < out.size(); ++k) CHECK(out[k] == static_cast<int>(k * k));
  }
  auto failing = [](std::size_t k) -> int {
    if (k == 3) throw SolverError("three");
    if (k == 7) throw ParameterError("seven");
    return 0;
  };
  CHECK_THROWS_AS(parallel_map<int>(10, 4, failing), SolverError);
  CHECK(parallel_map<int>(0, 4, failing).empty());
}

TEST_CASE("study configuration") {
  StudyConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.effective_s0() == 1.5);
  CHECK(cfg.grid_family(Study::Mms) == std::vector<int>{16, 32, 64, 128});
  CHECK(cfg.grid_family(Study::Truncation) == std::vector<int>{64});

  auto expect_key = [](StudyConfig c, const std::string& key) {
    try {
      c.validate();
      FAIL("expected ConfigError for " << key);
    } catch (const ConfigError& e) {
      CHECK(e.key_path() == key);
    }
  };
  StudyConfig bad = cfg;
  bad.model.p = 1.0;
  expect_key(bad, "model.p");
  bad = cfg;
  bad.model.mu = 0.0;
  expect_key(bad, "model.mu");
  bad = cfg;
  bad.s0 = 2.0;
  expect_key(bad, "weight.s0");
  bad = cfg;
  bad.k_levels = {1, 4, 2};
  expect_key(bad, "forcing.k_levels");
  bad = cfg;
  bad.grids = {32};
  expect_key(bad, "grid.family");
  bad = cfg;
  bad.tolerances.truncation_spread = 0.0;
  expect_key(bad, "tolerances.truncation_spread");

  for (Study s : all_studies()) CHECK(study_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(study_from_string("nope"), ParameterError);

  std::set<std::string> keys;
  for (const auto& [k, v] : cfg.tolerances.as_map()) keys.insert(k);
  CHECK(keys.size() == cfg.tolerances.as_map().size());
}

TEST_CASE("config hash tracks the configuration but not the worker count") {
  StudyConfig a;
  StudyConfig b = a;
  b.workers = 7;
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  b.seed = 1;
  CHECK(config_hash(a) != config_hash(b));
  b = a;
  b.model.p = 1.6;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("report assertions, exit codes and artifacts") {
  ExperimentReport r;
  r.id = "demo";
  CHECK(r.passed());
  CHECK(r.exit_code() == 0);
  CHECK(r.check("small", "truncation_spread", 1.0, "<", 2.0));
  CHECK(r.exit_code() == 0);
  CHECK_FALSE(r.check("large", "truncation_spread", 3.0, "<", 2.0));
  CHECK(r.exit_code() == 1);
  CHECK(r.failures.size() == 1);
  CHECK_THROWS_AS(r.check("bad", "x", 1.0, "~", 1.0), ParameterError);

  const MacGrid g = MacGrid::unit_square(8);
  StokesSolution sol(g);
  sol.converged = false;
  sol.message = "stalled";
  r.record("run", sol);
  CHECK(r.exit_code() == 2);

  auto& t = r.table("levels", {"k", "ratio"});
  t.rows.push_back({1.0, 0.5});
  r.table("other", {"h", "value"}).rows.push_back({0.1, std::numeric_limits<double>::infinity()});
  CHECK(r.table("levels", {}).rows.size() == 1);

  const auto j = r.to_json();
  CHECK(j["status"] == "solver-failure");
  CHECK(j["tables"]["other"]["rows"][0][1] == "inf");
  CHECK(j["assertions"].size() == 2);

  const auto dir = scratch_dir("report");
  r.write(dir);
  for (const char* f : {"report.json", "levels.csv", "other.csv", "plot.gp", "traces.csv"})
    CHECK(std::filesystem::exists(dir / f));
  std::ifstream csv(dir / "levels.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "k,ratio");
  const std::string plot = r.gnuplot_script();
  CHECK(plot.find("'levels.csv'") != std::string::npos);
  CHECK(plot.find("'other.csv'") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("constitutive check passes on shipped models and catches a wrong asymptotic viscosity") {
  StudyConfig cfg;
  cfg.samples = 1000;
  const auto ok = run_constitutive_check(cfg);
  CHECK(ok.passed());
  CHECK(table_of(ok, "models").rows.size() == 2 * shipped_models().size());

  cfg.mu_inf_override = 0.8;
  const auto bad = run_constitutive_check(cfg);
  CHECK(bad.exit_code() == 1);
  const std::string tag = "model" + std::to_string(shipped_models().size()) + ".n2.";
  CHECK_FALSE(assertion_passed(bad, tag + "linear-at-infinity"));
  CHECK_FALSE(assertion_passed(bad, tag + "algebra-inequality"));
  // the monotone pairing does not involve mu_inf
  CHECK(assertion_passed(bad, tag + "monotone"));
}

TEST_CASE("weights check") {
  StudyConfig cfg;
  cfg.ap_grids = {32, 64};
  const auto r = run_weights_check(cfg);
  CHECK(r.passed());
  CHECK(std::abs(r.scalars.at("maximal_at_2") - 0.25) <= 3.0 / 256);
  const auto a2 = column(table_of(r, "ap"), "A2_clip");
  CHECK(a2.size() == 2);
  CHECK(a2[1] == doctest::Approx(oracle::kA2Clip[0]).epsilon(1e-9));
}

TEST_CASE("truncation study reproduces the oracle baseline") {
  StudyConfig cfg;
  const auto r = run_truncation_study(cfg);
  REQUIRE_FALSE(r.solver_failed);
  CHECK(r.passed());
  const Table& t = table_of(r, "levels");
  const auto ratio = column(t, "ratio");
  const auto gap = column(t, "forcing_gap_L2w");
  const auto cauchy = column(t, "cauchy_prev");
  REQUIRE(ratio.size() == 7);
  for (std::size_t k = 0; k < 7; ++k) {
    CAPTURE(k);
    CHECK(ratio[k] == doctest::Approx(oracle::kTruncationRatio[k]).epsilon(1e-6));
    CHECK(gap[k] == doctest::Approx(oracle::kTruncationGap[k]).epsilon(1e-6));
    if (k > 0) CHECK(cauchy[k] == doctest::Approx(oracle::kTruncationCauchy[k - 1]).epsilon(1e-6));
  }
  CHECK(r.scalars.at("ratio_spread") < 2.0);
  CHECK(assertion_passed(r, "cauchy-nonincreasing"));
  CHECK(assertion_passed(r, "forcing-gap-nonincreasing"));
}

TEST_CASE("truncation of a smooth bounded forcing is inactive above its maximum") {
  StudyConfig cfg;
  cfg.grid = 16;
  cfg.forcing = ForcingKind::Smooth;
  const auto r = run_truncation_study(cfg);
  CHECK(r.passed());
  const double max_f = r.scalars.at("max_forcing");
  const Table& t = table_of(r, "levels");
  const auto k = column(t, "k");
  const auto ratio = column(t, "ratio");
  const auto grad = column(t, "grad_L2w");
  std::optional<std::size_t> first;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] <= 2.0 * max_f) continue;  // node magnitudes may exceed the cell maximum
    if (!first) first = i;
    CHECK(ratio[i] == ratio[*first]);
    CHECK(grad[i] == grad[*first]);
  }
  CHECK(first.has_value());
}

TEST_CASE("roughness dichotomy on 16..64 matches the oracle") {
  StudyConfig cfg;
  cfg.grids = {16, 32, 64};
  const auto r = run_roughness_blowup_study(cfg);
  REQUIRE_FALSE(r.solver_failed);
  CHECK(r.passed());
  const Table& t = table_of(r, "ratios");
  const auto num = column(t, "rough_numerator");
  const auto unw = column(t, "rough_unweighted");
  const auto wtd = column(t, "rough_weighted");
  const auto lnum = column(t, "linear_numerator");
  const auto lw = column(t, "linear_weighted");
  for (std::size_t k = 0; k < 3; ++k) {
    CAPTURE(k);
    CHECK(num[k] == doctest::Approx(oracle::kRoughNumerator[k]).epsilon(1e-6));
    CHECK(unw[k] == doctest::Approx(oracle::kRoughUnweighted[k]).epsilon(1e-6));
    CHECK(wtd[k] == doctest::Approx(oracle::kRoughWeighted[k]).epsilon(1e-6));
    CHECK(lnum[k] == doctest::Approx(oracle::kLinearNumerator[k]).epsilon(1e-9));
    CHECK(lw[k] == doctest::Approx(oracle::kLinearWeighted[k]).epsilon(1e-9));
  }
}

TEST_CASE("roughness study with zero forcing gives zero ratios") {
  StudyConfig cfg;
  cfg.grids = {16, 32};
  cfg.amplitude = 0.0;
  const auto r = run_roughness_blowup_study(cfg);
  REQUIRE_FALSE(r.solver_failed);
  for (const auto& row : table_of(r, "ratios").rows)
    for (std::size_t c = 1; c < row.size(); ++c) CHECK(std::abs(row[c]) < 1e-12);
}

TEST_CASE("uniqueness study") {
  SUBCASE("Carreau, rough forcing") {
    StudyConfig cfg;
    cfg.grid = 32;
    const auto r = run_uniqueness_study(cfg);
    REQUIRE_FALSE(r.solver_failed);
    CHECK(r.passed());
    for (const auto& row : table_of(r, "differences").rows) {
      CHECK(row[2] <= 1e-6);
      CHECK(row[3] <= 1e-6);
    }
    // the contrast pair sees the weight at j = 1
    const auto& energies = table_of(r, "capped_energies").rows;
    bool strictly_below = false;
    for (const auto& row : energies)
      if (row[0] == 1.0 && row[1] == 2.0) strictly_below = row[2] < row[3];
    CHECK(strictly_below);
  }
  SUBCASE("p = 2: differences at solver tolerance") {
    StudyConfig cfg;
    cfg.grid = 16;
    cfg.model.p = 2.0;
    const auto r = run_uniqueness_study(cfg);
    CHECK(r.passed());
    for (const auto& row : table_of(r, "differences").rows) {
      CHECK(row[2] <= 10 * cfg.solver.tol);
      CHECK(row[3] <= 10 * cfg.solver.tol);
    }
  }
  SUBCASE("identical guesses give identical solutions") {
    const MacGrid g = MacGrid::unit_square(16);
    const auto f = rough_forcing_dirac(g, 0.5, 0.5, 1.0);
    const StressModel model = StressModel::carreau(1, 1, 1, 1.5);
    const auto a = solve_nonlinear(f, model, SolverConfig{});
    const auto b = solve_nonlinear(f, model, SolverConfig{});
    CHECK(strain_energy(a.velocity, b.velocity, Weight::constant(g.cell_field())) == 0.0);
  }
  SUBCASE("models outside the strict class are refused") {
    StudyConfig cfg;
    cfg.grid = 16;
    cfg.model = {StressFamily::CappedPowerLaw, 1.0, 0.5, 1.0, std::numeric_limits<double>::infinity()};
    REQUIRE_FALSE(cfg.stress_model().satisfies_strict_assumptions());
    const auto r = run_uniqueness_study(cfg);
    CHECK(r.exit_code() == 1);
    CHECK_FALSE(assertion_passed(r, "strict-assumptions"));
  }
}

TEST_CASE("mms study") {
  SUBCASE("zero manufactured solution has zero error") {
    StudyConfig cfg;
    cfg.grids = {8, 16};
    cfg.grid = 8;
    cfg.manufactured = ManufacturedKind::Zero;
    const auto r = run_mms_convergence(cfg);
    REQUIRE_FALSE(r.solver_failed);
    for (const auto& row : table_of(r, "errors").rows)
      for (std::size_t c = 1; c <= 4; ++c) CHECK(row[c] == 0.0);
    CHECK(r.passed());
  }
  SUBCASE("orders on 16..64") {
    StudyConfig cfg;
    cfg.grids = {16, 32, 64};
    cfg.grid = 32;
    const auto r = run_mms_convergence(cfg);
    CHECK(r.passed());
    CHECK(r.scalars.at("linear_velocity_order") == doctest::Approx(2.0).epsilon(0.05));
    CHECK(r.scalars.at("nonlinear_velocity_order") >= 1.0);
    CHECK(r.scalars.at("degeneracy_difference") <= 1e-10);
  }
}

TEST_CASE("inhomogeneous study") {
  StudyConfig cfg;
  cfg.grids = {16, 32};
  const auto r = run_inhomogeneous_study(cfg);
  REQUIRE_FALSE(r.solver_failed);
  CHECK(r.passed());
  CHECK(r.scalars.at("max_divergence_residual") < 1e-9);

  SUBCASE("zero data reduce to the homogeneous problem") {
    const MacGrid g = MacGrid::unit_square(16);
    const auto f = rough_forcing_dirac(g, 0.3, 0.6, 1.0);
    const StressModel model = StressModel::carreau(1, 1, 1, 1.5);
    const auto a = solve_nonlinear(f, model, SolverConfig{});
    const auto b = solve_nonlinear(f, model, SolverConfig{}, {g.cell_field(), StaggeredVelocity(g), std::nullopt});
    CHECK((a.velocity.to_vector() - b.velocity.to_vector()).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("dilation with matching boundary data is exact for a linear law") {
    const MacGrid g = MacGrid::unit_square(12);
    const auto m = manufactured_solution(g, ManufacturedKind::Dilation);
    const StressModel linear = StressModel::carreau(1, 1, 1, 2.0);
    const auto f = forcing_from_solution(linear, m.analytic, g);
    const auto sol = solve_nonlinear(f, linear, SolverConfig{}, {m.divergence, m.velocity.boundary_part(), std::nullopt});
    CHECK((sol.velocity.to_vector() - m.velocity.to_vector()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("reports are deterministic across worker counts") {
  StudyConfig cfg;
  cfg.grid = 16;
  cfg.workers = 1;
  const auto a = run_truncation_study(cfg).to_json().dump();
  cfg.workers = 4;
  const auto b = run_truncation_study(cfg).to_json().dump();
  CHECK(a == b);
}

TEST_CASE("solve plans list every solve") {
  StudyConfig cfg;
  CHECK(solve_plan(Study::Truncation, cfg).size() == cfg.k_levels.size());
  CHECK(solve_plan(Study::Mms, cfg).size() == 2 * 4 + 1);
  CHECK(solve_plan(Study::Roughness, cfg).size() == 3 * 4);
  CHECK(solve_plan(Study::Uniqueness, cfg).size() == 2 * (3 + cfg.k_levels.size()));
  CHECK(solve_plan(Study::Inhomogeneous, cfg).size() == 2 * 3);
  CHECK_FALSE(solve_plan(Study::WeightsCheck, cfg).empty());
}
