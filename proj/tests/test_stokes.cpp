#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "nnstokes/error.hpp"
#include "nnstokes/manufactured.hpp"
#include "nnstokes/stokes.hpp"

using namespace nnstokes;

namespace {

Eigen::Matrix2d identity_law(const Eigen::Matrix2d& e) { return e; }

double l2(const StaggeredVelocity& v) { return std::sqrt(inner_product(v, v)); }

double pressure_l2(const PressureField& a, const PressureField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) s += std::pow(a.values[k] - b.values[k], 2);
  return std::sqrt(s) * a.grid.h();
}

StaggeredVelocity random_velocity(const MacGrid& g, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-scale, scale);
  StaggeredVelocity v(g);
  for (double& x : v.u) x = U(rng);
  for (double& x : v.v) x = U(rng);
  return v.with_boundary(StaggeredVelocity(g));
}

struct MmsErrors {
  double velocity;
  double pressure;
  StokesSolution solution;
};

MmsErrors linear_mms(int n, ManufacturedKind kind, LinearBackend backend = LinearBackend::Direct) {
  const MacGrid g = MacGrid::unit_square(n);
  const auto m = manufactured_solution(g, kind);
  const auto F = forcing_from_solution(identity_law, m.analytic, g);
  SolverConfig cfg;
  cfg.backend = backend;
  auto sol = solve_linear_stokes(F, m.divergence, m.velocity.boundary_part(), cfg);
  const auto exact_p = [&] {
    auto p = sample_pressure(g, m.analytic.pressure);
    p.normalize();
    return p;
  }();
  const double ev = l2(sol.velocity - sample_velocity(g, m.analytic.velocity));
  const double ep = pressure_l2(sol.pressure, exact_p);
  return {ev, ep, std::move(sol)};
}

}  // namespace

TEST_CASE("solver configuration validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.damping = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg.damping = 1.0;
  cfg.tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  CHECK(linear_backend_from_string("schur") == LinearBackend::Schur);
  CHECK_THROWS_AS(linear_backend_from_string("gmres"), ParameterError);
}

TEST_CASE("zero data give the zero solution") {
  const MacGrid g = MacGrid::unit_square(16);
  for (auto backend : {LinearBackend::Direct, LinearBackend::Schur}) {
    SolverConfig cfg;
    cfg.backend = backend;
    const auto sol = solve_linear_stokes(ForcingField(g), g.cell_field(), StaggeredVelocity(g), cfg);
    CHECK(sol.velocity.to_vector().cwiseAbs().maxCoeff() == 0.0);
    CHECK(*std::max_element(sol.pressure.values.begin(), sol.pressure.values.end()) == 0.0);
    CHECK(sol.converged);
  }
}

TEST_CASE("linear manufactured solution converges at second order") {
  double ev_prev = 0.0, ep_prev = 0.0;
  for (int n : {16, 32, 64}) {
    const auto e = linear_mms(n, ManufacturedKind::StreamFunction);
    CHECK(e.solution.algebraic_residual < 1e-12);
    CHECK(std::abs(e.solution.pressure.mean()) < 1e-12);
    CHECK(e.solution.divergence_residual < 1e-10);
    if (ev_prev > 0.0) {
      CHECK(std::log2(ev_prev / e.velocity) >= 1.9);
      CHECK(std::log2(ep_prev / e.pressure) >= 1.0);
    }
    ev_prev = e.velocity;
    ep_prev = e.pressure;
  }
}

TEST_CASE("direct and Schur backends agree") {
  const auto a = linear_mms(24, ManufacturedKind::Compressible, LinearBackend::Direct);
  const auto b = linear_mms(24, ManufacturedKind::Compressible, LinearBackend::Schur);
  CHECK(l2(a.solution.velocity - b.solution.velocity) < 1e-10);
  CHECK(pressure_l2(a.solution.pressure, b.solution.pressure) < 1e-10);
}

TEST_CASE("prescribed divergence and boundary data") {
  SUBCASE("compressible manufactured solution") {
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
      const auto e = linear_mms(n, ManufacturedKind::Compressible);
      const MacGrid g = MacGrid::unit_square(n);
      const auto m = manufactured_solution(g, ManufacturedKind::Compressible);
      const GridField div = discrete_divergence(e.solution.velocity);
      for (std::size_t c = 0; c < div.size(); ++c) CHECK(div[c] == doctest::Approx(m.divergence[c]).epsilon(1e-9));
      if (prev > 0.0) CHECK(std::log2(prev / e.velocity) >= 1.9);
      prev = e.velocity;
    }
  }
  SUBCASE("constant divergence with linear boundary data is reproduced exactly") {
    const auto e = linear_mms(16, ManufacturedKind::Dilation);
    CHECK(e.velocity < 1e-11);
    CHECK(discrete_divergence(e.solution.velocity).min() == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("Poiseuille flow converges under refinement") {
    double prev_v = 0.0, prev_p = 0.0;
    for (int n : {16, 32, 64}) {
      const auto e = linear_mms(n, ManufacturedKind::Poiseuille);
      if (prev_v > 0.0) {
        CHECK(std::log2(prev_v / e.velocity) >= 1.9);
        CHECK(std::log2(prev_p / e.pressure) >= 1.0);
      }
      prev_v = e.velocity;
      prev_p = e.pressure;
    }
  }
  SUBCASE("incompatible data are rejected") {
    const MacGrid g = MacGrid::unit_square(8);
    CHECK_THROWS_AS(solve_linear_stokes(ForcingField(g), g.cell_field(1.0), StaggeredVelocity(g), SolverConfig{}),
                    ParameterError);
  }
}

TEST_CASE("linear estimate ratio") {
  SUBCASE("zero data") {
    const MacGrid g = MacGrid::unit_square(8);
    const auto sol = solve_linear_stokes(ForcingField(g), g.cell_field(), StaggeredVelocity(g), SolverConfig{});
    CHECK(linear_estimate_ratio(sol, ForcingField(g), g.cell_field(), StaggeredVelocity(g),
                                Weight::constant(g.cell_field()), 2.0) == 0.0);
  }
  SUBCASE("scaling invariance") {
    const MacGrid g = MacGrid::unit_square(16);
    const auto m = manufactured_solution(g, ManufacturedKind::Compressible);
    const auto F = forcing_from_solution(identity_law, m.analytic, g);
    const Weight w = weight_from_forcing(cell_magnitude(F), 1.5);
    const auto gb = m.velocity.boundary_part();
    const auto sol = solve_linear_stokes(F, m.divergence, gb, SolverConfig{});
    const double r1 = linear_estimate_ratio(sol, F, m.divergence, gb, w, 1.5);
    GridField d3 = m.divergence;
    for (double& x : d3.values()) x *= 3.0;
    const auto sol3 = solve_linear_stokes(3.0 * F, d3, 3.0 * gb, SolverConfig{});
    const double r3 = linear_estimate_ratio(sol3, 3.0 * F, d3, 3.0 * gb, w, 1.5);
    CHECK(r3 == doctest::Approx(r1).epsilon(1e-9));
  }
  SUBCASE("stable under refinement for smooth data") {
    std::vector<double> ratios;
    for (int n : {16, 32, 64}) {
      const MacGrid g = MacGrid::unit_square(n);
      const auto m = manufactured_solution(g, ManufacturedKind::StreamFunction);
      const auto F = forcing_from_solution(identity_law, m.analytic, g);
      const auto sol = solve_linear_stokes(F, g.cell_field(), StaggeredVelocity(g), SolverConfig{});
      ratios.push_back(linear_estimate_ratio(sol, F, g.cell_field(), StaggeredVelocity(g), Weight::constant(g.cell_field()), 2.0));
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    CHECK(*hi / *lo < 1.10);
  }
  SUBCASE("trace surrogate is homogeneous and vanishes on zero data") {
    const MacGrid g = MacGrid::unit_square(16);
    const Weight one = Weight::constant(g.cell_field());
    const auto gb = manufactured_solution(g, ManufacturedKind::Poiseuille).velocity.boundary_part();
    CHECK(trace_norm(StaggeredVelocity(g), one, 2.0) == 0.0);
    CHECK(trace_norm(2.0 * gb, one, 2.0) == doctest::Approx(2.0 * trace_norm(gb, one, 2.0)).epsilon(1e-12));
  }
}

TEST_CASE("saddle system structure") {
  const MacGrid g = MacGrid::unit_square(6);
  const DiscreteOperators ops(g);
  const Eigen::MatrixXd a = Eigen::MatrixXd(ops.viscous_interior());
  CHECK((a - a.transpose()).norm() < 1e-12 * a.norm());
  const Eigen::MatrixXd b = Eigen::MatrixXd(ops.divergence() * ops.expand_interior());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
  const Eigen::MatrixXd z = lu.kernel();
  CHECK(z.cols() == static_cast<Eigen::Index>(ops.interior().size() - g.cells() + 1));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(z.rows(), z.cols());
  const Eigen::VectorXd ritz = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q.transpose() * a * q).eigenvalues();
  CHECK(ritz.minCoeff() > 1e-3);
}

TEST_CASE("discrete stress") {
  const MacGrid g = MacGrid::unit_square(12);
  const auto e = discrete_sym_gradient(random_velocity(g, 4, 0.3));
  SUBCASE("linear law is a scalar multiple of the strain") {
    const auto s = discrete_stress(StressModel::carreau(0.5, 1, 1, 2.0), e);
    CHECK((s.to_vector() - 1.5 * e.to_vector()).cwiseAbs().maxCoeff() < 1e-14);
  }
  SUBCASE("zero strain gives zero stress for every shipped model") {
    for (const auto& m : shipped_models()) CHECK(discrete_stress(m, StaggeredTensor(g)).max_abs() == 0.0);
  }
  SUBCASE("piecewise law with identical regions equals the uniform law") {
    const auto model = StressModel::carreau(1, 1, 1, 1.5);
    std::vector<int> region(g.cells());
    for (std::size_t c = 0; c < region.size(); ++c) region[c] = static_cast<int>(c % 2);
    const StressField piecewise(g, {model, model}, region);
    CHECK((discrete_stress(piecewise, e).to_vector() - discrete_stress(model, e).to_vector()).norm() == 0.0);
    CHECK_THROWS_AS(StressField(g, {model}, std::vector<int>(3, 0)), ParameterError);
    CHECK_THROWS_AS(StressField(g, {model}, std::vector<int>(g.cells(), 1)), ParameterError);
  }
}

TEST_CASE("monotone residual on random pairs") {
  const MacGrid g = MacGrid::unit_square(10);
  std::vector<int> region(g.cells());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) region[g.cell(i, j)] = i < g.nx() / 2 ? 0 : 1;
  const auto shipped = shipped_models();
  std::vector<StressField> laws(shipped.begin(), shipped.end());
  laws.emplace_back(g, std::vector<StressModel>{StressModel::carreau(1, 1, 1, 1.5), StressModel::capped(2, 0.5, 1, 3)}, region);
  std::uint64_t seed = 1;
  for (const auto& law : laws) {
    for (int k = 0; k < 20; ++k, seed += 2) {
      const double scale = std::pow(10.0, -3.0 + 6.0 * (k % 7) / 6.0);
      const auto v1 = random_velocity(g, seed, scale);
      const auto v2 = random_velocity(g, seed + 1, scale);
      const double pairing = monotone_pairing(law, v1, v2);
      const auto e = discrete_sym_gradient(v1) - discrete_sym_gradient(v2);
      CHECK(pairing >= -1e-12 * (1.0 + inner_product(e, e)));
    }
  }
}

TEST_CASE("Picard step") {
  const MacGrid g = MacGrid::unit_square(16);
  const auto m = manufactured_solution(g, ManufacturedKind::StreamFunction);
  SUBCASE("exactly linear law lands on the linear solution in one step") {
    const StressModel model = StressModel::carreau(1, 1, 1, 2.0);
    const auto f = forcing_from_solution(model, m.analytic, g);
    const StokesOperator op(g, model.mu_inf());
    const auto step = picard_step(random_velocity(g, 9, 1.0), f, model, op, g.cell_field(), StaggeredVelocity(g), 1.0);
    const auto lin = solve_linear_stokes(f, g.cell_field(), StaggeredVelocity(g), SolverConfig{}, model.mu_inf());
    CHECK(l2(step.velocity - lin.velocity) < 1e-12);
  }
  SUBCASE("zero is a fixed point for zero forcing") {
    for (const auto& model : shipped_models()) {
      const StokesOperator op(g, model.mu_inf());
      const auto step = picard_step(StaggeredVelocity(g), ForcingField(g), model, op, g.cell_field(), StaggeredVelocity(g), 1.0);
      CHECK(step.update_norm == 0.0);
    }
  }
  SUBCASE("observed contraction stays below the bound from the law") {
    const StressModel model = StressModel::carreau(1, 1, 1, 1.5);
    const auto f = forcing_from_solution(model, m.analytic, g);
    SolverConfig cfg;
    cfg.tol = 1e-12;
    const auto sol = solve_nonlinear(f, model, cfg);
    REQUIRE(sol.converged);
    // Linearized map v -> v - theta/mu (sigma'(v) - mu) has eigenvalues 1 - theta s_eff / mu with
    // s_eff between s(l) and (s(l) l)', both in [mu, mu + nu0^((p-2)/2)] = [1, 2].
    const double theta = sol.trace.back().damping;
    const double bound = std::max(std::abs(1.0 - theta * 1.0), std::abs(1.0 - theta * 2.0));
    for (std::size_t k = 3; k + 1 < sol.trace.size(); ++k) {
      if (sol.trace[k].damping != theta || sol.trace[k - 1].damping != theta) continue;
      CHECK(sol.trace[k].update_norm <= bound * sol.trace[k - 1].update_norm * (1.0 + 1e-6) + 1e-14);
    }
  }
}

TEST_CASE("nonlinear solves") {
  SUBCASE("degenerate exponent matches the linear solve") {
    const MacGrid g = MacGrid::unit_square(32);
    const StressModel model = StressModel::carreau(1, 1, 1, 2.0);
    const auto m = manufactured_solution(g, ManufacturedKind::StreamFunction);
    const auto f = forcing_from_solution(StressModel::carreau(1, 1, 1, 1.5), m.analytic, g);
    const auto nl = solve_nonlinear(f, model, SolverConfig{});
    const auto lin = solve_linear_stokes(f, g.cell_field(), StaggeredVelocity(g), SolverConfig{}, model.mu_inf());
    CHECK(nl.converged);
    CHECK(l2(nl.velocity - lin.velocity) <= 1e-10 * l2(lin.velocity));
    CHECK(pressure_l2(nl.pressure, lin.pressure) < 1e-10);
  }
  SUBCASE("Carreau manufactured solution: order, consistency and energy") {
    const StressModel model = StressModel::carreau(1, 1, 1, 1.5);
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
      const MacGrid g = MacGrid::unit_square(n);
      const auto m = manufactured_solution(g, ManufacturedKind::StreamFunction);
      const auto f = forcing_from_solution(model, m.analytic, g);
      const auto sol = solve_nonlinear(f, model, SolverConfig{});
      REQUIRE(sol.converged);
      CHECK(sol.iterations <= 50);
      CHECK(sol.pde_residual < 1e-8);
      CHECK(energy_identity_defect(model, sol, f) < 1e-8);
      const double err = l2(sol.velocity - sample_velocity(g, m.analytic.velocity));
      if (prev > 0.0) CHECK(std::log2(prev / err) >= 1.0);
      prev = err;
    }
  }
  SUBCASE("two initial guesses agree") {
    const MacGrid g = MacGrid::unit_square(24);
    const StressModel model = StressModel::carreau(1, 1, 1, 1.5);
    const auto m = manufactured_solution(g, ManufacturedKind::StreamFunction);
    const auto f = forcing_from_solution(model, m.analytic, g);
    SolverConfig cfg;
    cfg.tol = 1e-12;
    const auto a = solve_nonlinear(f, model, cfg);
    NonlinearProblem start;
    start.initial = random_velocity(g, 77, 1.0);
    const auto b = solve_nonlinear(f, model, cfg, start);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK(l2(a.velocity - b.velocity) < 1e-8);
  }
  SUBCASE("capped law with bounded-below viscosity converges") {
    const MacGrid g = MacGrid::unit_square(16);
    const StressModel model = StressModel::capped(2, 0.5, 1, 3);
    const auto m = manufactured_solution(g, ManufacturedKind::StreamFunction);
    const auto f = forcing_from_solution(model, m.analytic, g);
    const auto sol = solve_nonlinear(f, model, SolverConfig{});
    CHECK(sol.converged);
    CHECK(sol.pde_residual < 1e-7);
  }
  SUBCASE("nonconvergence is flagged, not hidden") {
    const MacGrid g = MacGrid::unit_square(8);
    const StressModel model = StressModel::carreau(1, 1, 1, 1.5);
    const auto f = forcing_from_solution(model, analytic_solution(ManufacturedKind::StreamFunction), g);
    SolverConfig cfg;
    cfg.max_iter = 2;
    const auto sol = solve_nonlinear(f, model, cfg);
    CHECK_FALSE(sol.converged);
    CHECK(sol.trace.size() == 2);
    CHECK(!sol.message.empty());
    CHECK_THROWS_AS(nonlinear_estimate_ratio(sol, f, Weight::constant(g.cell_field()), 2.0), SolverError);
  }
  SUBCASE("inhomogeneous boundary data") {
    const MacGrid g = MacGrid::unit_square(16);
    const StressModel model = StressModel::carreau(1, 1, 1, 1.5);
    const auto m = manufactured_solution(g, ManufacturedKind::Compressible);
    const auto f = forcing_from_solution(model, m.analytic, g);
    NonlinearProblem problem;
    problem.d = m.divergence;
    problem.g = m.velocity.boundary_part();
    const auto sol = solve_nonlinear(f, model, SolverConfig{}, problem);
    CHECK(sol.converged);
    CHECK(sol.divergence_residual < 1e-9);
    CHECK(l2(sol.velocity - sample_velocity(g, m.analytic.velocity)) < 1e-3);
  }
}

TEST_CASE("nonlinear estimate ratio") {
  const MacGrid g = MacGrid::unit_square(16);
  const StressModel model = StressModel::carreau(1, 1, 1, 1.5);
  const auto zero = solve_nonlinear(ForcingField(g), model, SolverConfig{});
  CHECK(zero.converged);
  CHECK(nonlinear_estimate_ratio(zero, ForcingField(g), Weight::constant(g.cell_field()), 2.0) == 0.0);
  std::vector<double> ratios;
  for (int n : {16, 32, 64}) {
    const MacGrid gn = MacGrid::unit_square(n);
    const auto f = forcing_from_solution(model, analytic_solution(ManufacturedKind::StreamFunction), gn);
    const auto sol = solve_nonlinear(f, model, SolverConfig{});
    ratios.push_back(nonlinear_estimate_ratio(sol, f, Weight::constant(gn.cell_field()), 2.0));
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  CHECK(*hi / *lo < 1.10);
}
