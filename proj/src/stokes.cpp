#include "nnstokes/stokes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "nnstokes/error.hpp"

namespace nnstokes {

namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

Eigen::VectorXd gather(const Eigen::VectorXd& full, const std::vector<int>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Eigen::Index>(k)] = full[idx[k]];
  return out;
}

Eigen::VectorXd as_vector(const GridField& f) {
  return Eigen::Map<const Eigen::VectorXd>(f.values().data(), static_cast<Eigen::Index>(f.size()));
}

double velocity_norm(const StaggeredVelocity& v, const std::optional<Weight>& w) {
  if (w) return weighted_lq_norm(v, *w, 2.0);
  return std::sqrt(std::max(0.0, inner_product(v, v)));
}

std::string grid_diagnostics(const MacGrid& g, std::size_t unknowns) {
  std::ostringstream os;
  os << "grid " << g.nx() << "x" << g.ny() << ", h = " << g.h() << ", " << unknowns << " unknowns";
  return os.str();
}

}  // namespace

const char* to_string(LinearBackend backend) {
  return backend == LinearBackend::Direct ? "direct" : "schur";
}

LinearBackend linear_backend_from_string(const std::string& name) {
  if (name == "direct") return LinearBackend::Direct;
  if (name == "schur") return LinearBackend::Schur;
  throw ParameterError("unknown linear backend '" + name + "' (direct, schur)");
}

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw ParameterError("solver tol must be positive");
  if (max_iter < 1) throw ParameterError("solver max_iter must be at least 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw ParameterError("damping must lie in (0, 1]");
  if (!(contraction > 0.0 && contraction <= 1.0)) throw ParameterError("contraction must lie in (0, 1]");
  if (!(min_damping > 0.0 && min_damping <= damping)) throw ParameterError("min_damping must lie in (0, damping]");
  if (!(linear_tol > 0.0)) throw ParameterError("linear_tol must be positive");
}

StressField::StressField(StressModel model) : models_{std::move(model)} {}

StressField::StressField(const MacGrid& grid, std::vector<StressModel> models, std::vector<int> cell_region)
    : models_(std::move(models)), region_(std::move(cell_region)), grid_(grid) {
  if (models_.empty()) throw ParameterError("StressField: no models");
  if (region_.size() != grid.cells()) throw ParameterError("StressField: one region index per cell required");
  for (int r : region_)
    if (r < 0 || r >= static_cast<int>(models_.size())) throw ParameterError("StressField: region index out of range");
}

double StressField::mu_inf() const {
  double m = 0.0;
  for (const auto& model : models_) m = std::max(m, model.mu_inf());
  return m;
}

StaggeredTensor discrete_stress(const StressField& law, const StaggeredTensor& strain) {
  const MacGrid& g = strain.grid;
  const GridField magnitude = cell_magnitude(strain);
  std::vector<double> s(g.cells());
  StaggeredTensor out(g);
  for (std::size_t c = 0; c < g.cells(); ++c) {
    s[c] = law.at_cell(c).stress_factor(magnitude[c]);
    out.xx[c] = s[c] * strain.xx[c];
    out.yy[c] = s[c] * strain.yy[c];
  }
  for (int j = 0; j <= g.ny(); ++j) {
    for (int i = 0; i <= g.nx(); ++i) {
      double sum = 0.0;
      int count = 0;
      for (int b = std::max(j - 1, 0); b <= std::min(j, g.ny() - 1); ++b) {
        for (int a = std::max(i - 1, 0); a <= std::min(i, g.nx() - 1); ++a) {
          sum += s[g.cell(a, b)];
          ++count;
        }
      }
      const std::size_t n = g.node(i, j);
      out.xy[n] = sum / count * strain.xy[n];
      out.yx[n] = sum / count * strain.yx[n];
    }
  }
  return out;
}

struct StokesOperator::Impl {
  Impl(const MacGrid& g, double mu_, LinearBackend backend_, double linear_tol_)
      : grid(g), mu(mu_), backend(backend_), linear_tol(linear_tol_), ops(g) {}

  MacGrid grid;
  double mu;
  LinearBackend backend;
  double linear_tol;
  DiscreteOperators ops;
  SparseMatrix b_int;  // h^2 D on interior unknowns
  SparseMatrix d_bnd;  // D on boundary entries
  Eigen::SimplicialLLT<SparseMatrix> llt;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;

  Eigen::Index n_int() const { return static_cast<Eigen::Index>(ops.interior().size()); }
  Eigen::Index n_cells() const { return static_cast<Eigen::Index>(grid.cells()); }

  Eigen::VectorXd schur_apply(const Eigen::VectorXd& p) const {
    return b_int * llt.solve(Eigen::VectorXd(b_int.transpose() * p));
  }

  // CG on B A^-1 B^T p = rhs in the mean-zero subspace.
  Eigen::VectorXd schur_solve(Eigen::VectorXd rhs) const {
    rhs.array() -= rhs.mean();
    Eigen::VectorXd p = Eigen::VectorXd::Zero(rhs.size());
    const double target = linear_tol * rhs.norm();
    Eigen::VectorXd r = rhs;
    Eigen::VectorXd dir = r;
    double rr = r.squaredNorm();
    const int max_iter = 10 * static_cast<int>(rhs.size()) + 100;
    for (int it = 0; it < max_iter && std::sqrt(rr) > target; ++it) {
      Eigen::VectorXd q = schur_apply(dir);
      const double alpha = rr / dir.dot(q);
      p += alpha * dir;
      r -= alpha * q;
      r.array() -= r.mean();
      const double rr_new = r.squaredNorm();
      dir = r + (rr_new / rr) * dir;
      rr = rr_new;
    }
    if (!(std::sqrt(rr) <= std::max(target, 1e3 * std::numeric_limits<double>::epsilon() * rhs.norm())))
      throw SolverError("Schur-complement CG did not reach the requested tolerance on " +
                        grid_diagnostics(grid, static_cast<std::size_t>(n_int() + n_cells())));
    return p;
  }
};

StokesOperator::StokesOperator(const MacGrid& grid, double viscosity, LinearBackend backend, double linear_tol)
    : impl_(std::make_unique<Impl>(grid, viscosity, backend, linear_tol)) {
  if (!(viscosity > 0.0) || !std::isfinite(viscosity)) throw ParameterError("viscosity must be positive");
  Impl& m = *impl_;
  const double h2 = grid.h() * grid.h();
  m.b_int = h2 * (m.ops.divergence() * m.ops.expand_interior());
  m.d_bnd = m.ops.divergence() * m.ops.expand_boundary();
  m.llt.compute(m.ops.viscous_interior());
  if (m.llt.info() != Eigen::Success)
    throw SolverError("velocity block factorization failed on " + grid_diagnostics(grid, m.ops.interior().size()));

  if (backend == LinearBackend::Direct) {
    const Eigen::Index ni = m.n_int(), np = m.n_cells() - 1;
    std::vector<Eigen::Triplet<double>> t;
    const SparseMatrix& a = m.ops.viscous_interior();
    t.reserve(static_cast<std::size_t>(a.nonZeros() + 2 * m.b_int.nonZeros()));
    for (int k = 0; k < a.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(a, k); it; ++it) t.emplace_back(it.row(), it.col(), viscosity * it.value());
    for (int k = 0; k < m.b_int.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(m.b_int, k); it; ++it) {
        if (it.row() == 0) continue;  // pressure pinned in cell 0
        const Eigen::Index r = ni + it.row() - 1;
        t.emplace_back(r, it.col(), -it.value());
        t.emplace_back(it.col(), r, -it.value());
      }
    }
    SparseMatrix k(ni + np, ni + np);
    k.setFromTriplets(t.begin(), t.end());
    k.makeCompressed();
    m.lu.analyzePattern(k);
    m.lu.factorize(k);
    if (m.lu.info() != Eigen::Success)
      throw SolverError("saddle-point factorization failed (" + m.lu.lastErrorMessage() + ") on " +
                        grid_diagnostics(grid, static_cast<std::size_t>(ni + np)));
  }
}

StokesOperator::~StokesOperator() = default;
StokesOperator::StokesOperator(StokesOperator&&) noexcept = default;

const MacGrid& StokesOperator::grid() const { return impl_->grid; }
double StokesOperator::viscosity() const { return impl_->mu; }
const DiscreteOperators& StokesOperator::operators() const { return impl_->ops; }

double compatibility_defect(const GridField& d, const StaggeredVelocity& g) {
  long double sum = 0.0L;
  for (double x : d.values()) sum += x;
  return std::abs(static_cast<double>(sum) * d.cell_volume() - g.boundary_flux());
}

StokesSolution StokesOperator::solve(const ForcingField& F, const GridField& d, const StaggeredVelocity& g) const {
  const Impl& m = *impl_;
  if (!(F.grid == m.grid) || !(g.grid == m.grid)) throw ParameterError("solve: data live on a different grid");
  if (d.nx() != m.grid.nx() || d.ny() != m.grid.ny()) throw ParameterError("solve: divergence field has the wrong shape");
  long double scale = 0.0L;
  for (double x : d.values()) scale += std::abs(x) * d.cell_volume();
  for (const double x : g.boundary_part().u) scale += std::abs(x) * m.grid.h();
  for (const double x : g.boundary_part().v) scale += std::abs(x) * m.grid.h();
  const double defect = compatibility_defect(d, g);
  if (defect > 1e-10 * (1.0 + static_cast<double>(scale))) {
    std::ostringstream os;
    os << "incompatible data: integral of d minus boundary flux of g is " << defect;
    throw ParameterError(os.str());
  }

  const auto& interior = m.ops.interior();
  const auto& boundary = m.ops.boundary();
  const Eigen::VectorXd g_full = g.to_vector();
  const Eigen::VectorXd g_b = gather(g_full, boundary);
  const Eigen::VectorXd b_v = gather(m.ops.weak_divergence(F), interior) - m.mu * (m.ops.viscous_coupling() * g_b);
  const double h2 = m.grid.h() * m.grid.h();
  const Eigen::VectorXd b_p = -h2 * (as_vector(d) - m.d_bnd * g_b);

  Eigen::VectorXd x(m.n_int());
  Eigen::VectorXd p(m.n_cells());
  if (m.backend == LinearBackend::Direct) {
    Eigen::VectorXd rhs(m.n_int() + m.n_cells() - 1);
    rhs << b_v, b_p.tail(m.n_cells() - 1);
    const Eigen::VectorXd sol = m.lu.solve(rhs);
    if (m.lu.info() != Eigen::Success) throw SolverError("saddle-point solve failed on " + grid_diagnostics(m.grid, rhs.size()));
    x = sol.head(m.n_int());
    p[0] = 0.0;
    p.tail(m.n_cells() - 1) = sol.tail(m.n_cells() - 1);
  } else {
    const Eigen::VectorXd a_inv_bv = m.llt.solve(b_v);
    p = m.schur_solve(-m.mu * b_p - m.b_int * a_inv_bv);
    x = m.llt.solve(Eigen::VectorXd(b_v + m.b_int.transpose() * p)) / m.mu;
  }

  const Eigen::VectorXd r_v = m.mu * (m.ops.viscous_interior() * x) - m.b_int.transpose() * p - b_v;
  const Eigen::VectorXd r_p = -(m.b_int * x) - b_p;
  const double b_norm = std::sqrt(b_v.squaredNorm() + b_p.squaredNorm());
  const double r_norm = std::sqrt(r_v.squaredNorm() + r_p.squaredNorm());

  StokesSolution out(m.grid);
  Eigen::VectorXd full = g.boundary_part().to_vector();
  for (std::size_t k = 0; k < interior.size(); ++k) full[interior[k]] = x[static_cast<Eigen::Index>(k)];
  out.velocity = StaggeredVelocity::from_vector(m.grid, full);
  out.pressure.values.assign(p.data(), p.data() + p.size());
  out.pressure.normalize();
  out.viscosity = m.mu;
  out.algebraic_residual = b_norm > 0.0 ? r_norm / b_norm : r_norm;
  const GridField div = discrete_divergence(out.velocity);
  for (std::size_t c = 0; c < div.size(); ++c)
    out.divergence_residual = std::max(out.divergence_residual, std::abs(div[c] - d[c]));
  return out;
}

StaggeredVelocity StokesOperator::extend(const StaggeredVelocity& g) const {
  const Impl& m = *impl_;
  const Eigen::VectorXd g_b = gather(g.to_vector(), m.ops.boundary());
  const Eigen::VectorXd x = m.llt.solve(Eigen::VectorXd(-(m.ops.viscous_coupling() * g_b)));
  Eigen::VectorXd full = g.boundary_part().to_vector();
  for (std::size_t k = 0; k < m.ops.interior().size(); ++k) full[m.ops.interior()[k]] = x[static_cast<Eigen::Index>(k)];
  return StaggeredVelocity::from_vector(m.grid, full);
}

Eigen::VectorXd StokesOperator::weak_residual(const StaggeredTensor& sigma, const PressureField& p,
                                              const ForcingField& f) const {
  const Impl& m = *impl_;
  const Eigen::VectorXd pv = Eigen::Map<const Eigen::VectorXd>(p.values.data(), static_cast<Eigen::Index>(p.values.size()));
  return gather(m.ops.weak_divergence(sigma - f), m.ops.interior()) - m.b_int.transpose() * pv;
}

StokesSolution solve_linear_stokes(const ForcingField& F, const GridField& d, const StaggeredVelocity& g,
                                   const SolverConfig& cfg, double viscosity) {
  cfg.validate();
  const StokesOperator op(F.grid, viscosity, cfg.backend, cfg.linear_tol);
  StokesSolution sol = op.solve(F, d, g);
  if (!(sol.algebraic_residual <= cfg.tol)) {
    sol.converged = false;
    std::ostringstream os;
    os << "linear residual " << sol.algebraic_residual << " above tol " << cfg.tol;
    sol.message = os.str();
  }
  return sol;
}

double trace_norm(const StaggeredVelocity& g, const Weight& w, double q) {
  if (g.homogeneous_boundary()) return 0.0;
  const StokesOperator op(g.grid, 1.0, LinearBackend::Schur);
  const StaggeredVelocity e = op.extend(g);
  return weighted_lq_norm(e, w, q) + weighted_lq_norm(discrete_gradient(e), w, q);
}

double linear_estimate_ratio(const StokesSolution& sol, const ForcingField& F, const GridField& d,
                             const StaggeredVelocity& g, const Weight& w, double q) {
  GridField abs_d = d;
  for (double& x : abs_d.values()) x = std::abs(x);
  const double data = weighted_lq_norm(F, w, q) + weighted_lp_norm(abs_d, w, q) + trace_norm(g, w, q);
  if (data == 0.0) return 0.0;
  const double solution = weighted_lq_norm(discrete_gradient(sol.velocity), w, q) + weighted_lq_norm(sol.pressure, w, q);
  return solution / (data + std::numeric_limits<double>::epsilon());
}

PicardResult picard_step(const StaggeredVelocity& v_m, const ForcingField& f, const StressField& law,
                         const StokesOperator& op, const GridField& d, const StaggeredVelocity& g, double theta,
                         const std::optional<Weight>& norm_weight) {
  if (!(theta > 0.0 && theta <= 1.0)) throw ParameterError("damping must lie in (0, 1]");
  const double mu = op.viscosity();
  const StaggeredTensor strain = discrete_sym_gradient(v_m);
  const ForcingField effective = f + (mu * strain - discrete_stress(law, strain));
  StokesSolution lin = op.solve(effective, d, g);
  const double update = velocity_norm(lin.velocity - v_m, norm_weight);
  StaggeredVelocity next = theta == 1.0 ? lin.velocity : theta * lin.velocity + (1.0 - theta) * v_m;
  return {std::move(next), std::move(lin.pressure), update, lin.algebraic_residual};
}

double nonlinear_residual(const StressField& law, const StaggeredVelocity& v, const PressureField& p,
                          const ForcingField& f, const StokesOperator& op) {
  const StaggeredTensor sigma = discrete_stress(law, discrete_sym_gradient(v));
  const Eigen::VectorXd r = op.weak_residual(sigma, p, f);
  const auto& ops = op.operators();
  const double scale = gather(ops.weak_divergence(sigma), ops.interior()).norm() +
                       gather(ops.weak_divergence(f), ops.interior()).norm() +
                       op.weak_residual(StaggeredTensor(v.grid), p, StaggeredTensor(v.grid)).norm();
  return scale > 0.0 ? r.norm() / scale : r.norm();
}

StokesSolution solve_nonlinear(const ForcingField& f, const StressField& law, const SolverConfig& cfg,
                               const NonlinearProblem& problem) {
  cfg.validate();
  const MacGrid& grid = f.grid;
  const GridField d = problem.d.value_or(grid.cell_field());
  const StaggeredVelocity g = problem.g.value_or(StaggeredVelocity(grid));
  const double mu = law.mu_inf();
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ParameterError("stress law has no positive asymptotic viscosity");
  const StokesOperator op(grid, mu, cfg.backend, cfg.linear_tol);

  StaggeredVelocity v = problem.initial.value_or(StaggeredVelocity(grid)).with_boundary(g);
  StokesSolution out(grid);
  out.viscosity = mu;
  out.converged = false;
  double theta = cfg.damping;
  double previous_update = std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  std::optional<PicardResult> best_iterate;

  for (int m = 0; m < cfg.max_iter; ++m) {
    PicardResult step = picard_step(v, f, law, op, d, g, theta, cfg.norm_weight);
    const double size = velocity_norm(step.velocity, cfg.norm_weight);
    const double rel = step.update_norm == 0.0 ? 0.0 : step.update_norm / std::max(size, kTiny);
    out.trace.push_back({m + 1, step.update_norm, rel, theta});
    out.iterations = m + 1;
    out.algebraic_residual = step.algebraic_residual;
    if (cfg.auto_damping && step.update_norm > cfg.contraction * previous_update && theta > cfg.min_damping) {
      theta = std::max(cfg.min_damping, 0.5 * theta);
      previous_update = std::numeric_limits<double>::infinity();  // judge the new theta on its own updates
    } else {
      previous_update = step.update_norm;
    }
    v = step.velocity;
    if (rel < best) {
      best = rel;
      best_iterate = step;
    }
    if (!std::isfinite(rel)) break;
    if (rel <= cfg.tol) {
      out.converged = true;
      best_iterate = std::move(step);
      break;
    }
  }
  if (best_iterate) {
    out.velocity = best_iterate->velocity;
    out.pressure = best_iterate->pressure;
  }
  if (!out.converged) {
    std::ostringstream os;
    os << "Picard iteration stopped after " << out.iterations << " steps, best relative update " << best;
    out.message = os.str();
  }
  out.pde_residual = nonlinear_residual(law, out.velocity, out.pressure, f, op);
  const GridField div = discrete_divergence(out.velocity);
  for (std::size_t c = 0; c < div.size(); ++c)
    out.divergence_residual = std::max(out.divergence_residual, std::abs(div[c] - d[c]));
  return out;
}

double nonlinear_estimate_ratio(const StokesSolution& sol, const ForcingField& f, const Weight& w, double q) {
  if (!sol.converged) throw SolverError("nonlinear_estimate_ratio: solution did not converge (" + sol.message + ")");
  const double numerator = weighted_lq_norm(discrete_gradient(sol.velocity), w, q) + weighted_lq_norm(sol.pressure, w, q);
  return numerator / (1.0 + weighted_lq_norm(f, w, q));
}

double monotone_pairing(const StressField& law, const StaggeredVelocity& v1, const StaggeredVelocity& v2) {
  const StaggeredTensor e1 = discrete_sym_gradient(v1);
  const StaggeredTensor e2 = discrete_sym_gradient(v2);
  return inner_product(discrete_stress(law, e1) - discrete_stress(law, e2), e1 - e2);
}

double energy_identity_defect(const StressField& law, const StokesSolution& sol, const ForcingField& f) {
  const StaggeredTensor e = discrete_sym_gradient(sol.velocity);
  const double lhs = inner_product(discrete_stress(law, e), e);
  const double rhs = inner_product(f, discrete_gradient(sol.velocity));
  const double scale = std::max({std::abs(lhs), std::abs(rhs), kTiny});
  return std::abs(lhs - rhs) / scale;
}

}  // namespace nnstokes
