#ifndef NNSTOKES_STOKES_HPP
#define NNSTOKES_STOKES_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nnstokes/constitutive.hpp"
#include "nnstokes/mac_grid.hpp"
#include "nnstokes/operators.hpp"
#include "nnstokes/weights.hpp"

namespace nnstokes {

enum class LinearBackend {
  Direct,  // sparse LU of the pinned saddle system
  Schur,   // conjugate gradients on the pressure Schur complement
};

const char* to_string(LinearBackend backend);
LinearBackend linear_backend_from_string(const std::string& name);

struct SolverConfig {
  double tol = 1e-8;        // nonlinear: relative update; linear: algebraic residual
  int max_iter = 50;
  double damping = 1.0;     // initial theta in (0, 1]
  bool auto_damping = true; // halve theta when an update fails to contract
  double contraction = 0.9; // required ratio of consecutive updates before halving
  double min_damping = 1.0 / 64.0;
  LinearBackend backend = LinearBackend::Direct;
  double linear_tol = 1e-12;  // Schur CG relative residual
  std::optional<Weight> norm_weight;  // weight of the stopping norm; unweighted if empty

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  double update_norm = 0.0;      // |v_new - v_m| before damping
  double relative_update = 0.0;  // update_norm / |v_new|
  double damping = 1.0;
};

struct StokesSolution {
  explicit StokesSolution(const MacGrid& grid) : velocity(grid), pressure(grid) {}

  StaggeredVelocity velocity;
  PressureField pressure;
  double viscosity = 1.0;           // linear viscosity used by the (last) linear solve
  double algebraic_residual = 0.0;  // relative residual of the last linear system
  double divergence_residual = 0.0; // max |div_h v - d|
  double pde_residual = 0.0;        // relative weak-form defect of the nonlinear system
  bool converged = true;
  int iterations = 0;
  std::vector<IterationRecord> trace;
  std::string message;
};

/// Stress law on the grid: one model, or piecewise-constant models selected
/// by a region index per cell. Nodes take the models of their adjacent cells.
class StressField {
 public:
  StressField(StressModel model);  // NOLINT: implicit for uniform laws
  StressField(const MacGrid& grid, std::vector<StressModel> models, std::vector<int> cell_region);

  bool uniform() const { return region_.empty(); }
  const StressModel& at_cell(std::size_t cell) const { return models_[uniform() ? 0 : region_[cell]]; }
  const std::vector<StressModel>& models() const { return models_; }
  /// Largest asymptotic viscosity over the regions.
  double mu_inf() const;

 private:
  std::vector<StressModel> models_;
  std::vector<int> region_;
  std::optional<MacGrid> grid_;
};

/// Discrete stress sigma_h(eps), the gradient of the convex cell energy
///   sum_cells h^2 phi(|E_c|),  phi' (l) = s(l) l,
/// with |E_c| the cell_magnitude of the strain. Cells carry s_c (e11, e22);
/// nodes carry the mean of s_c over adjacent cells times e12. Monotone by
/// construction and equal to s * eps for linear laws.
StaggeredTensor discrete_stress(const StressField& law, const StaggeredTensor& strain);

/// Assembled, factorized linear Stokes operator with fixed viscosity.
///   mu a(w, phi) - (p, div phi) = (F, grad phi),  div w = d,  w = g on the boundary.
class StokesOperator {
 public:
  StokesOperator(const MacGrid& grid, double viscosity, LinearBackend backend = LinearBackend::Direct,
                 double linear_tol = 1e-12);
  ~StokesOperator();
  StokesOperator(StokesOperator&&) noexcept;

  const MacGrid& grid() const;
  double viscosity() const;
  const DiscreteOperators& operators() const;

  StokesSolution solve(const ForcingField& F, const GridField& d, const StaggeredVelocity& g) const;

  /// Discrete extension of boundary data: interior values minimize a(w, w).
  StaggeredVelocity extend(const StaggeredVelocity& g) const;

  /// Weak-form residual on interior unknowns: (sigma, eps(phi)) - (p, div phi) - (f, grad phi).
  Eigen::VectorXd weak_residual(const StaggeredTensor& sigma, const PressureField& p, const ForcingField& f) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// |sum d h^2 - boundary flux of g|.
double compatibility_defect(const GridField& d, const StaggeredVelocity& g);

StokesSolution solve_linear_stokes(const ForcingField& F, const GridField& d, const StaggeredVelocity& g,
                                   const SolverConfig& cfg, double viscosity = 1.0);

/// W^{1,q}_w norm of the discrete extension of g; surrogate for the trace norm.
double trace_norm(const StaggeredVelocity& g, const Weight& w, double q);

/// (|grad w|_{q,w} + |p|_{q,w}) / (|F|_{q,w} + |d|_{q,w} + |g|_trace + eps); 0 for zero data.
double linear_estimate_ratio(const StokesSolution& sol, const ForcingField& F, const GridField& d,
                             const StaggeredVelocity& g, const Weight& w, double q);

struct PicardResult {
  StaggeredVelocity velocity;
  PressureField pressure;
  double update_norm;
  double algebraic_residual;
};

/// One step: linear solve with viscosity mu_inf of the law and forcing
/// f + mu_inf eps(v_m) - sigma(eps(v_m)), then v = theta v_new + (1 - theta) v_m.
PicardResult picard_step(const StaggeredVelocity& v_m, const ForcingField& f, const StressField& law,
                         const StokesOperator& op, const GridField& d, const StaggeredVelocity& g, double theta,
                         const std::optional<Weight>& norm_weight = std::nullopt);

struct NonlinearProblem {
  std::optional<GridField> d;
  std::optional<StaggeredVelocity> g;
  std::optional<StaggeredVelocity> initial;
};

StokesSolution solve_nonlinear(const ForcingField& f, const StressField& law, const SolverConfig& cfg,
                               const NonlinearProblem& problem = {});

/// (|grad v|_{q,w} + |pi|_{q,w}) / (1 + |f|_{q,w}). Throws SolverError on
/// unconverged solutions.
double nonlinear_estimate_ratio(const StokesSolution& sol, const ForcingField& f, const Weight& w, double q);

/// sum (sigma(eps v1) - sigma(eps v2)) : (eps v1 - eps v2) with the grid quadrature.
double monotone_pairing(const StressField& law, const StaggeredVelocity& v1, const StaggeredVelocity& v2);

/// sum sigma(eps v) : eps v - sum f : grad v, relative to the larger term.
double energy_identity_defect(const StressField& law, const StokesSolution& sol, const ForcingField& f);

/// Relative weak-form defect of (v, p) for the nonlinear system.
double nonlinear_residual(const StressField& law, const StaggeredVelocity& v, const PressureField& p,
                          const ForcingField& f, const StokesOperator& op);

}  // namespace nnstokes

#endif  // NNSTOKES_STOKES_HPP
