#ifndef NNSTOKES_OPERATORS_HPP
#define NNSTOKES_OPERATORS_HPP

#include <vector>

#include <Eigen/Sparse>

#include "nnstokes/mac_grid.hpp"
#include "nnstokes/weights.hpp"

namespace nnstokes {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Full velocity gradient: du/dx, dv/dy at cells; du/dy, dv/dx at nodes.
/// Wall nodes use a half-cell difference to the stored tangential trace.
StaggeredTensor discrete_gradient(const StaggeredVelocity& vel);

/// Symmetric part of discrete_gradient; xy == yx at every node.
StaggeredTensor discrete_sym_gradient(const StaggeredVelocity& vel);

/// MAC face-difference divergence at cell centers.
GridField discrete_divergence(const StaggeredVelocity& vel);

/// Pressure gradient on interior faces; boundary faces are zero. With face
/// weight h^2 this is minus the adjoint of discrete_divergence on velocities
/// with zero normal boundary values.
StaggeredVelocity discrete_pressure_gradient(const PressureField& p);

/// Weighted inner products matching the quadrature used throughout:
/// h^2 per cell, node and face weights from MacGrid.
double inner_product(const StaggeredTensor& a, const StaggeredTensor& b);
double inner_product(const StaggeredVelocity& a, const StaggeredVelocity& b);
double inner_product(const GridField& a, const GridField& b);

/// Frobenius magnitude of a staggered tensor reconstructed at cells: the
/// node entries enter through the mean of their squares over the four corners.
GridField cell_magnitude(const StaggeredTensor& t);
/// Euclidean magnitude of a staggered velocity at cells, from the mean of
/// squared face values.
GridField cell_magnitude(const StaggeredVelocity& vel);

/// (sum over cells of |T|^q w h^2)^(1/q) with |T| from cell_magnitude.
double weighted_lq_norm(const StaggeredTensor& t, const Weight& w, double q);
double weighted_lq_norm(const StaggeredVelocity& vel, const Weight& w, double q);
double weighted_lq_norm(const PressureField& p, const Weight& w, double q);

/// Assembled sparse operators on the full velocity vector
/// (see StaggeredVelocity::to_vector) for one grid.
class DiscreteOperators {
 public:
  explicit DiscreteOperators(const MacGrid& grid);

  const MacGrid& grid() const { return grid_; }

  /// Velocity vector -> gradient vector [xx | yy | xy | yx].
  const SparseMatrix& gradient() const { return gradient_; }
  /// Gradient vector -> symmetric part.
  const SparseMatrix& symmetrizer() const { return symmetrizer_; }
  /// Velocity vector -> cell divergence.
  const SparseMatrix& divergence() const { return divergence_; }
  /// Quadrature weight of each gradient-vector entry.
  const Eigen::VectorXd& quadrature() const { return quadrature_; }

  /// Indices of interior face unknowns and of prescribed boundary entries.
  const std::vector<int>& interior() const { return interior_; }
  const std::vector<int>& boundary() const { return boundary_; }

  /// Column selection: full vector = expand_interior * x_int + expand_boundary * x_bnd.
  const SparseMatrix& expand_interior() const { return expand_interior_; }
  const SparseMatrix& expand_boundary() const { return expand_boundary_; }

  /// a(w, phi) = sum W eps(w) : eps(phi) restricted to interior/interior
  /// and interior/boundary columns.
  const SparseMatrix& viscous_interior() const { return viscous_ii_; }
  const SparseMatrix& viscous_coupling() const { return viscous_ib_; }
  /// Full-gradient form sum W grad(w) : grad(phi) on interior unknowns.
  const SparseMatrix& laplacian_interior() const { return laplacian_ii_; }

  /// Weak tensor divergence: entry k is sum W f : grad(phi_k), full size.
  Eigen::VectorXd weak_divergence(const StaggeredTensor& f) const;

 private:
  MacGrid grid_;
  SparseMatrix gradient_;
  SparseMatrix symmetrizer_;
  SparseMatrix divergence_;
  Eigen::VectorXd quadrature_;
  std::vector<int> interior_;
  std::vector<int> boundary_;
  SparseMatrix expand_interior_;
  SparseMatrix expand_boundary_;
  SparseMatrix viscous_ii_;
  SparseMatrix viscous_ib_;
  SparseMatrix laplacian_ii_;
};

}  // namespace nnstokes

#endif  // NNSTOKES_OPERATORS_HPP
