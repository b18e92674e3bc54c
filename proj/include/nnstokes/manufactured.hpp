#ifndef NNSTOKES_MANUFACTURED_HPP
#define NNSTOKES_MANUFACTURED_HPP

#include <functional>
#include <string>

#include <Eigen/Core>

#include "nnstokes/constitutive.hpp"
#include "nnstokes/mac_grid.hpp"

namespace nnstokes {

/// Closed-form velocity/pressure pair on the unit square.
struct AnalyticSolution {
  std::string name;
  std::string velocity_expr;
  std::string pressure_expr;
  std::function<Eigen::Vector2d(double, double)> velocity;
  /// grad(v)(x, y), entry (a, b) = d v_a / d x_b.
  std::function<Eigen::Matrix2d(double, double)> gradient;
  /// Zero-mean pressure.
  std::function<double(double, double)> pressure;
  std::function<double(double, double)> divergence;
};

enum class ManufacturedKind {
  Zero,            // v = 0, p = 0
  StreamFunction,  // v = curl psi, psi = (x(1-x)y(1-y))^2, p = sin(2 pi x) cos(2 pi y)
  Compressible,    // stream-function field plus grad phi, phi = cos(pi x) cos(pi y) / pi^2
  Dilation,        // v = (x, y) / 2, div v = 1, p = 0
  Poiseuille,      // v = (4 y (1 - y), 0), p = 2 - 4 x
};

const char* to_string(ManufacturedKind kind);
ManufacturedKind manufactured_kind_from_string(const std::string& name);

AnalyticSolution analytic_solution(ManufacturedKind kind);

/// Samples of an analytic solution on a unit-square grid. The stream-function
/// part of the velocity is sampled as the discrete curl of nodal psi, so its
/// discrete divergence vanishes exactly.
struct ManufacturedSolution {
  AnalyticSolution analytic;
  StaggeredVelocity velocity;
  PressureField pressure;
  GridField divergence;
};

ManufacturedSolution manufactured_solution(const MacGrid& grid, ManufacturedKind kind);

/// Pointwise samples of v on faces and of its tangential trace on wall nodes.
StaggeredVelocity sample_velocity(const MacGrid& grid, const std::function<Eigen::Vector2d(double, double)>& v);
PressureField sample_pressure(const MacGrid& grid, const std::function<double(double, double)>& p);
GridField sample_cells(const MacGrid& grid, const std::function<double(double, double)>& f);

/// f = S(eps(v*)) - p* Id sampled at the staggered tensor locations.
ForcingField forcing_from_solution(const StressModel& model, const AnalyticSolution& solution, const MacGrid& grid);
/// Same with an arbitrary stress map on symmetric 2x2 tensors.
ForcingField forcing_from_solution(const std::function<Eigen::Matrix2d(const Eigen::Matrix2d&)>& stress,
                                   const AnalyticSolution& solution, const MacGrid& grid);

}  // namespace nnstokes

#endif  // NNSTOKES_MANUFACTURED_HPP
