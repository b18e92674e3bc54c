#ifndef NNSTOKES_MAC_GRID_HPP
#define NNSTOKES_MAC_GRID_HPP

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "nnstokes/grid_field.hpp"

namespace nnstokes {

/// Uniform marker-and-cell grid on [0, nx h] x [0, ny h].
///
///   u(i, j)  x-velocity on vertical faces   (i h, (j + 1/2) h),  i in [0, nx], j in [0, ny)
///   v(i, j)  y-velocity on horizontal faces ((i + 1/2) h, j h),  i in [0, nx), j in [0, ny]
///   cells    pressure, diagonal tensor entries at ((i + 1/2) h, (j + 1/2) h)
///   nodes    off-diagonal tensor entries at (i h, j h),          i in [0, nx], j in [0, ny]
class MacGrid {
 public:
  MacGrid(int nx, int ny, double h);
  static MacGrid unit_square(int n) { return MacGrid(n, n, 1.0 / n); }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  double width() const { return nx_ * h_; }
  double height() const { return ny_ * h_; }

  std::size_t cells() const { return static_cast<std::size_t>(nx_) * ny_; }
  std::size_t nodes() const { return static_cast<std::size_t>(nx_ + 1) * (ny_ + 1); }
  std::size_t u_faces() const { return static_cast<std::size_t>(nx_ + 1) * ny_; }
  std::size_t v_faces() const { return static_cast<std::size_t>(nx_) * (ny_ + 1); }

  std::size_t cell(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
  std::size_t node(int i, int j) const { return static_cast<std::size_t>(j) * (nx_ + 1) + i; }
  std::size_t u_face(int i, int j) const { return static_cast<std::size_t>(j) * (nx_ + 1) + i; }
  std::size_t v_face(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }

  double cell_x(int i) const { return (i + 0.5) * h_; }
  double cell_y(int j) const { return (j + 0.5) * h_; }
  double node_x(int i) const { return i * h_; }
  double node_y(int j) const { return j * h_; }

  /// Quadrature weight of a node: h^2 inside, h^2/2 on edges, h^2/4 at corners.
  double node_weight(int i, int j) const;
  /// Quadrature weight of a face: h^2 inside, h^2/2 on the boundary.
  double u_face_weight(int i) const { return (i == 0 || i == nx_) ? 0.5 * h_ * h_ : h_ * h_; }
  double v_face_weight(int j) const { return (j == 0 || j == ny_) ? 0.5 * h_ * h_ : h_ * h_; }

  /// Cell-centered scalar field with this grid's shape.
  GridField cell_field(double value = 0.0) const { return GridField(nx_, ny_, h_, 0.0, 0.0, value); }

  bool operator==(const MacGrid& other) const = default;

 private:
  int nx_;
  int ny_;
  double h_;
};

/// Staggered velocity, boundary values included. Besides the normal
/// components on boundary faces, the tangential trace is stored at boundary
/// nodes: u along the bottom/top walls and v along the left/right walls.
struct StaggeredVelocity {
  explicit StaggeredVelocity(const MacGrid& grid);

  MacGrid grid;
  std::vector<double> u;         // (nx + 1) * ny
  std::vector<double> v;         // nx * (ny + 1)
  std::vector<double> u_bottom;  // nx + 1, at (i h, 0)
  std::vector<double> u_top;     // nx + 1, at (i h, H)
  std::vector<double> v_left;    // ny + 1, at (0, j h)
  std::vector<double> v_right;   // ny + 1, at (W, j h)

  double& u_at(int i, int j) { return u[grid.u_face(i, j)]; }
  double u_at(int i, int j) const { return u[grid.u_face(i, j)]; }
  double& v_at(int i, int j) { return v[grid.v_face(i, j)]; }
  double v_at(int i, int j) const { return v[grid.v_face(i, j)]; }

  /// Full degree-of-freedom vector: [u | v | u_bottom | u_top | v_left | v_right].
  Eigen::VectorXd to_vector() const;
  static StaggeredVelocity from_vector(const MacGrid& grid, const Eigen::VectorXd& x);
  static std::size_t vector_size(const MacGrid& grid);

  /// True if every boundary face and trace entry is zero.
  bool homogeneous_boundary() const;
  /// Copy of this field with the interior zeroed, keeping boundary data.
  StaggeredVelocity boundary_part() const;
  /// Copy with every boundary entry replaced by the boundary data of `g`.
  StaggeredVelocity with_boundary(const StaggeredVelocity& g) const;

  /// Net outward flux through the boundary, sum of normal faces times h.
  double boundary_flux() const;
};

StaggeredVelocity operator-(const StaggeredVelocity& a, const StaggeredVelocity& b);
StaggeredVelocity operator+(const StaggeredVelocity& a, const StaggeredVelocity& b);
StaggeredVelocity operator*(double s, const StaggeredVelocity& a);

/// Cell-centered pressure.
struct PressureField {
  explicit PressureField(const MacGrid& grid) : grid(grid), values(grid.cells(), 0.0) {}

  MacGrid grid;
  std::vector<double> values;

  double mean() const;
  /// Subtract the mean so that the cell average is zero.
  void normalize();
  GridField as_grid_field() const;
};

/// Tensor field with diagonal entries at cell centers and off-diagonal
/// entries at nodes, the locations where a MAC velocity gradient lives.
/// Entry (1,2) is `xy`, entry (2,1) is `yx`.
struct StaggeredTensor {
  explicit StaggeredTensor(const MacGrid& grid);

  MacGrid grid;
  std::vector<double> xx;  // cells
  std::vector<double> yy;  // cells
  std::vector<double> xy;  // nodes
  std::vector<double> yx;  // nodes

  /// [xx | yy | xy | yx].
  Eigen::VectorXd to_vector() const;
  static StaggeredTensor from_vector(const MacGrid& grid, const Eigen::VectorXd& x);
  static std::size_t vector_size(const MacGrid& grid) { return 2 * grid.cells() + 2 * grid.nodes(); }

  double max_abs() const;
};

StaggeredTensor operator-(const StaggeredTensor& a, const StaggeredTensor& b);
StaggeredTensor operator+(const StaggeredTensor& a, const StaggeredTensor& b);
StaggeredTensor operator*(double s, const StaggeredTensor& a);

/// Forcing f in -div f, sampled where the discrete divergence of a tensor needs it.
using ForcingField = StaggeredTensor;

}  // namespace nnstokes

#endif  // NNSTOKES_MAC_GRID_HPP
