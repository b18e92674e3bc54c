#include "nnstokes/mac_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nnstokes/error.hpp"

namespace nnstokes {

MacGrid::MacGrid(int nx, int ny, double h) : nx_(nx), ny_(ny), h_(h) {
  if (nx < 4 || ny < 4) throw ParameterError("MacGrid: at least 4 cells per direction required");
  if (!(h > 0.0) || !std::isfinite(h)) throw ParameterError("MacGrid: spacing must be positive");
}

double MacGrid::node_weight(int i, int j) const {
  double w = h_ * h_;
  if (i == 0 || i == nx_) w *= 0.5;
  if (j == 0 || j == ny_) w *= 0.5;
  return w;
}

StaggeredVelocity::StaggeredVelocity(const MacGrid& g)
    : grid(g),
      u(g.u_faces(), 0.0),
      v(g.v_faces(), 0.0),
      u_bottom(g.nx() + 1, 0.0),
      u_top(g.nx() + 1, 0.0),
      v_left(g.ny() + 1, 0.0),
      v_right(g.ny() + 1, 0.0) {}

std::size_t StaggeredVelocity::vector_size(const MacGrid& g) {
  return g.u_faces() + g.v_faces() + 2 * static_cast<std::size_t>(g.nx() + 1) + 2 * static_cast<std::size_t>(g.ny() + 1);
}

Eigen::VectorXd StaggeredVelocity::to_vector() const {
  Eigen::VectorXd x(vector_size(grid));
  Eigen::Index k = 0;
  for (const auto* part : {&u, &v, &u_bottom, &u_top, &v_left, &v_right})
    for (double value : *part) x[k++] = value;
  return x;
}

StaggeredVelocity StaggeredVelocity::from_vector(const MacGrid& g, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != vector_size(g)) throw ParameterError("velocity vector has the wrong size");
  StaggeredVelocity out(g);
  Eigen::Index k = 0;
  for (auto* part : {&out.u, &out.v, &out.u_bottom, &out.u_top, &out.v_left, &out.v_right})
    for (double& value : *part) value = x[k++];
  return out;
}

bool StaggeredVelocity::homogeneous_boundary() const {
  const auto b = boundary_part();
  auto zero = [](const std::vector<double>& a) { return std::all_of(a.begin(), a.end(), [](double x) { return x == 0.0; }); };
  return zero(b.u) && zero(b.v) && zero(u_bottom) && zero(u_top) && zero(v_left) && zero(v_right);
}

StaggeredVelocity StaggeredVelocity::boundary_part() const {
  StaggeredVelocity out = *this;
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 1; i < grid.nx(); ++i) out.u_at(i, j) = 0.0;
  for (int j = 1; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) out.v_at(i, j) = 0.0;
  return out;
}

StaggeredVelocity StaggeredVelocity::with_boundary(const StaggeredVelocity& g) const {
  if (!(g.grid == grid)) throw ParameterError("with_boundary: grids differ");
  StaggeredVelocity out = *this;
  for (int j = 0; j < grid.ny(); ++j) {
    out.u_at(0, j) = g.u_at(0, j);
    out.u_at(grid.nx(), j) = g.u_at(grid.nx(), j);
  }
  for (int i = 0; i < grid.nx(); ++i) {
    out.v_at(i, 0) = g.v_at(i, 0);
    out.v_at(i, grid.ny()) = g.v_at(i, grid.ny());
  }
  out.u_bottom = g.u_bottom;
  out.u_top = g.u_top;
  out.v_left = g.v_left;
  out.v_right = g.v_right;
  return out;
}

double StaggeredVelocity::boundary_flux() const {
  long double flux = 0.0L;
  for (int j = 0; j < grid.ny(); ++j) flux += u_at(grid.nx(), j) - u_at(0, j);
  for (int i = 0; i < grid.nx(); ++i) flux += v_at(i, grid.ny()) - v_at(i, 0);
  return static_cast<double>(flux) * grid.h();
}

namespace {

template <class F>
StaggeredVelocity combine(const StaggeredVelocity& a, const StaggeredVelocity& b, F op) {
  if (!(a.grid == b.grid)) throw ParameterError("velocity fields live on different grids");
  return StaggeredVelocity::from_vector(a.grid, op(a.to_vector(), b.to_vector()));
}

template <class F>
StaggeredTensor combine(const StaggeredTensor& a, const StaggeredTensor& b, F op) {
  if (!(a.grid == b.grid)) throw ParameterError("tensor fields live on different grids");
  return StaggeredTensor::from_vector(a.grid, op(a.to_vector(), b.to_vector()));
}

}  // namespace

StaggeredVelocity operator-(const StaggeredVelocity& a, const StaggeredVelocity& b) {
  return combine(a, b, [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) -> Eigen::VectorXd { return x - y; });
}

StaggeredVelocity operator+(const StaggeredVelocity& a, const StaggeredVelocity& b) {
  return combine(a, b, [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) -> Eigen::VectorXd { return x + y; });
}

StaggeredVelocity operator*(double s, const StaggeredVelocity& a) {
  return StaggeredVelocity::from_vector(a.grid, s * a.to_vector());
}

double PressureField::mean() const {
  const long double sum = std::accumulate(values.begin(), values.end(), 0.0L);
  return static_cast<double>(sum / static_cast<long double>(values.size()));
}

void PressureField::normalize() {
  const double m = mean();
  for (double& v : values) v -= m;
}

GridField PressureField::as_grid_field() const {
  GridField f = grid.cell_field();
  f.values() = values;
  return f;
}

StaggeredTensor::StaggeredTensor(const MacGrid& g)
    : grid(g), xx(g.cells(), 0.0), yy(g.cells(), 0.0), xy(g.nodes(), 0.0), yx(g.nodes(), 0.0) {}

Eigen::VectorXd StaggeredTensor::to_vector() const {
  Eigen::VectorXd x(vector_size(grid));
  Eigen::Index k = 0;
  for (const auto* part : {&xx, &yy, &xy, &yx})
    for (double value : *part) x[k++] = value;
  return x;
}

StaggeredTensor StaggeredTensor::from_vector(const MacGrid& g, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != vector_size(g)) throw ParameterError("tensor vector has the wrong size");
  StaggeredTensor out(g);
  Eigen::Index k = 0;
  for (auto* part : {&out.xx, &out.yy, &out.xy, &out.yx})
    for (double& value : *part) value = x[k++];
  return out;
}

double StaggeredTensor::max_abs() const {
  double m = 0.0;
  for (const auto* part : {&xx, &yy, &xy, &yx})
    for (double value : *part) m = std::max(m, std::abs(value));
  return m;
}

StaggeredTensor operator-(const StaggeredTensor& a, const StaggeredTensor& b) {
  return combine(a, b, [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) -> Eigen::VectorXd { return x - y; });
}

StaggeredTensor operator+(const StaggeredTensor& a, const StaggeredTensor& b) {
  return combine(a, b, [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) -> Eigen::VectorXd { return x + y; });
}

StaggeredTensor operator*(double s, const StaggeredTensor& a) {
  return StaggeredTensor::from_vector(a.grid, s * a.to_vector());
}

}  // namespace nnstokes
