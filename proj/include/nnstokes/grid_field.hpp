#ifndef NNSTOKES_GRID_FIELD_HPP
#define NNSTOKES_GRID_FIELD_HPP

#include <cstddef>
#include <filesystem>
#include <vector>

namespace nnstokes {

/// Scalar values on a uniform cell grid, stored row-major (index j * nx + i).
/// A field with dim == 1 is a single row of cells along x.
class GridField {
 public:
  GridField() = default;
  GridField(int nx, int ny, double h, double x0 = 0.0, double y0 = 0.0, double value = 0.0);

  static GridField line(int n, double h, double x0 = 0.0, double value = 0.0);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int dim() const { return dim_; }
  double h() const { return h_; }
  double x0() const { return x0_; }
  double y0() const { return y0_; }
  std::size_t size() const { return values_.size(); }

  /// Measure of one cell, h^dim.
  double cell_volume() const { return dim_ == 1 ? h_ : h_ * h_; }
  double center_x(int i) const { return x0_ + (i + 0.5) * h_; }
  double center_y(int j) const { return y0_ + (j + 0.5) * h_; }

  double& operator()(int i, int j) { return values_[static_cast<std::size_t>(j) * nx_ + i]; }
  double operator()(int i, int j) const { return values_[static_cast<std::size_t>(j) * nx_ + i]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool same_shape(const GridField& other) const;
  bool all_finite() const;
  double max_abs() const;
  double min() const;
  double max() const;

 private:
  int nx_ = 0;
  int ny_ = 0;
  int dim_ = 2;
  double h_ = 1.0;
  double x0_ = 0.0;
  double y0_ = 0.0;
  std::vector<double> values_;
};

// Binary layout, little-endian:
//   char[8]  "NNSFIELD"
//   uint32   version (1)
//   uint32   dim
//   uint64   rows (ny), uint64 cols (nx)
//   float64  h, x0, y0
//   float64  values[rows * cols], row-major
void write_field_binary(const std::filesystem::path& path, const GridField& field);
GridField read_field_binary(const std::filesystem::path& path);

/// CSV with header "i,j,x,y,value", one row per cell.
void write_field_csv(const std::filesystem::path& path, const GridField& field);

}  // namespace nnstokes

#endif  // NNSTOKES_GRID_FIELD_HPP
