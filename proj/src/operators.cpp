#include "nnstokes/operators.hpp"

#include <cmath>

#include "nnstokes/error.hpp"

namespace nnstokes {

namespace {

struct VelocityLayout {
  explicit VelocityLayout(const MacGrid& g)
      : nx(g.nx()),
        ny(g.ny()),
        v0(static_cast<int>(g.u_faces())),
        ub0(v0 + static_cast<int>(g.v_faces())),
        ut0(ub0 + nx + 1),
        vl0(ut0 + nx + 1),
        vr0(vl0 + ny + 1),
        size(vr0 + ny + 1) {}

  int u(int i, int j) const { return j * (nx + 1) + i; }
  int v(int i, int j) const { return v0 + j * nx + i; }
  int u_bottom(int i) const { return ub0 + i; }
  int u_top(int i) const { return ut0 + i; }
  int v_left(int j) const { return vl0 + j; }
  int v_right(int j) const { return vr0 + j; }

  int nx, ny, v0, ub0, ut0, vl0, vr0, size;
};

struct TensorLayout {
  explicit TensorLayout(const MacGrid& g)
      : nx(g.nx()), yy0(static_cast<int>(g.cells())), xy0(2 * yy0), yx0(xy0 + static_cast<int>(g.nodes())) {}

  int xx(int i, int j) const { return j * nx + i; }
  int yy(int i, int j) const { return yy0 + j * nx + i; }
  int xy(int i, int j) const { return xy0 + j * (nx + 1) + i; }
  int yx(int i, int j) const { return yx0 + j * (nx + 1) + i; }

  int nx, yy0, xy0, yx0;
};

void require_same_grid(const MacGrid& a, const MacGrid& b) {
  if (!(a == b)) throw ParameterError("fields live on different grids");
}

}  // namespace

StaggeredTensor discrete_gradient(const StaggeredVelocity& vel) {
  const MacGrid& g = vel.grid;
  const int nx = g.nx(), ny = g.ny();
  const double inv_h = 1.0 / g.h();
  StaggeredTensor out(g);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      out.xx[g.cell(i, j)] = (vel.u_at(i + 1, j) - vel.u_at(i, j)) * inv_h;
      out.yy[g.cell(i, j)] = (vel.v_at(i, j + 1) - vel.v_at(i, j)) * inv_h;
    }
  }
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      double dudy;
      if (j == 0) dudy = 2.0 * (vel.u_at(i, 0) - vel.u_bottom[i]) * inv_h;
      else if (j == ny) dudy = 2.0 * (vel.u_top[i] - vel.u_at(i, ny - 1)) * inv_h;
      else dudy = (vel.u_at(i, j) - vel.u_at(i, j - 1)) * inv_h;
      double dvdx;
      if (i == 0) dvdx = 2.0 * (vel.v_at(0, j) - vel.v_left[j]) * inv_h;
      else if (i == nx) dvdx = 2.0 * (vel.v_right[j] - vel.v_at(nx - 1, j)) * inv_h;
      else dvdx = (vel.v_at(i, j) - vel.v_at(i - 1, j)) * inv_h;
      out.xy[g.node(i, j)] = dudy;
      out.yx[g.node(i, j)] = dvdx;
    }
  }
  return out;
}

StaggeredTensor discrete_sym_gradient(const StaggeredVelocity& vel) {
  StaggeredTensor out = discrete_gradient(vel);
  for (std::size_t k = 0; k < out.xy.size(); ++k) {
    const double e12 = 0.5 * (out.xy[k] + out.yx[k]);
    out.xy[k] = e12;
    out.yx[k] = e12;
  }
  return out;
}

GridField discrete_divergence(const StaggeredVelocity& vel) {
  const MacGrid& g = vel.grid;
  GridField div = g.cell_field();
  const double inv_h = 1.0 / g.h();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      div(i, j) = (vel.u_at(i + 1, j) - vel.u_at(i, j) + vel.v_at(i, j + 1) - vel.v_at(i, j)) * inv_h;
  return div;
}

StaggeredVelocity discrete_pressure_gradient(const PressureField& p) {
  const MacGrid& g = p.grid;
  const double inv_h = 1.0 / g.h();
  StaggeredVelocity out(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 1; i < g.nx(); ++i) out.u_at(i, j) = (p.values[g.cell(i, j)] - p.values[g.cell(i - 1, j)]) * inv_h;
  for (int j = 1; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) out.v_at(i, j) = (p.values[g.cell(i, j)] - p.values[g.cell(i, j - 1)]) * inv_h;
  return out;
}

double inner_product(const StaggeredTensor& a, const StaggeredTensor& b) {
  require_same_grid(a.grid, b.grid);
  const MacGrid& g = a.grid;
  long double sum = 0.0L;
  const double h2 = g.h() * g.h();
  for (std::size_t k = 0; k < g.cells(); ++k) sum += h2 * (a.xx[k] * b.xx[k] + a.yy[k] * b.yy[k]);
  for (int j = 0; j <= g.ny(); ++j) {
    for (int i = 0; i <= g.nx(); ++i) {
      const std::size_t k = g.node(i, j);
      sum += g.node_weight(i, j) * (a.xy[k] * b.xy[k] + a.yx[k] * b.yx[k]);
    }
  }
  return static_cast<double>(sum);
}

double inner_product(const StaggeredVelocity& a, const StaggeredVelocity& b) {
  require_same_grid(a.grid, b.grid);
  const MacGrid& g = a.grid;
  long double sum = 0.0L;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i) sum += g.u_face_weight(i) * a.u_at(i, j) * b.u_at(i, j);
  for (int j = 0; j <= g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) sum += g.v_face_weight(j) * a.v_at(i, j) * b.v_at(i, j);
  return static_cast<double>(sum);
}

double inner_product(const GridField& a, const GridField& b) {
  if (!a.same_shape(b)) throw ParameterError("inner_product: shapes differ");
  long double sum = 0.0L;
  for (std::size_t k = 0; k < a.size(); ++k) sum += a[k] * b[k];
  return static_cast<double>(sum) * a.cell_volume();
}

GridField cell_magnitude(const StaggeredTensor& t) {
  const MacGrid& g = t.grid;
  GridField out = g.cell_field();
  auto sq = [&](int i, int j) {
    const std::size_t k = g.node(i, j);
    return t.xy[k] * t.xy[k] + t.yx[k] * t.yx[k];
  };
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t c = g.cell(i, j);
      const double off = 0.25 * (sq(i, j) + sq(i + 1, j) + sq(i, j + 1) + sq(i + 1, j + 1));
      out(i, j) = std::sqrt(t.xx[c] * t.xx[c] + t.yy[c] * t.yy[c] + off);
    }
  }
  return out;
}

GridField cell_magnitude(const StaggeredVelocity& vel) {
  const MacGrid& g = vel.grid;
  GridField out = g.cell_field();
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const double ul = vel.u_at(i, j), ur = vel.u_at(i + 1, j);
      const double vb = vel.v_at(i, j), vt = vel.v_at(i, j + 1);
      out(i, j) = std::sqrt(0.5 * (ul * ul + ur * ur) + 0.5 * (vb * vb + vt * vt));
    }
  }
  return out;
}

double weighted_lq_norm(const StaggeredTensor& t, const Weight& w, double q) {
  return weighted_lp_norm(cell_magnitude(t), w, q);
}

double weighted_lq_norm(const StaggeredVelocity& vel, const Weight& w, double q) {
  return weighted_lp_norm(cell_magnitude(vel), w, q);
}

double weighted_lq_norm(const PressureField& p, const Weight& w, double q) {
  GridField abs = p.as_grid_field();
  for (double& v : abs.values()) v = std::abs(v);
  return weighted_lp_norm(abs, w, q);
}

DiscreteOperators::DiscreteOperators(const MacGrid& grid) : grid_(grid) {
  const VelocityLayout vl(grid);
  const TensorLayout tl(grid);
  const int nx = grid.nx(), ny = grid.ny();
  const double inv_h = 1.0 / grid.h();
  const int n_vel = vl.size;
  const int n_grad = static_cast<int>(StaggeredTensor::vector_size(grid));
  const int n_cells = static_cast<int>(grid.cells());

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> gt;
  std::vector<Triplet> dt;
  gt.reserve(8 * static_cast<std::size_t>(n_grad));
  dt.reserve(4 * static_cast<std::size_t>(n_cells));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      gt.emplace_back(tl.xx(i, j), vl.u(i + 1, j), inv_h);
      gt.emplace_back(tl.xx(i, j), vl.u(i, j), -inv_h);
      gt.emplace_back(tl.yy(i, j), vl.v(i, j + 1), inv_h);
      gt.emplace_back(tl.yy(i, j), vl.v(i, j), -inv_h);
      const int c = static_cast<int>(grid.cell(i, j));
      dt.emplace_back(c, vl.u(i + 1, j), inv_h);
      dt.emplace_back(c, vl.u(i, j), -inv_h);
      dt.emplace_back(c, vl.v(i, j + 1), inv_h);
      dt.emplace_back(c, vl.v(i, j), -inv_h);
    }
  }
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      const int r = tl.xy(i, j);
      if (j == 0) {
        gt.emplace_back(r, vl.u(i, 0), 2.0 * inv_h);
        gt.emplace_back(r, vl.u_bottom(i), -2.0 * inv_h);
      } else if (j == ny) {
        gt.emplace_back(r, vl.u_top(i), 2.0 * inv_h);
        gt.emplace_back(r, vl.u(i, ny - 1), -2.0 * inv_h);
      } else {
        gt.emplace_back(r, vl.u(i, j), inv_h);
        gt.emplace_back(r, vl.u(i, j - 1), -inv_h);
      }
      const int s = tl.yx(i, j);
      if (i == 0) {
        gt.emplace_back(s, vl.v(0, j), 2.0 * inv_h);
        gt.emplace_back(s, vl.v_left(j), -2.0 * inv_h);
      } else if (i == nx) {
        gt.emplace_back(s, vl.v_right(j), 2.0 * inv_h);
        gt.emplace_back(s, vl.v(nx - 1, j), -2.0 * inv_h);
      } else {
        gt.emplace_back(s, vl.v(i, j), inv_h);
        gt.emplace_back(s, vl.v(i - 1, j), -inv_h);
      }
    }
  }
  gradient_.resize(n_grad, n_vel);
  gradient_.setFromTriplets(gt.begin(), gt.end());
  divergence_.resize(n_cells, n_vel);
  divergence_.setFromTriplets(dt.begin(), dt.end());

  std::vector<Triplet> st;
  st.reserve(static_cast<std::size_t>(n_grad) + 2 * grid.nodes());
  for (int k = 0; k < tl.xy0; ++k) st.emplace_back(k, k, 1.0);
  for (int k = 0; k < static_cast<int>(grid.nodes()); ++k) {
    for (int a : {tl.xy0 + k, tl.yx0 + k}) {
      st.emplace_back(a, tl.xy0 + k, 0.5);
      st.emplace_back(a, tl.yx0 + k, 0.5);
    }
  }
  symmetrizer_.resize(n_grad, n_grad);
  symmetrizer_.setFromTriplets(st.begin(), st.end());

  quadrature_.resize(n_grad);
  const double h2 = grid.h() * grid.h();
  quadrature_.head(tl.xy0).setConstant(h2);
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      quadrature_[tl.xy(i, j)] = grid.node_weight(i, j);
      quadrature_[tl.yx(i, j)] = grid.node_weight(i, j);
    }
  }

  std::vector<char> is_interior(static_cast<std::size_t>(n_vel), 0);
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) is_interior[vl.u(i, j)] = 1;
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) is_interior[vl.v(i, j)] = 1;
  for (int k = 0; k < n_vel; ++k) (is_interior[k] ? interior_ : boundary_).push_back(k);

  auto expansion = [n_vel](const std::vector<int>& idx) {
    std::vector<Triplet> et;
    et.reserve(idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c) et.emplace_back(idx[c], static_cast<int>(c), 1.0);
    SparseMatrix e(n_vel, static_cast<int>(idx.size()));
    e.setFromTriplets(et.begin(), et.end());
    return e;
  };
  expand_interior_ = expansion(interior_);
  expand_boundary_ = expansion(boundary_);

  const SparseMatrix g_int = gradient_ * expand_interior_;
  const SparseMatrix g_bnd = gradient_ * expand_boundary_;
  const SparseMatrix weighted_sym = quadrature_.asDiagonal() * symmetrizer_;
  const SparseMatrix g_int_t = g_int.transpose();
  viscous_ii_ = g_int_t * weighted_sym * g_int;
  viscous_ib_ = g_int_t * weighted_sym * g_bnd;
  laplacian_ii_ = g_int_t * quadrature_.asDiagonal() * g_int;
  viscous_ii_.prune(0.0);
  viscous_ib_.prune(0.0);
  laplacian_ii_.prune(0.0);
}

Eigen::VectorXd DiscreteOperators::weak_divergence(const StaggeredTensor& f) const {
  require_same_grid(f.grid, grid_);
  return gradient_.transpose() * quadrature_.cwiseProduct(f.to_vector());
}

}  // namespace nnstokes
