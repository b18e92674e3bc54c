#include "nnstokes/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/SparseCholesky>

#include "nnstokes/error.hpp"
#include "nnstokes/operators.hpp"

namespace nnstokes {

namespace {

struct FaceMass {
  int i;
  int j;
  double mass;
};

std::vector<FaceMass> spread_bilinear(const MacGrid& grid, double cx, double cy) {
  const double fi = cx / grid.h();
  const double fj = cy / grid.h() - 0.5;
  const int i0 = static_cast<int>(std::floor(fi));
  const int j0 = static_cast<int>(std::floor(fj));
  const double tx = fi - i0, ty = fj - j0;
  std::vector<FaceMass> out;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const double m = (a ? tx : 1.0 - tx) * (b ? ty : 1.0 - ty);
      if (m == 0.0) continue;
      out.push_back({std::clamp(i0 + a, 1, grid.nx() - 1), std::clamp(j0 + b, 0, grid.ny() - 1), m});
    }
  }
  return out;
}

std::vector<FaceMass> spread_bump(const MacGrid& grid, double cx, double cy, double radius) {
  std::vector<FaceMass> out;
  double total = 0.0;
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 1; i < grid.nx(); ++i) {
      const double dx = grid.node_x(i) - cx, dy = grid.cell_y(j) - cy;
      const double t = (dx * dx + dy * dy) / (radius * radius);
      if (t >= 1.0) continue;
      out.push_back({i, j, (1.0 - t) * (1.0 - t)});
      total += out.back().mass;
    }
  }
  if (out.empty()) throw ParameterError("rough_forcing_dirac: bump radius reaches no interior face");
  for (auto& f : out) f.mass /= total;
  return out;
}

}  // namespace

ForcingField rough_forcing_dirac(const MacGrid& grid, double cx, double cy, double amplitude,
                                 const DiracOptions& options) {
  if (!(cx > 0.0 && cx < grid.width() && cy > 0.0 && cy < grid.height()))
    throw ParameterError("rough_forcing_dirac: center must lie strictly inside the domain");
  if (!std::isfinite(amplitude)) throw ParameterError("rough_forcing_dirac: amplitude must be finite");
  if (options.radius < 0.0) throw ParameterError("rough_forcing_dirac: radius must be nonnegative");

  const DiscreteOperators ops(grid);
  const auto& interior = ops.interior();
  const int n_u = static_cast<int>(std::count_if(interior.begin(), interior.end(),
                                                 [&](int k) { return k < static_cast<int>(grid.u_faces()); }));
  const SparseMatrix laplacian = ops.laplacian_interior().topLeftCorner(n_u, n_u);

  std::vector<int> position(grid.u_faces(), -1);
  for (int c = 0; c < n_u; ++c) position[interior[c]] = c;

  const auto masses = options.spread == DiracSpread::Bilinear
                          ? spread_bilinear(grid, cx, cy)
                          : spread_bump(grid, cx, cy, options.radius > 0.0 ? options.radius : 2.0 * grid.h());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_u);
  for (const auto& m : masses) rhs[position[grid.u_face(m.i, m.j)]] += amplitude * m.mass;

  Eigen::SimplicialLDLT<SparseMatrix> solver(laplacian);
  if (solver.info() != Eigen::Success) throw SolverError("rough_forcing_dirac: Poisson factorization failed");
  const Eigen::VectorXd green = solver.solve(rhs);

  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(StaggeredVelocity::vector_size(grid)));
  for (int c = 0; c < n_u; ++c) full[interior[c]] = green[c];
  return StaggeredTensor::from_vector(grid, ops.gradient() * full);
}

std::vector<double> node_magnitude(const StaggeredTensor& t) {
  const MacGrid& g = t.grid;
  std::vector<double> out(g.nodes());
  for (int j = 0; j <= g.ny(); ++j) {
    for (int i = 0; i <= g.nx(); ++i) {
      double diag = 0.0;
      int count = 0;
      for (int b = j - 1; b <= j; ++b) {
        for (int a = i - 1; a <= i; ++a) {
          if (a < 0 || b < 0 || a >= g.nx() || b >= g.ny()) continue;
          const std::size_t c = g.cell(a, b);
          diag += t.xx[c] * t.xx[c] + t.yy[c] * t.yy[c];
          ++count;
        }
      }
      const std::size_t k = g.node(i, j);
      out[k] = std::sqrt(t.xy[k] * t.xy[k] + t.yx[k] * t.yx[k] + diag / count);
    }
  }
  return out;
}

ForcingField truncate_forcing(const ForcingField& f, double k) {
  if (!(k > 0.0)) throw ParameterError("truncate_forcing: level k must be positive");
  ForcingField out = f;
  const GridField at_cells = cell_magnitude(f);
  for (std::size_t c = 0; c < f.grid.cells(); ++c) {
    if (!(at_cells[c] < k)) out.xx[c] = out.yy[c] = 0.0;
  }
  const std::vector<double> at_nodes = node_magnitude(f);
  for (std::size_t n = 0; n < f.grid.nodes(); ++n) {
    if (!(at_nodes[n] < k)) out.xy[n] = out.yx[n] = 0.0;
  }
  return out;
}

}  // namespace nnstokes
