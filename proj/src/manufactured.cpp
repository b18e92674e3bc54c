#include "nnstokes/manufactured.hpp"

#include <cmath>
#include <numbers>

#include "nnstokes/error.hpp"

namespace nnstokes {

namespace {

constexpr double kPi = std::numbers::pi;

// psi = X^2 Y^2 with X = x(1-x), Y = y(1-y).
double psi(double x, double y) {
  const double X = x * (1.0 - x), Y = y * (1.0 - y);
  return X * X * Y * Y;
}

Eigen::Vector2d curl_psi(double x, double y) {
  const double X = x * (1.0 - x), Y = y * (1.0 - y);
  const double Xp = 1.0 - 2.0 * x, Yp = 1.0 - 2.0 * y;
  return {2.0 * X * X * Y * Yp, -2.0 * X * Xp * Y * Y};
}

Eigen::Matrix2d curl_psi_gradient(double x, double y) {
  const double X = x * (1.0 - x), Y = y * (1.0 - y);
  const double Xp = 1.0 - 2.0 * x, Yp = 1.0 - 2.0 * y;
  Eigen::Matrix2d g;
  g(0, 0) = 4.0 * X * Xp * Y * Yp;
  g(0, 1) = 2.0 * X * X * (Yp * Yp - 2.0 * Y);
  g(1, 0) = -2.0 * (Xp * Xp - 2.0 * X) * Y * Y;
  g(1, 1) = -g(0, 0);
  return g;
}

Eigen::Vector2d grad_phi(double x, double y) {
  return {-std::sin(kPi * x) * std::cos(kPi * y) / kPi, -std::cos(kPi * x) * std::sin(kPi * y) / kPi};
}

Eigen::Matrix2d hess_phi(double x, double y) {
  const double cc = std::cos(kPi * x) * std::cos(kPi * y);
  const double ss = std::sin(kPi * x) * std::sin(kPi * y);
  Eigen::Matrix2d g;
  g << -cc, ss, ss, -cc;
  return g;
}

void require_unit_square(const MacGrid& grid) {
  if (std::abs(grid.width() - 1.0) > 1e-12 || std::abs(grid.height() - 1.0) > 1e-12)
    throw ParameterError("manufactured solutions are defined on the unit square");
}

}  // namespace

const char* to_string(ManufacturedKind kind) {
  switch (kind) {
    case ManufacturedKind::Zero: return "zero";
    case ManufacturedKind::StreamFunction: return "stream-function";
    case ManufacturedKind::Compressible: return "compressible";
    case ManufacturedKind::Dilation: return "dilation";
    case ManufacturedKind::Poiseuille: return "poiseuille";
  }
  return "?";
}

ManufacturedKind manufactured_kind_from_string(const std::string& name) {
  for (auto kind : {ManufacturedKind::Zero, ManufacturedKind::StreamFunction, ManufacturedKind::Compressible,
                    ManufacturedKind::Dilation, ManufacturedKind::Poiseuille})
    if (name == to_string(kind)) return kind;
  throw ParameterError("unknown manufactured solution '" + name + "'");
}

AnalyticSolution analytic_solution(ManufacturedKind kind) {
  AnalyticSolution s;
  s.name = to_string(kind);
  auto zero_v = [](double, double) { return Eigen::Vector2d::Zero().eval(); };
  auto zero_g = [](double, double) { return Eigen::Matrix2d::Zero().eval(); };
  auto zero_s = [](double, double) { return 0.0; };
  auto wave_p = [](double x, double y) { return std::sin(2.0 * kPi * x) * std::cos(2.0 * kPi * y); };
  switch (kind) {
    case ManufacturedKind::Zero:
      s.velocity_expr = "(0, 0)";
      s.pressure_expr = "0";
      s.velocity = zero_v;
      s.gradient = zero_g;
      s.pressure = zero_s;
      s.divergence = zero_s;
      break;
    case ManufacturedKind::StreamFunction:
      s.velocity_expr = "curl psi, psi = (x(1-x)y(1-y))^2";
      s.pressure_expr = "sin(2 pi x) cos(2 pi y)";
      s.velocity = curl_psi;
      s.gradient = curl_psi_gradient;
      s.pressure = wave_p;
      s.divergence = zero_s;
      break;
    case ManufacturedKind::Compressible:
      s.velocity_expr = "curl psi + grad phi, psi = (x(1-x)y(1-y))^2, phi = cos(pi x) cos(pi y) / pi^2";
      s.pressure_expr = "sin(2 pi x) cos(2 pi y)";
      s.velocity = [](double x, double y) { return (curl_psi(x, y) + grad_phi(x, y)).eval(); };
      s.gradient = [](double x, double y) { return (curl_psi_gradient(x, y) + hess_phi(x, y)).eval(); };
      s.pressure = wave_p;
      s.divergence = [](double x, double y) { return -2.0 * std::cos(kPi * x) * std::cos(kPi * y); };
      break;
    case ManufacturedKind::Dilation:
      s.velocity_expr = "(x/2, y/2)";
      s.pressure_expr = "0";
      s.velocity = [](double x, double y) { return Eigen::Vector2d(0.5 * x, 0.5 * y); };
      s.gradient = [](double, double) { return (0.5 * Eigen::Matrix2d::Identity()).eval(); };
      s.pressure = zero_s;
      s.divergence = [](double, double) { return 1.0; };
      break;
    case ManufacturedKind::Poiseuille:
      s.velocity_expr = "(4y(1-y), 0)";
      s.pressure_expr = "2 - 4x";
      s.velocity = [](double, double y) { return Eigen::Vector2d(4.0 * y * (1.0 - y), 0.0); };
      s.gradient = [](double, double y) {
        Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
        g(0, 1) = 4.0 - 8.0 * y;
        return g;
      };
      s.pressure = [](double x, double) { return 2.0 - 4.0 * x; };
      s.divergence = zero_s;
      break;
  }
  return s;
}

StaggeredVelocity sample_velocity(const MacGrid& grid, const std::function<Eigen::Vector2d(double, double)>& v) {
  StaggeredVelocity out(grid);
  const double h = grid.h();
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i <= grid.nx(); ++i) out.u_at(i, j) = v(i * h, (j + 0.5) * h)[0];
  for (int j = 0; j <= grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) out.v_at(i, j) = v((i + 0.5) * h, j * h)[1];
  for (int i = 0; i <= grid.nx(); ++i) {
    out.u_bottom[i] = v(i * h, 0.0)[0];
    out.u_top[i] = v(i * h, grid.height())[0];
  }
  for (int j = 0; j <= grid.ny(); ++j) {
    out.v_left[j] = v(0.0, j * h)[1];
    out.v_right[j] = v(grid.width(), j * h)[1];
  }
  return out;
}

PressureField sample_pressure(const MacGrid& grid, const std::function<double(double, double)>& p) {
  PressureField out(grid);
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) out.values[grid.cell(i, j)] = p(grid.cell_x(i), grid.cell_y(j));
  return out;
}

GridField sample_cells(const MacGrid& grid, const std::function<double(double, double)>& f) {
  GridField out = grid.cell_field();
  for (int j = 0; j < grid.ny(); ++j)
    for (int i = 0; i < grid.nx(); ++i) out(i, j) = f(grid.cell_x(i), grid.cell_y(j));
  return out;
}

ManufacturedSolution manufactured_solution(const MacGrid& grid, ManufacturedKind kind) {
  require_unit_square(grid);
  AnalyticSolution analytic = analytic_solution(kind);
  StaggeredVelocity velocity(grid);
  if (kind == ManufacturedKind::StreamFunction || kind == ManufacturedKind::Compressible) {
    const double h = grid.h();
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i <= grid.nx(); ++i) velocity.u_at(i, j) = (psi(i * h, (j + 1) * h) - psi(i * h, j * h)) / h;
    for (int j = 0; j <= grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i) velocity.v_at(i, j) = -(psi((i + 1) * h, j * h) - psi(i * h, j * h)) / h;
    if (kind == ManufacturedKind::Compressible) velocity = velocity + sample_velocity(grid, grad_phi);
  } else {
    velocity = sample_velocity(grid, analytic.velocity);
  }
  PressureField pressure = sample_pressure(grid, analytic.pressure);
  pressure.normalize();
  GridField divergence = sample_cells(grid, analytic.divergence);
  return {std::move(analytic), std::move(velocity), std::move(pressure), std::move(divergence)};
}

ForcingField forcing_from_solution(const std::function<Eigen::Matrix2d(const Eigen::Matrix2d&)>& stress,
                                   const AnalyticSolution& solution, const MacGrid& grid) {
  ForcingField f(grid);
  auto strain = [&](double x, double y) {
    const Eigen::Matrix2d g = solution.gradient(x, y);
    return (0.5 * (g + g.transpose())).eval();
  };
  for (int j = 0; j < grid.ny(); ++j) {
    for (int i = 0; i < grid.nx(); ++i) {
      const double x = grid.cell_x(i), y = grid.cell_y(j);
      const Eigen::Matrix2d s = stress(strain(x, y));
      const double p = solution.pressure(x, y);
      f.xx[grid.cell(i, j)] = s(0, 0) - p;
      f.yy[grid.cell(i, j)] = s(1, 1) - p;
    }
  }
  for (int j = 0; j <= grid.ny(); ++j) {
    for (int i = 0; i <= grid.nx(); ++i) {
      const Eigen::Matrix2d s = stress(strain(grid.node_x(i), grid.node_y(j)));
      f.xy[grid.node(i, j)] = s(0, 1);
      f.yx[grid.node(i, j)] = s(1, 0);
    }
  }
  return f;
}

ForcingField forcing_from_solution(const StressModel& model, const AnalyticSolution& solution, const MacGrid& grid) {
  return forcing_from_solution([&model](const Eigen::Matrix2d& e) { return Eigen::Matrix2d(model.stress(e)); },
                               solution, grid);
}

}  // namespace nnstokes
