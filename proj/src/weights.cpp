#include "nnstokes/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nnstokes/error.hpp"

namespace nnstokes {

namespace {

// Summed-area table over an nx x ny array; long double keeps small-cube sums
// accurate on large grids.
class BoxSum {
 public:
  BoxSum(int nx, int ny, const auto& value_at) : nx_(nx), ny_(ny), table_((nx + 1) * static_cast<std::size_t>(ny + 1), 0.0L) {
    for (int j = 0; j < ny; ++j) {
      long double row = 0.0L;
      for (int i = 0; i < nx; ++i) {
        row += static_cast<long double>(value_at(i, j));
        at(i + 1, j + 1) = at(i + 1, j) + row;
      }
    }
  }

  // Sum over cells [i0, i1] x [j0, j1], bounds already clipped, inclusive.
  long double sum(int i0, int i1, int j0, int j1) const {
    return at(i1 + 1, j1 + 1) - at(i0, j1 + 1) - at(i1 + 1, j0) + at(i0, j0);
  }

 private:
  long double& at(int i, int j) { return table_[static_cast<std::size_t>(j) * (nx_ + 1) + i]; }
  long double at(int i, int j) const { return table_[static_cast<std::size_t>(j) * (nx_ + 1) + i]; }

  int nx_;
  int ny_;
  std::vector<long double> table_;
};

int reflect_index(int k, int n) {
  const int period = 2 * n;
  int m = k % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

struct Range {
  int i0, i1, j0, j1;
  long double count() const { return static_cast<long double>(i1 - i0 + 1) * (j1 - j0 + 1); }
};

Range clipped(const Cube& c, int nx, int ny, int dim) {
  Range r{std::max(0, c.ci - c.r), std::min(nx - 1, c.ci + c.r), 0, 0};
  if (dim == 2) {
    r.j0 = std::max(0, c.cj - c.r);
    r.j1 = std::min(ny - 1, c.cj + c.r);
  }
  return r;
}

int max_radius(const CubeFamily& cubes) {
  int r = 0;
  for (const auto& c : cubes.cubes()) r = std::max(r, c.r);
  return r;
}

void require_family_matches(const GridField& f, const CubeFamily& cubes) {
  if (f.nx() != cubes.nx() || f.ny() != cubes.ny() || f.dim() != cubes.dim()) {
    throw ParameterError("cube family does not match the grid shape");
  }
}

}  // namespace

CubeFamily CubeFamily::dyadic(int nx, int ny, int dim) {
  if (nx < 1 || ny < 1 || (dim != 1 && dim != 2)) throw ParameterError("CubeFamily: bad grid shape");
  CubeFamily family;
  family.nx_ = nx;
  family.ny_ = ny;
  family.dim_ = dim;
  std::ostringstream id;
  id << "dyadic-" << dim << "d-" << nx << "x" << ny;
  family.id_ = id.str();

  const int extent = std::max(nx, dim == 2 ? ny : 1);
  std::vector<int> radii{0};
  for (int r = 1;; r *= 2) {
    radii.push_back(r);
    if (r >= extent) break;
  }
  for (int r : radii) {
    const int stride = std::max(1, r);
    const int jmax = dim == 2 ? ny : 1;
    for (int j = 0; j < jmax; j += stride)
      for (int i = 0; i < nx; i += stride) family.cubes_.push_back({i, j, r});
  }
  return family;
}

Weight::Weight(GridField field) : field_(std::move(field)) {
  for (double v : field_.values()) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError("Weight: values must be finite and strictly positive");
  }
}

Weight Weight::constant(const GridField& like, double value) {
  GridField f = like;
  std::fill(f.values().begin(), f.values().end(), value);
  return Weight(std::move(f));
}

Weight Weight::certified(double p) const {
  Weight copy = *this;
  copy.certification_ = certify_ap(*this, p);
  return copy;
}

GridField maximal_function(const GridField& f, int r_max) {
  const int nx = f.nx();
  const int ny = f.ny();
  const int dim = f.dim();
  if (r_max < 0) r_max = std::max(nx, dim == 2 ? ny : 1);
  const BoxSum box(nx, ny, [&](int i, int j) { return std::abs(f(i, j)); });

  GridField out = f;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      long double best = std::abs(f(i, j));
      for (int r = 1; r <= r_max; ++r) {
        const Range rg = clipped({i, j, r}, nx, ny, dim);
        const long double side = 2.0L * r + 1.0L;
        const long double volume = dim == 2 ? side * side : side;
        best = std::max(best, box.sum(rg.i0, rg.i1, rg.j0, rg.j1) / volume);
      }
      out(i, j) = static_cast<double>(best);
    }
  }
  return out;
}

double ap_constant(const Weight& w, double p, const CubeFamily& cubes, CubeBoundary mode) {
  if (!(p > 1.0)) throw ParameterError("ap_constant: p must exceed 1 (use a1_constant for p = 1)");
  const GridField& f = w.field();
  require_family_matches(f, cubes);
  const int nx = f.nx();
  const int ny = f.ny();
  const int dim = f.dim();
  const double dual_exp = -1.0 / (p - 1.0);

  double worst = 1.0;
  auto update = [&](long double avg_w, long double avg_dual) {
    const double value = static_cast<double>(avg_w) * std::pow(static_cast<double>(avg_dual), p - 1.0);
    worst = std::max(worst, value);
  };

  if (mode == CubeBoundary::Clip) {
    const BoxSum sw(nx, ny, [&](int i, int j) { return f(i, j); });
    const BoxSum sd(nx, ny, [&](int i, int j) { return std::pow(f(i, j), dual_exp); });
    for (const auto& c : cubes.cubes()) {
      if (c.r == 0) continue;  // single cell: exactly 1
      const Range rg = clipped(c, nx, ny, dim);
      const long double n = rg.count();
      update(sw.sum(rg.i0, rg.i1, rg.j0, rg.j1) / n, sd.sum(rg.i0, rg.i1, rg.j0, rg.j1) / n);
    }
    return worst;
  }

  const int pad = max_radius(cubes);
  const int ex = nx + 2 * pad;
  const int ey = dim == 2 ? ny + 2 * pad : 1;
  auto value_ext = [&](int i, int j) {
    const int si = reflect_index(i - pad, nx);
    const int sj = dim == 2 ? reflect_index(j - pad, ny) : 0;
    return f(si, sj);
  };
  const BoxSum sw(ex, ey, value_ext);
  const BoxSum sd(ex, ey, [&](int i, int j) { return std::pow(value_ext(i, j), dual_exp); });
  for (const auto& c : cubes.cubes()) {
    if (c.r == 0) continue;
    const int i0 = c.ci - c.r + pad;
    const int i1 = c.ci + c.r + pad;
    const int j0 = dim == 2 ? c.cj - c.r + pad : 0;
    const int j1 = dim == 2 ? c.cj + c.r + pad : 0;
    const long double n = static_cast<long double>(i1 - i0 + 1) * (j1 - j0 + 1);
    update(sw.sum(i0, i1, j0, j1) / n, sd.sum(i0, i1, j0, j1) / n);
  }
  return worst;
}

ApCertification certify_ap(const Weight& w, double p) {
  const auto family = CubeFamily::dyadic(w.field());
  ApCertification cert;
  cert.p = p;
  cert.family_id = family.id();
  cert.clipped = ap_constant(w, p, family, CubeBoundary::Clip);
  cert.reflected = ap_constant(w, p, family, CubeBoundary::Reflect);
  return cert;
}

double a1_constant(const Weight& w) {
  const GridField m = maximal_function(w.field());
  double worst = 1.0;
  for (std::size_t k = 0; k < m.size(); ++k) worst = std::max(worst, m[k] / w[k]);
  return worst;
}

Weight weight_from_forcing(const GridField& f_magnitude, double s0) {
  if (!(s0 > 1.0 && s0 < 2.0)) throw ParameterError("weight_from_forcing: s0 must lie in (1, 2)");
  GridField omega = maximal_function(f_magnitude);
  for (double& v : omega.values()) v = std::pow(1.0 + v, s0 - 2.0);
  return Weight(std::move(omega)).certified(2.0);
}

Weight dual_weight(const Weight& w, double q) {
  if (!(q > 1.0)) throw ParameterError("dual_weight: q must exceed 1");
  GridField out = w.field();
  const double e = -1.0 / (q - 1.0);
  for (double& v : out.values()) v = std::pow(v, e);
  return Weight(std::move(out));
}

Weight cap_weight(const Weight& w, int j) {
  if (j < 1) throw ParameterError("cap_weight: j must be a positive integer");
  GridField out = w.field();
  for (double& v : out.values()) v = std::min(1.0, j * v);
  return Weight(std::move(out));
}

Weight min_weight(const Weight& a, const Weight& b) {
  if (!a.field().same_shape(b.field())) throw ParameterError("min_weight: shapes differ");
  GridField out = a.field();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::min(a[k], b[k]);
  return Weight(std::move(out));
}

double weighted_lp_norm(const GridField& f, const Weight& w, double p) {
  if (!(p >= 1.0)) throw ParameterError("weighted_lp_norm: p must be at least 1");
  if (!f.same_shape(w.field())) throw ParameterError("weighted_lp_norm: field and weight shapes differ");
  long double acc = 0.0L;
  for (std::size_t k = 0; k < f.size(); ++k) acc += std::pow(std::abs(f[k]), p) * w[k];
  return std::pow(static_cast<double>(acc) * f.cell_volume(), 1.0 / p);
}

double lp_norm(const GridField& f, double p) {
  if (!(p >= 1.0)) throw ParameterError("lp_norm: p must be at least 1");
  long double acc = 0.0L;
  for (double v : f.values()) acc += std::pow(std::abs(v), p);
  return std::pow(static_cast<double>(acc) * f.cell_volume(), 1.0 / p);
}

double default_s0(double q) {
  if (!(q > 1.0)) throw ParameterError("default_s0: q must exceed 1");
  return std::clamp(1.0 + 0.5 * (q - 1.0), 1.0 + 1e-3, 2.0 - 1e-3);
}

double embedding_exponent(double ap, double p, int dim) {
  // Reverse-Hoelder gain for w^(-1/(p-1)) taken as eps = 1 / (2^(dim+1) A_p).
  const double eps = 1.0 / (std::pow(2.0, dim + 1) * ap);
  return p * (1.0 + eps) / (p + eps);
}

double embedding_constant(double ap, double p) { return 2.0 * std::pow(ap, 1.0 / p); }

EmbeddingCheck check_embedding(const GridField& f, const Weight& w, double p, const CubeFamily& cubes) {
  if (!f.same_shape(w.field())) throw ParameterError("check_embedding: field and weight shapes differ");
  require_family_matches(f, cubes);
  EmbeddingCheck out;
  out.ap = ap_constant(w, p, cubes);
  const double s = embedding_exponent(out.ap, p, f.dim());
  out.exponent = s;
  out.constant = embedding_constant(out.ap, p);

  const int nx = f.nx();
  const int ny = f.ny();
  const int dim = f.dim();
  const double holder_exp = -s / (p - s);
  const BoxSum fs(nx, ny, [&](int i, int j) { return std::pow(std::abs(f(i, j)), s); });
  const BoxSum fpw(nx, ny, [&](int i, int j) { return std::pow(std::abs(f(i, j)), p) * w(i, j); });
  const BoxSum sw(nx, ny, [&](int i, int j) { return w(i, j); });
  const BoxSum sh(nx, ny, [&](int i, int j) { return std::pow(w(i, j), holder_exp); });
  for (const auto& c : cubes.cubes()) {
    const Range rg = clipped(c, nx, ny, dim);
    const long double n = rg.count();
    const double avg_fs = static_cast<double>(fs.sum(rg.i0, rg.i1, rg.j0, rg.j1) / n);
    const double avg_fpw = static_cast<double>(fpw.sum(rg.i0, rg.i1, rg.j0, rg.j1) / n);
    const double avg_w = static_cast<double>(sw.sum(rg.i0, rg.i1, rg.j0, rg.j1) / n);
    const double avg_h = static_cast<double>(sh.sum(rg.i0, rg.i1, rg.j0, rg.j1) / n);
    const double lhs = std::pow(std::max(avg_fs, 0.0), 1.0 / s);
    const double rhs = std::pow(avg_w, -1.0 / p) * std::pow(std::max(avg_fpw, 0.0), 1.0 / p);
    if (rhs > 0.0) out.worst_ratio = std::max(out.worst_ratio, lhs / rhs);
    const double sharp = std::pow(avg_w, 1.0 / p) * std::pow(avg_h, (p - s) / (p * s));
    out.sharp_constant = std::max(out.sharp_constant, sharp);
  }
  return out;
}

}  // namespace nnstokes
