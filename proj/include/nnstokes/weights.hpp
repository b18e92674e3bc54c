#ifndef NNSTOKES_WEIGHTS_HPP
#define NNSTOKES_WEIGHTS_HPP

#include <optional>
#include <string>
#include <vector>

#include "nnstokes/grid_field.hpp"

namespace nnstokes {

/// Axis-aligned grid cube: cells (ci +- r, cj +- r), or an interval in 1D.
struct Cube {
  int ci = 0;
  int cj = 0;
  int r = 0;
};

/// Discrete stand-in for "every ball": half-widths 0, 1, 2, 4, ... up to the
/// first power of two covering the grid, centers subsampled with stride
/// max(1, r). Deterministic in the grid shape.
class CubeFamily {
 public:
  static CubeFamily dyadic(int nx, int ny, int dim);
  static CubeFamily dyadic(const GridField& like) { return dyadic(like.nx(), like.ny(), like.dim()); }

  const std::vector<Cube>& cubes() const { return cubes_; }
  std::size_t size() const { return cubes_.size(); }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int dim() const { return dim_; }
  const std::string& id() const { return id_; }

 private:
  int nx_ = 0;
  int ny_ = 0;
  int dim_ = 2;
  std::string id_;
  std::vector<Cube> cubes_;
};

/// How cubes reaching past the domain are treated when averaging a weight.
enum class CubeBoundary {
  Clip,     // average over the cells inside the domain
  Reflect,  // full cube, weight extended by even reflection
};

struct ApCertification {
  double p = 2.0;
  std::string family_id;
  double clipped = 1.0;
  double reflected = 1.0;
};

/// Strictly positive grid field. Values must be finite and > 0.
class Weight {
 public:
  explicit Weight(GridField field);

  static Weight constant(const GridField& like, double value = 1.0);

  const GridField& field() const { return field_; }
  double operator[](std::size_t k) const { return field_[k]; }
  double operator()(int i, int j) const { return field_(i, j); }

  const std::optional<ApCertification>& certification() const { return certification_; }
  /// Returns a copy carrying A_p estimates on the dyadic family.
  Weight certified(double p) const;

 private:
  GridField field_;
  std::optional<ApCertification> certification_;
};

/// M_h f(x) = max over r in [0, r_max] of the mean of |f| over the cube of
/// half-width r around x, f extended by zero. r_max < 0 selects the full grid.
GridField maximal_function(const GridField& f, int r_max = -1);

/// max over cubes of (avg w)(avg w^(-1/(p-1)))^(p-1); at least 1.
double ap_constant(const Weight& w, double p, const CubeFamily& cubes, CubeBoundary mode = CubeBoundary::Clip);

ApCertification certify_ap(const Weight& w, double p);

/// max over cells of M_h w / w.
double a1_constant(const Weight& w);

/// (1 + M_h |f|)^(s0 - 2), certified against A_2.
Weight weight_from_forcing(const GridField& f_magnitude, double s0);

/// w^(-1/(q-1)).
Weight dual_weight(const Weight& w, double q);

/// min(1, j w).
Weight cap_weight(const Weight& w, int j);

/// Pointwise minimum of two weights on the same grid.
Weight min_weight(const Weight& a, const Weight& b);

/// (sum |f|^p w h^dim)^(1/p).
double weighted_lp_norm(const GridField& f, const Weight& w, double p);
double lp_norm(const GridField& f, double p);

/// Default auxiliary exponent for a target integrability q: 1 + (q-1)/2
/// clamped into (1, 2).
double default_s0(double q);

/// Local embedding L^p_w -> L^s on cubes:
///   (avg_B |f|^s)^(1/s) <= C (avg_B w)^(-1/p) (avg_B |f|^p w)^(1/p).
/// `exponent` and `constant` are selected from A_p(w); `worst_ratio` is the
/// largest observed LHS/RHS over the family and `sharp_constant` the best
/// constant valid for every f (Hoelder).
struct EmbeddingCheck {
  double ap = 1.0;
  double exponent = 1.0;
  double constant = 1.0;
  double worst_ratio = 0.0;
  double sharp_constant = 0.0;
  bool holds() const { return worst_ratio <= constant && sharp_constant <= constant; }
};

double embedding_exponent(double ap, double p, int dim);
double embedding_constant(double ap, double p);
EmbeddingCheck check_embedding(const GridField& f, const Weight& w, double p, const CubeFamily& cubes);

}  // namespace nnstokes

#endif  // NNSTOKES_WEIGHTS_HPP
