#ifndef NNSTOKES_CONSTITUTIVE_HPP
#define NNSTOKES_CONSTITUTIVE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nnstokes/tensor.hpp"

namespace nnstokes {

enum class StressFamily { CarreauShifted, CappedPowerLaw };

std::string to_string(StressFamily family);

/// User-facing parameters of a stress law S(Q) = s(|Q^s|) Q^s.
struct StressParams {
  StressFamily family = StressFamily::CarreauShifted;
  double mu = 1.0;
  double nu0 = 1.0;
  double nu1 = 1.0;
  double p = 1.5;  // +infinity allowed for CappedPowerLaw
};

/// Isotropic, x-independent, linear-at-infinity stress law.
///
///   CarreauShifted  s(l) = mu + (nu0 + nu1 l^2)^((p-2)/2),       p in (1, 2]
///   CappedPowerLaw  s(l) = min{mu, (nu0 + nu1 l^2)^((p-2)/2)},   p in (2, inf]
///
/// Construction validates the parameter range and computes the asymptotic
/// viscosity mu_inf = lim s(l) together with structural constants (c0, c1, c2)
/// for which c0 |Q^s|^2 - c2 <= S(Q).Q and |S(Q)| <= c1 |Q| + c2.
class StressModel {
 public:
  explicit StressModel(const StressParams& params);

  static StressModel carreau(double mu, double nu0, double nu1, double p);
  static StressModel capped(double mu, double nu0, double nu1, double p);

  const StressParams& params() const { return params_; }
  StressFamily family() const { return params_.family; }

  /// Generalized viscosity s(lambda), lambda = |Q^s| >= 0. May be +inf at 0
  /// for CarreauShifted with nu0 = 0.
  double viscosity(double lambda) const;

  /// d s / d lambda. Undefined at the cap kink; callers stay off it.
  double viscosity_derivative(double lambda) const;

  /// s(lambda) * lambda, the magnitude of S on tensors of norm lambda; 0 at 0.
  double stress_magnitude(double lambda) const;

  /// Factor multiplying Q^s in S(Q); returns 0 for lambda == 0 so that
  /// singular viscosities at the origin never produce NaN.
  double stress_factor(double lambda) const;

  Tensor2 stress(const Tensor2& q) const;

  /// Slope used as "linear at infinity". Equals the true limit of s unless
  /// overridden (negative-control runs only).
  double mu_inf() const { return mu_inf_override_.value_or(mu_inf_true_); }
  double mu_inf_true() const { return mu_inf_true_; }
  bool mu_inf_overridden() const { return mu_inf_override_.has_value(); }
  StressModel with_mu_inf_override(double mu_inf) const;

  double c0() const { return c0_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }

  /// Radius where the CappedPowerLaw cap switches on; 0 when the cap is active
  /// everywhere or the family has no kink; +inf when the cap is never reached.
  double kink_radius() const { return kink_radius_; }

  /// Strict monotonicity plus differentiable linearity at infinity.
  bool satisfies_strict_assumptions() const;

  std::string describe() const;

 private:
  double base_power(double lambda) const;  // (nu0 + nu1 l^2)^((p-2)/2)

  StressParams params_;
  double mu_inf_true_ = 0.0;
  std::optional<double> mu_inf_override_;
  double c0_ = 0.0;
  double c1_ = 0.0;
  double c2_ = 0.0;
  double kink_radius_ = 0.0;
};

/// The models exercised by the constitutive suite.
std::vector<StressModel> shipped_models();

/// sup over |Q^s| >= m of |S(Q^s) - mu_inf Q^s| / |Q^s|.
double linearity_modulus(const StressModel& model, double m);

/// Smallest m with linearity_modulus(model, m) <= eps (+inf if never).
double linearity_threshold(const StressModel& model, double eps);

/// Radial and tangential eigenvalues of dS/dQ^s - mu_inf Id at |Q^s| = lambda.
struct JacobianEigen {
  double radial = 0.0;
  double tangential = 0.0;
};
JacobianEigen jacobian_defect_eigen(const StressModel& model, double lambda);

/// Operator norm of dS/dQ^s - mu_inf Id on symmetric n x n tensors, by
/// central differences along an orthonormal basis, at Q^s = lambda * dir.
double jacobian_defect_norm_fd(const StressModel& model, const Tensor2& q_sym);

/// sup over |Q^s| >= m of |dS/dQ^s - mu_inf Id|. Throws ParameterError when m
/// does not lie beyond the cap kink.
double jacobian_modulus(const StressModel& model, double m);

/// Smallest C >= 0 with |S(Q) - S(P) - mu_inf (Q - P)| <= delta |Q - P| + C on
/// symmetric pairs, computed as a refined lattice supremum.
double algebra_certificate(const StressModel& model, double delta);

struct GrowthReport {
  double c0 = 0.0;  // closed-form constants used for the assertions
  double c1 = 0.0;
  double c2 = 0.0;
  double c0_sampled = 0.0;  // tightest values seen on the samples
  double c1_sampled = 0.0;
  std::size_t samples = 0;
  std::size_t violations = 0;
  std::optional<std::size_t> first_violation;

  bool ok() const { return violations == 0; }
};

GrowthReport check_growth(const StressModel& model, std::span<const Tensor2> samples);

/// Deterministic random tensors with magnitudes spread over [1e-3, 1e3].
std::vector<Tensor2> random_tensors(int n, std::size_t count, std::uint64_t seed, bool symmetric);

}  // namespace nnstokes

#endif  // NNSTOKES_CONSTITUTIVE_HPP
