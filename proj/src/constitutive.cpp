#include "nnstokes/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "nnstokes/error.hpp"

namespace nnstokes {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Orthonormal basis of the symmetric n x n tensors under the Frobenius product.
std::vector<Tensor2> symmetric_basis(int n) {
  std::vector<Tensor2> basis;
  for (int i = 0; i < n; ++i) {
    Tensor2 e = Tensor2::Zero(n, n);
    e(i, i) = 1.0;
    basis.push_back(e);
  }
  const double r = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      Tensor2 e = Tensor2::Zero(n, n);
      e(i, j) = r;
      e(j, i) = r;
      basis.push_back(e);
    }
  }
  return basis;
}

}  // namespace

std::string to_string(StressFamily family) {
  switch (family) {
    case StressFamily::CarreauShifted:
      return "carreau";
    case StressFamily::CappedPowerLaw:
      return "capped";
  }
  return "unknown";
}

StressModel::StressModel(const StressParams& params) : params_(params) {
  const auto& [family, mu, nu0, nu1, p] = params_;
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw ParameterError("stress model: mu must be a finite positive number (coercivity requires mu > 0)");
  }
  if (!(nu0 >= 0.0) || !(nu1 >= 0.0) || !std::isfinite(nu0) || !std::isfinite(nu1)) {
    throw ParameterError("stress model: nu0 and nu1 must be finite and nonnegative");
  }

  if (family == StressFamily::CarreauShifted) {
    if (!(p > 1.0 && p <= 2.0)) {
      throw ParameterError("carreau model: exponent p must lie in the open-closed interval (1, 2]");
    }
    if (p == 2.0) {
      mu_inf_true_ = mu + 1.0;
      c0_ = c1_ = mu_inf_true_;
      c2_ = 0.0;
    } else {
      if (nu0 == 0.0 && nu1 == 0.0) {
        throw ParameterError("carreau model: nu0 = nu1 = 0 with p < 2 gives an infinite viscosity");
      }
      const double e = 0.5 * (p - 2.0);
      mu_inf_true_ = nu1 > 0.0 ? mu : mu + std::pow(nu0, e);
      c0_ = mu;
      if (nu0 > 0.0) {
        // (nu0 + nu1 l^2)^e l <= nu0^e l
        c1_ = mu + std::pow(nu0, e);
        c2_ = 0.0;
      } else {
        // nu1^e l^(p-1) <= nu1^e (1 + l)
        c1_ = mu + std::pow(nu1, e);
        c2_ = std::pow(nu1, e);
      }
    }
    kink_radius_ = 0.0;
    return;
  }

  if (!(p > 2.0)) {
    throw ParameterError("capped power-law model: exponent p must lie in (2, inf]");
  }
  const double b0 = base_power(0.0);
  if (nu1 > 0.0) {
    mu_inf_true_ = mu;
  } else {
    mu_inf_true_ = std::min(mu, b0);
  }
  if (!(mu_inf_true_ > 0.0)) {
    throw ParameterError("capped power-law model: viscosity vanishes identically (coercivity fails)");
  }

  if (b0 >= mu) {
    kink_radius_ = 0.0;
  } else if (nu1 == 0.0) {
    kink_radius_ = kInf;
  } else {
    const double base_at_kink = std::isinf(p) ? 1.0 : std::pow(mu, 2.0 / (p - 2.0));
    kink_radius_ = std::sqrt(std::max(0.0, (base_at_kink - nu0) / nu1));
  }

  c1_ = mu;
  if (std::isinf(kink_radius_)) {
    c0_ = mu_inf_true_;
    c2_ = 0.0;
  } else {
    c0_ = mu;
    c2_ = mu * kink_radius_ * kink_radius_;
  }
}

StressModel StressModel::carreau(double mu, double nu0, double nu1, double p) {
  return StressModel(StressParams{StressFamily::CarreauShifted, mu, nu0, nu1, p});
}

StressModel StressModel::capped(double mu, double nu0, double nu1, double p) {
  return StressModel(StressParams{StressFamily::CappedPowerLaw, mu, nu0, nu1, p});
}

double StressModel::base_power(double lambda) const {
  const double base = params_.nu0 + params_.nu1 * lambda * lambda;
  if (std::isinf(params_.p)) {
    if (base > 1.0) return kInf;
    if (base < 1.0) return 0.0;
    return 1.0;
  }
  return std::pow(base, 0.5 * (params_.p - 2.0));
}

double StressModel::viscosity(double lambda) const {
  const double b = base_power(lambda);
  if (params_.family == StressFamily::CarreauShifted) return params_.mu + b;
  return std::min(params_.mu, b);
}

double StressModel::viscosity_derivative(double lambda) const {
  const auto& [family, mu, nu0, nu1, p] = params_;
  if (std::isinf(p) || p == 2.0 || nu1 == 0.0) return 0.0;
  if (family == StressFamily::CappedPowerLaw && base_power(lambda) >= mu) return 0.0;
  const double base = nu0 + nu1 * lambda * lambda;
  return (p - 2.0) * nu1 * lambda * std::pow(base, 0.5 * (p - 2.0) - 1.0);
}

double StressModel::stress_factor(double lambda) const {
  if (lambda == 0.0) return 0.0;
  return viscosity(lambda);
}

double StressModel::stress_magnitude(double lambda) const { return stress_factor(lambda) * lambda; }

Tensor2 StressModel::stress(const Tensor2& q) const {
  const Tensor2 qs = symmetrize(q);
  return stress_factor(frobenius_norm(qs)) * qs;
}

StressModel StressModel::with_mu_inf_override(double mu_inf) const {
  StressModel copy = *this;
  copy.mu_inf_override_ = mu_inf;
  return copy;
}

bool StressModel::satisfies_strict_assumptions() const {
  if (params_.family == StressFamily::CarreauShifted) return true;
  if (std::isinf(params_.p)) return kink_radius_ == 0.0;
  return true;
}

std::string StressModel::describe() const {
  std::ostringstream os;
  os << to_string(params_.family) << "(mu=" << params_.mu << ", nu0=" << params_.nu0 << ", nu1=" << params_.nu1
     << ", p=" << params_.p << ")";
  return os.str();
}

std::vector<StressModel> shipped_models() {
  return {
      StressModel::carreau(1.0, 1.0, 1.0, 1.5),
      StressModel::carreau(1.0, 1.0, 1.0, 2.0),
      StressModel::carreau(0.5, 0.0, 2.0, 1.2),
      StressModel::capped(1.0, 0.0, 1.0, 4.0),
      StressModel::capped(2.0, 0.5, 1.0, 3.0),
  };
}

double linearity_modulus(const StressModel& model, double m) {
  if (!(m > 0.0)) throw ParameterError("linearity_modulus: m must be positive");
  // s is monotone in lambda for both families, so |s - c| on [m, inf) peaks at
  // one of the two ends of the range of s.
  const double c = model.mu_inf();
  const double at_m = std::abs(model.viscosity(m) - c);
  const double at_inf = std::abs(model.mu_inf_true() - c);
  return std::max(at_m, at_inf);
}

double linearity_threshold(const StressModel& model, double eps) {
  if (!(eps > 0.0)) throw ParameterError("linearity_threshold: eps must be positive");
  if (std::abs(model.mu_inf_true() - model.mu_inf()) > eps) return kInf;
  double lo = -14.0;
  double hi = 14.0;
  if (linearity_modulus(model, std::pow(10.0, lo)) <= eps) return 0.0;
  while (linearity_modulus(model, std::pow(10.0, hi)) > eps) {
    hi += 4.0;
    if (hi > 300.0) return kInf;
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (linearity_modulus(model, std::pow(10.0, mid)) <= eps) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return std::pow(10.0, hi);
}

JacobianEigen jacobian_defect_eigen(const StressModel& model, double lambda) {
  const double s = model.viscosity(lambda);
  const double ds = model.viscosity_derivative(lambda);
  return {s + lambda * ds - model.mu_inf(), s - model.mu_inf()};
}

double jacobian_defect_norm_fd(const StressModel& model, const Tensor2& q_sym) {
  const int n = static_cast<int>(q_sym.rows());
  const auto basis = symmetric_basis(n);
  const int k = static_cast<int>(basis.size());
  const double step = 1e-5 * std::max(frobenius_norm(q_sym), 1e-8);
  Eigen::MatrixXd jac(k, k);
  for (int l = 0; l < k; ++l) {
    const Tensor2 plus = model.stress(q_sym + step * basis[l]);
    const Tensor2 minus = model.stress(q_sym - step * basis[l]);
    const Tensor2 diff = (plus - minus) / (2.0 * step);
    for (int r = 0; r < k; ++r) jac(r, l) = frobenius(diff, basis[r]);
  }
  jac -= model.mu_inf() * Eigen::MatrixXd::Identity(k, k);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  return svd.singularValues()(0);
}

double jacobian_modulus(const StressModel& model, double m) {
  if (!(m > 0.0)) throw ParameterError("jacobian_modulus: m must be positive");
  const double kink = model.kink_radius();
  if (model.family() == StressFamily::CappedPowerLaw && std::isfinite(kink) && kink > 0.0 && m <= kink) {
    std::ostringstream os;
    os << "jacobian_modulus: m = " << m << " does not lie beyond the cap kink radius " << kink << " of "
       << model.describe();
    throw ParameterError(os.str());
  }

  double sup = std::abs(model.mu_inf_true() - model.mu_inf());
  for (int k = 0; k <= 16 * 12; ++k) {
    const double lambda = m * std::pow(10.0, k / 16.0);
    const auto eig = jacobian_defect_eigen(model, lambda);
    const double closed = std::max(std::abs(eig.radial), std::abs(eig.tangential));
    sup = std::max(sup, closed);

    if (k % 32 == 0 && lambda * (1.0 - 2e-5) > kink) {
      Tensor2 dir = Tensor2::Zero(2, 2);
      dir(0, 0) = 0.6;
      dir(1, 1) = -0.2;
      dir(0, 1) = dir(1, 0) = 0.5;
      dir /= frobenius_norm(dir);
      const double fd = jacobian_defect_norm_fd(model, lambda * dir);
      if (std::abs(fd - closed) > 1e-4 * std::max(1.0, closed) + 1e-6 * model.mu_inf()) {
        std::ostringstream os;
        os << "jacobian_modulus: finite-difference cross-check failed at lambda=" << lambda << " (closed " << closed
           << ", fd " << fd << ")";
        throw std::logic_error(os.str());
      }
    }
  }
  return sup;
}

namespace {

// Reduced form of the algebra-lemma defect for isotropic laws. With
// a = |Q|, b = |P| and c the cosine of the angle between Q and P,
//   |D(Q) - D(P)|^2 = g(a)^2 + g(b)^2 - 2 g(a) g(b) c,
//   |Q - P|^2       = a^2 + b^2 - 2 a b c,
// where D(Q) = S(Q) - mu_inf Q and g(a) = (s(a) - mu_inf) a.
struct AlgebraDefect {
  const StressModel& model;
  double delta;

  double g(double a) const { return model.stress_magnitude(a) - model.mu_inf() * a; }

  double operator()(double a, double b, double c) const { return eval(a, b, g(a), g(b), c); }

  static double eval_raw(double a, double b, double ga, double gb, double c, double delta) {
    const double dd = std::max(0.0, ga * ga + gb * gb - 2.0 * ga * gb * c);
    const double dq = std::max(0.0, a * a + b * b - 2.0 * a * b * c);
    return std::sqrt(dd) - delta * std::sqrt(dq);
  }

  double eval(double a, double b, double ga, double gb, double c) const { return eval_raw(a, b, ga, gb, c, delta); }
};

}  // namespace

double algebra_certificate(const StressModel& model, double delta) {
  if (!(delta > 0.0)) throw ParameterError("algebra_certificate: delta must be positive");
  const double radius = linearity_threshold(model, 0.5 * delta);
  if (std::isinf(radius)) return kInf;
  double kink = model.kink_radius();
  if (!std::isfinite(kink)) kink = 0.0;
  const double r_max = 4.0 * std::max({radius, kink, 1.0});

  std::vector<double> radii;
  for (int i = 0; i <= 192; ++i) radii.push_back(r_max * i / 192.0);
  for (int k = 1; k <= 120; ++k) radii.push_back(r_max * std::pow(2.0, -k / 4.0));
  if (kink > 0.0) radii.push_back(kink);
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());

  std::vector<double> cosines;
  for (int i = 0; i <= 48; ++i) cosines.push_back(-1.0 + 2.0 * i / 48.0);

  const AlgebraDefect defect{model, delta};
  struct Candidate {
    double value, a, b, c;
  };
  std::vector<Candidate> best;
  constexpr std::size_t kKeep = 8;
  std::vector<double> g_at(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) g_at[i] = defect.g(radii[i]);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      for (double c : cosines) {
        const double v = defect.eval(radii[i], radii[j], g_at[i], g_at[j], c);
        if (best.size() < kKeep || v > best.back().value) {
          best.push_back({v, radii[i], radii[j], c});
          std::sort(best.begin(), best.end(), [](const auto& x, const auto& y) { return x.value > y.value; });
          if (best.size() > kKeep) best.pop_back();
        }
      }
    }
  }

  double sup = best.empty() ? 0.0 : best.front().value;
  for (auto cand : best) {
    double step_r = r_max / 96.0;
    double step_c = 2.0 / 48.0;
    while (step_r > 1e-15 * r_max || step_c > 1e-15) {
      bool improved = false;
      for (int dim = 0; dim < 3; ++dim) {
        for (double sign : {-1.0, 1.0}) {
          Candidate trial = cand;
          if (dim == 0) trial.a = std::clamp(cand.a + sign * step_r, 0.0, r_max);
          if (dim == 1) trial.b = std::clamp(cand.b + sign * step_r, 0.0, r_max);
          if (dim == 2) trial.c = std::clamp(cand.c + sign * step_c, -1.0, 1.0);
          trial.value = defect(trial.a, trial.b, trial.c);
          if (trial.value > cand.value) {
            cand = trial;
            improved = true;
          }
        }
      }
      if (!improved) {
        step_r *= 0.5;
        step_c *= 0.5;
      }
    }
    sup = std::max(sup, cand.value);
  }
  return std::max(0.0, sup);
}

GrowthReport check_growth(const StressModel& model, std::span<const Tensor2> samples) {
  if (samples.empty()) throw ParameterError("check_growth: sample list is empty");
  GrowthReport report;
  report.c0 = model.c0();
  report.c1 = model.c1();
  report.c2 = model.c2();
  report.samples = samples.size();
  report.c0_sampled = kInf;
  report.c1_sampled = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Tensor2& q = samples[i];
    const double lambda = frobenius_norm(symmetrize(q));
    const double qnorm = frobenius_norm(q);
    const Tensor2 s = model.stress(q);
    const double pairing = frobenius(s, q);
    const double size = frobenius_norm(s);
    const double tol = 1e-12 * (1.0 + qnorm) * (1.0 + qnorm);

    const bool coercive = pairing >= report.c0 * lambda * lambda - report.c2 - tol;
    const bool bounded = size <= report.c1 * qnorm + report.c2 + tol;
    if (!coercive || !bounded) {
      ++report.violations;
      if (!report.first_violation) report.first_violation = i;
    }
    if (lambda > 0.0) report.c0_sampled = std::min(report.c0_sampled, (pairing + report.c2) / (lambda * lambda));
    if (qnorm > 0.0) report.c1_sampled = std::max(report.c1_sampled, (size - report.c2) / qnorm);
  }
  if (std::isinf(report.c0_sampled)) report.c0_sampled = report.c0;
  return report;
}

std::vector<Tensor2> random_tensors(int n, std::size_t count, std::uint64_t seed, bool symmetric) {
  if (n != 2 && n != 3) throw ParameterError("random_tensors: n must be 2 or 3");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> log_scale(-3.0, 3.0);
  std::vector<Tensor2> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Tensor2 q(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) q(i, j) = normal(rng);
    if (symmetric) q = symmetrize(q);
    const double norm = frobenius_norm(q);
    const double target = std::pow(10.0, log_scale(rng));
    if (norm > 0.0) q *= target / norm;
    out.push_back(q);
  }
  return out;
}

}  // namespace nnstokes
