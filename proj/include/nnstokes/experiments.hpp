#ifndef NNSTOKES_EXPERIMENTS_HPP
#define NNSTOKES_EXPERIMENTS_HPP

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <deque>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "nnstokes/constitutive.hpp"
#include "nnstokes/forcing.hpp"
#include "nnstokes/manufactured.hpp"
#include "nnstokes/stokes.hpp"

namespace nnstokes {

enum class Study { ConstitutiveCheck, WeightsCheck, Mms, Truncation, Roughness, Uniqueness, Inhomogeneous };

const char* to_string(Study study);
Study study_from_string(const std::string& name);
std::vector<Study> all_studies();

enum class ForcingKind { Dirac, Smooth };

const char* to_string(ForcingKind kind);
ForcingKind forcing_kind_from_string(const std::string& name);

/// Named thresholds. Every report assertion cites one of these keys.
struct Tolerances {
  double constitutive_rel = 1e-12;
  double linearity_modulus = 1e-3;  // at |Q| = 1e12
  double jacobian_fd = 1e-5;
  double maximal_closed_form_cells = 3.0;  // in units of h
  double ap_constant_abs = 1e-12;
  double ap_stability = 0.2;
  double linear_velocity_order = 1.9;
  double linear_pressure_order = 1.0;
  double nonlinear_velocity_order = 1.0;
  double degeneracy = 1e-10;
  double truncation_spread = 2.0;
  double roughness_spread = 3.0;
  double uniqueness_rel = 1e-6;
  double inhomogeneous_spread = 3.0;

  std::map<std::string, double> as_map() const;
};

struct StudyConfig {
  StressParams model{};
  std::optional<double> mu_inf_override;  // negative control only
  double q = 2.0;
  std::optional<double> s0;  // default_s0(q) when empty
  int grid = 64;
  std::vector<int> grids;    // refinement family; per-study default when empty
  std::vector<int> ap_grids{64, 128, 256};
  std::vector<double> k_levels{1, 2, 4, 8, 16, 32, 64};
  ForcingKind forcing = ForcingKind::Dirac;
  double center_x = 0.5;
  double center_y = 0.5;
  double amplitude = 1.0;
  ManufacturedKind manufactured = ManufacturedKind::StreamFunction;
  std::size_t samples = 10000;  // constitutive samples per model and dimension
  SolverConfig solver{};
  Tolerances tolerances{};
  std::uint64_t seed = 0;
  int workers = 0;  // 0: hardware concurrency

  double effective_s0() const;
  StressModel stress_model() const;
  std::vector<int> grid_family(Study study) const;
  /// Throws ConfigError naming the offending key.
  void validate() const;
};

nlohmann::json to_json(const StudyConfig& cfg);

/// 64-bit FNV-1a of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const StudyConfig& cfg);

struct Assertion {
  std::string name;
  std::string tolerance;  // key into Tolerances, "solver.*", or "structural" (no slack)
  double value = 0.0;
  std::string relation;   // "<", "<=", ">=", "=="
  double threshold = 0.0;
  bool passed = false;
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct SolveTrace {
  std::string label;
  bool converged = true;
  std::string message;
  std::vector<IterationRecord> records;
};

struct ExperimentReport {
  std::string id;
  std::string header;
  nlohmann::json parameters;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::deque<Table> tables;  // stable references from table()
  std::map<std::string, double> scalars;
  std::vector<Assertion> assertions;
  std::vector<SolveTrace> traces;
  bool solver_failed = false;
  std::vector<std::string> failures;

  bool passed() const;
  /// 0 pass, 1 assertion failure, 2 solver failure.
  int exit_code() const;

  const Assertion* find(const std::string& name) const;
  Table& table(const std::string& name, std::vector<std::string> columns);
  const Table* find_table(const std::string& name) const;
  bool check(std::string name, std::string tolerance, double value, std::string relation, double threshold);
  void record(const std::string& label, const StokesSolution& sol);

  nlohmann::json to_json() const;
  std::string gnuplot_script() const;
  /// report.json, one CSV per table, plot.gp, traces.csv.
  void write(const std::filesystem::path& dir) const;
};

/// Runs f(0..n-1) on up to `workers` threads; results in index order. The
/// first exception by index is rethrown after all jobs finish.
template <class T>
std::vector<T> parallel_map(std::size_t n, int workers, const std::function<T(std::size_t)>& f) {
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                    : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < n;) {
      try {
        slots[k].emplace(f(k));
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  std::vector<T> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (errors[k]) std::rethrow_exception(errors[k]);
    out.push_back(std::move(*slots[k]));
  }
  return out;
}

/// Least-squares slope of log(err) against log(h).
double least_squares_order(const std::vector<double>& h, const std::vector<double>& err);

/// max/min of positive values; 1 when all are zero, +inf when only some are.
double spread(const std::vector<double>& values);

/// Smooth bounded forcing: xx = -yy = a sin(pi x) sin(pi y), xy = yx = a cos(pi x) cos(pi y).
ForcingField smooth_forcing(const MacGrid& grid, double amplitude);

ForcingField make_forcing(const MacGrid& grid, const StudyConfig& cfg);

/// sum |eps_h(a - b)|^2 w h^2 over cells.
double strain_energy(const StaggeredVelocity& a, const StaggeredVelocity& b, const Weight& w);

ExperimentReport run_constitutive_check(const StudyConfig& cfg);
ExperimentReport run_weights_check(const StudyConfig& cfg);
ExperimentReport run_mms_convergence(const StudyConfig& cfg);
ExperimentReport run_truncation_study(const StudyConfig& cfg);
ExperimentReport run_roughness_blowup_study(const StudyConfig& cfg);
ExperimentReport run_uniqueness_study(const StudyConfig& cfg);
ExperimentReport run_inhomogeneous_study(const StudyConfig& cfg);

ExperimentReport run_study(Study study, const StudyConfig& cfg);

/// Human-readable list of the solves a study would perform.
std::vector<std::string> solve_plan(Study study, const StudyConfig& cfg);

}  // namespace nnstokes

#endif  // NNSTOKES_EXPERIMENTS_HPP
