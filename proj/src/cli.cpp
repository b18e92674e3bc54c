#include "nnstokes/cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <set>

#include <CLI11.hpp>

#include "nnstokes/error.hpp"

namespace nnstokes {

namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were consumed.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const json* get(const std::string& k) {
    seen_.insert(k);
    auto it = j_.find(k);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  void number(const std::string& k, double& out) {
    if (const json* v = get(k)) out = as_number(*v, key(k));
  }

  void optional_number(const std::string& k, std::optional<double>& out) {
    seen_.insert(k);
    auto it = j_.find(k);
    if (it == j_.end()) return;
    if (it->is_null()) {
      out.reset();
      return;
    }
    out = as_number(*it, key(k));
  }

  template <class Int>
  void integer(const std::string& k, Int& out) {
    const json* v = get(k);
    if (!v) return;
    if (!v->is_number_integer()) throw ConfigError(key(k), "expected an integer");
    const auto x = v->get<long long>();
    if (x < static_cast<long long>(std::numeric_limits<Int>::min()) ||
        static_cast<unsigned long long>(x) > static_cast<unsigned long long>(std::numeric_limits<Int>::max()))
      throw ConfigError(key(k), "integer out of range");
    out = static_cast<Int>(x);
  }

  void boolean(const std::string& k, bool& out) {
    if (const json* v = get(k)) {
      if (!v->is_boolean()) throw ConfigError(key(k), "expected true or false");
      out = v->get<bool>();
    }
  }

  std::optional<std::string> string(const std::string& k) {
    const json* v = get(k);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw ConfigError(key(k), "expected a string");
    return v->get<std::string>();
  }

  template <class T>
  void list(const std::string& k, std::vector<T>& out) {
    const json* v = get(k);
    if (!v) return;
    if (!v->is_array()) throw ConfigError(key(k), "expected an array");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string where = key(k) + "[" + std::to_string(i) + "]";
      if constexpr (std::is_integral_v<T>) {
        if (!(*v)[i].is_number_integer()) throw ConfigError(where, "expected an integer");
        out.push_back((*v)[i].get<T>());
      } else {
        out.push_back(as_number((*v)[i], where));
      }
    }
  }

  Section child(const std::string& k) {
    seen_.insert(k);
    auto it = j_.find(k);
    static const json empty = json::object();
    return Section(it == j_.end() || it->is_null() ? empty : *it, key(k));
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw ConfigError(key(k), "unknown key");
  }

  static double as_number(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
      const auto s = v.get<std::string>();
      if (s == "inf") return std::numeric_limits<double>::infinity();
    }
    throw ConfigError(where, "expected a number");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ParameterError& e) {
    throw ConfigError(key, e.what());
  }
}

StressFamily family_from_string(const std::string& name, const std::string& key) {
  if (name == "carreau") return StressFamily::CarreauShifted;
  if (name == "capped") return StressFamily::CappedPowerLaw;
  throw ConfigError(key, "unknown model family '" + name + "' (expected carreau or capped)");
}

bool directory_in_use(const std::filesystem::path& dir) {
  return std::filesystem::exists(dir) && !std::filesystem::is_empty(dir);
}

}  // namespace

StudyConfig study_config_from_json(const nlohmann::json& j, StudyConfig cfg) {
  Section root(j, "");
  (void)root.get("study");  // handled by parse_config
  {
    Section m = root.child("model");
    if (auto f = m.string("family")) cfg.model.family = family_from_string(*f, m.key("family"));
    m.number("mu", cfg.model.mu);
    m.number("nu0", cfg.model.nu0);
    m.number("nu1", cfg.model.nu1);
    m.number("p", cfg.model.p);
    m.optional_number("mu_inf_override", cfg.mu_inf_override);
    m.finish();
  }
  {
    Section w = root.child("weight");
    w.number("q", cfg.q);
    w.optional_number("s0", cfg.s0);
    w.finish();
  }
  {
    Section g = root.child("grid");
    g.integer("n", cfg.grid);
    g.list("family", cfg.grids);
    g.list("ap_family", cfg.ap_grids);
    g.finish();
  }
  {
    Section f = root.child("forcing");
    if (auto k = f.string("kind")) cfg.forcing = wrap(f.key("kind"), [&] { return forcing_kind_from_string(*k); });
    std::vector<double> center;
    f.list("center", center);
    if (!center.empty()) {
      if (center.size() != 2) throw ConfigError(f.key("center"), "expected [x, y]");
      cfg.center_x = center[0];
      cfg.center_y = center[1];
    }
    f.number("amplitude", cfg.amplitude);
    f.list("k_levels", cfg.k_levels);
    f.finish();
  }
  if (auto m = root.string("manufactured"))
    cfg.manufactured = wrap("manufactured", [&] { return manufactured_kind_from_string(*m); });
  root.integer("samples", cfg.samples);
  {
    Section s = root.child("solver");
    s.number("tol", cfg.solver.tol);
    s.integer("max_iter", cfg.solver.max_iter);
    s.number("damping", cfg.solver.damping);
    s.boolean("auto_damping", cfg.solver.auto_damping);
    s.number("contraction", cfg.solver.contraction);
    s.number("min_damping", cfg.solver.min_damping);
    if (auto b = s.string("backend"))
      cfg.solver.backend = wrap(s.key("backend"), [&] { return linear_backend_from_string(*b); });
    s.number("linear_tol", cfg.solver.linear_tol);
    s.finish();
  }
  {
    Section t = root.child("tolerances");
    auto& tol = cfg.tolerances;
    t.number("constitutive_rel", tol.constitutive_rel);
    t.number("linearity_modulus", tol.linearity_modulus);
    t.number("jacobian_fd", tol.jacobian_fd);
    t.number("maximal_closed_form_cells", tol.maximal_closed_form_cells);
    t.number("ap_constant_abs", tol.ap_constant_abs);
    t.number("ap_stability", tol.ap_stability);
    t.number("linear_velocity_order", tol.linear_velocity_order);
    t.number("linear_pressure_order", tol.linear_pressure_order);
    t.number("nonlinear_velocity_order", tol.nonlinear_velocity_order);
    t.number("degeneracy", tol.degeneracy);
    t.number("truncation_spread", tol.truncation_spread);
    t.number("roughness_spread", tol.roughness_spread);
    t.number("uniqueness_rel", tol.uniqueness_rel);
    t.number("inhomogeneous_spread", tol.inhomogeneous_spread);
    t.finish();
  }
  root.integer("seed", cfg.seed);
  root.integer("workers", cfg.workers);
  root.finish();
  cfg.validate();
  return cfg;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Weighted estimates harness for non-Newtonian Stokes flow", "nnstokes"};
  std::string study_name, config_path, out, model, backend;
  int grid = 0, workers = 0;
  double p = 0, mu = 0, q = 0, s0 = 0, mu_inf_override = 0;
  std::uint64_t seed = 0;
  bool dry_run = false, force = false;

  std::vector<std::string> names;
  for (Study s : all_studies()) names.push_back(to_string(s));
  app.add_option("study", study_name, "Study to run")->required()->check(CLI::IsMember(names));
  auto* o_config = app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  auto* o_grid = app.add_option("--grid", grid, "Grid size N (N x N cells)");
  auto* o_model = app.add_option("--model", model, "Stress law family")->check(CLI::IsMember({"carreau", "capped"}));
  auto* o_p = app.add_option("--p", p, "Exponent p");
  auto* o_mu = app.add_option("--mu", mu, "Viscosity offset mu");
  auto* o_q = app.add_option("--q", q, "Target integrability q");
  auto* o_s0 = app.add_option("--s0", s0, "Auxiliary exponent s0 in (1, 2)");
  auto* o_out = app.add_option("--out", out, "Output directory (default runs/<study>)");
  auto* o_seed = app.add_option("--seed", seed, "Random seed");
  auto* o_workers = app.add_option("--workers", workers, "Solve pool size (0: hardware concurrency)");
  auto* o_backend = app.add_option("--backend", backend, "Linear backend")->check(CLI::IsMember({"direct", "schur"}));
  auto* o_override = app.add_option("--mu-inf-override", mu_inf_override,
                                    "Replace the asymptotic viscosity (negative control)");
  app.add_flag("--dry-run", dry_run, "Print the solve plan and exit");
  app.add_flag("--force", force, "Allow writing into a non-empty output directory of the same study");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  app.parse(reversed);

  RunConfig run;
  run.study = study_from_string(study_name);
  StudyConfig cfg;
  if (o_config->count()) {
    run.config_file = config_path;
    std::ifstream in(config_path);
    json j;
    try {
      j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw ConfigError(config_path, std::string("malformed JSON: ") + e.what());
    }
    if (j.is_object() && j.contains("study") && !j["study"].is_null()) {
      if (!j["study"].is_string()) throw ConfigError("study", "expected a string");
      const auto named = j["study"].get<std::string>();
      wrap("study", [&] { return study_from_string(named); });
      if (named != study_name)
        throw ConfigError("study", "config names study '" + named + "' but the command line asks for '" + study_name + "'");
    }
    cfg = study_config_from_json(j);
  }
  if (o_grid->count()) cfg.grid = grid;
  if (o_model->count()) cfg.model.family = family_from_string(model, "--model");
  if (o_p->count()) cfg.model.p = p;
  if (o_mu->count()) cfg.model.mu = mu;
  if (o_q->count()) cfg.q = q;
  if (o_s0->count()) cfg.s0 = s0;
  if (o_seed->count()) cfg.seed = seed;
  if (o_workers->count()) cfg.workers = workers;
  if (o_backend->count()) cfg.solver.backend = linear_backend_from_string(backend);
  if (o_override->count()) cfg.mu_inf_override = mu_inf_override;
  cfg.validate();

  run.config = cfg;
  run.out = o_out->count() ? std::filesystem::path(out) : std::filesystem::path("runs") / study_name;
  run.dry_run = dry_run;
  run.force = force;
  return run;
}

nlohmann::json effective_config(const RunConfig& run) {
  json j = to_json(run.config);
  j["study"] = to_string(run.study);
  j["workers"] = run.config.workers;
  j["out"] = run.out.string();
  j["config_hash"] = config_hash(run.config);
  return j;
}

int dispatch(const RunConfig& run, std::ostream& log) {
  const std::string id = to_string(run.study);
  if (run.dry_run) {
    log << "# effective configuration\n" << effective_config(run).dump(2) << "\n# solve plan\n";
    for (const auto& line : solve_plan(run.study, run.config)) log << line << "\n";
    return 0;
  }

  const auto echo = run.out / "config.json";
  if (directory_in_use(run.out)) {
    std::string owner;
    if (std::filesystem::exists(echo)) {
      try {
        std::ifstream in(echo);
        owner = json::parse(in).value("study", "");
      } catch (const json::exception&) {
        owner.clear();
      }
    }
    if (owner != id) {
      log << "error: " << run.out.string() << " is not an output directory of study '" << id << "'\n";
      return kExitUsage;
    }
    if (!run.force) {
      log << "error: " << run.out.string() << " already holds results; rerun with --force to overwrite\n";
      return kExitUsage;
    }
  }
  std::filesystem::create_directories(run.out);
  std::ofstream(echo) << effective_config(run).dump(2) << "\n";

  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  try {
    report = run_study(run.study, run.config);
  } catch (const SolverError& e) {
    std::ofstream(run.out / "failure.txt") << e.what() << "\n";
    log << "solver failure: " << e.what() << "\n";
    return 2;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.write(run.out);
  if (report.solver_failed) {
    std::ofstream failure(run.out / "failure.txt");
    for (const auto& f : report.failures) failure << f << "\n";
  }

  for (const auto& a : report.assertions)
    log << (a.passed ? "PASS " : "FAIL ") << a.name << ": " << a.value << " " << a.relation << " " << a.threshold
        << " [" << a.tolerance << "]\n";
  for (const auto& f : report.failures) log << "failure: " << f << "\n";
  log << id << ": " << (report.solver_failed ? "solver failure" : report.passed() ? "pass" : "fail") << " in "
      << std::fixed << std::setprecision(2) << seconds << " s, artifacts in " << run.out.string() << "\n";
  return report.exit_code();
}

int run_cli(const std::vector<std::string>& args, std::ostream& log, std::ostream& err) {
  RunConfig run;
  try {
    run = parse_config(args);
  } catch (const CLI::CallForHelp&) {
    err << "usage: nnstokes <study> [--config FILE] [--grid N] [--model carreau|capped] [--p X] [--mu X] [--q X] "
           "[--s0 X] [--out DIR] [--seed N] [--workers N] [--backend direct|schur] [--mu-inf-override X] "
           "[--dry-run] [--force]\nstudies:";
    for (Study s : all_studies()) err << " " << to_string(s);
    err << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    return dispatch(run, log);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace nnstokes
