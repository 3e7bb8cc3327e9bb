#include "gflow/driver.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <Eigen/Geometry>

#include "gflow/adapt.hpp"
#include "gflow/errors.hpp"
#include "gflow/estimator.hpp"

namespace gflow {

namespace {

double to_real(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw FormatError("invalid value for " + key + ": '" + text + "'");
  return v;
}

int to_int(const std::string& key, const std::string& text) {
  const double v = to_real(key, text);
  if (v != std::floor(v) || std::abs(v) > std::numeric_limits<int>::max())
    throw FormatError("expected an integer for " + key + ": '" + text + "'");
  return static_cast<int>(v);
}

Eigen::AlignedBox2d bounding_box(const Mesh& mesh) {
  Eigen::AlignedBox2d box;
  for (const Point2& p : mesh.vertices()) box.extend(p);
  return box;
}

double total_area(const Mesh& mesh) {
  double a = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) a += mesh.area(t);
  return a;
}

void check_same_domain(const Mesh& reference, const Mesh& other, const std::string& what) {
  const auto a = bounding_box(reference), b = bounding_box(other);
  const double scale = a.diagonal().norm();
  if ((a.min() - b.min()).norm() > 1e-12 * scale || (a.max() - b.max()).norm() > 1e-12 * scale ||
      // Summed areas carry a rounding error of order n_triangles * eps.
      std::abs(total_area(reference) - total_area(other)) > 1e-9 * total_area(reference))
    throw std::invalid_argument(what + " lives on a different domain");
}

class Clock {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (state_index < 1) fail("state index must be at least 1");
  if (!(theta > 0.0 && theta < 1.0)) fail("theta must lie in (0, 1)");
  if (!(gamma_stop > 0.0 && gamma_stop < 1.0)) fail("gamma must lie in (0, 1)");
  if (max_dofs < 1) fail("max_dofs must be positive");
  if (initial_n < 0) fail("initial_n must be nonnegative");
  if (!(c_interp > 0.0)) fail("c_interp must be positive");
  if (threads < 0) fail("threads must be nonnegative");
  if (max_steps_per_loop < 1) fail("the step cap must be positive");
  GfiParams p;
  p.backtrack_cap = backtrack_cap;
  p.solver_tol = solver_tol;
  p.theta = theta;
  p.gamma_stop = gamma_stop;
  p.validate();
}

void apply_settings(RunConfig& config, const std::map<std::string, std::string>& settings) {
  for (const auto& [key, value] : settings) {
    if (key == "theta") {
      config.theta = to_real(key, value);
    } else if (key == "gamma") {
      config.gamma_stop = to_real(key, value);
    } else if (key == "max_dofs") {
      config.max_dofs = to_int(key, value);
    } else if (key == "initial_n") {
      config.initial_n = to_int(key, value);
    } else if (key == "solver_tol") {
      config.solver_tol = to_real(key, value);
    } else if (key == "backtrack_cap") {
      config.backtrack_cap = to_int(key, value);
    } else if (key == "c_interp") {
      config.c_interp = to_real(key, value);
    } else if (key == "threads") {
      config.threads = to_int(key, value);
    } else if (key.rfind("gaussian.", 0) == 0) {
      config.settings[key] = value;
    } else {
      throw FormatError("unknown config key '" + key + "'");
    }
  }
}

RunResult run_adaptive(const RunConfig& config, const Observer& observer, std::vector<Donor> donors) {
  config.validate();
  const Clock clock;
  RunResult result;
  result.problem = make_problem(config.problem, config.settings);
  const ProblemDef& problem = result.problem;
  const int n = config.initial_n > 0 ? config.initial_n : problem.default_initial_n;
  if (problem.domain == DomainId::centered_square && n % 2 != 0)
    throw std::invalid_argument("initial_n must be even so that the singularity is a mesh vertex");

  auto space = std::make_shared<const FeSpace>(std::make_shared<const Mesh>(generate_initial(problem.domain, n)));
  if (space->n_dofs() >= config.max_dofs) throw std::invalid_argument("max_dofs must exceed the initial dofs");

  std::vector<Donor> all;
  for (const auto& file : config.constraint_files) all.push_back(to_donor(load_state(file)));
  for (Donor& d : donors) all.push_back(std::move(d));
  for (const Donor& d : all) check_same_domain(space->mesh(), d.space->mesh(), "a constraint state");
  if (static_cast<int>(all.size()) != config.state_index - 1)
    throw std::invalid_argument("state " + std::to_string(config.state_index) + " needs " +
                                std::to_string(config.state_index - 1) + " constraint states, got " +
                                std::to_string(all.size()));

  GfiParams params;
  params.theta = config.theta;
  params.gamma_stop = config.gamma_stop;
  params.backtrack_cap = config.backtrack_cap;
  params.solver_tol = config.solver_tol;

  Discretization disc = discretize(space, problem.potential, config.solver_tol);
  ConstraintSet constraints = project_constraints_to_space(all, *space, disc.m, config.solver_tol);
  const InitialGuessSpec guess = config.guess ? *config.guess : default_initial_guess(problem, config.state_index);
  Vector psi = make_initial_guess(problem, space, constraints, disc.m, guess).coeffs;

  auto notify = [&](IterateEvent::Kind kind, int loop, int step, double e, double previous, double tau) {
    if (!observer) return;
    IterateEvent ev;
    ev.kind = kind;
    ev.loop = loop;
    ev.step = step;
    ev.energy = e;
    ev.previous_energy = previous;
    ev.norm_defect = std::abs(l2_norm(disc.m, psi) - 1.0);
    ev.constraint_violation = max_constraint_violation(constraints, psi);
    ev.tau = tau;
    observer(ev);
  };
  notify(IterateEvent::Kind::initial, 0, 0, energy(disc.a, psi), std::numeric_limits<double>::quiet_NaN(), 0.0);

  for (int loop = 0;; ++loop) {
    // Flow phase on the current mesh.
    const double e0 = energy(disc.a, psi);
    double e_prev = e0, inc = 0.0, delta = 0.0;
    int steps = 0;
    for (;;) {
      if (steps >= config.max_steps_per_loop)
        throw CapExceeded("more than " + std::to_string(config.max_steps_per_loop) + " flow steps in loop " +
                          std::to_string(loop));
      StepResult r;
      try {
        r = select_time_step(psi, disc, constraints, params);
      } catch (const Stagnation&) {
        inc = 0.0;
        break;
      }
      psi = std::move(r.psi);
      ++steps;
      inc = e_prev - r.energy;
      delta = e0 - r.energy;
      notify(IterateEvent::Kind::step, loop, steps, r.energy, e_prev, r.tau);
      e_prev = r.energy;
      if (!(inc > config.gamma_stop * delta)) break;
    }

    RunRecord rec;
    rec.loop = loop;
    rec.dofs = space->n_dofs();
    rec.gfi_steps = steps;
    rec.energy = e_prev;
    rec.eigenvalue = problem.laplace_report_scaling * 2.0 * e_prev;
    rec.estimator = global_bound(disc, problem.potential, psi, config.c_interp).total_bound;
    rec.inc = inc;
    rec.delta_e = delta;
    rec.wall_ms = clock.elapsed_ms();
    result.records.push_back(rec);
    if (config.on_record) config.on_record(rec);
    if (space->n_dofs() > config.max_dofs) break;

    // Mark by local energy decay, refine each marked element twice.
    const IndicatorField field =
        compute_indicators(make_indicator_input(disc, problem.potential, psi), config.threads);
    const std::vector<int> marked = dorfler_mark(field.values, config.theta);
    RefinementResult first = refine(space->mesh(), marked);
    std::vector<int> children;
    for (int t : marked) children.insert(children.end(), first.map.children[t].begin(), first.map.children[t].end());
    RefinementResult second = refine(first.mesh, children);

    auto mid = std::make_shared<const FeSpace>(std::make_shared<const Mesh>(std::move(first.mesh)));
    auto fine = std::make_shared<const FeSpace>(std::make_shared<const Mesh>(std::move(second.mesh)));
    Vector embedded = prolongate(prolongate(psi, *space, *mid, first.map), *mid, *fine, second.map);
    space = std::move(fine);
    disc = discretize(space, problem.potential, config.solver_tol);
    constraints = project_constraints_to_space(all, *space, disc.m, config.solver_tol);
    psi = project_and_normalize(std::move(embedded), constraints, disc.m);
    notify(IterateEvent::Kind::embedding, loop + 1, 0, energy(disc.a, psi), e_prev, 0.0);
  }

  result.energy = energy(disc.a, psi);
  result.eigenvalue = problem.laplace_report_scaling * 2.0 * result.energy;
  result.psi = {space, std::move(psi)};
  if (!config.out_dir.empty()) emit_outputs(result, config.out_dir);
  return result;
}

SequenceResult run_sequence(const RunConfig& base, int k_states, const Observer& observer) {
  if (k_states < 1) throw std::invalid_argument("at least one state is required");
  if (!base.constraint_files.empty()) throw std::invalid_argument("a sequence starts from the ground state");
  SequenceResult out;
  std::vector<Donor> donors;
  for (int j = 1; j <= k_states; ++j) {
    RunConfig cfg = base;
    cfg.state_index = j;
    if (j > 1) cfg.guess.reset();
    if (!base.out_dir.empty()) cfg.out_dir = base.out_dir / ("state_" + std::to_string(j));
    RunResult r = run_adaptive(cfg, observer, donors);
    donors.push_back(make_donor(r.psi, r.eigenvalue));
    out.states.push_back(std::move(r));
  }
  out.overlaps = Eigen::MatrixXd::Identity(k_states, k_states);
  for (int i = 0; i < k_states; ++i)
    for (int j = 0; j < k_states; ++j)
      if (i != j) out.overlaps(i, j) = cross_inner_product(donors[i], donors[j]);
  if (!base.out_dir.empty()) {
    std::ofstream f(base.out_dir / "overlaps.csv");
    if (!f) throw IoError("cannot write " + (base.out_dir / "overlaps.csv").string());
    f << "i,j,overlap\n";
    for (int i = 0; i < k_states; ++i)
      for (int j = 0; j < k_states; ++j) f << i + 1 << ',' << j + 1 << ',' << format_real(out.overlaps(i, j)) << '\n';
  }
  return out;
}

void write_run_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  out << "N,dofs,gfi_steps,energy,eigenvalue,estimator,inc,deltaE,wall_ms\n";
  for (const RunRecord& r : records) {
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", r.wall_ms);
    out << r.loop << ',' << r.dofs << ',' << r.gfi_steps << ',' << format_real(r.energy) << ','
        << format_real(r.eigenvalue) << ',' << format_real(r.estimator) << ',' << format_real(r.inc) << ','
        << format_real(r.delta_e) << ',' << wall << '\n';
  }
}

void emit_outputs(const RunResult& result, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  {
    const auto path = out_dir / "run.csv";
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path.string());
    write_run_csv(f, result.records);
    if (!f.flush()) throw IoError("write failed: " + path.string());
  }
  save_state(out_dir / "state.gflow", make_saved_state(result.psi, result.eigenvalue, result.energy));
  const auto path = out_dir / "mesh_and_solution.vtk";
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path.string());
  write_vtk(f, result.psi.space->mesh(), result.psi.space->to_vertex_values(result.psi.coeffs));
  if (!f.flush()) throw IoError("write failed: " + path.string());
}

}  // namespace gflow
