#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gflow/driver.hpp"
#include "gflow/errors.hpp"

using namespace gflow;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("gflow_driver_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

// CSV text without the wall_ms column.
std::string csv_without_time(const std::vector<RunRecord>& records) {
  std::ostringstream s;
  write_run_csv(s, records);
  std::istringstream in(s.str());
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

struct TraceCheck {
  int steps = 0, embeddings = 0, violations = 0;
  double worst_embedding = 0.0, worst_norm = 0.0, worst_constraint = 0.0;
  double loop_start = NAN;

  Observer observer() {
    return [this](const IterateEvent& e) {
      worst_norm = std::max(worst_norm, e.norm_defect);
      worst_constraint = std::max(worst_constraint, e.constraint_violation);
      switch (e.kind) {
        case IterateEvent::Kind::initial:
          loop_start = e.energy;
          break;
        case IterateEvent::Kind::embedding:
          ++embeddings;
          worst_embedding = std::max(worst_embedding, std::abs(e.energy - e.previous_energy) / e.previous_energy);
          loop_start = e.energy;
          break;
        case IterateEvent::Kind::step:
          ++steps;
          if (!(e.energy < e.previous_energy)) ++violations;
          // The first increment of a loop equals the loop's energy loss.
          if (e.step == 1 && e.previous_energy != loop_start) ++violations;
          break;
      }
    };
  }
};

}  // namespace

TEST_CASE("configuration checks") {
  RunConfig c;
  c.max_dofs = 500;
  c.theta = 1.0;
  CHECK_THROWS_AS(run_adaptive(c), std::invalid_argument);
  c.theta = 0.5;
  c.gamma_stop = 0.0;
  CHECK_THROWS_AS(run_adaptive(c), std::invalid_argument);
  c.gamma_stop = 0.1;
  c.state_index = 2;
  CHECK_THROWS_AS(run_adaptive(c), std::invalid_argument);
  c.state_index = 1;
  c.max_dofs = 10;
  CHECK_THROWS_AS(run_adaptive(c), std::invalid_argument);
  c.max_dofs = 500;
  c.problem = "coulomb_singular";
  c.initial_n = 3;
  CHECK_THROWS_AS(run_adaptive(c), std::invalid_argument);
  c.problem = "nope";
  c.initial_n = 0;
  CHECK_THROWS_AS(run_adaptive(c), UnknownProblem);
  c.problem = "lshape_laplace";
  c.constraint_files = {"/nonexistent/state.gflow"};
  c.state_index = 2;
  CHECK_THROWS_AS(run_adaptive(c), IoError);

  RunConfig s;
  apply_settings(s, {{"theta", "0.3"}, {"gamma", "0.2"}, {"max_dofs", "1234"}, {"initial_n", "6"},
                     {"threads", "2"}, {"gaussian.width", "0.5"}});
  CHECK(s.theta == 0.3);
  CHECK(s.gamma_stop == 0.2);
  CHECK(s.max_dofs == 1234);
  CHECK(s.initial_n == 6);
  CHECK(s.threads == 2);
  CHECK(s.settings.at("gaussian.width") == "0.5");
  CHECK_THROWS_AS(apply_settings(s, {{"thetta", "0.3"}}), FormatError);
  CHECK_THROWS_AS(apply_settings(s, {{"max_dofs", "12.5"}}), FormatError);
}

TEST_CASE("ground state run on the L-shape") {
  RunConfig c;
  c.max_dofs = 2000;
  TraceCheck trace;
  const RunResult r = run_adaptive(c, trace.observer());
  REQUIRE(r.records.size() >= 3);
  CHECK(trace.violations == 0);
  CHECK(trace.steps > 0);
  CHECK(trace.embeddings == static_cast<int>(r.records.size()) - 1);
  CHECK(trace.worst_embedding <= 1e-12);
  CHECK(trace.worst_norm <= 1e-12);
  CHECK(trace.worst_constraint == 0.0);

  for (std::size_t k = 1; k < r.records.size(); ++k) {
    CHECK(r.records[k].energy <= r.records[k - 1].energy * (1 + 1e-12));
    CHECK(r.records[k].dofs > r.records[k - 1].dofs);
    CHECK(r.records[k].loop == static_cast<int>(k));
  }
  CHECK(r.records.back().dofs > c.max_dofs);
  CHECK(r.records[r.records.size() - 2].dofs <= c.max_dofs);
  // Galerkin eigenvalues approach the first Laplace eigenvalue from above.
  const double lambda1 = reference_eigenvalues("lshape_laplace")[0];
  CHECK(r.eigenvalue > lambda1);
  CHECK(r.eigenvalue - lambda1 < r.records.front().eigenvalue - lambda1);
  CHECK(r.eigenvalue - lambda1 < 0.05);
  CHECK(r.eigenvalue == r.records.back().eigenvalue);
  for (const RunRecord& rec : r.records) {
    CHECK(rec.estimator > 0.0);
    CHECK(rec.inc <= rec.delta_e);
  }
}

TEST_CASE("runs are deterministic across thread counts") {
  RunConfig c;
  c.problem = "coulomb_singular";
  c.max_dofs = 1500;
  c.threads = 1;
  const RunResult one = run_adaptive(c);
  c.threads = 3;
  const RunResult three = run_adaptive(c);
  CHECK(csv_without_time(one.records) == csv_without_time(three.records));
  CHECK(one.psi.coeffs == three.psi.coeffs);
}

TEST_CASE("sequence of one state is a plain run") {
  RunConfig c;
  c.max_dofs = 800;
  const RunResult plain = run_adaptive(c);
  const SequenceResult seq = run_sequence(c, 1);
  REQUIRE(seq.states.size() == 1);
  CHECK(csv_without_time(seq.states[0].records) == csv_without_time(plain.records));
  CHECK(seq.overlaps(0, 0) == 1.0);
}

TEST_CASE("two L-shape states: orthogonality, files and reload") {
  RunConfig c;
  c.max_dofs = 3000;
  c.out_dir = scratch("seq");
  TraceCheck trace;
  const SequenceResult seq = run_sequence(c, 2, trace.observer());
  REQUIRE(seq.states.size() == 2);
  CHECK(std::abs(seq.overlaps(0, 1)) <= 1e-6);
  CHECK(seq.overlaps(0, 1) == doctest::Approx(seq.overlaps(1, 0)).epsilon(1e-12));
  CHECK(trace.violations == 0);
  CHECK(trace.worst_norm <= 1e-12);
  CHECK(trace.worst_constraint <= 1e-10);
  CHECK(trace.worst_embedding <= 1e-12);
  const auto refs = reference_eigenvalues("lshape_laplace");
  CHECK(seq.states[1].eigenvalue > refs[1]);
  CHECK(seq.states[1].eigenvalue < refs[1] + 0.3);

  for (int j = 1; j <= 2; ++j) {
    const auto dir = c.out_dir / ("state_" + std::to_string(j));
    REQUIRE(std::filesystem::exists(dir / "run.csv"));
    REQUIRE(std::filesystem::exists(dir / "mesh_and_solution.vtk"));
    const SavedState s = load_state(dir / "state.gflow");
    const WaveFunction w = to_wavefunction(s);
    const Discretization d = discretize(w.space, make_problem("lshape_laplace").potential);
    CHECK(energy(d.a, w.coeffs) == s.energy);
    CHECK(s.energy == seq.states[j - 1].energy);
    CHECK(s.eigenvalue == seq.states[j - 1].eigenvalue);

    std::ifstream csv(dir / "run.csv");
    std::string header, line;
    std::getline(csv, header);
    CHECK(header == "N,dofs,gfi_steps,energy,eigenvalue,estimator,inc,deltaE,wall_ms");
    double previous = INFINITY;
    int rows = 0;
    while (std::getline(csv, line)) {
      std::istringstream fields(line);
      std::string cell;
      for (int k = 0; k < 4; ++k) std::getline(fields, cell, ',');
      const double e = std::stod(cell);
      CHECK(e <= previous * (1 + 1e-12));
      previous = e;
      ++rows;
    }
    CHECK(rows == static_cast<int>(seq.states[j - 1].records.size()));
  }
  CHECK(std::filesystem::exists(c.out_dir / "overlaps.csv"));

  // A second state computed from the saved ground state matches the sequence.
  RunConfig again = c;
  again.state_index = 2;
  again.out_dir.clear();
  again.constraint_files = {c.out_dir / "state_1" / "state.gflow"};
  const RunResult r = run_adaptive(again);
  CHECK(csv_without_time(r.records) == csv_without_time(seq.states[1].records));
  std::filesystem::remove_all(c.out_dir);
}

TEST_CASE("output files") {
  const auto dir = scratch("emit");
  RunResult r;
  auto space = std::make_shared<const FeSpace>(std::make_shared<const Mesh>(generate_initial(DomainId::lshape, 2)));
  r.psi = {space, Vector::Ones(space->n_dofs())};
  emit_outputs(r, dir);
  std::ifstream csv(dir / "run.csv");
  std::stringstream body;
  body << csv.rdbuf();
  CHECK(body.str() == "N,dofs,gfi_steps,energy,eigenvalue,estimator,inc,deltaE,wall_ms\n");
  CHECK(std::filesystem::exists(dir / "state.gflow"));
  CHECK(std::filesystem::exists(dir / "mesh_and_solution.vtk"));
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(emit_outputs(r, "/proc/gflow_forbidden"), IoError);
}

TEST_CASE("the step cap is a hard failure") {
  RunConfig c;
  c.max_dofs = 500;
  c.max_steps_per_loop = 1;
  CHECK_THROWS_AS(run_adaptive(c), CapExceeded);
}

TEST_CASE("Gaussian wells run") {
  RunConfig c;
  c.problem = "gaussian_wells";
  c.max_dofs = 600;
  TraceCheck trace;
  const RunResult r = run_adaptive(c, trace.observer());
  CHECK(trace.violations == 0);
  CHECK(trace.worst_norm <= 1e-12);
  CHECK(r.eigenvalue > 0.0);
  CHECK(std::isfinite(r.records.back().estimator));
}
