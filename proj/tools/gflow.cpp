// Command line front end: run, sequence, verify.
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "gflow/driver.hpp"
#include "gflow/errors.hpp"
#include "gflow/estimator.hpp"

namespace {

struct CommonOptions {
  std::string problem = "lshape_laplace";
  std::string config_file;
  std::string out;
  std::vector<std::string> constraints;
  double theta = 0.5, gamma = 0.1, c_interp = 1.0;
  int max_dofs = 100000, initial_n = 0, threads = 1;
};

void add_common(CLI::App& app, CommonOptions& o, bool constraints) {
  app.add_option("--problem", o.problem, "lshape_laplace, gaussian_wells or coulomb_singular")->required();
  app.add_option("--config", o.config_file, "key=value file; flags given on the command line take precedence");
  app.add_option("--theta", o.theta, "Dorfler bulk parameter");
  app.add_option("--gamma", o.gamma, "flow stopping parameter");
  app.add_option("--max-dofs", o.max_dofs, "stop once the dofs exceed this");
  app.add_option("--initial-n", o.initial_n, "cells per unit length of the initial mesh (0: problem default)");
  app.add_option("--threads", o.threads, "indicator workers (0: all cores)");
  app.add_option("--c-interp", o.c_interp, "interpolation constant of the estimator");
  app.add_option("--out", o.out, "output directory");
  if (constraints) app.add_option("--constraints", o.constraints, "saved states to deflate");
}

gflow::RunConfig make_config(const CLI::App& app, const CommonOptions& o) {
  gflow::RunConfig c;
  c.problem = o.problem;
  if (!o.config_file.empty()) gflow::apply_settings(c, gflow::load_config(o.config_file));
  auto given = [&](const char* flag) { return app.count(flag) > 0; };
  if (given("--theta")) c.theta = o.theta;
  if (given("--gamma")) c.gamma_stop = o.gamma;
  if (given("--max-dofs")) c.max_dofs = o.max_dofs;
  if (given("--initial-n")) c.initial_n = o.initial_n;
  if (given("--threads")) c.threads = o.threads;
  if (given("--c-interp")) c.c_interp = o.c_interp;
  c.out_dir = o.out;
  for (const auto& f : o.constraints) c.constraint_files.emplace_back(f);
  c.on_record = [](const gflow::RunRecord& r) {
    std::printf("loop %3d  dofs %7d  steps %4d  eigenvalue %.12g  estimator %.6g  (%.1f s)\n", r.loop, r.dofs,
                r.gfi_steps, r.eigenvalue, r.estimator, r.wall_ms / 1000.0);
    std::fflush(stdout);
  };
  return c;
}

int verify(const std::string& state_file, const std::string& problem_name,
           const std::vector<std::string>& constraint_files, const std::string& config_file) {
  const gflow::SavedState s = gflow::load_state(state_file);
  std::map<std::string, std::string> settings;
  if (!config_file.empty()) {
    gflow::RunConfig scratch;
    gflow::apply_settings(scratch, gflow::load_config(config_file));
    settings = scratch.settings;
  }
  const gflow::ProblemDef problem = gflow::make_problem(problem_name, settings);
  const gflow::WaveFunction psi = gflow::to_wavefunction(s);
  const gflow::Discretization d = gflow::discretize(psi.space, problem.potential);
  const double e = gflow::energy(d.a, psi.coeffs);
  const double ev = problem.laplace_report_scaling * gflow::eigenvalue_estimate(d.a, d.m, psi.coeffs);
  std::printf("dofs             %d\n", psi.space->n_dofs());
  std::printf("energy           %s (recorded %s)\n", gflow::format_real(e).c_str(), gflow::format_real(s.energy).c_str());
  std::printf("eigenvalue       %s (recorded %s)\n", gflow::format_real(ev).c_str(),
              gflow::format_real(s.eigenvalue).c_str());
  std::printf("norm defect      %.3e\n", std::abs(gflow::l2_norm(d.m, psi.coeffs) - 1.0));
  std::printf("estimator        %.6g\n", gflow::global_bound(d, problem.potential, psi.coeffs).total_bound);
  const gflow::Donor self = gflow::make_donor(psi, s.eigenvalue);
  for (const auto& f : constraint_files) {
    const gflow::Donor other = gflow::to_donor(gflow::load_state(f));
    std::printf("overlap with %s  %.3e\n", f.c_str(), gflow::cross_inner_product(self, other));
  }
  if (!problem.references.empty()) {
    double best = INFINITY;
    for (double r : problem.references) best = std::min(best, std::abs(ev - r) / r);
    std::printf("closest reference (relative)  %.3e\n", best);
  }
  return e == s.energy ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive gradient-flow eigensolver for Schroedinger states"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  int state = 1;
  auto* run = app.add_subcommand("run", "compute one state");
  add_common(*run, run_opts, true);
  run->add_option("--state", state, "1 = ground state; k needs k-1 constraint states");

  CommonOptions seq_opts;
  int states = 2;
  auto* seq = app.add_subcommand("sequence", "compute states 1..k in succession");
  add_common(*seq, seq_opts, false);
  seq->add_option("--states", states, "number of states")->required();

  std::string state_file, verify_problem, verify_config;
  std::vector<std::string> verify_constraints;
  auto* ver = app.add_subcommand("verify", "recompute diagnostics of a saved state");
  ver->add_option("--state", state_file, "GFLOW-STATE file")->required()->check(CLI::ExistingFile);
  ver->add_option("--problem", verify_problem, "problem the state belongs to")->required();
  ver->add_option("--constraints", verify_constraints, "other states to check orthogonality against");
  ver->add_option("--config", verify_config, "potential parameters");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) {
      gflow::RunConfig c = make_config(*run, run_opts);
      c.state_index = state;
      const gflow::RunResult r = gflow::run_adaptive(c);
      std::printf("final eigenvalue %s  energy %s  dofs %d\n", gflow::format_real(r.eigenvalue).c_str(),
                  gflow::format_real(r.energy).c_str(), r.psi.space->n_dofs());
    } else if (*seq) {
      const gflow::RunConfig c = make_config(*seq, seq_opts);
      const gflow::SequenceResult r = gflow::run_sequence(c, states);
      for (std::size_t j = 0; j < r.states.size(); ++j)
        std::printf("state %zu  eigenvalue %s\n", j + 1, gflow::format_real(r.states[j].eigenvalue).c_str());
      std::printf("max |overlap| %.3e\n",
                  (r.overlaps - Eigen::MatrixXd::Identity(states, states)).cwiseAbs().maxCoeff());
    } else {
      return verify(state_file, verify_problem, verify_constraints, verify_config);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
