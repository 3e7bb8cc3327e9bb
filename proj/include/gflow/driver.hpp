#ifndef GFLOW_DRIVER_HPP
#define GFLOW_DRIVER_HPP

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gflow/flow.hpp"
#include "gflow/io.hpp"
#include "gflow/problems.hpp"

namespace gflow {

/// One line of run.csv, written when a loop's flow phase ends.
struct RunRecord {
  int loop = 0;
  int dofs = 0;
  int gfi_steps = 0;
  double energy = 0.0;
  double eigenvalue = 0.0;  ///< reporting scale
  double estimator = 0.0;
  double inc = 0.0;
  double delta_e = 0.0;
  double wall_ms = 0.0;
};

struct RunConfig {
  std::string problem = "lshape_laplace";
  /// 1 = ground state; state k is computed against k - 1 known states.
  int state_index = 1;
  double theta = 0.5;
  double gamma_stop = 0.1;
  int max_dofs = 100000;
  /// 0 selects the problem default.
  int initial_n = 0;
  std::vector<std::filesystem::path> constraint_files;
  /// Empty: no files are written.
  std::filesystem::path out_dir;
  /// Potential parameters (gaussian.*).
  std::map<std::string, std::string> settings;
  double solver_tol = kDefaultSolverTolerance;
  int backtrack_cap = 30;
  double c_interp = 1.0;
  /// Indicator workers; 0 = hardware concurrency.
  int threads = 1;
  /// Overrides the problem's default guess for this state.
  std::optional<InitialGuessSpec> guess;
  int max_steps_per_loop = 10000;
  /// Called with every record as soon as it is complete.
  std::function<void(const RunRecord&)> on_record;

  /// Throws std::invalid_argument.
  void validate() const;
};

/// Applies theta, gamma, max_dofs, initial_n, solver_tol, backtrack_cap,
/// c_interp, threads and gaussian.* keys.
void apply_settings(RunConfig& config, const std::map<std::string, std::string>& settings);

/// Per-iterate notifications for end-to-end property checks.
struct IterateEvent {
  enum class Kind { initial, step, embedding };
  Kind kind = Kind::initial;
  int loop = 0;
  int step = 0;
  double energy = 0.0;
  /// Energy before the step or the embedding; NaN for the initial guess.
  double previous_energy = 0.0;
  double norm_defect = 0.0;           ///< | ||psi|| - 1 |
  double constraint_violation = 0.0;  ///< max_i |(psi, rep_i)|
  double tau = 0.0;
};
using Observer = std::function<void(const IterateEvent&)>;

struct RunResult {
  WaveFunction psi;
  std::vector<RunRecord> records;
  double energy = 0.0;
  double eigenvalue = 0.0;  ///< reporting scale
  ProblemDef problem;
};

/// The adaptive loop. Constraints come from config.constraint_files followed
/// by `donors`.
RunResult run_adaptive(const RunConfig& config, const Observer& observer = {}, std::vector<Donor> donors = {});

struct SequenceResult {
  std::vector<RunResult> states;
  /// overlaps(i, j) = (psi_i, psi_j)_L2 across meshes.
  Eigen::MatrixXd overlaps;
};

/// States 1..k in succession, each deflated by the previous ones; state j
/// writes to out_dir/state_j.
SequenceResult run_sequence(const RunConfig& base, int k_states, const Observer& observer = {});

void write_run_csv(std::ostream& out, const std::vector<RunRecord>& records);

/// run.csv, state.gflow and mesh_and_solution.vtk in out_dir.
void emit_outputs(const RunResult& result, const std::filesystem::path& out_dir);

}  // namespace gflow

#endif  // GFLOW_DRIVER_HPP
