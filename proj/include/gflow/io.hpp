#ifndef GFLOW_IO_HPP
#define GFLOW_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>

#include "gflow/fem.hpp"
#include "gflow/flow.hpp"
#include "gflow/mesh.hpp"

namespace gflow {

/// 17 significant digits; parses back to the same double.
std::string format_real(double x);

/// "GFLOW-MESH v1": counts, "x y boundary_flag" lines, "v0 v1 v2" lines.
/// Reading rebuilds adjacency; refinement edges default to the longest edge.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);

/// A computed state: per-vertex values (zero on the boundary) on its mesh.
struct SavedState {
  std::shared_ptr<const Mesh> mesh;
  Vector values;
  double eigenvalue = 0.0;  ///< reporting scale
  double energy = 0.0;
};

SavedState make_saved_state(const WaveFunction& psi, double eigenvalue, double energy);

/// "GFLOW-STATE v1": a mesh block, the vertex values, eigenvalue and energy.
void write_state(std::ostream& out, const SavedState& state);
SavedState read_state(std::istream& in);

/// The state as a function on its own space.
WaveFunction to_wavefunction(const SavedState& state);
Donor to_donor(const SavedState& state);

/// Legacy ASCII VTK with the point scalar "psi".
void write_vtk(std::ostream& out, const Mesh& mesh, const Vector& vertex_values);

/// key=value lines; '#' starts a comment; blank lines ignored.
std::map<std::string, std::string> parse_config(std::istream& in);

// File variants; failures raise IoError naming the path.
void save_mesh(const std::filesystem::path& path, const Mesh& mesh);
Mesh load_mesh(const std::filesystem::path& path);
void save_state(const std::filesystem::path& path, const SavedState& state);
SavedState load_state(const std::filesystem::path& path);
std::map<std::string, std::string> load_config(const std::filesystem::path& path);

}  // namespace gflow

#endif  // GFLOW_IO_HPP
