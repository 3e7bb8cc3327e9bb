#include "gflow/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gflow/errors.hpp"

namespace gflow {

namespace {

constexpr const char* kMeshHeader = "GFLOW-MESH v1";
constexpr const char* kStateHeader = "GFLOW-STATE v1";

std::string next_token(std::istream& in, const char* what) {
  std::string token;
  if (!(in >> token)) throw FormatError(std::string("unexpected end of input reading ") + what);
  return token;
}

double read_real(std::istream& in, const char* what) {
  const std::string t = next_token(in, what);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size()) throw FormatError(std::string("bad ") + what + ": '" + t + "'");
  return v;
}

long read_integer(std::istream& in, const char* what) {
  const std::string t = next_token(in, what);
  long v = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size()) throw FormatError(std::string("bad ") + what + ": '" + t + "'");
  return v;
}

void expect_header(std::istream& in, const char* header) {
  std::string line;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header) throw FormatError(std::string("expected header '") + header + "', found '" + line + "'");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

template <typename T, typename F>
T with_path(const std::filesystem::path& path, F&& f) {
  try {
    return f();
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << kMeshHeader << '\n' << mesh.n_vertices() << '\n' << mesh.n_triangles() << '\n';
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    const Point2& p = mesh.vertex(v);
    out << format_real(p.x()) << ' ' << format_real(p.y()) << ' ' << (mesh.boundary_vertex(v) ? 1 : 0) << '\n';
  }
  for (const Triangle& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

Mesh read_mesh(std::istream& in) {
  expect_header(in, kMeshHeader);
  const long nv = read_integer(in, "vertex count");
  const long nt = read_integer(in, "triangle count");
  if (nv < 3 || nt < 1) throw FormatError("mesh needs at least one triangle");
  std::vector<Point2> vertices(nv);
  std::vector<int> flags(nv);
  for (long v = 0; v < nv; ++v) {
    vertices[v].x() = read_real(in, "vertex coordinate");
    vertices[v].y() = read_real(in, "vertex coordinate");
    const long f = read_integer(in, "boundary flag");
    if (f != 0 && f != 1) throw FormatError("boundary flag must be 0 or 1");
    flags[v] = static_cast<int>(f);
  }
  std::vector<Triangle> triangles(nt);
  for (long t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      const long v = read_integer(in, "triangle vertex");
      if (v < 0 || v >= nv) throw FormatError("triangle vertex index out of range");
      triangles[t][k] = static_cast<int>(v);
    }
  }
  Mesh mesh(std::move(vertices), std::move(triangles));
  for (long v = 0; v < nv; ++v)
    if (mesh.boundary_vertex(static_cast<int>(v)) != (flags[v] == 1))
      throw FormatError("boundary flag of vertex " + std::to_string(v) + " contradicts the topology");
  return mesh;
}

SavedState make_saved_state(const WaveFunction& psi, double eigenvalue, double energy) {
  return {psi.space->mesh_ptr(), psi.space->to_vertex_values(psi.coeffs), eigenvalue, energy};
}

void write_state(std::ostream& out, const SavedState& state) {
  out << kStateHeader << '\n';
  write_mesh(out, *state.mesh);
  for (Eigen::Index v = 0; v < state.values.size(); ++v) out << format_real(state.values[v]) << '\n';
  out << format_real(state.eigenvalue) << '\n' << format_real(state.energy) << '\n';
}

SavedState read_state(std::istream& in) {
  expect_header(in, kStateHeader);
  SavedState s;
  s.mesh = std::make_shared<const Mesh>(read_mesh(in));
  s.values.resize(s.mesh->n_vertices());
  for (int v = 0; v < s.mesh->n_vertices(); ++v) {
    s.values[v] = read_real(in, "vertex value");
    if (s.mesh->boundary_vertex(v) && s.values[v] != 0.0)
      throw FormatError("nonzero value at boundary vertex " + std::to_string(v));
  }
  s.eigenvalue = read_real(in, "eigenvalue");
  s.energy = read_real(in, "energy");
  std::string extra;
  if (in >> extra) throw FormatError("trailing data '" + extra + "'");
  return s;
}

WaveFunction to_wavefunction(const SavedState& state) {
  auto space = std::make_shared<const FeSpace>(state.mesh);
  Vector coeffs = space->from_vertex_values(state.values);
  return {std::move(space), std::move(coeffs)};
}

Donor to_donor(const SavedState& state) { return make_donor(to_wavefunction(state), state.eigenvalue); }

void write_vtk(std::ostream& out, const Mesh& mesh, const Vector& vertex_values) {
  const int nv = mesh.n_vertices(), nt = mesh.n_triangles();
  out << "# vtk DataFile Version 3.0\ngflow solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const Point2& p : mesh.vertices()) out << format_real(p.x()) << ' ' << format_real(p.y()) << " 0\n";
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const Triangle& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << nt << '\n';
  for (int t = 0; t < nt; ++t) out << "5\n";
  out << "POINT_DATA " << nv << "\nSCALARS psi double 1\nLOOKUP_TABLE default\n";
  for (Eigen::Index v = 0; v < vertex_values.size(); ++v) out << format_real(vertex_values[v]) << '\n';
}

std::map<std::string, std::string> parse_config(std::istream& in) {
  std::map<std::string, std::string> out;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    if (key.empty()) throw FormatError("config line " + std::to_string(number) + ": expected key=value");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

void save_mesh(const std::filesystem::path& path, const Mesh& mesh) {
  auto out = open_out(path);
  write_mesh(out, mesh);
  finish(out, path);
}

Mesh load_mesh(const std::filesystem::path& path) {
  auto in = open_in(path);
  return with_path<Mesh>(path, [&] { return read_mesh(in); });
}

void save_state(const std::filesystem::path& path, const SavedState& state) {
  auto out = open_out(path);
  write_state(out, state);
  finish(out, path);
}

SavedState load_state(const std::filesystem::path& path) {
  auto in = open_in(path);
  return with_path<SavedState>(path, [&] { return read_state(in); });
}

std::map<std::string, std::string> load_config(const std::filesystem::path& path) {
  auto in = open_in(path);
  return with_path<std::map<std::string, std::string>>(path, [&] { return parse_config(in); });
}

}  // namespace gflow
