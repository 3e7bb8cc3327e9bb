#include <cmath>
#include <numbers>
#include <sstream>

#include "gflow/errors.hpp"
#include "gflow/flow.hpp"
#include "gflow/problems.hpp"

namespace gflow {

namespace {

constexpr double kPi = std::numbers::pi;

double parse_number(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
  if (used == 0 || used != text.size() || !std::isfinite(v))
    throw FormatError("invalid number for " + key + ": '" + text + "'");
  return v;
}

}  // namespace

GaussianWellParams default_gaussian_wells() {
  GaussianWellParams p;
  p.centers = {Point2(kPi / 2, kPi / 2), Point2(3 * kPi / 2, kPi / 2), Point2(kPi / 2, 3 * kPi / 2),
               Point2(3 * kPi / 2, 3 * kPi / 2)};
  return p;
}

GaussianWellParams gaussian_wells_from(const std::map<std::string, std::string>& settings) {
  GaussianWellParams p = default_gaussian_wells();
  if (auto it = settings.find("gaussian.centers"); it != settings.end()) {
    p.centers.clear();
    std::istringstream list(it->second);
    std::string pair;
    while (std::getline(list, pair, ';')) {
      const auto comma = pair.find(',');
      if (comma == std::string::npos) throw FormatError("gaussian.centers expects x,y;x,y;...");
      p.centers.emplace_back(parse_number(it->first, pair.substr(0, comma)),
                             parse_number(it->first, pair.substr(comma + 1)));
    }
    if (p.centers.empty()) throw FormatError("gaussian.centers is empty");
  }
  if (auto it = settings.find("gaussian.amplitude"); it != settings.end())
    p.amplitude = parse_number(it->first, it->second);
  if (auto it = settings.find("gaussian.width"); it != settings.end()) p.width = parse_number(it->first, it->second);
  if (auto it = settings.find("gaussian.shift"); it != settings.end()) p.shift = parse_number(it->first, it->second);
  if (!(p.width > 0.0)) throw InvalidPotential("gaussian.width must be positive");
  return p;
}

InitialGuessSpec constant_guess(double c) {
  InitialGuessSpec g;
  g.kind = InitialGuessSpec::Kind::constant_interior;
  g.constant = c;
  g.label = "constant";
  return g;
}

InitialGuessSpec lshape_antisymmetric_guess() {
  InitialGuessSpec g;
  g.kind = InitialGuessSpec::Kind::interpolated_function;
  g.function = [](const Point2& x) {
    const double s = std::abs(std::sin(kPi * x.x()) * std::sin(kPi * x.y()));
    return x.y() > 1.0 ? s : (x.y() < 1.0 ? -s : 0.0);
  };
  g.label = "abs-sin-sign";
  return g;
}

InitialGuessSpec lshape_product_guess() {
  InitialGuessSpec g;
  g.kind = InitialGuessSpec::Kind::interpolated_function;
  g.function = [](const Point2& x) { return std::sin(kPi * x.x()) * std::sin(kPi * x.y()); };
  g.label = "sin-sin";
  return g;
}

ProblemDef make_problem(std::string_view name, const std::map<std::string, std::string>& settings) {
  ProblemDef p;
  p.name = std::string(name);
  if (name == "lshape_laplace") {
    p.domain = DomainId::lshape;
    p.potential = zero_potential();
    p.default_initial_n = 4;
    p.laplace_report_scaling = 2.0;
    p.references = reference_eigenvalues(name);
    p.reference_note = "Dirichlet Laplace eigenvalues of the L-shape; the third is 2 pi^2 exactly";
  } else if (name == "gaussian_wells") {
    p.domain = DomainId::square_0_2pi;
    p.potential = gaussian_wells_potential(gaussian_wells_from(settings));
    p.default_initial_n = 8;
    p.reference_note = "no reference values";
  } else if (name == "coulomb_singular") {
    p.domain = DomainId::centered_square;
    p.potential = inverse_distance_potential(Point2(0, 0), 0.5);
    p.default_initial_n = 4;
    p.reference_note = "no reference values";
  } else {
    throw UnknownProblem("unknown problem '" + std::string(name) + "'");
  }
  return p;
}

InitialGuessSpec default_initial_guess(const ProblemDef& problem, int state_index) {
  if (problem.domain == DomainId::lshape) {
    if (state_index == 2) return lshape_antisymmetric_guess();
    if (state_index == 3) return lshape_product_guess();
  }
  return constant_guess();
}

WaveFunction make_initial_guess(const ProblemDef&, std::shared_ptr<const FeSpace> space,
                                const ConstraintSet& constraints, const SparseSymMatrix& mass,
                                const InitialGuessSpec& which) {
  Vector raw = which.kind == InitialGuessSpec::Kind::constant_interior
                   ? Vector::Constant(space->n_dofs(), which.constant)
                   : interpolate(*space, which.function);
  Vector coeffs = project_and_normalize(std::move(raw), constraints, mass);
  return WaveFunction{std::move(space), std::move(coeffs)};
}

std::vector<double> reference_eigenvalues(std::string_view name) {
  if (name != "lshape_laplace") return {};
  return {9.6397238440219, 15.1972519264820, 2.0 * kPi * kPi, 29.5214811141475};
}

}  // namespace gflow
