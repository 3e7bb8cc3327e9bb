#include <algorithm>
#include <cmath>
#include <numbers>

#include "gflow/errors.hpp"
#include "gflow/fem.hpp"
#include "gflow/problems.hpp"
#include "gflow/quadrature.hpp"

namespace gflow {

GaussLegendre gauss_legendre(int n) {
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

namespace {

double point_segment_distance(const Point2& p, const Point2& a, const Point2& b) {
  const Point2 ab = b - a;
  const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (a + t * ab - p).norm();
}

double distance_to_triangle(const Point2& p, const std::array<Point2, 3>& t) {
  if (orient(t[0], t[1], p) >= 0 && orient(t[1], t[2], p) >= 0 && orient(t[2], t[0], p) >= 0) return 0.0;
  return std::min({point_segment_distance(p, t[0], t[1]), point_segment_distance(p, t[1], t[2]),
                   point_segment_distance(p, t[2], t[0])});
}

// Star decomposition around the singularity, each piece mapped so that the
// radial integral is polynomial and the angular one has a closed form.
Eigen::Matrix3d moments_closed_form(const std::array<Point2, 3>& t, const Point2& s) {
  const Eigen::Matrix<double, 2, 3> g = barycentric_gradients(t);
  Eigen::Vector3d at_s;
  for (int a = 0; a < 3; ++a) at_s[a] = g.col(a).dot(s - t[(a + 1) % 3]);
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (int k = 0; k < 3; ++k) {
    const Point2& pa = t[k];
    const Point2& pb = t[(k + 1) % 3];
    const Point2 as = pa - s;
    const Point2 ab = pb - pa;
    const double o = as.x() * ab.y() - as.y() * ab.x();
    if (std::abs(o) <= 1e-15 * as.norm() * ab.norm()) continue;
    const double gam = ab.squaredNorm();
    const double bet = 2.0 * as.dot(ab);
    const double alp = as.squaredNorm();
    const double sd = std::abs(o);
    const double q0 = std::sqrt(alp);
    const double q1 = (pb - s).norm();
    const double i0 = (std::asinh((gam + 0.5 * bet) / sd) - std::asinh(0.5 * bet / sd)) / std::sqrt(gam);
    const double i1 = (q1 - q0) / gam - bet / (2.0 * gam) * i0;
    const double i2 = ((2.0 * gam - 3.0 * bet) * q1 + 3.0 * bet * q0) / (4.0 * gam * gam) +
                      (3.0 * bet * bet - 4.0 * alp * gam) / (8.0 * gam * gam) * i0;
    Eigen::Vector3d c, d;
    for (int a = 0; a < 3; ++a) {
      c[a] = g.col(a).dot(as);
      d[a] = g.col(a).dot(ab);
    }
    for (int a = 0; a < 3; ++a) {
      for (int b = a; b < 3; ++b) {
        const double p0 = at_s[a] * at_s[b] + 0.5 * (at_s[a] * c[b] + at_s[b] * c[a]) + c[a] * c[b] / 3.0;
        const double p1 = 0.5 * (at_s[a] * d[b] + at_s[b] * d[a]) + (c[a] * d[b] + c[b] * d[a]) / 3.0;
        const double p2 = d[a] * d[b] / 3.0;
        m(a, b) += o * (p0 * i0 + p1 * i1 + p2 * i2);
      }
    }
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < a; ++b) m(a, b) = m(b, a);
  return m;
}

Eigen::Matrix3d moments_collapsed_gauss(const std::array<Point2, 3>& t, const Point2& s, int n) {
  static const GaussLegendre rule10 = gauss_legendre(10);
  static const GaussLegendre rule12 = gauss_legendre(12);
  static const GaussLegendre rule16 = gauss_legendre(16);
  const GaussLegendre& gl = n == 10 ? rule10 : n == 12 ? rule12 : rule16;
  const double twice_area = orient(t[0], t[1], t[2]);
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double xi = gl.nodes[i];
      const double eta = gl.nodes[j] * (1.0 - xi);
      const Eigen::Vector3d lam(1.0 - xi - eta, xi, eta);
      const Point2 x = lam[0] * t[0] + lam[1] * t[1] + lam[2] * t[2];
      const double w = gl.weights[i] * gl.weights[j] * (1.0 - xi) * twice_area / (x - s).norm();
      m.noalias() += w * (lam * lam.transpose());
    }
  }
  return m;
}

}  // namespace

Eigen::Matrix3d inverse_distance_moments(const std::array<Point2, 3>& tri, const Point2& center) {
  double diam = 0.0;
  for (int k = 0; k < 3; ++k) diam = std::max(diam, (tri[k] - tri[(k + 1) % 3]).norm());
  const double ratio = distance_to_triangle(center, tri) / diam;
  // The closed form cancels badly at moderate distances; Gauss rules are
  // accurate to round-off once the pole is half a diameter away.
  if (ratio < 0.5) return moments_closed_form(tri, center);
  return moments_collapsed_gauss(tri, center, ratio < 1.0 ? 16 : ratio < 4.0 ? 12 : 10);
}

Potential inverse_distance_potential(const Point2& center, double strength) {
  Potential p;
  p.value = [center, strength](const Point2& x) { return strength / (x - center).norm(); };
  p.element_moments = [center, strength](const std::array<Point2, 3>& t) {
    return (strength * inverse_distance_moments(t, center)).eval();
  };
  return p;
}

Potential gaussian_wells_potential(const GaussianWellParams& params) {
  if (!(params.width > 0.0)) throw InvalidPotential("Gaussian width must be positive");
  Potential p;
  p.value = [params](const Point2& x) {
    double sum = 0.0;
    for (const Point2& c : params.centers)
      sum += params.amplitude * std::exp(-(x - c).squaredNorm() / (2.0 * params.width * params.width));
    // Overlapping bells leave round-off below zero at the centers.
    return std::max(0.0, params.shift - sum);
  };
  return p;
}

}  // namespace gflow
