#include "stcut/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace stcut {

namespace {

constexpr int kMaxPoints = 40;
constexpr int kMaxDegree = 2 * kMaxPoints - 3;

Rule1D compute_gauss_legendre(int n) {
  Rule1D rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton on P_n starting from the Chebyshev-like guess
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = pk;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    // map [-1,1] -> [0,1], ascending order
    rule.points[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

TriangleRule compute_triangle_rule(int degree) {
  const int nu = (degree + 3) / 2;  // collapsed direction carries the Jacobian
  const int nv = (degree + 2) / 2;
  const Rule1D& gu = gauss_legendre(nu);
  const Rule1D& gv = gauss_legendre(nv);
  TriangleRule rule;
  for (int a = 0; a < nu; ++a) {
    for (int b = 0; b < nv; ++b) {
      const double u = gu.points[a];
      const double v = gv.points[b];
      rule.points.emplace_back(u, (1.0 - u) * v);
      rule.weights.push_back(gu.weights[a] * gv.weights[b] * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace

const Rule1D& gauss_legendre(int n) {
  static const std::vector<Rule1D> cache = [] {
    std::vector<Rule1D> rules(kMaxPoints + 1);
    for (int k = 1; k <= kMaxPoints; ++k) rules[k] = compute_gauss_legendre(k);
    return rules;
  }();
  if (n < 1 || n > kMaxPoints) throw std::out_of_range("gauss_legendre: unsupported point count");
  return cache[n];
}

const TriangleRule& triangle_rule(int degree) {
  static const std::vector<TriangleRule> cache = [] {
    std::vector<TriangleRule> rules(kMaxDegree + 1);
    for (int d = 0; d <= kMaxDegree; ++d) rules[d] = compute_triangle_rule(d);
    return rules;
  }();
  if (degree < 0 || degree > kMaxDegree) throw std::out_of_range("triangle_rule: unsupported degree");
  return cache[degree];
}

}  // namespace stcut
