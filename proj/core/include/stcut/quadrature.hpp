#pragma once

#include <vector>

#include "stcut/mesh.hpp"

namespace stcut {

/// Gauss-Legendre rule on [0,1]; weights sum to 1.
struct Rule1D {
  std::vector<double> points;
  std::vector<double> weights;
};

/// Rule on the reference triangle (0,0),(1,0),(0,1); weights sum to 1/2.
struct TriangleRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [0,1], exact for degree 2n-1.
const Rule1D& gauss_legendre(int n);

/// Collapsed (Duffy) Gauss rule on the reference triangle exact for total
/// degree `degree`. All weights are positive.
const TriangleRule& triangle_rule(int degree);

}  // namespace stcut
