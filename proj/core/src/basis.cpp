#include "stcut/basis.hpp"

#include <stdexcept>

namespace stcut {

LagrangeInterval::LagrangeInterval(int order) : order_(order) {
  if (order < 1) throw std::invalid_argument("LagrangeInterval: order must be >= 1");
  nodes_.resize(order + 1);
  for (int j = 0; j <= order; ++j) nodes_[j] = static_cast<double>(j) / order;
  nodes_[order] = 1.0;
}

void LagrangeInterval::eval(double s, std::span<double> values) const {
  for (int j = 0; j <= order_; ++j) {
    double v = 1.0;
    for (int m = 0; m <= order_; ++m)
      if (m != j) v *= (s - nodes_[m]) / (nodes_[j] - nodes_[m]);
    values[j] = v;
  }
}

void LagrangeInterval::eval(double s, std::span<double> values, std::span<double> derivatives) const {
  eval(s, values);
  for (int j = 0; j <= order_; ++j) {
    double d = 0.0;
    for (int p = 0; p <= order_; ++p) {
      if (p == j) continue;
      double term = 1.0 / (nodes_[j] - nodes_[p]);
      for (int m = 0; m <= order_; ++m)
        if (m != j && m != p) term *= (s - nodes_[m]) / (nodes_[j] - nodes_[m]);
      d += term;
    }
    derivatives[j] = d;
  }
}

LagrangeTriangle::LagrangeTriangle(int order) : order_(order) {
  if (order < 1) throw std::invalid_argument("LagrangeTriangle: order must be >= 1");
  const int k = order;
  indices_.push_back({k, 0, 0});
  indices_.push_back({0, k, 0});
  indices_.push_back({0, 0, k});
  // edge i joins vertices (i+1)%3 -> (i+2)%3
  for (int i = 0; i < 3; ++i) {
    const int a = (i + 1) % 3;
    const int b = (i + 2) % 3;
    for (int m = 1; m < k; ++m) {
      std::array<int, 3> idx{0, 0, 0};
      idx[a] = k - m;
      idx[b] = m;
      indices_.push_back(idx);
    }
  }
  for (int a1 = 1; a1 < k; ++a1)
    for (int a2 = 1; a1 + a2 < k; ++a2) indices_.push_back({k - a1 - a2, a1, a2});
}

Vec2 LagrangeTriangle::node(int i) const {
  return Vec2(static_cast<double>(indices_[i][1]) / order_,
              static_cast<double>(indices_[i][2]) / order_);
}

namespace {

// R_m(l) = prod_{s<m} (k l - s)/(s+1) and its derivative in l.
inline void silvester(int k, int m, double l, double& value, double& deriv) {
  value = 1.0;
  deriv = 0.0;
  for (int s = 0; s < m; ++s) {
    const double factor = (k * l - s) / (s + 1);
    deriv = deriv * factor + value * k / (s + 1);
    value *= factor;
  }
}

}  // namespace

void LagrangeTriangle::eval(const Vec2& xi, std::span<double> values) const {
  const double lam[3] = {1.0 - xi.x() - xi.y(), xi.x(), xi.y()};
  for (int i = 0; i < size(); ++i) {
    double v = 1.0;
    for (int r = 0; r < 3; ++r) {
      double val, der;
      silvester(order_, indices_[i][r], lam[r], val, der);
      v *= val;
    }
    values[i] = v;
  }
}

void LagrangeTriangle::eval(const Vec2& xi, std::span<double> values,
                            std::span<Vec2> gradients) const {
  const double lam[3] = {1.0 - xi.x() - xi.y(), xi.x(), xi.y()};
  for (int i = 0; i < size(); ++i) {
    double val[3], der[3];
    for (int r = 0; r < 3; ++r) silvester(order_, indices_[i][r], lam[r], val[r], der[r]);
    values[i] = val[0] * val[1] * val[2];
    const double d0 = der[0] * val[1] * val[2];
    const double d1 = val[0] * der[1] * val[2];
    const double d2 = val[0] * val[1] * der[2];
    gradients[i] = Vec2(d1 - d0, d2 - d0);
  }
}

}  // namespace stcut
