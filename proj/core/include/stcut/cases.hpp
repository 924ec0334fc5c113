#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "stcut/analysis.hpp"
#include "stcut/forms.hpp"
#include "stcut/mesh.hpp"

namespace stcut {

/// Manufactured transport problem on a moving domain {phi < 0}.
struct CaseDefinition {
  std::string name;
  Box box;
  double t0 = 0.0;
  double t_end = 1.0;
  SpaceTimeScalar levelset;
  VectorField velocity;
  SpaceTimeScalar divergence;
  ExactSolution exact;
  SpaceTimeScalar source;  ///< dt u + w.grad u + div(w) u
  std::function<double(const Vec2&)> initial;
  /// refinement level i -> (target h, number of slabs)
  std::function<std::pair<double, int>(int)> schedule;

  TransportData transport_data() const;
};

/// Circle of radius 1 expanding with w = beta (x, y) to radius e^beta at T = 1
/// in [-3.5, 3.5]^2; u = cos(pi r) sin(pi t / 2) with r = e^{-beta t} |x|.
/// Levels follow h = 0.9 / 2^i and dt = T / 2^{i+1}.
CaseDefinition expanding_circle_case(double beta = 1.0);

/// Unit circle translated by a constant velocity through [-2.5, 2.5]^2.
CaseDefinition translating_circle_case();

/// Case by name ("expanding_circle", "translating_circle").
CaseDefinition make_case(const std::string& name);
std::vector<std::string> case_names();

struct FieldCheck {
  int points = 0;
  double max_error = 0.0;
};

/// Compares the closed-form source with central differences of
/// dt u + div(w u) at random points of the box x [t0, T].
FieldCheck check_source(const CaseDefinition& c, int points = 1000, std::uint64_t seed = 1);

/// Compares exact.grad and exact.dt with central differences of exact.u.
FieldCheck check_exact_derivatives(const CaseDefinition& c, int points = 1000,
                                   std::uint64_t seed = 3);

/// Central-difference material derivative (dt + w.grad) phi at random points
/// with phi in (-1, 1); zero when the boundary moves with w.
FieldCheck check_levelset_transport(const CaseDefinition& c, int points = 1000,
                                    std::uint64_t seed = 2);

}  // namespace stcut
