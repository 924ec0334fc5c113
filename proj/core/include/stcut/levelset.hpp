#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stcut/basis.hpp"
#include "stcut/mesh.hpp"

namespace stcut {

using SpaceTimeScalar = std::function<double(const Vec2&, double)>;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform partition of [t0, T] into N slabs I_n = [t_{n-1}, t_n], n = 1..N.
class TimePartition {
 public:
  TimePartition(double t0, double t_end, int num_slabs);

  double t0() const { return t0_; }
  double t_end() const { return t_end_; }
  int num_slabs() const { return n_; }
  double dt() const { return (t_end_ - t0_) / n_; }
  /// t_n for n = 0..N. Endpoints are returned exactly.
  double node(int n) const;
  /// [t_{n-1}, t_n] for slab n = 1..N.
  std::pair<double, double> slab(int n) const { return {node(n - 1), node(n)}; }

 private:
  double t0_;
  double t_end_;
  int n_;
};

enum class Mark : std::uint8_t { neg, pos, cut };

/// Discrete level set on one slab: vertex values at q_t+1 uniform temporal
/// nodes of the closed slab, interpolated P1 in space and P^{q_t} in time.
class SlabLevelSet {
 public:
  SlabLevelSet(const Mesh& mesh, int slab, double t_begin, double t_end, int q_t,
               std::vector<std::vector<double>> nodal_values);

  const Mesh& mesh() const { return *mesh_; }
  int slab() const { return slab_; }
  int q_t() const { return q_t_; }
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  /// nodal_values()[j][v]: value at vertex v and temporal node j.
  const std::vector<std::vector<double>>& nodal_values() const { return values_; }

  struct Value {
    double value;
    double dt;
  };
  /// phi^lin on element e at reference point xi and time t in the closed slab.
  Value eval(int e, const Vec2& xi, double t) const;

  /// Vertex values of element e at time t, with values below 1e-14 of the
  /// local scale snapped to zero. Exact nodal data is returned at temporal nodes.
  std::array<double, 3> element_values(int e, double t) const;

  /// Sorted times strictly inside the slab where a vertex value of element e
  /// changes sign. Between consecutive times the cut topology of e is fixed.
  std::vector<double> sign_change_times(int e) const;

 private:
  void temporal_weights(double t, std::span<double> w, std::span<double> dw) const;

  const Mesh* mesh_;
  int slab_;
  double t_begin_;
  double t_end_;
  int q_t_;
  double vertex_value(int v, double t) const;
  LagrangeInterval time_basis_;
  std::vector<std::vector<double>> values_;
};

/// Samples phi at mesh vertices and uniform temporal nodes of slab n (1-based).
SlabLevelSet sample_levelset(const SpaceTimeScalar& phi, const Mesh& mesh,
                             const TimePartition& partition, int n, int q_t);

/// Mark from three vertex values; zero counts as inside.
Mark mark_from_values(const std::array<double, 3>& values);

struct SlabGeometry {
  int slab = 0;
  std::vector<double> sample_times;
  std::vector<Mark> marks;          ///< per element, aggregated over sample times
  std::vector<std::uint8_t> active; ///< per element
  std::vector<int> active_elements;
  std::vector<int> ghost_facets;    ///< interior facets with both neighbours active

  bool is_active(int e) const { return active[e] != 0; }
  int num_cut() const;
};

/// Marks every element over the closed slab. Besides `sample_times`, each
/// element is also tested between its sign-change times, so an element cut
/// only briefly is still marked cut.
SlabGeometry classify_slab(const SlabLevelSet& ls, std::span<const double> sample_times);

/// Slab endpoints plus the Gauss-Legendre times of each requested rule size.
std::vector<double> classification_times(double t_begin, double t_end,
                                         std::span<const int> gauss_point_counts);

}  // namespace stcut
