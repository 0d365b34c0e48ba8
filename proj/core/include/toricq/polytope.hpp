#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "toricq/error.hpp"

namespace toricq {

using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic>;
using IntVector = Eigen::Matrix<int, Eigen::Dynamic, 1>;

/// Moment polytope of a toric Fano manifold, P = { x : <x, nu_F> >= -1 }.
///
/// Instances are only produced by validate(); every instance is reflexive:
/// primitive facet normals, the origin in the interior, integral vertices,
/// bounded and full-dimensional. Immutable after construction.
class ReflexivePolytope {
 public:
  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(normals_.rows()); }
  int num_facets() const { return static_cast<int>(normals_.cols()); }
  int num_vertices() const { return static_cast<int>(vertices_.cols()); }

  /// Facet normals as columns (dim x num_facets).
  const IntMatrix& facet_normals() const { return normals_; }
  /// Vertices as columns (dim x num_vertices), lexicographically sorted.
  const IntMatrix& vertices() const { return vertices_; }
  /// Indices of the vertices lying on facet f.
  const std::vector<int>& facet_vertices(int f) const { return facet_vertices_[f]; }

  /// Lebesgue volume of P.
  double volume() const { return volume_; }

  /// min_F (<x, nu_F> + 1); positive iff x is interior.
  double facet_margin(std::span<const double> x) const;
  double facet_margin(const Eigen::VectorXd& x) const {
    return facet_margin(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  }

  /// Exact membership test for the lattice point alpha in kP.
  bool contains_scaled(const IntVector& alpha, int k) const;

  /// Support function h_P(t) = max over vertices of <u, t>.
  double support_function(std::span<const double> t) const;

  /// Euclidean distance from the origin to the nearest facet hyperplane.
  double inradius() const;

  /// Integer bounding box of P, per axis [lo, hi].
  IntVector box_lo() const { return vertices_.rowwise().minCoeff(); }
  IntVector box_hi() const { return vertices_.rowwise().maxCoeff(); }

 private:
  friend ReflexivePolytope validate(const std::vector<IntVector>& normals, int dim, std::string name);

  std::string name_;
  IntMatrix normals_;
  IntMatrix vertices_;
  std::vector<std::vector<int>> facet_vertices_;
  double volume_ = 0.0;
};

/// Validates raw facet normals and derives the vertices.
/// Throws Error with NonPrimitiveNormal, OriginNotInterior, NonIntegralVertex,
/// Unbounded or MalformedInput naming the violated invariant.
ReflexivePolytope validate(const std::vector<IntVector>& normals, int dim, std::string name = "");

/// Torus weights of H^0(X, -kK_X): the lattice points of kP.
struct WeightSet {
  int level = 1;
  /// dim x N_k, columns sorted lexicographically.
  IntMatrix points;

  int size() const { return static_cast<int>(points.cols()); }
  int dim() const { return static_cast<int>(points.rows()); }
  /// Same points as doubles, scaled by 1/level.
  Eigen::MatrixXd scaled() const { return points.cast<double>() / static_cast<double>(level); }
  /// Column index of alpha, or -1.
  int index_of(const IntVector& alpha) const;
};

WeightSet lattice_points(const ReflexivePolytope& P, int k);

/// Lattice automorphisms x -> A x (A in GL(n, Z)) mapping P onto itself.
/// Always contains the identity first.
std::vector<IntMatrix> lattice_symmetries(const ReflexivePolytope& P);

/// Permutation induced on the lattice points by a symmetry: perm[i] = index of A * points[i].
std::vector<int> induced_permutation(const WeightSet& W, const IntMatrix& A);

bool is_centrally_symmetric(const ReflexivePolytope& P);

// JSON: { "name": string, "dim": integer, "facet_normals": [[int,...],...] }
ReflexivePolytope polytope_from_json(const std::string& text);
ReflexivePolytope load_polytope(const std::filesystem::path& path);
std::string polytope_to_json(const ReflexivePolytope& P);

/// One row per lattice point, header x1,...,xn.
void write_weights_csv(std::ostream& os, const WeightSet& W);

}  // namespace toricq
