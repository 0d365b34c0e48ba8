#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "toricq/polytope.hpp"

namespace toricq {

/// Lattice simplex stored as columns (dim x (dim+1)).
using LatticeSimplex = IntMatrix;

/// Triangulation of P coning the origin over a pulling triangulation of
/// every facet. Column 0 of each simplex is the origin.
std::vector<LatticeSimplex> fan_triangulation(const ReflexivePolytope& P);

/// Signed determinant of (v1 - v0, ..., vn - v0); n! times the signed volume.
std::int64_t simplex_normalized_volume(const LatticeSimplex& s);

/// Quadrature rule on an n-simplex built from collapsed (Duffy) tensor
/// Gauss-Legendre; exact for polynomials of degree <= 2*order - 1 - (n - 1).
struct SimplexRule {
  Eigen::MatrixXd points;   // dim x Q
  Eigen::VectorXd weights;  // sum = volume of the simplex
};

SimplexRule simplex_rule(const Eigen::MatrixXd& vertices, int order);

/// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace toricq
