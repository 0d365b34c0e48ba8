#include "toricq/simplices.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace toricq {

namespace {

int affine_dim(const IntMatrix& verts, const std::vector<int>& idx) {
  if (idx.size() <= 1) return 0;
  Eigen::MatrixXd diff(verts.rows(), static_cast<int>(idx.size()) - 1);
  for (std::size_t i = 1; i < idx.size(); ++i) {
    diff.col(static_cast<int>(i) - 1) = (verts.col(idx[i]) - verts.col(idx[0])).cast<double>();
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(diff);
  lu.setThreshold(1e-9);
  return static_cast<int>(lu.rank());
}

// Pulling triangulation of the face spanned by `face` (sorted vertex indices)
// of dimension d: cone from its first vertex over the subfaces avoiding it.
std::vector<std::vector<int>> triangulate_face(const ReflexivePolytope& P, const std::vector<int>& face, int d) {
  if (d == 0) return {{face.front()}};
  const int apex = face.front();
  std::set<std::vector<int>> subfaces;
  for (int g = 0; g < P.num_facets(); ++g) {
    const auto& on = P.facet_vertices(g);
    std::vector<int> w;
    std::set_intersection(face.begin(), face.end(), on.begin(), on.end(), std::back_inserter(w));
    if (w.empty() || w.size() == face.size()) continue;
    if (std::binary_search(w.begin(), w.end(), apex)) continue;
    if (affine_dim(P.vertices(), w) != d - 1) continue;
    subfaces.insert(std::move(w));
  }
  std::vector<std::vector<int>> out;
  for (const auto& w : subfaces) {
    for (auto s : triangulate_face(P, w, d - 1)) {
      s.push_back(apex);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace

std::vector<LatticeSimplex> fan_triangulation(const ReflexivePolytope& P) {
  const int n = P.dim();
  std::vector<LatticeSimplex> out;
  for (int f = 0; f < P.num_facets(); ++f) {
    for (const auto& s : triangulate_face(P, P.facet_vertices(f), n - 1)) {
      LatticeSimplex S = IntMatrix::Zero(n, n + 1);
      for (int i = 0; i < n; ++i) S.col(i + 1) = P.vertices().col(s[i]);
      out.push_back(std::move(S));
    }
  }
  return out;
}

std::int64_t simplex_normalized_volume(const LatticeSimplex& s) {
  const int n = static_cast<int>(s.rows());
  Eigen::MatrixXd D(n, n);
  for (int i = 0; i < n; ++i) D.col(i) = (s.col(i + 1) - s.col(0)).cast<double>();
  return static_cast<std::int64_t>(std::llround(D.determinant()));
}

void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(order, 0.0);
  weights.assign(order, 0.0);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int j = 2; j <= order; ++j) {
        const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged root.
    double p0 = 1.0;
    double p1 = x;
    for (int j = 2; j <= order; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = order * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = -x;
    nodes[order - 1 - i] = x;
    weights[i] = weights[order - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  if (order % 2 == 1) nodes[order / 2] = 0.0;
}

SimplexRule simplex_rule(const Eigen::MatrixXd& vertices, int order) {
  const int n = static_cast<int>(vertices.rows());
  std::vector<double> gx;
  std::vector<double> gw;
  gauss_legendre(order, gx, gw);
  Eigen::MatrixXd edges(n, n);
  for (int i = 0; i < n; ++i) edges.col(i) = vertices.col(i + 1) - vertices.col(0);
  const double jac = std::abs(edges.determinant());

  long total = 1;
  for (int i = 0; i < n; ++i) total *= order;
  SimplexRule rule;
  rule.points.resize(n, total);
  rule.weights.resize(total);
  std::vector<int> idx(n, 0);
  Eigen::VectorXd lambda(n);
  for (long q = 0; q < total; ++q) {
    double w = jac;
    double remaining = 1.0;
    for (int i = 0; i < n; ++i) {
      const double u = 0.5 * (gx[idx[i]] + 1.0);
      w *= 0.5 * gw[idx[i]];
      lambda[i] = remaining * u;
      if (i < n - 1) w *= std::pow(1.0 - u, n - 1 - i);
      remaining *= (1.0 - u);
    }
    rule.points.col(q) = vertices.col(0) + edges * lambda;
    rule.weights[q] = w;
    for (int i = n - 1; i >= 0; --i) {
      if (++idx[i] < order) break;
      idx[i] = 0;
    }
  }
  return rule;
}

}  // namespace toricq
