#pragma once

#include <Eigen/Core>

#include <cmath>
#include <map>
#include <memory>
#include <vector>

#include "toricq/error.hpp"
#include "toricq/polytope.hpp"

namespace toricq {

using LongVector = std::vector<long double>;

/// Quadrature over R^n truncated to { t : h_P(t) <= H }, h_P the support
/// function of P. Every integrand in this library is bounded by
/// C exp(-h_P(t)), so the discarded mass is O(H^{n-1} e^{-H}).
///
/// R^n is split into the cones of the face fan of conv(nu_F); on the cone
/// spanned by -nu_1, ..., -nu_n we use t = -sum a_i nu_i with a >= 0, where
/// h_P(t) = sum a_i. The integrands concentrate along the rays -nu_F
/// (ridges of width ~ k^{-1/2} for weights on the facet F), which become
/// coordinate axes of the cones and meet the finest panels.
struct QuadratureSpec {
  double tolerance = 1e-10;
  int order = 10;               // Gauss points per panel
  double core_extent = 6.0;     // uniform panels on [0, core_extent] in each cone coordinate
  double core_width = 0.5;
  double growth = 1.5;          // tail panel growth factor
  double max_width = 4.0;       // tail panel cap
  int max_refinements = 3;
};

/// Truncation level H for a tolerance: e^{-H} H^{n-1} well below tol.
double truncation_level(double tolerance, int dim, int refinement);

/// Tensor Gauss-Legendre grid on one cone, t = generators * a.
struct GridPatch {
  IntMatrix generators;  // dim x dim, columns -nu_i
  std::vector<std::vector<double>> axis_nodes;
  std::vector<std::vector<double>> axis_weights;
  std::vector<int> shape;
  int offset = 0;  // first flat node index of this patch
  int size = 0;
};

/// All cone patches; flat node index runs patch by patch, row-major within a
/// patch. Nodes outside the truncated region carry weight 0.
struct QuadGrid {
  int level = 0;
  int dim = 0;
  double truncation = 0.0;  // H
  std::vector<GridPatch> patches;
  Eigen::VectorXd w;  // includes the cone Jacobians

  int size() const { return static_cast<int>(w.size()); }
  Eigen::VectorXd node(int q) const;
  /// dim x Q
  Eigen::MatrixXd nodes() const;
};

/// Integer box lo..hi per axis, row-major layout.
struct ExponentBox {
  std::vector<int> lo;
  std::vector<int> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  int extent(int i) const { return hi[i] - lo[i] + 1; }
  int size() const;
  int index(const IntVector& beta) const;

  static ExponentBox of(const IntMatrix& points);
};

/// Separable exponential transforms between a lattice support and a grid:
///   synthesize: c -> sum_alpha c_alpha e^{<alpha, t_q>}   (support -> grid)
///   analyze:    f -> sum_q f_q e^{<alpha, t_q>}           (grid -> support)
/// On every patch e^{<alpha, t>} = prod_i e^{a_i <alpha, g_i>}, so both
/// factor into one small matrix product per axis. Extended precision keeps
/// the exponentials representable over the whole truncated region.
class ExpBasis {
 public:
  ExpBasis(const QuadGrid& grid, const IntMatrix& support);

  int support_size() const { return support_size_; }
  LongVector synthesize(const LongVector& coeffs) const;
  LongVector analyze(const LongVector& values) const;

 private:
  struct PatchBasis {
    ExponentBox box;                                 // exponents beta = G^T alpha
    std::vector<int> slot;                           // support column -> box index
    std::vector<std::vector<long double>> tables;    // per axis: nodes x extent
  };
  const QuadGrid* grid_;
  int support_size_;
  std::vector<PatchBasis> patches_;
};

/// Result of an integral checked against one further refinement.
struct Refined {
  Eigen::VectorXd values;
  double error = 0.0;  // max |fine - coarse| relative to the acceptance scale
  int level = 0;
};

/// Grids over the truncated region of one polytope, cached by refinement level.
/// Not safe for concurrent use (lazy cache).
class QuadratureEngine {
 public:
  QuadratureEngine(const ReflexivePolytope& P, QuadratureSpec spec = {});

  const QuadratureSpec& spec() const { return spec_; }
  int dim() const { return dim_; }
  const std::vector<IntMatrix>& cones() const { return cones_; }
  const QuadGrid& grid(int level) const;

  /// Evaluates eval(grid) at successive levels until two consecutive results
  /// agree: |fine_i - coarse_i| <= tol * max(|fine_i|, abs_floor).
  template <class Eval>
  Refined refine(Eval&& eval, double abs_floor = 0.0, int start_level = 0) const {
    Eigen::VectorXd coarse = eval(grid(start_level));
    for (int level = start_level + 1; level <= start_level + spec_.max_refinements; ++level) {
      Eigen::VectorXd fine = eval(grid(level));
      double worst = 0.0;
      for (int i = 0; i < fine.size(); ++i) {
        const double scale = std::max(std::abs(fine[i]), abs_floor);
        const double d = std::abs(fine[i] - coarse[i]);
        worst = std::max(worst, scale > 0.0 ? d / scale : d);
      }
      if (worst <= spec_.tolerance) return Refined{std::move(fine), worst, level};
      coarse = std::move(fine);
    }
    throw Error(ErrorCode::QuadratureNotConverged,
                "integral not stable after " + std::to_string(spec_.max_refinements) + " refinements");
  }

 private:
  QuadratureSpec spec_;
  int dim_;
  std::vector<IntMatrix> cones_;  // generator matrices
  mutable std::map<int, std::unique_ptr<QuadGrid>> cache_;
};

/// Gauss-Legendre rule mapped to [a, b].
void gauss_rule(int order, double a, double b, std::vector<double>& x, std::vector<double>& w);

}  // namespace toricq
