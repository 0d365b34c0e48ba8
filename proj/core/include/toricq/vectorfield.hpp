#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <vector>

#include "toricq/measures.hpp"
#include "toricq/polytope.hpp"

namespace toricq {

/// Element xi of the torus Lie algebra R^n.
struct SolitonVector {
  Eigen::VectorXd xi;
};

/// g_xi(x) = exp(<xi, x>) / normalizer. Two normalizations coexist: the
/// quantized one makes g * nu_k a probability measure at `level`, the
/// continuous one makes g * nu^T a probability measure.
struct GWeight {
  Eigen::VectorXd xi;
  int level = 1;
  double normalizer_quantized = 1.0;
  double normalizer_continuous = 1.0;

  double quantized(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double continuous(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  /// g(alpha / k) for every weight, quantized normalization.
  Eigen::VectorXd on_weights(const WeightSet& W) const;

  /// g == 1 (xi = 0) in dimension n at level k.
  static GWeight unit(int dim, int level);
  static GWeight make(const Eigen::VectorXd& xi, const WeightSet& W, const DHMeasure& dh);
};

/// Value, gradient and Hessian of a convex exponential functional.
struct ConvexEval {
  double log_value = 0.0;  // exact even when value overflows
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

/// F_k(xi) = k * sum_i exp(<xi, lambda_i> / k) with its gradient and Hessian.
ConvexEval evaluate_Fk(const WeightSet& W, const Eigen::VectorXd& xi);

/// Fut_{V,k}(W) = -d/dt F_k(V + tW) at t = 0.
double futaki_quantized(const WeightSet& W, const Eigen::VectorXd& xi_V, const Eigen::VectorXd& xi_W);

/// Max over coordinate directions of |Fut_{V,k}(e_j)|.
double futaki_residual(const WeightSet& W, const Eigen::VectorXd& xi_V);

struct MinimizerResult {
  SolitonVector V;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iter = 200;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
};

/// V_k: Newton with Armijo backtracking from 0; stops when
/// |grad F_k| <= tol * k * N_k. Throws SingularHessian / NoConvergence.
MinimizerResult minimize_Fk(const WeightSet& W, const NewtonOptions& opts = {});

/// Gauss rule on P accurate to ~1e-14 for the exponentials used here.
DHMeasure continuous_rule(const ReflexivePolytope& P);

/// F(xi) = int_P exp(<xi, x>) dnu^T with gradient and Hessian.
ConvexEval evaluate_F(const DHMeasure& dh, const Eigen::VectorXd& xi);

/// Continuous modified Futaki invariant Fut_V(W) = -int <xi_W, x> e^{<xi_V, x>} dnu^T.
double futaki_continuous(const DHMeasure& dh, const Eigen::VectorXd& xi_V, const Eigen::VectorXd& xi_W);

/// V_KS: minimizer of F (soliton barycenter condition grad F = 0), |grad F| <= tol.
MinimizerResult minimize_F(const DHMeasure& dh, const NewtonOptions& opts = {});

struct VkRow {
  int k = 0;
  int N_k = 0;
  Eigen::VectorXd V_k;
  double F_k_min = 0.0;
  double distance = 0.0;         // |V_k - V_KS|
  double futaki_residual = 0.0;  // max_j |Fut_{V_k,k}(e_j)|
  double quantization_error = 0.0;  // |F_k(V_KS)/(kN_k) - F(V_KS)|
};

struct VkConvergence {
  Eigen::VectorXd V_KS;
  double barycenter_residual = 0.0;
  std::vector<VkRow> rows;
  /// |V_k - V_KS| decreases strictly from some row on and ends decreasing.
  bool eventually_decreasing = true;
};

VkConvergence vk_convergence(const ReflexivePolytope& P, const std::vector<int>& k_list, const NewtonOptions& opts = {});

/// Columns: k, N_k, V_k_1..V_k_n, F_k_min, distance, futaki_residual, quantization_error.
void write_vk_csv(std::ostream& os, const VkConvergence& table);

struct FutakiExpansion {
  /// Coefficient of k^{n+1-i} at index i (Fut^{(0)}, Fut^{(1)}, ...).
  Eigen::VectorXd coefficients;
  double residual = 0.0;  // max |fit - data|
  std::vector<int> levels;
  std::vector<double> values;
};

/// Least-squares fit of Fut_{V,k}(W) in the basis k^{n+1}, ..., k^0. Exact
/// interpolation when xi_V = 0 and |k_list| = n + 2. Throws IllConditionedFit.
FutakiExpansion futaki_expansion_fit(const ReflexivePolytope& P, const Eigen::VectorXd& xi_V, const Eigen::VectorXd& xi_W,
                                     const std::vector<int>& k_list);

}  // namespace toricq
