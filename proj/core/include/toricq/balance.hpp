#pragma once

#include <Eigen/Core>

#include <iosfwd>
#include <optional>
#include <vector>

#include "toricq/qfunctionals.hpp"
#include "toricq/quantization.hpp"
#include "toricq/vectorfield.hpp"

namespace toricq {

/// Iterate of the Hilb o FS map. H is kept normalized: the least-squares
/// affine fit a + <b, alpha> of log(H / H0) is removed, so that
/// sum log(H/H0) = 0 (scale) and sum alpha log(H/H0) = 0 (torus translation).
struct BalanceState {
  int level = 1;
  GWeight g;
  DiagonalInnerProduct H;
  int iterations = 0;
  std::vector<double> residuals;
  std::vector<double> ding;  // D^{(k)}_g(H) before each step
};

/// Removes the affine part of log(H / H0) in alpha.
DiagonalInnerProduct normalize(const DiagonalInnerProduct& H, const DiagonalInnerProduct& H0);

struct BalanceOptions {
  double tol = 1e-8;
  int max_iter = 500;
  double damping = 1.0;
  /// Grid level for the iteration; negative = the coarse grid of the pair
  /// accepted by a refinement check of the first step.
  int grid_level = -1;
};

/// One damped step: H_hat = Hilb_{k, g}(FS_k(H)) normalized,
/// log H <- (1 - theta) log H + theta log H_hat, normalized again.
/// Appends r = max |log(H_hat / H)| and D^{(k)}_g(H).
void step(BalanceState& state, const ReferenceProducts& R, double theta, int grid_level);

struct BalanceResult {
  BalanceState state;
  TorusMetric potential;   // FS_k(H_k)
  bool converged = false;
  double final_residual = 0.0;    // residual re-evaluated with a refinement check
  double damping_used = 1.0;
  int grid_level = 0;
  bool ding_nonincreasing = true;
  Eigen::VectorXd V_k;
};

/// Fixed point of Hilb_{k, g_{V_k}} o FS_k starting from H0 (or `start`).
/// On residual increase the damping is halved once; when the iteration
/// does not converge within max_iter it is restarted once with half the
/// damping. Never throws NoConvergence: check `converged`.
BalanceResult balanced_metric(const ReferenceProducts& R, int k, const BalanceOptions& opts = {},
                              const std::optional<DiagonalInnerProduct>& start = std::nullopt);

struct SolitonRow {
  int k = 0;
  Eigen::VectorXd V_k;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  double ding_VKS = 0.0;          // D_{g_{V_KS}}(phi_k)
  double cauchy = 0.0;            // sup |phi_k - phi_{k_prev}| modulo constants (0 on the first row)
  TorusMetric potential;
};

struct SolitonStudy {
  Eigen::VectorXd V_KS;
  std::vector<SolitonRow> rows;
  bool ding_nonincreasing = true;
  bool cauchy_decreasing = true;
  int smallest_converged_level = -1;
};

SolitonStudy soliton_convergence_study(const ReferenceProducts& R, const std::vector<int>& k_list,
                                       const Eigen::MatrixXd& grid_points, const BalanceOptions& opts = {});

/// Columns: iteration, residual, ding.
void write_balance_history_csv(std::ostream& os, const BalanceState& state);
/// Columns: k, V_k_1..n, iterations, converged, residual, ding_VKS, cauchy.
void write_soliton_study_csv(std::ostream& os, const SolitonStudy& study);

}  // namespace toricq
