#include "toricq/balance.hpp"

#include <algorithm>

#include <Eigen/QR>

#include <cmath>
#include <ostream>

#include "toricq/format.hpp"

namespace toricq {

DiagonalInnerProduct normalize(const DiagonalInnerProduct& H, const DiagonalInnerProduct& H0) {
  if (H.level != H0.level || H.size() != H0.size()) throw Error(ErrorCode::LevelMismatch, "normalize: level mismatch");
  const int n = static_cast<int>(H.points.rows());
  Eigen::MatrixXd A(H.size(), n + 1);
  A.col(0).setOnes();
  A.rightCols(n) = H.points.cast<double>().transpose();
  const Eigen::VectorXd ell = H.log_entries - H0.log_entries;
  const Eigen::VectorXd fit = A.householderQr().solve(ell);
  DiagonalInnerProduct out = H;
  out.log_entries = H0.log_entries + (ell - A * fit);
  return out;
}

namespace {

double max_abs_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

void step(BalanceState& state, const ReferenceProducts& R, double theta, int grid_level) {
  const DiagonalInnerProduct& H0 = R.at(state.level);
  const HilbOwn next = hilb_own_on_grid(R.setting(), fs(state.H), state.g, state.level, grid_level);
  state.ding.push_back(-energy_g_k(state.H, H0, state.g) + next.L);
  const DiagonalInnerProduct hat = normalize(next.H, H0);
  state.residuals.push_back(max_abs_diff(hat.log_entries, state.H.log_entries));
  DiagonalInnerProduct updated = state.H;
  updated.log_entries = (1.0 - theta) * state.H.log_entries + theta * hat.log_entries;
  state.H = normalize(updated, H0);
  ++state.iterations;
}

namespace {

bool run(BalanceState& state, const ReferenceProducts& R, double& theta, const BalanceOptions& opts, int level) {
  bool halved = false;
  while (state.iterations < opts.max_iter) {
    step(state, R, theta, level);
    const auto& r = state.residuals;
    if (r.back() <= opts.tol) return true;
    if (!halved && r.size() >= 2 && r.back() > r[r.size() - 2]) {
      theta *= 0.5;
      halved = true;
    }
  }
  return false;
}

}  // namespace

BalanceResult balanced_metric(const ReferenceProducts& R, int k, const BalanceOptions& opts,
                              const std::optional<DiagonalInnerProduct>& start) {
  const Setting& S = R.setting();
  const WeightSet& W = S.weights(k);
  BalanceResult res;
  res.V_k = minimize_Fk(W).V.xi;
  const GWeight g = GWeight::make(res.V_k, W, S.dh());
  const DiagonalInnerProduct& H0 = R.at(k);
  const DiagonalInnerProduct H_start = normalize(start ? *start : H0, H0);

  int level = opts.grid_level;
  if (level < 0) {
    // The accepted refinement pair certifies its coarse grid; iterate there.
    hilb(S, fs(H_start), HilbMeasure::own(), g, k, nullptr, &level);
    level = std::max(0, level - 1);
  }
  res.grid_level = level;

  double theta = opts.damping;
  BalanceState state{k, g, H_start, 0, {}, {}};
  bool ok = run(state, R, theta, opts, level);
  if (!ok) {
    theta = 0.5 * opts.damping;
    BalanceState retry{k, g, H_start, 0, {}, {}};
    ok = run(retry, R, theta, opts, level);
    if (ok || retry.residuals.back() < state.residuals.back()) state = std::move(retry);
  }
  res.damping_used = theta;
  res.converged = ok;
  res.state = std::move(state);
  res.potential = fs(res.state.H);

  // Final residual with a refinement check on the returned point.
  const DiagonalInnerProduct hat = normalize(hilb(S, res.potential, HilbMeasure::own(), g, k), H0);
  res.final_residual = max_abs_diff(hat.log_entries, res.state.H.log_entries);
  res.converged = res.converged && res.final_residual <= opts.tol;

  const auto& d = res.state.ding;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i] > d[i - 1] + 1e-12 * std::max(1.0, std::abs(d[i - 1]))) res.ding_nonincreasing = false;
  }
  return res;
}

SolitonStudy soliton_convergence_study(const ReferenceProducts& R, const std::vector<int>& k_list,
                                       const Eigen::MatrixXd& grid_points, const BalanceOptions& opts) {
  const Setting& S = R.setting();
  SolitonStudy study;
  study.V_KS = minimize_F(S.dh()).V.xi;
  const GWeight g_ks = GWeight::make(study.V_KS, S.weights(1), S.dh());
  for (int k : k_list) {
    const BalanceResult b = balanced_metric(R, k, opts);
    SolitonRow row;
    row.k = k;
    row.V_k = b.V_k;
    row.iterations = b.state.iterations;
    row.converged = b.converged;
    row.residual = b.final_residual;
    row.potential = b.potential;
    row.ding_VKS = D_g(S, b.potential, g_ks).value;
    if (!study.rows.empty()) {
      const SolitonRow& prev = study.rows.back();
      row.cauchy = sup_difference(row.potential, prev.potential, grid_points, true);
      if (row.ding_VKS > prev.ding_VKS + 1e-12) study.ding_nonincreasing = false;
      if (study.rows.size() >= 2 && !(row.cauchy < prev.cauchy)) study.cauchy_decreasing = false;
    }
    if (b.converged && study.smallest_converged_level < 0) study.smallest_converged_level = k;
    study.rows.push_back(std::move(row));
  }
  return study;
}

void write_balance_history_csv(std::ostream& os, const BalanceState& state) {
  os << "iteration,residual,ding\n";
  for (std::size_t i = 0; i < state.residuals.size(); ++i) {
    os << (i + 1) << "," << fmt_double(state.residuals[i]) << "," << fmt_double(state.ding[i]) << "\n";
  }
}

void write_soliton_study_csv(std::ostream& os, const SolitonStudy& study) {
  const int n = static_cast<int>(study.V_KS.size());
  os << "k";
  for (int j = 0; j < n; ++j) os << ",V_k_" << (j + 1);
  os << ",iterations,converged,residual,ding_VKS,cauchy\n";
  for (const auto& r : study.rows) {
    os << r.k;
    for (int j = 0; j < n; ++j) os << "," << fmt_double(r.V_k[j]);
    os << "," << r.iterations << "," << (r.converged ? 1 : 0) << "," << fmt_double(r.residual) << ","
       << fmt_double(r.ding_VKS) << "," << fmt_double(r.cauchy) << "\n";
  }
}

}  // namespace toricq
