#include "toricq/vectorfield.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "toricq/format.hpp"

namespace toricq {

namespace {

// sum_i w_i exp(<xi, y_i>) with gradient and Hessian, shifted by the max exponent.
ConvexEval exp_moments(const Eigen::MatrixXd& Y, const Eigen::VectorXd& w, const Eigen::VectorXd& xi) {
  const int n = static_cast<int>(Y.rows());
  const Eigen::VectorXd expo = Y.transpose() * xi;
  const double shift = expo.maxCoeff();
  double s = 0.0;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < Y.cols(); ++i) {
    const double e = w[i] * std::exp(expo[i] - shift);
    s += e;
    g.noalias() += e * Y.col(i);
    h.noalias() += e * Y.col(i) * Y.col(i).transpose();
  }
  ConvexEval out;
  out.log_value = std::log(s) + shift;
  const double scale = std::exp(shift);
  out.value = s * scale;
  out.gradient = g * scale;
  out.hessian = h * scale;
  return out;
}

MinimizerResult newton(const Eigen::MatrixXd& Y, const Eigen::VectorXd& w, const NewtonOptions& opts) {
  const int n = static_cast<int>(Y.rows());
  const double total = w.sum();
  // Work with the normalized objective sum_i w_i e^{<xi,y_i>} / total.
  const Eigen::VectorXd wn = w / total;
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(n);
  ConvexEval cur = exp_moments(Y, wn, xi);
  for (int it = 0; it <= opts.max_iter; ++it) {
    const double gnorm = cur.gradient.norm();
    if (gnorm <= opts.tol) {
      return MinimizerResult{SolitonVector{xi}, cur.value, gnorm, it};
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cur.hessian);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff())) {
      throw Error(ErrorCode::SingularHessian, "Hessian is not positive definite; weights do not span R^n");
    }
    const Eigen::VectorXd step = -ldlt.solve(cur.gradient);
    const double slope = cur.gradient.dot(step);
    double t = 1.0;
    ConvexEval next;
    Eigen::VectorXd trial;
    for (int bt = 0; bt < 60; ++bt) {
      trial = xi + t * step;
      next = exp_moments(Y, wn, trial);
      if (next.value <= cur.value + opts.armijo_c * t * slope) break;
      t *= opts.backtrack;
    }
    if (!(next.value <= cur.value + opts.armijo_c * t * slope)) {
      // Line search stalled at round-off: accept when the gradient is already tiny.
      if (gnorm <= 1e3 * opts.tol) return MinimizerResult{SolitonVector{xi}, cur.value, gnorm, it};
      throw Error(ErrorCode::NoConvergence, "line search failed");
    }
    xi = trial;
    cur = next;
  }
  throw Error(ErrorCode::NoConvergence, "Newton did not converge in " + std::to_string(opts.max_iter) + " iterations");
}

}  // namespace

double GWeight::quantized(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return std::exp(xi.dot(x)) / normalizer_quantized;
}

double GWeight::continuous(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return std::exp(xi.dot(x)) / normalizer_continuous;
}

Eigen::VectorXd GWeight::on_weights(const WeightSet& W) const {
  if (W.level != level) throw Error(ErrorCode::LevelMismatch, "g normalized at level " + std::to_string(level));
  const Eigen::MatrixXd Y = W.scaled();
  Eigen::VectorXd out(W.size());
  for (int i = 0; i < W.size(); ++i) out[i] = quantized(Y.col(i));
  return out;
}

GWeight GWeight::unit(int dim, int level) {
  GWeight g;
  g.xi = Eigen::VectorXd::Zero(dim);
  g.level = level;
  return g;
}

GWeight GWeight::make(const Eigen::VectorXd& xi, const WeightSet& W, const DHMeasure& dh) {
  GWeight g;
  g.xi = xi;
  g.level = W.level;
  const Eigen::MatrixXd Y = W.scaled();
  double s = 0.0;
  for (int i = 0; i < W.size(); ++i) s += std::exp(xi.dot(Y.col(i)));
  g.normalizer_quantized = s / W.size();
  g.normalizer_continuous = dh.integrate([&](const auto& x) { return std::exp(xi.dot(x)); });
  return g;
}

ConvexEval evaluate_Fk(const WeightSet& W, const Eigen::VectorXd& xi) {
  const double k = W.level;
  ConvexEval e = exp_moments(W.scaled(), Eigen::VectorXd::Ones(W.size()), xi);
  e.log_value += std::log(k);
  e.value *= k;
  e.gradient *= k;
  e.hessian *= k;
  return e;
}

double futaki_quantized(const WeightSet& W, const Eigen::VectorXd& xi_V, const Eigen::VectorXd& xi_W) {
  const double k = W.level;
  double s = 0.0;
  for (int i = 0; i < W.size(); ++i) {
    const Eigen::VectorXd lam = W.points.col(i).cast<double>();
    s += xi_W.dot(lam) * std::exp(xi_V.dot(lam) / k);
  }
  return -s;
}

double futaki_residual(const WeightSet& W, const Eigen::VectorXd& xi_V) {
  double r = 0.0;
  for (int j = 0; j < W.dim(); ++j) {
    r = std::max(r, std::abs(futaki_quantized(W, xi_V, Eigen::VectorXd::Unit(W.dim(), j))));
  }
  return r;
}

MinimizerResult minimize_Fk(const WeightSet& W, const NewtonOptions& opts) {
  MinimizerResult r = newton(W.scaled(), Eigen::VectorXd::Ones(W.size()), opts);
  const double kN = static_cast<double>(W.level) * W.size();
  r.value *= kN;
  r.gradient_norm *= kN;
  return r;
}

DHMeasure continuous_rule(const ReflexivePolytope& P) { return DHMeasure(P, 24); }

ConvexEval evaluate_F(const DHMeasure& dh, const Eigen::VectorXd& xi) {
  return exp_moments(dh.points(), dh.weights(), xi);
}

double futaki_continuous(const DHMeasure& dh, const Eigen::VectorXd& xi_V, const Eigen::VectorXd& xi_W) {
  return -xi_W.dot(evaluate_F(dh, xi_V).gradient);
}

MinimizerResult minimize_F(const DHMeasure& dh, const NewtonOptions& opts) {
  return newton(dh.points(), dh.weights(), opts);
}

VkConvergence vk_convergence(const ReflexivePolytope& P, const std::vector<int>& k_list, const NewtonOptions& opts) {
  VkConvergence out;
  const DHMeasure dh = continuous_rule(P);
  const MinimizerResult ks = minimize_F(dh, opts);
  out.V_KS = ks.V.xi;
  out.barycenter_residual = ks.gradient_norm;
  const double F_ks = evaluate_F(dh, out.V_KS).value;
  for (int k : k_list) {
    const WeightSet W = lattice_points(P, k);
    const MinimizerResult vk = minimize_Fk(W, opts);
    VkRow row;
    row.k = k;
    row.N_k = W.size();
    row.V_k = vk.V.xi;
    row.F_k_min = vk.value;
    row.distance = (vk.V.xi - out.V_KS).norm();
    row.futaki_residual = futaki_residual(W, vk.V.xi);
    row.quantization_error = std::abs(evaluate_Fk(W, out.V_KS).value / (static_cast<double>(k) * W.size()) - F_ks);
    out.rows.push_back(std::move(row));
  }
  // Eventually decreasing: the tail after the last non-decrease is nonempty
  // and the final step decreases (distances that are all ~0 count as decreasing).
  const auto& rows = out.rows;
  if (rows.size() >= 2) {
    const double zero = 1e-12;
    const auto& a = rows[rows.size() - 2];
    const auto& b = rows.back();
    out.eventually_decreasing = (b.distance < a.distance) || (a.distance <= zero && b.distance <= zero);
  }
  return out;
}

void write_vk_csv(std::ostream& os, const VkConvergence& t) {
  const int n = static_cast<int>(t.V_KS.size());
  os << "k,N_k";
  for (int j = 0; j < n; ++j) os << ",V_k_" << (j + 1);
  os << ",F_k_min,distance,futaki_residual,quantization_error\n";
  for (const auto& r : t.rows) {
    os << r.k << "," << r.N_k;
    for (int j = 0; j < n; ++j) os << "," << fmt_double(r.V_k[j]);
    os << "," << fmt_double(r.F_k_min) << "," << fmt_double(r.distance) << "," << fmt_double(r.futaki_residual) << ","
       << fmt_double(r.quantization_error) << "\n";
  }
}

FutakiExpansion futaki_expansion_fit(const ReflexivePolytope& P, const Eigen::VectorXd& xi_V, const Eigen::VectorXd& xi_W,
                                     const std::vector<int>& k_list) {
  const int n = P.dim();
  const int ncoef = n + 2;
  std::vector<int> ks = k_list;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (static_cast<int>(ks.size()) < ncoef) {
    throw Error(ErrorCode::IllConditionedFit, "need at least n+2 distinct levels, got " + std::to_string(ks.size()));
  }
  FutakiExpansion fit;
  fit.levels = k_list;
  Eigen::MatrixXd A(static_cast<int>(k_list.size()), ncoef);
  Eigen::VectorXd b(static_cast<int>(k_list.size()));
  // Columns rescaled by kmax^p to keep the Vandermonde system balanced.
  const double kmax = ks.back();
  for (std::size_t r = 0; r < k_list.size(); ++r) {
    const double k = k_list[r];
    for (int i = 0; i < ncoef; ++i) A(static_cast<int>(r), i) = std::pow(k / kmax, ncoef - 1 - i);
    const double v = futaki_quantized(lattice_points(P, k_list[r]), xi_V, xi_W);
    b[static_cast<int>(r)] = v;
    fit.values.push_back(v);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(A).singularValues();
  if (qr.rank() < ncoef || sv[sv.size() - 1] < 1e-12 * sv[0]) {
    throw Error(ErrorCode::IllConditionedFit, "Vandermonde system is numerically singular");
  }
  const Eigen::VectorXd c = qr.solve(b);
  fit.coefficients.resize(ncoef);
  for (int i = 0; i < ncoef; ++i) fit.coefficients[i] = c[i] / std::pow(kmax, ncoef - 1 - i);
  fit.residual = (A * c - b).cwiseAbs().maxCoeff();
  return fit;
}

}  // namespace toricq
