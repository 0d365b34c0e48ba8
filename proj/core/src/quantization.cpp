#include "toricq/quantization.hpp"

#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <ostream>

#include "toricq/format.hpp"

namespace toricq {

DiagonalInnerProduct DiagonalInnerProduct::scaled(double c) const {
  DiagonalInnerProduct out = *this;
  out.log_entries.array() += std::log(c);
  return out;
}

DiagonalInnerProduct DiagonalInnerProduct::acted(const Eigen::VectorXd& xi, double t) const {
  DiagonalInnerProduct out = *this;
  out.log_entries -= t * (points.cast<double>().transpose() * xi);
  return out;
}

DiagonalInnerProduct DiagonalInnerProduct::from_entries(const WeightSet& W, const Eigen::VectorXd& entries) {
  if (entries.size() != W.size() || !(entries.array() > 0.0).all() || !entries.allFinite()) {
    throw Error(ErrorCode::MalformedInput, "inner product needs one positive finite entry per weight");
  }
  return DiagonalInnerProduct{W.level, W.points, entries.array().log()};
}

namespace {

// log of the constant factor pulled out of the integrand: constants of phi
// (and psi) are handled exactly rather than through the quadrature.
double constant_shift(const TorusMetric& phi, const HilbMeasure& measure, int k) {
  double c = -k * phi.constant();
  if (measure.kind == HilbMeasure::Kind::Own) c -= phi.constant();
  if (measure.kind == HilbMeasure::Kind::Fixed) c -= measure.psi.constant();
  return c;
}

Eigen::VectorXd log_hilb_on(const Setting& S, const TorusMetric& bare, const HilbMeasure& measure, const WeightSet& W,
                            const Eigen::VectorXd& log_g, const QuadGrid& grid) {
  const int k = W.level;
  const MetricField f = evaluate_on_grid(bare, grid, 0);
  LongVector vals(grid.size(), 0.0L);
  if (measure.kind == HilbMeasure::Kind::Reference) {
    const Eigen::VectorXd& mu = S.mu0_density(grid);
    for (int q = 0; q < grid.size(); ++q) {
      if (grid.w[q] == 0.0) continue;
      vals[q] = static_cast<long double>(grid.w[q] * mu[q]) * std::exp(-static_cast<long double>(k) * f.value[q]);
    }
  } else {
    Eigen::VectorXd u = f.value;
    if (measure.kind == HilbMeasure::Kind::Fixed) u = evaluate_on_grid(measure.psi.without_constant(), grid, 0).value;
    for (int q = 0; q < grid.size(); ++q) {
      if (grid.w[q] == 0.0) continue;
      vals[q] = static_cast<long double>(grid.w[q]) *
                std::exp(-static_cast<long double>(k) * f.value[q] - static_cast<long double>(u[q]));
    }
  }
  const ExpBasis basis(grid, W.points);
  const LongVector M = basis.analyze(vals);
  Eigen::VectorXd out(W.size());
  for (int a = 0; a < W.size(); ++a) {
    const long double m = M[a];
    if (!(m > 0.0L) || !std::isfinite(static_cast<double>(std::log(m)))) {
      throw Error(ErrorCode::DivergentIntegral, "Hilb entry is not a finite positive number");
    }
    out[a] = static_cast<double>(std::log(m)) - log_g[a];
  }
  return out;
}

Eigen::VectorXd log_g_on(const GWeight& g, const WeightSet& W) { return g.on_weights(W).array().log(); }

}  // namespace

DiagonalInnerProduct hilb(const Setting& S, const TorusMetric& phi, const HilbMeasure& measure, const GWeight& g, int k,
                          double* error, int* level) {
  const WeightSet& W = S.weights(k);
  const Eigen::VectorXd log_g = log_g_on(g, W);
  const TorusMetric bare = phi.without_constant();
  const Refined r = S.quad().refine([&](const QuadGrid& grid) { return log_hilb_on(S, bare, measure, W, log_g, grid); }, 1.0);
  if (error) *error = r.error;
  if (level) *level = r.level;
  return DiagonalInnerProduct{k, W.points, r.values.array() + constant_shift(phi, measure, k)};
}

DiagonalInnerProduct hilb_on_grid(const Setting& S, const TorusMetric& phi, const HilbMeasure& measure, const GWeight& g,
                                  int k, int grid_level) {
  const WeightSet& W = S.weights(k);
  const Eigen::VectorXd logH =
      log_hilb_on(S, phi.without_constant(), measure, W, log_g_on(g, W), S.quad().grid(grid_level));
  return DiagonalInnerProduct{k, W.points, logH.array() + constant_shift(phi, measure, k)};
}

HilbOwn hilb_own_on_grid(const Setting& S, const TorusMetric& phi, const GWeight& g, int k, int grid_level) {
  const WeightSet& W = S.weights(k);
  const QuadGrid& grid = S.quad().grid(grid_level);
  const TorusMetric bare = phi.without_constant();
  const MetricField f = evaluate_on_grid(bare, grid, 0);
  LongVector vals(grid.size(), 0.0L);
  long double mass = 0.0L;
  for (int q = 0; q < grid.size(); ++q) {
    if (grid.w[q] == 0.0) continue;
    const long double e = std::exp(-static_cast<long double>(f.value[q]));
    mass += grid.w[q] * e;
    vals[q] = static_cast<long double>(grid.w[q]) * std::exp(-static_cast<long double>(k + 1) * f.value[q]);
  }
  const ExpBasis basis(grid, W.points);
  const LongVector M = basis.analyze(vals);
  const Eigen::VectorXd log_g = log_g_on(g, W);
  HilbOwn out;
  out.H = DiagonalInnerProduct{k, W.points, Eigen::VectorXd(W.size())};
  for (int a = 0; a < W.size(); ++a) {
    const long double m = M[a];
    if (!(m > 0.0L)) throw Error(ErrorCode::DivergentIntegral, "Hilb entry is not a finite positive number");
    out.H.log_entries[a] = static_cast<double>(std::log(m)) - log_g[a] - (k + 1) * phi.constant();
  }
  out.L = -static_cast<double>(std::log(mass)) + phi.constant();
  return out;
}

TorusMetric fs(const DiagonalInnerProduct& H) {
  const double logN = std::log(static_cast<double>(H.size()));
  return TorusMetric(H.level, H.points, -H.log_entries.array() - logN, 0.0);
}

double measure_density(const Setting& S, const TorusMetric& phi, const HilbMeasure& measure,
                       const Eigen::Ref<const Eigen::VectorXd>& t) {
  switch (measure.kind) {
    case HilbMeasure::Kind::Reference:
      return S.phi0().hessian(t).determinant() / S.polytope().volume();
    case HilbMeasure::Kind::Own:
      return std::exp(-phi.value(t));
    case HilbMeasure::Kind::Fixed:
      return std::exp(-measure.psi.value(t));
  }
  return 0.0;
}

BergmanFunction::BergmanFunction(const Setting& S, TorusMetric phi, HilbMeasure measure, const GWeight& g, int k)
    : S_(&S), phi_(std::move(phi)), measure_(std::move(measure)), g_(g), k_(k) {
  H_ = hilb(S, phi_, measure_, GWeight::unit(S.dim(), k), k);
  log_g_ = log_g_on(g_, S.weights(k));
}

double BergmanFunction::log_value(const Eigen::Ref<const Eigen::VectorXd>& t) const {
  const Eigen::VectorXd e = H_.points.cast<double>().transpose() * t + log_g_ - H_.log_entries;
  const double top = e.maxCoeff();
  return top + std::log((e.array() - top).exp().sum()) - k_ * phi_.value(t);
}

double BergmanFunction::value(const Eigen::Ref<const Eigen::VectorXd>& t) const { return std::exp(log_value(t)); }

Estimate BergmanFunction::mass() const {
  const double N = H_.size();
  const Eigen::VectorXd logc = log_g_ - H_.log_entries;
  const double top = logc.maxCoeff();
  const Refined r = S_->quad().refine([&](const QuadGrid& grid) {
    const ExpBasis basis(grid, H_.points);
    LongVector c(H_.size(), 0.0L);
    for (int a = 0; a < H_.size(); ++a) c[a] = std::exp(static_cast<long double>(logc[a] - top));
    const LongVector sum = basis.synthesize(c);
    const MetricField f = evaluate_on_grid(phi_, grid, 0);
    Eigen::VectorXd density(grid.size());
    if (measure_.kind == HilbMeasure::Kind::Reference) {
      density = S_->mu0_density(grid);
    } else {
      const Eigen::VectorXd u = measure_.kind == HilbMeasure::Kind::Own ? f.value : evaluate_on_grid(measure_.psi, grid, 0).value;
      density = (-u.array()).exp();
    }
    long double s = 0.0L;
    for (int q = 0; q < grid.size(); ++q) {
      if (grid.w[q] == 0.0) continue;
      s += static_cast<long double>(grid.w[q] * density[q]) * sum[q] *
           std::exp(static_cast<long double>(top) - static_cast<long double>(k_) * f.value[q]);
    }
    return Eigen::VectorXd::Constant(1, static_cast<double>(s) / N);
  }, 1.0);
  return Estimate{r.values[0], r.error};
}

double BergmanFunction::sup_ratio_deviation(const Eigen::MatrixXd& points) const {
  const double N = H_.size();
  const double vol = S_->polytope().volume();
  double worst = 0.0;
  for (int q = 0; q < points.cols(); ++q) {
    const Eigen::VectorXd t = points.col(q);
    const double ma_g = g_.continuous(phi_.gradient(t)) * phi_.hessian(t).determinant() / vol;
    const double lhs = std::exp(log_value(t) - std::log(N)) * measure_density(*S_, phi_, measure_, t);
    worst = std::max(worst, std::abs(lhs / ma_g - 1.0));
  }
  return worst;
}

double bergman_identity_residual(const Setting& S, const TorusMetric& phi, const HilbMeasure& measure, const GWeight& g, int k,
                            const Eigen::MatrixXd& points) {
  const TorusMetric lhs = fs(hilb(S, phi, measure, g, k));
  const BergmanFunction rho(S, phi, measure, g, k);
  const double logN = std::log(static_cast<double>(S.weights(k).size()));
  double worst = 0.0;
  for (int q = 0; q < points.cols(); ++q) {
    const Eigen::VectorXd t = points.col(q);
    const double l = lhs.value(t) - phi.value(t);
    const double r = (rho.log_value(t) - logN) / k;
    worst = std::max(worst, std::abs(l - r));
  }
  return worst;
}

double sup_difference(const TorusMetric& a, const TorusMetric& b, const Eigen::MatrixXd& points, bool modulo_constant) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double worst = 0.0;
  for (int q = 0; q < points.cols(); ++q) {
    const double d = a.value(points.col(q)) - b.value(points.col(q));
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    worst = std::max(worst, std::abs(d));
  }
  return modulo_constant ? 0.5 * (hi - lo) : worst;
}

void write_inner_product_csv(std::ostream& os, const DiagonalInnerProduct& H) {
  const int n = static_cast<int>(H.points.rows());
  for (int i = 0; i < n; ++i) os << "x" << (i + 1) << ",";
  os << "H,logH\n";
  for (int a = 0; a < H.size(); ++a) {
    for (int i = 0; i < n; ++i) os << H.points(i, a) << ",";
    os << fmt_double(std::exp(H.log_entries[a])) << "," << fmt_double(H.log_entries[a]) << "\n";
  }
}

}  // namespace toricq
